"""Exception hierarchy for ecf_jumps.

Each exception carries a short machine-readable ``kind`` which the CLI puts in
its error JSON, and an ``exit_code`` family.
"""

from __future__ import annotations


class EcfJumpsError(Exception):
    kind = "error"
    exit_code = 1


# -- data ------------------------------------------------------------------


class DataError(EcfJumpsError, ValueError):
    kind = "data-error"
    exit_code = 2


class TooFewObservationsError(DataError):
    kind = "too-few-observations"


class NonFiniteInputError(DataError):
    kind = "non-finite-input"


class NonPositivePriceError(DataError):
    kind = "non-positive-price"


class CsvFormatError(DataError):
    kind = "csv-format"


# -- numeric degeneracy ----------------------------------------------------


class NumericDegeneracyError(EcfJumpsError, ArithmeticError):
    kind = "numeric-degeneracy"
    exit_code = 3


class DegenerateSplitError(NumericDegeneracyError):
    kind = "degenerate-split"


class SplitIndexError(NumericDegeneracyError, IndexError):
    kind = "index-out-of-range"


class ZeroDeltaError(NumericDegeneracyError):
    kind = "zero-delta"


class NegativeVarianceError(NumericDegeneracyError):
    kind = "negative-variance"


class DegenerateZeroCurveError(NumericDegeneracyError):
    kind = "degenerate-zero-curve"


class RootBracketError(NumericDegeneracyError):
    kind = "no-sign-change"


class QuadratureError(NumericDegeneracyError):
    kind = "quadrature-non-convergence"


# -- configuration ---------------------------------------------------------


class ConfigError(EcfJumpsError, ValueError):
    kind = "usage-error"
    exit_code = 1


class UnsupportedModelError(ConfigError):
    kind = "unsupported-model"


class SmallSampleWarning(RuntimeWarning):
    """The sample is too small for the asymptotic approximation to be trusted."""
