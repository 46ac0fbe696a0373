"""Order statistics, the empirical cross-over function and its split point."""

from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike

from ecf_jumps.errors import (
    DegenerateSplitError,
    NonFiniteInputError,
    TooFewObservationsError,
)
from ecf_jumps.summation import prefix_sums

logger = logging.getLogger(__name__)


class Boundary(StrEnum):
    INTERIOR = "interior"
    ALL_NEGATIVE = "all_negative"
    ALL_POSITIVE = "all_positive"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class IncrementSample:
    """Sorted increments W_(1) <= ... <= W_(n) with prefix sums.

    ``prefix_sum[k]`` is the sum of the ``k`` smallest increments, so the
    arrays have length ``n + 1`` and ``prefix_sum[0] == 0``.
    """

    values: np.ndarray
    prefix_sum: np.ndarray
    prefix_sum_sq: np.ndarray

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @classmethod
    def from_increments(cls, increments: ArrayLike) -> IncrementSample:
        """Sort ``increments`` (any order) and precompute prefix sums."""
        w = np.asarray(increments, dtype=np.float64).ravel()
        if w.shape[0] < 2:
            raise TooFewObservationsError(
                f"Need at least 2 increments, got {w.shape[0]}"
            )
        if not np.all(np.isfinite(w)):
            raise NonFiniteInputError("Increments contain NaN or infinite values")
        values = np.sort(w, kind="stable")
        return cls(
            values=_frozen(values),
            prefix_sum=_frozen(prefix_sums(values)),
            prefix_sum_sq=_frozen(prefix_sums(values * values)),
        )


def make_increments(observations: ArrayLike) -> IncrementSample:
    """Difference a regularly sampled path and sort the increments."""
    x = np.asarray(observations, dtype=np.float64).ravel()
    if x.shape[0] < 3:
        raise TooFewObservationsError(
            f"Need at least 3 observations, got {x.shape[0]}"
        )
    if not np.all(np.isfinite(x)):
        raise NonFiniteInputError("Observations contain NaN or infinite values")
    return IncrementSample.from_increments(np.diff(x))


@dataclass(frozen=True, eq=False)
class EcfCurve:
    """G_n on the grid p = (k-1)/n, k = 1..n-1, plus the value on [(n-1)/n, 1)."""

    grid: np.ndarray
    terminal: float
    n: int

    @property
    def values(self) -> np.ndarray:
        """All n values G_n(0/n), ..., G_n((n-1)/n), terminal last."""
        return np.append(self.grid, self.terminal)

    def points(self) -> Iterator[tuple[float, float]]:
        for k, g in enumerate(self.grid):
            yield k / self.n, float(g)
        yield (self.n - 1) / self.n, float(self.terminal)


def compute_ecf(sample: IncrementSample) -> EcfCurve:
    """Evaluate the empirical cross-over function from prefix sums.

    G_n((k-1)/n) = mean(W_(1..k)) - W_(k) + mean(W_(k+1..n)) - W_(k+1).
    The lower half is never positive and the upper half never negative; each
    half is clipped to its sign and is exactly zero over a block of ties.
    """
    n = sample.n
    v = sample.values
    ps = sample.prefix_sum
    k = np.arange(1, n)

    lower = ps[k] / k - v[k - 1]
    lower = np.minimum(lower, 0.0)
    lower[v[k - 1] == v[0]] = 0.0

    upper = (ps[n] - ps[k]) / (n - k) - v[k]
    upper = np.maximum(upper, 0.0)
    upper[v[k] == v[n - 1]] = 0.0

    if v[0] == v[n - 1]:
        terminal = 0.0
    else:
        terminal = min(float(ps[n] / n - v[n - 1]), 0.0)

    return EcfCurve(grid=_frozen(lower + upper), terminal=terminal, n=n)


@dataclass(frozen=True)
class SplitPointEstimate:
    p_n: float
    crossing_index: int | None
    boundary: Boundary
    n: int
    zero_curve: bool = False

    @property
    def is_interior(self) -> bool:
        return self.boundary is Boundary.INTERIOR

    @property
    def pivot_index(self) -> int | None:
        """ceil(n p_n), the 1-based rank of the split pivot; None at a boundary."""
        return self.crossing_index if self.is_interior else None


def split_point(ecf: EcfCurve) -> SplitPointEstimate:
    """Empirical split point: the last index k at which G_n changes sign, over n.

    A product of consecutive values equal to zero counts as a crossing, so an
    all-zero curve lands on k = n - 1 and is flagged ``zero_curve``.
    """
    grid = np.asarray(ecf.grid)
    if np.all(grid < 0):
        return SplitPointEstimate(0.0, None, Boundary.ALL_NEGATIVE, ecf.n)
    if np.all(grid > 0):
        return SplitPointEstimate(1.0, None, Boundary.ALL_POSITIVE, ecf.n)

    signs = np.sign(ecf.values)
    crossings = np.flatnonzero(signs[:-1] * signs[1:] <= 0)
    k = int(crossings[-1]) + 1
    zero_curve = bool(np.all(signs == 0))
    if zero_curve:
        logger.debug("ECF is identically zero (n=%d)", ecf.n)
    return SplitPointEstimate(
        p_n=k / ecf.n,
        crossing_index=k,
        boundary=Boundary.INTERIOR,
        n=ecf.n,
        zero_curve=zero_curve,
    )


def _interior_index(sp: SplitPointEstimate) -> int:
    if not sp.is_interior or sp.crossing_index is None:
        raise DegenerateSplitError(
            f"Split point p_n={sp.p_n} leaves one side empty ({sp.boundary})"
        )
    return sp.crossing_index


def truncation_level(sample: IncrementSample, sp: SplitPointEstimate) -> float:
    """W_(ceil(n p_n)): the increment level that separates the two clusters."""
    return float(sample.values[_interior_index(sp) - 1])


def cluster_sizes(sp: SplitPointEstimate) -> tuple[int, int]:
    k = _interior_index(sp)
    return k, sp.n - k
