"""ecf_jumps package.

Split-point test for jumps in discretely observed diffusions, with the
simulation and Monte Carlo tooling around it. Usable as a CLI tool and as
an importable library.
"""

__version__ = "0.1.0"

from ecf_jumps.ecf import (
    EcfCurve,
    IncrementSample,
    SplitPointEstimate,
    compute_ecf,
    make_increments,
    split_point,
)
from ecf_jumps.inference import Decision, JumpTestResult, jump_test, quantile_slope
from ecf_jumps.simulate import JumpModel, ModelSpec, SizeLaw, simulate_path
from ecf_jumps.st_baseline import st_test

__all__ = [
    "Decision",
    "EcfCurve",
    "IncrementSample",
    "JumpModel",
    "JumpTestResult",
    "ModelSpec",
    "SizeLaw",
    "SplitPointEstimate",
    "__version__",
    "compute_ecf",
    "jump_test",
    "make_increments",
    "quantile_slope",
    "simulate_path",
    "split_point",
    "st_test",
]
