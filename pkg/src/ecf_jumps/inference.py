"""Plug-in variance estimation and the standardized split-point test for jumps."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from enum import StrEnum
from typing import Any, Literal

import numpy as np
from scipy.stats import norm

from ecf_jumps.ecf import (
    IncrementSample,
    SplitPointEstimate,
    compute_ecf,
    split_point,
)
from ecf_jumps.errors import (
    ConfigError,
    DegenerateSplitError,
    DegenerateZeroCurveError,
    NegativeVarianceError,
    SmallSampleWarning,
    SplitIndexError,
    ZeroDeltaError,
)

logger = logging.getLogger(__name__)

SlopeWindow = int | Literal["auto"]

# The normal approximation is poor below this many increments.
MIN_RECOMMENDED_N = 30

# Spacings on each side of the crossing spacing left out of the slope at the split.
CROSSING_GUARD = 8


class Decision(StrEnum):
    NO_JUMPS = "no_jumps"
    JUMPS = "jumps"


def ceil_index(n: int, p: float) -> int:
    """ceil(n * p), treating n * p within rounding of an integer as that integer."""
    x = n * p
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


def resolve_window(n: int, window: SlopeWindow) -> int:
    """Half-width m of the spacing window; ``"auto"`` is max(1, round(n^(2/3) / 2))."""
    if window == "auto":
        return max(1, round(n ** (2.0 / 3.0) / 2.0))
    if isinstance(window, bool) or not isinstance(window, int) or window < 1:
        raise ConfigError(f"slope window must be a positive integer or 'auto', got {window!r}")
    return window


def quantile_slope(
    sample: IncrementSample, p: float, window: SlopeWindow = "auto"
) -> float:
    """Estimate Q'(p) = 1 / f(Q(p)) from spacings of the order statistics.

    With ``window=1`` this is n (W_(k+1) - W_(k)), k = ceil(n p). Larger windows
    average the 2m - 1 spacings around k, truncated at the sample ends.
    """
    n = sample.n
    k = ceil_index(n, p)
    if k < 1 or k > n - 1:
        raise SplitIndexError(f"ceil(n p) = {k} is outside 1..{n - 1} (p={p})")
    m = resolve_window(n, window)
    lo = max(k - m + 1, 1)
    hi = min(k + m, n)
    v = sample.values
    return float(n * (v[hi - 1] - v[lo - 1]) / (hi - lo))


def guarded_slope(
    sample: IncrementSample, k: int, window: SlopeWindow = "auto", guard: int = CROSSING_GUARD
) -> float:
    """Q'(k/n) from m spacings on each side of W_(k+1) - W_(k), skipping a guard band.

    The crossing spacing and the ``guard`` spacings either side of it are left
    out: the last sign change of the cross-over curve selects them and they
    run large. The blocks are truncated at the sample ends; when both are empty
    this falls back to ``quantile_slope``.
    """
    n = sample.n
    if k < 1 or k > n - 1:
        raise SplitIndexError(f"split index {k} is outside 1..{n - 1}")
    if guard < 0:
        raise ConfigError(f"crossing guard must be non-negative, got {guard}")
    m = resolve_window(n, window)
    v = sample.values
    # Order statistic ranks bounding each block; spacing j is W_(j+1) - W_(j).
    lower_top = k - guard
    lower_bottom = max(lower_top - m, 1)
    upper_bottom = k + guard + 1
    upper_top = min(upper_bottom + m, n)
    span = 0.0
    count = 0
    if lower_top > lower_bottom:
        span += float(v[lower_top - 1] - v[lower_bottom - 1])
        count += lower_top - lower_bottom
    if upper_top > upper_bottom:
        span += float(v[upper_top - 1] - v[upper_bottom - 1])
        count += upper_top - upper_bottom
    if count == 0:
        return quantile_slope(sample, k / n, m)
    return n * span / count


@dataclass(frozen=True)
class VarianceComponents:
    eta: float
    delta: float
    s_nl: float
    s_nu: float
    t_nl: float
    t_nu: float
    q_slope: float
    pivot_value: float

    @property
    def well_posed(self) -> bool:
        return self.eta > 0 and self.delta != 0

    @property
    def asymptotic_variance(self) -> float:
        """eta / delta^2, the estimated variance of sqrt(n) (p_n - p_0)."""
        return self.eta / (self.delta * self.delta)


def variance_components(
    sample: IncrementSample,
    sp: SplitPointEstimate,
    window: SlopeWindow = "auto",
    guard: int = CROSSING_GUARD,
) -> VarianceComponents:
    """Plug-in estimates of Var(theta_p0) (eta) and G'(p0) (delta) at the split.

    eta is evaluated in pivot-centred form, algebraically equal to the sum of
    the S, T and Q' terms but free of cancellation under translation. Q' comes
    from ``guarded_slope``; tiny samples, where the guard band covers every
    spacing, use the spacings around the split. A negative eta is returned as
    is; ``well_posed`` reports it.
    """
    if not sp.is_interior or sp.crossing_index is None:
        raise DegenerateSplitError(
            f"Split point p_n={sp.p_n} leaves one side empty ({sp.boundary})"
        )
    n = sample.n
    k = sp.crossing_index
    if not 1 <= k <= n - 1:
        raise DegenerateSplitError(f"crossing index {k} is outside 1..{n - 1}")

    v = sample.values
    ps = sample.prefix_sum
    ps2 = sample.prefix_sum_sq
    p = k / n
    w = float(v[k - 1])

    s_nl = float(ps2[k] / k)
    s_nu = float((ps2[n] - ps2[k]) / (n - k))
    t_nl = float(ps[k] / k)
    t_nu = float((ps[n] - ps[k]) / (n - k))
    q = guarded_slope(sample, k, window, guard)

    a_l = float(np.mean((v[:k] - w) ** 2))
    a_u = float(np.mean((v[k:] - w) ** 2))
    mean_theta = t_nl + t_nu - 2.0 * w + 2.0 * p * q
    eta = (
        a_l / p
        + a_u / (1.0 - p)
        + 4.0 * p * q * q
        + 4.0 * q * (t_nl - w)
        - mean_theta * mean_theta
    )
    delta = (w - t_nl) / p - (w - t_nu) / (1.0 - p) - 2.0 * q
    if delta == 0.0:
        raise ZeroDeltaError(
            f"delta_n vanished at p_n={p} (quantile slope {q}); statistic undefined"
        )
    return VarianceComponents(
        eta=eta,
        delta=delta,
        s_nl=s_nl,
        s_nu=s_nu,
        t_nl=t_nl,
        t_nu=t_nu,
        q_slope=q,
        pivot_value=w,
    )


@dataclass(frozen=True)
class JumpTestResult:
    statistic: float
    p_value: float
    alpha: float
    decision: Decision
    split_point: SplitPointEstimate
    ci_lower: float | None
    ci_upper: float | None
    variance: VarianceComponents | None
    slope_window: int
    boundary_degenerate: bool = False
    ci_clipped: bool = False

    @property
    def n(self) -> int:
        return self.split_point.n

    @property
    def p_n(self) -> float:
        return self.split_point.p_n

    @property
    def asymptotic_sd(self) -> float | None:
        if self.variance is None:
            return None
        return math.sqrt(self.variance.asymptotic_variance)

    def to_dict(
        self, transform: str | None = None, seed: int | None = None
    ) -> dict[str, Any]:
        """JSON payload; see schemas/jump_test_result.schema.json."""
        ci = (
            None
            if self.ci_lower is None or self.ci_upper is None
            else [self.ci_lower, self.ci_upper]
        )
        variance = (
            None
            if self.variance is None
            else {"eta": self.variance.eta, "delta": self.variance.delta}
        )
        payload: dict[str, Any] = {
            "n": self.n,
            "p_n": self.p_n,
            "crossing_index": self.split_point.crossing_index,
            "statistic": _json_float(self.statistic),
            "p_value": self.p_value,
            "alpha": self.alpha,
            "ci": ci,
            "decision": str(self.decision),
            "variance": variance,
            "transform": transform,
            "slope_window": self.slope_window,
            "boundary_degenerate": self.boundary_degenerate,
            "ci_clipped": self.ci_clipped,
        }
        if seed is not None:
            payload["seed"] = seed
        return payload


def _json_float(x: float) -> float | str:
    # JSON has no infinities; boundary splits report them as strings.
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")


def jump_test(
    sample: IncrementSample,
    alpha: float = 0.05,
    window: SlopeWindow = "auto",
) -> JumpTestResult:
    """Test H0: no jumps (split point 0.5) against jumps (split point away from 0.5).

    S_n = sqrt(n) delta_n (p_n - 0.5) / sqrt(eta_n); jumps are declared when
    |S_n| > z_{alpha/2}. A split pinned at 0 or 1 is reported as a
    boundary-degenerate rejection without a confidence interval.
    """
    _check_alpha(alpha)
    n = sample.n
    m = resolve_window(n, window)
    if n < MIN_RECOMMENDED_N:
        logger.warning("Only %d increments; the normal approximation is unreliable", n)
        warnings.warn(
            f"jump_test on {n} increments (fewer than {MIN_RECOMMENDED_N})",
            SmallSampleWarning,
            stacklevel=2,
        )

    sp = split_point(compute_ecf(sample))
    if sp.zero_curve:
        raise DegenerateZeroCurveError(
            "All increments are equal; the cross-over function is identically zero"
        )
    if not sp.is_interior:
        return JumpTestResult(
            statistic=math.copysign(math.inf, sp.p_n - 0.5),
            p_value=0.0,
            alpha=alpha,
            decision=Decision.JUMPS,
            split_point=sp,
            ci_lower=None,
            ci_upper=None,
            variance=None,
            slope_window=m,
            boundary_degenerate=True,
        )

    vc = variance_components(sample, sp, m)
    if vc.eta <= 0.0:
        raise NegativeVarianceError(
            f"eta_n = {vc.eta:.6g} <= 0 at p_n={sp.p_n}; variance estimate unstable"
        )

    root_n = math.sqrt(n)
    statistic = root_n * vc.delta * (sp.p_n - 0.5) / math.sqrt(vc.eta)
    p_value = float(2.0 * norm.sf(abs(statistic)))
    z = float(norm.isf(alpha / 2.0))
    half_width = z * math.sqrt(vc.asymptotic_variance) / root_n
    lower = sp.p_n - half_width
    upper = sp.p_n + half_width
    clipped = lower < 0.0 or upper > 1.0

    decision = Decision.JUMPS if abs(statistic) > z else Decision.NO_JUMPS
    logger.debug(
        "n=%d p_n=%.6f S_n=%.4f decision=%s", n, sp.p_n, statistic, decision
    )
    return JumpTestResult(
        statistic=statistic,
        p_value=p_value,
        alpha=alpha,
        decision=decision,
        split_point=sp,
        ci_lower=max(lower, 0.0),
        ci_upper=min(upper, 1.0),
        variance=vc,
        slope_window=m,
        ci_clipped=clipped,
    )
