"""Power-variation ratio test for jumps at two sampling scales.

The ratio of p-th power variations sampled every k steps and every step
tends to k^(p/2 - 1) on continuous paths and to 1 when jumps are present.
It is standardised with the continuous-path variance

    V = dt * M(p, k) * A(2p) / A(p)^2,
    M(p, k) = (k^(p-2) (1 + k) m_2p + k^(p-2) (k - 1) m_p^2 - 2 k^(p/2-1) m_kp) / m_p^2,

where m_r = E|N(0,1)|^r, m_kp = E(|U|^p |U + sqrt(k-1) V|^p) for independent
standard normals U, V, and A(r), the integrated r-th power of volatility, is
the plain r-th power variation dt^(1 - r/2) / m_r * sum |dX|^r over the
increments below u_n = 5 sigma dt^0.47 (sigma from bipower variation). No
increment of a continuous path reaches u_n in practice, so under continuity
A(2p) carries the full small-sample noise of the 2p-th power variation and
the test over-rejects at a few hundred steps. M(4, 2) = 160/3.
The test is one-sided: continuity is rejected when the ratio falls far
enough below k^(p/2 - 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cache

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import dblquad
from scipy.special import comb, gamma
from scipy.stats import norm

from ecf_jumps.errors import (
    ConfigError,
    NonFiniteInputError,
    NumericDegeneracyError,
    TooFewObservationsError,
)
from ecf_jumps.inference import Decision


def abs_normal_moment(r: float) -> float:
    """m_r = E|N(0, 1)|^r."""
    return float(2.0 ** (r / 2.0) * gamma((r + 1.0) / 2.0) / math.sqrt(math.pi))


def _normal_moment(j: int) -> float:
    # E[N^j]: zero for odd j, (j - 1)!! otherwise.
    if j % 2:
        return 0.0
    return abs_normal_moment(j)


@cache
def cross_moment(p: float, k: int) -> float:
    """m_kp = E(|U|^p |U + sqrt(k-1) V|^p)."""
    c = math.sqrt(k - 1)
    if float(p).is_integer() and int(p) % 2 == 0:
        ip = int(p)
        return float(
            sum(
                comb(ip, j, exact=True)
                * c ** (ip - j)
                * _normal_moment(ip + j)
                * _normal_moment(ip - j)
                for j in range(ip + 1)
            )
        )
    value, _ = dblquad(
        lambda v, u: abs(u) ** p
        * abs(u + c * v) ** p
        * norm.pdf(u)
        * norm.pdf(v),
        -12.0,
        12.0,
        -12.0,
        12.0,
    )
    return float(value)


def variance_constant(p: float, k: int) -> float:
    """M(p, k)."""
    mp = abs_normal_moment(p)
    m2p = abs_normal_moment(2 * p)
    scale = k ** (p - 2.0)
    return (
        scale * (1 + k) * m2p
        + scale * (k - 1) * mp * mp
        - 2.0 * k ** (p / 2.0 - 1.0) * cross_moment(p, k)
    ) / (mp * mp)


def power_variation(increments: ArrayLike, p: float) -> float:
    return float(np.sum(np.abs(np.asarray(increments, dtype=np.float64)) ** p))


def multipower_variation(increments: ArrayLike, r: float, q: int) -> float:
    """Estimate of the integrated r-th power of volatility on [0, 1].

    dt^(1 - r/2) / m_{r/q}^q * sum_i prod_{j<q} |dX_{i+j}|^(r/q), dt = 1/len.
    """
    x = np.abs(np.asarray(increments, dtype=np.float64)) ** (r / q)
    n = x.shape[0]
    if n < q:
        raise TooFewObservationsError(f"multipower variation needs {q} increments")
    prod = np.ones(n - q + 1)
    for j in range(q):
        prod *= x[j : n - q + 1 + j]
    dt = 1.0 / n
    return float(dt ** (1.0 - r / 2.0) * prod.sum() / abs_normal_moment(r / q) ** q)


TRUNCATION_SCALE = 5.0
TRUNCATION_EXPONENT = 0.47


def jump_threshold(increments: ArrayLike) -> float:
    """u_n = 5 sigma dt^0.47 with sigma^2 the bipower variation, dt = 1/len."""
    inc = np.asarray(increments, dtype=np.float64)
    sigma = math.sqrt(multipower_variation(inc, 2.0, 2))
    return TRUNCATION_SCALE * sigma * (1.0 / inc.shape[0]) ** TRUNCATION_EXPONENT


def realized_power(increments: ArrayLike, r: float, threshold: float = math.inf) -> float:
    """A(r) = dt^(1 - r/2) / m_r * sum |dX|^r over increments with |dX| <= threshold."""
    x = np.abs(np.asarray(increments, dtype=np.float64))
    dt = 1.0 / x.shape[0]
    kept = x[x <= threshold]
    return float(dt ** (1.0 - r / 2.0) * np.sum(kept**r) / abs_normal_moment(r))


@dataclass(frozen=True)
class StTestResult:
    ratio: float
    standardized: float
    p_value: float
    decision: Decision
    p: float
    k: int
    alpha: float
    variance: float
    n: int

    def to_dict(self, transform: str | None = None) -> dict[str, object]:
        return {
            "n": self.n,
            "ratio": self.ratio,
            "standardized": self.standardized,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "decision": str(self.decision),
            "p": self.p,
            "k": self.k,
            "transform": transform,
        }


def st_test(
    observations: ArrayLike, p: float = 4.0, k: int = 2, alpha: float = 0.05
) -> StTestResult:
    """Power-variation ratio test on a regularly sampled path.

    The coarse grid takes every k-th observation starting at index 0;
    observations past the last full coarse step are dropped.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    if k < 2:
        raise ConfigError(f"scale factor k must be at least 2, got {k}")
    if p <= 0:
        raise ConfigError(f"power p must be positive, got {p}")
    x = np.asarray(observations, dtype=np.float64).ravel()
    if x.shape[0] < 2 * k + 2:
        raise TooFewObservationsError(
            f"Need at least {2 * k + 2} observations for k={k}, got {x.shape[0]}"
        )
    if not np.all(np.isfinite(x)):
        raise NonFiniteInputError("Observations contain NaN or infinite values")

    fine = np.diff(x)
    coarse = np.diff(x[::k])
    denominator = power_variation(fine, p)
    if denominator == 0.0:
        raise NumericDegeneracyError("all increments are zero; power variation vanishes")
    ratio = power_variation(coarse, p) / denominator

    n = fine.shape[0]
    threshold = jump_threshold(fine)
    a_p = realized_power(fine, p, threshold)
    a_2p = realized_power(fine, 2 * p, threshold)
    if a_p == 0.0:
        raise NumericDegeneracyError("truncated power variation vanishes; path too flat")
    variance = variance_constant(p, k) * a_2p / (n * a_p * a_p)

    centre = k ** (p / 2.0 - 1.0)
    standardized = (centre - ratio) / math.sqrt(variance)
    z = float(norm.isf(alpha))
    return StTestResult(
        ratio=ratio,
        standardized=standardized,
        p_value=float(norm.sf(standardized)),
        decision=Decision.JUMPS if standardized > z else Decision.NO_JUMPS,
        p=p,
        k=k,
        alpha=alpha,
        variance=variance,
        n=n,
    )
