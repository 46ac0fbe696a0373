"""Population cross-over function and split-point asymptotics.

Closed forms for normal laws and two-component normal mixtures, used as
ground truth for the empirical estimators.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Literal

from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.stats import norm

from ecf_jumps.errors import NumericDegeneracyError, QuadratureError, RootBracketError

# Integration range around each component, in component standard deviations.
TAIL_SDS = 10.0
# Root bracket for the split point.
BRACKET = (0.01, 0.99)


@dataclass(frozen=True)
class PopulationLaw:
    kind: Literal["normal", "mixture2"]
    weights: tuple[float, ...]
    means: tuple[float, ...]
    sds: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(s <= 0 for s in self.sds):
            raise ValueError(f"Standard deviations must be positive: {self.sds}")
        if any(not 0 < w <= 1 for w in self.weights):
            raise ValueError(f"Weights must lie in (0, 1]: {self.weights}")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"Weights must sum to 1: {self.weights}")

    @classmethod
    def normal(cls, mean: float = 0.0, sd: float = 1.0) -> PopulationLaw:
        return cls("normal", (1.0,), (mean,), (sd,))

    @classmethod
    def mixture2(
        cls, w1: float, mean1: float, sd1: float, mean2: float, sd2: float
    ) -> PopulationLaw:
        if not 0 < w1 < 1:
            raise ValueError(f"Mixture weight must lie in (0, 1), got {w1}")
        return cls("mixture2", (w1, 1.0 - w1), (mean1, mean2), (sd1, sd2))

    @property
    def _components(self) -> zip[tuple[float, float, float]]:
        return zip(self.weights, self.means, self.sds, strict=True)

    def pdf(self, x: float) -> float:
        return sum(w * norm.pdf(x, m, s) for w, m, s in self._components)

    def cdf(self, x: float) -> float:
        return sum(w * norm.cdf(x, m, s) for w, m, s in self._components)

    def mean(self) -> float:
        return sum(w * m for w, m, _ in self._components)

    def variance(self) -> float:
        second = sum(w * (s * s + m * m) for w, m, s in self._components)
        return second - self.mean() ** 2

    def support(self) -> tuple[float, float]:
        lo = min(m - TAIL_SDS * s for m, s in zip(self.means, self.sds, strict=True))
        hi = max(m + TAIL_SDS * s for m, s in zip(self.means, self.sds, strict=True))
        return lo, hi

    def quantile(self, p: float) -> float:
        if self.kind == "normal":
            return float(norm.ppf(p, self.means[0], self.sds[0]))
        # F is monotone, so the root is unique inside a wide enough bracket.
        lo = min(m - 40 * s for m, s in zip(self.means, self.sds, strict=True))
        hi = max(m + 40 * s for m, s in zip(self.means, self.sds, strict=True))
        return float(brentq(lambda x: self.cdf(x) - p, lo, hi, xtol=1e-14, rtol=1e-15))

    def partial_mean(self, q: float) -> float:
        """E[W 1{W <= q}]."""
        total = 0.0
        for w, m, s in self._components:
            z = (q - m) / s
            total += w * (m * norm.cdf(z) - s * norm.pdf(z))
        return total

    def partial_second_moment(self, q: float) -> float:
        """E[W^2 1{W <= q}]."""
        total = 0.0
        for w, m, s in self._components:
            z = (q - m) / s
            total += w * ((m * m + s * s) * norm.cdf(z) - s * (m + q) * norm.pdf(z))
        return total

    def standardized(self) -> PopulationLaw:
        """The same law shifted and scaled to mean 0, variance 1."""
        mu = self.mean()
        sd = math.sqrt(self.variance())
        return PopulationLaw(
            self.kind,
            self.weights,
            tuple((m - mu) / sd for m in self.means),
            tuple(s / sd for s in self.sds),
        )


def _check_p(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")


def crossover_g(law: PopulationLaw, p: float) -> float:
    """G(p) = E[W 1{W<=Q(p)}]/p + E[W 1{W>Q(p)}]/(1-p) - 2 Q(p)."""
    _check_p(p)
    q = law.quantile(p)
    below = law.partial_mean(q)
    above = law.mean() - below
    return below / p + above / (1.0 - p) - 2.0 * q


def g_prime(law: PopulationLaw, p: float) -> float:
    """G'(p), with Q'(p) = 1 / f(Q(p))."""
    _check_p(p)
    q = law.quantile(p)
    dens = law.pdf(q)
    if dens <= 0.0:
        raise NumericDegeneracyError(f"density vanishes at Q({p}) = {q}")
    below = law.partial_mean(q)
    above = law.mean() - below
    return (q - below / p) / p - (q - above / (1.0 - p)) / (1.0 - p) - 2.0 / dens


def split_function(law: PopulationLaw, p: float) -> float:
    """Between-cluster sum of squares B(Q, p); maximised at the split point."""
    _check_p(p)
    q = law.quantile(p)
    below = law.partial_mean(q)
    above = law.mean() - below
    return below * below / p + above * above / (1.0 - p) - law.mean() ** 2


def _integrate(
    fn: Callable[[float], float], a: float, b: float, law: PopulationLaw
) -> float:
    if b <= a:
        return 0.0
    breaks = [m for m in law.means if a < m < b]
    value, abserr = quad(
        fn, a, b, points=breaks or None, limit=200, epsabs=1e-12, epsrel=1e-10
    )
    if not math.isfinite(value) or abserr > 1e-6 * max(1.0, abs(value)):
        raise QuadratureError(
            f"quadrature on [{a:.4g}, {b:.4g}] did not converge (err={abserr:.3g})"
        )
    return float(value)


def theta_variance(law: PopulationLaw, p: float) -> float:
    """Var(theta_p) by adaptive quadrature of the influence function theta_p."""
    _check_p(p)
    q = law.quantile(p)
    dens = law.pdf(q)
    if dens <= 0.0:
        raise NumericDegeneracyError(f"density vanishes at Q({p}) = {q}")
    jump = 2.0 / dens
    lo, hi = law.support()
    lo, hi = min(lo, q), max(hi, q)

    def theta_low(w: float) -> float:
        return (w - q) / p + jump

    def theta_high(w: float) -> float:
        return (w - q) / (1.0 - p)

    m1 = _integrate(lambda w: theta_low(w) * law.pdf(w), lo, q, law) + _integrate(
        lambda w: theta_high(w) * law.pdf(w), q, hi, law
    )
    m2 = _integrate(lambda w: theta_low(w) ** 2 * law.pdf(w), lo, q, law) + _integrate(
        lambda w: theta_high(w) ** 2 * law.pdf(w), q, hi, law
    )
    return m2 - m1 * m1


@dataclass(frozen=True)
class SplitTheory:
    p0: float
    g_prime_at_p0: float
    theta_var: float
    asymptotic_var: float

    @property
    def clt_applies(self) -> bool:
        return self.g_prime_at_p0 < 0


def split_theory(law: PopulationLaw, standardize: bool = False) -> SplitTheory:
    """Locate p0 (root of G) and the asymptotic variance of sqrt(n)(p_n - p0)."""
    if standardize:
        law = law.standardized()

    def g(p: float) -> float:
        return crossover_g(law, p)

    a, b = BRACKET
    ga, gb = g(a), g(b)
    if ga == 0.0:
        p0 = a
    elif gb == 0.0:
        p0 = b
    elif ga * gb > 0:
        raise RootBracketError(
            f"G has no sign change on [{a}, {b}]: G(a)={ga:.4g}, G(b)={gb:.4g}"
        )
    else:
        p0 = float(brentq(g, a, b, xtol=1e-12))

    slope = g_prime(law, p0)
    tv = theta_variance(law, p0)
    return SplitTheory(
        p0=p0,
        g_prime_at_p0=slope,
        theta_var=tv,
        asymptotic_var=tv / (slope * slope),
    )
