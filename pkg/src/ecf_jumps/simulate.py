"""Exact simulation of discretely observed jump diffusions on [0, 1].

Increments are drawn from their exact law: a Gaussian N(mu/n, sigma^2/n)
per step plus the sum of the jumps that fall in the step, with true Poisson
(or Bernoulli) counts. Nothing is Euler-discretised.

RNG contract: ``seed`` seeds a ``numpy.random.SeedSequence`` which spawns
three children, in order, for the Gaussian part, the per-step jump counts
and the jump sizes; each child drives a counter-based ``Philox`` generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike
from scipy.stats import norm, poisson

from ecf_jumps.errors import ConfigError, UnsupportedModelError

# Poisson mass left out of the truncated density series.
SERIES_TAIL = 1e-15


@dataclass(frozen=True)
class SizeLaw:
    kind: Literal["normal", "double_exponential", "constant"]
    tau: float = 0.0
    eta_var: float = 1.0
    location: float = 0.0
    scale: float = 1.0
    h: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "normal" and self.eta_var <= 0:
            raise ConfigError(f"jump-size variance must be positive, got {self.eta_var}")
        if self.kind == "double_exponential" and self.scale <= 0:
            raise ConfigError(f"double-exponential scale must be positive, got {self.scale}")
        if self.kind not in ("normal", "double_exponential", "constant"):
            raise ConfigError(f"unknown jump-size law {self.kind!r}")

    @classmethod
    def normal(cls, tau: float, eta_var: float) -> SizeLaw:
        return cls("normal", tau=tau, eta_var=eta_var)

    @classmethod
    def double_exponential(cls, location: float, scale: float) -> SizeLaw:
        return cls("double_exponential", location=location, scale=scale)

    @classmethod
    def constant(cls, h: float) -> SizeLaw:
        return cls("constant", h=h)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "normal":
            return self.tau + math.sqrt(self.eta_var) * rng.standard_normal(size)
        if self.kind == "double_exponential":
            return rng.laplace(self.location, self.scale, size)
        return np.full(size, self.h, dtype=np.float64)

    def label(self) -> str:
        if self.kind == "normal":
            return f"N({self.tau:g},{self.eta_var:g})"
        if self.kind == "double_exponential":
            return f"DE({self.location:g},{self.scale:g})"
        return f"h={self.h:g}"


@dataclass(frozen=True)
class JumpModel:
    kind: Literal["none", "constant", "compound_poisson", "bernoulli"] = "none"
    lam: float = 0.0
    prob_per_step: float = 0.0
    size_law: SizeLaw = field(default_factory=lambda: SizeLaw.constant(0.0))

    def __post_init__(self) -> None:
        if self.kind not in ("none", "constant", "compound_poisson", "bernoulli"):
            raise ConfigError(f"unknown jump kind {self.kind!r}")
        if self.lam < 0:
            raise ConfigError(f"jump intensity must be non-negative, got {self.lam}")
        if not 0.0 <= self.prob_per_step <= 1.0:
            raise ConfigError(
                f"per-step jump probability must lie in [0, 1], got {self.prob_per_step}"
            )

    @classmethod
    def none(cls) -> JumpModel:
        return cls("none")

    @classmethod
    def constant(cls, h: float, lam: float) -> JumpModel:
        return cls("constant", lam=lam, size_law=SizeLaw.constant(h))

    @classmethod
    def compound_poisson(cls, lam: float, size_law: SizeLaw) -> JumpModel:
        return cls("compound_poisson", lam=lam, size_law=size_law)

    @classmethod
    def bernoulli(cls, prob_per_step: float, size_law: SizeLaw) -> JumpModel:
        return cls("bernoulli", prob_per_step=prob_per_step, size_law=size_law)

    @property
    def is_poisson(self) -> bool:
        return self.kind in ("constant", "compound_poisson")

    def label(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "bernoulli":
            return f"bernoulli(p={self.prob_per_step:g},{self.size_law.label()})"
        return f"{self.kind}(lam={self.lam:g},{self.size_law.label()})"


@dataclass(frozen=True)
class ModelSpec:
    """Law of a path on [0, 1] observed at n + 1 equally spaced times."""

    mu: float = 0.0
    sigma: float = 1.0
    n: int = 1000
    jumps: JumpModel = field(default_factory=JumpModel.none)

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if self.n < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}")

    @property
    def horizon(self) -> float:
        return 1.0

    @property
    def dt(self) -> float:
        return 1.0 / self.n

    def with_n(self, n: int) -> ModelSpec:
        return replace(self, n=n)


@dataclass(frozen=True, eq=False)
class PathSample:
    values: np.ndarray
    jump_counts: np.ndarray
    jump_times: tuple[int, ...]
    jump_count: int

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)


def _generators(seed: int) -> tuple[np.random.Generator, ...]:
    children = np.random.SeedSequence(seed).spawn(3)
    return tuple(np.random.Generator(np.random.Philox(c)) for c in children)


def simulate_path(spec: ModelSpec, seed: int, x0: float = 0.0) -> PathSample:
    """Draw X at 0, 1/n, ..., 1; deterministic in (spec, seed)."""
    gauss_rng, count_rng, size_rng = _generators(seed)
    n = spec.n
    dt = spec.dt
    steps = spec.mu * dt + spec.sigma * math.sqrt(dt) * gauss_rng.standard_normal(n)

    jumps = spec.jumps
    if jumps.kind == "none":
        counts = np.zeros(n, dtype=np.int64)
    elif jumps.kind == "bernoulli":
        counts = (count_rng.random(n) < jumps.prob_per_step).astype(np.int64)
    else:
        counts = count_rng.poisson(jumps.lam * dt, n).astype(np.int64)

    total = int(counts.sum())
    if total:
        sizes = jumps.size_law.draw(size_rng, total)
        owner = np.repeat(np.arange(n), counts)
        steps = steps + np.bincount(owner, weights=sizes, minlength=n)

    values = np.empty(n + 1, dtype=np.float64)
    values[0] = x0
    np.cumsum(steps, out=values[1:])
    values[1:] += x0
    return PathSample(
        values=values,
        jump_counts=counts,
        jump_times=tuple(int(i) for i in np.flatnonzero(counts)),
        jump_count=total,
    )


# -- increment law -----------------------------------------------------------


def _component(
    spec: ModelSpec, jumps_in_step: int
) -> tuple[float, float]:
    """Mean and sd of an increment given the number of jumps in its step."""
    mean = spec.mu * spec.dt
    var = spec.sigma**2 * spec.dt
    size = spec.jumps.size_law
    if size.kind == "normal":
        mean += jumps_in_step * size.tau
        var += jumps_in_step * size.eta_var
    elif size.kind == "constant":
        mean += jumps_in_step * size.h
    else:
        raise UnsupportedModelError(
            "increment density has no closed form for double-exponential jump sizes"
        )
    return mean, math.sqrt(var)


def _mixture_terms(spec: ModelSpec) -> list[tuple[float, float, float]]:
    """(weight, mean, sd) of the Gaussian mixture an increment follows."""
    jumps = spec.jumps
    if jumps.kind == "none":
        return [(1.0, spec.mu * spec.dt, spec.sigma * math.sqrt(spec.dt))]
    if jumps.kind == "bernoulli":
        p = jumps.prob_per_step
        return [
            (1.0 - p, *_component(spec, 0)),
            (p, *_component(spec, 1)),
        ]
    lam = jumps.lam * spec.dt
    k_max = max(1, int(poisson.ppf(1.0 - SERIES_TAIL, lam)) + 1) if lam > 0 else 0
    return [
        (float(poisson.pmf(k, lam)), *_component(spec, k)) for k in range(k_max + 1)
    ]


def _evaluate(
    terms: list[tuple[float, float, float]], w: ArrayLike, cumulative: bool
) -> np.ndarray | float:
    x = np.asarray(w, dtype=np.float64)
    fn = norm.cdf if cumulative else norm.pdf
    out = sum(wt * fn(x, m, s) for wt, m, s in terms)
    result = np.asarray(out, dtype=np.float64)
    return float(result) if result.ndim == 0 else result


def increment_density(spec: ModelSpec, w: ArrayLike) -> np.ndarray | float:
    """Density f(w) of one increment: a Poisson-weighted Gaussian mixture."""
    return _evaluate(_mixture_terms(spec), w, cumulative=False)


def increment_cdf(spec: ModelSpec, w: ArrayLike) -> np.ndarray | float:
    return _evaluate(_mixture_terms(spec), w, cumulative=True)


def two_component_density(spec: ModelSpec, w: ArrayLike) -> np.ndarray | float:
    """g(w) = (1 - lam/n) phi_0(w) + (lam/n) phi_1(w): at most one jump per step."""
    jumps = spec.jumps
    if jumps.kind in ("none", "bernoulli"):
        return increment_density(spec, w)
    lam = jumps.lam * spec.dt
    terms = [(1.0 - lam, *_component(spec, 0)), (lam, *_component(spec, 1))]
    return _evaluate(terms, w, cumulative=False)
