"""Monte Carlo level and power studies for the split-point and ST tests.

Every replication gets its own seed, derived from (base_seed, cell index,
replication index) through ``numpy.random.SeedSequence`` spawn keys, so
results do not depend on execution order or on the number of workers.
Per-cell aggregates are plain counts and sums taken in replication order.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Any, Literal

import numpy as np

from ecf_jumps.ecf import IncrementSample
from ecf_jumps.errors import ConfigError, EcfJumpsError
from ecf_jumps.inference import Decision, SlopeWindow, jump_test
from ecf_jumps.simulate import JumpModel, ModelSpec, SizeLaw, simulate_path
from ecf_jumps.st_baseline import st_test

logger = logging.getLogger(__name__)

TESTS = frozenset({"cluster", "st"})
DESK_REPLICATIONS = 2000
FULL_REPLICATIONS = 10000

Study = Literal["level", "power", "power_curve"]


@dataclass(frozen=True)
class ExperimentPlan:
    scenario: str
    n_values: tuple[int, ...]
    jump_models: tuple[JumpModel, ...] = (JumpModel(),)
    mu: float = 0.0
    sigma: float = 1.0
    replications: int = DESK_REPLICATIONS
    alpha: float = 0.05
    base_seed: int = 0
    tests: frozenset[str] = TESTS
    workers: int = 1
    keep_records: bool = False
    slope_window: SlopeWindow = "auto"
    sweep: Literal["tau", "eta"] | None = None

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ConfigError(f"replications must be at least 1, got {self.replications}")
        if not self.n_values:
            raise ConfigError("n_values must not be empty")
        if not self.jump_models:
            raise ConfigError("jump_models must not be empty")
        if not self.tests or not self.tests <= TESTS:
            raise ConfigError(f"tests must be a non-empty subset of {sorted(TESTS)}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        if self.base_seed < 0:
            raise ConfigError(f"base_seed must be non-negative, got {self.base_seed}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")

    def cells(self) -> list[Cell]:
        return [
            Cell(
                index=i,
                spec=ModelSpec(mu=self.mu, sigma=self.sigma, n=n, jumps=jm),
            )
            for i, (n, jm) in enumerate(product(self.n_values, self.jump_models))
        ]


@dataclass(frozen=True)
class Cell:
    index: int
    spec: ModelSpec

    @property
    def label(self) -> str:
        return f"n={self.spec.n} jumps={self.spec.jumps.label()}"


@dataclass(frozen=True)
class ReplicationRecord:
    cell: int
    replication: int
    seed: int
    n: int
    jump_count: int
    p_n: float = math.nan
    statistic: float = math.nan
    cluster_reject: bool | None = None
    failure: str | None = None
    st_ratio: float = math.nan
    st_reject: bool | None = None
    st_failure: str | None = None
    elapsed: float = field(default=0.0, compare=False)


@dataclass(frozen=True)
class CellResult:
    cell: int
    n: int
    jumps: str
    lam: float
    replications: int
    cluster_valid: int
    cluster_failures: int
    mean_p_n: float
    cluster_rejection: float
    cluster_se: float
    st_valid: int
    st_failures: int
    st_rejection: float
    st_se: float
    st_ratio_mean: float
    parameter: str | None = None
    parameter_value: float | None = None
    runtime: float = field(default=0.0, compare=False)

    @property
    def failure_proportion(self) -> float:
        """Share of valid replications that fail to declare jumps."""
        return 1.0 - self.cluster_rejection

    @property
    def power(self) -> float:
        return self.cluster_rejection

    def as_row(self, timings: bool = False) -> dict[str, Any]:
        row = asdict(self)
        row["failure_proportion"] = self.failure_proportion
        if not timings:
            row.pop("runtime")
        return row


@dataclass(frozen=True)
class ExperimentReport:
    scenario: str
    study: Study
    alpha: float
    base_seed: int
    replications: int
    rows: tuple[CellResult, ...]
    records: tuple[ReplicationRecord, ...] | None = None

    def to_dict(self, timings: bool = False, records: bool = False) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "scenario": self.scenario,
            "study": self.study,
            "alpha": self.alpha,
            "base_seed": self.base_seed,
            "replications": self.replications,
            "cells": [row.as_row(timings) for row in self.rows],
        }
        if records and self.records is not None:
            payload["records"] = [record_row(r, timings) for r in self.records]
        return payload


def record_row(record: ReplicationRecord, timings: bool = False) -> dict[str, Any]:
    row = asdict(record)
    if not timings:
        row.pop("elapsed")
    return row


def replication_seed(base_seed: int, cell: int, replication: int) -> int:
    """64-bit seed for one replication, hashed from its coordinates."""
    ss = np.random.SeedSequence(base_seed, spawn_key=(cell, replication))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def mc_standard_error(proportion: float, count: int) -> float:
    if count == 0 or math.isnan(proportion):
        return math.nan
    return math.sqrt(proportion * (1.0 - proportion) / count)


def power_ceiling(spec: ModelSpec, alpha: float) -> float:
    """Largest attainable rejection rate: paths without jumps are rejected at level alpha."""
    jumps = spec.jumps
    if jumps.kind == "none":
        p_jump = 0.0
    elif jumps.kind == "bernoulli":
        p_jump = 1.0 - (1.0 - jumps.prob_per_step) ** spec.n
    else:
        p_jump = 1.0 - math.exp(-jumps.lam)
    return p_jump + (1.0 - p_jump) * alpha


_Task = tuple[int, int, int, ModelSpec, float, frozenset[str], SlopeWindow]


def _run_replication(task: _Task) -> ReplicationRecord:
    cell, rep, seed, spec, alpha, tests, window = task
    start = time.perf_counter()
    path = simulate_path(spec, seed)
    fields: dict[str, Any] = {}
    if "cluster" in tests:
        try:
            result = jump_test(
                IncrementSample.from_increments(path.increments), alpha, window
            )
            fields.update(
                p_n=result.p_n,
                statistic=result.statistic,
                cluster_reject=result.decision is Decision.JUMPS,
            )
        except EcfJumpsError as exc:
            logger.debug("cell %d rep %d: %s", cell, rep, exc)
            fields["failure"] = exc.kind
    if "st" in tests:
        try:
            st = st_test(path.values, alpha=alpha)
            fields.update(st_ratio=st.ratio, st_reject=st.decision is Decision.JUMPS)
        except EcfJumpsError as exc:
            fields["st_failure"] = exc.kind
    return ReplicationRecord(
        cell=cell,
        replication=rep,
        seed=seed,
        n=spec.n,
        jump_count=path.jump_count,
        elapsed=time.perf_counter() - start,
        **fields,
    )


def _proportion(flags: Sequence[bool]) -> float:
    return sum(flags) / len(flags) if flags else math.nan


def _aggregate(
    cell: Cell, records: Sequence[ReplicationRecord], sweep: str | None
) -> CellResult:
    cluster = [r for r in records if r.cluster_reject is not None]
    st = [r for r in records if r.st_reject is not None]
    rejection = _proportion([bool(r.cluster_reject) for r in cluster])
    st_rejection = _proportion([bool(r.st_reject) for r in st])
    parameter_value = None
    if sweep is not None:
        size = cell.spec.jumps.size_law
        parameter_value = size.tau if sweep == "tau" else size.eta_var
    return CellResult(
        cell=cell.index,
        n=cell.spec.n,
        jumps=cell.spec.jumps.label(),
        lam=cell.spec.jumps.lam,
        replications=len(records),
        cluster_valid=len(cluster),
        cluster_failures=sum(1 for r in records if r.failure is not None),
        mean_p_n=float(np.mean([r.p_n for r in cluster])) if cluster else math.nan,
        cluster_rejection=rejection,
        cluster_se=mc_standard_error(rejection, len(cluster)),
        st_valid=len(st),
        st_failures=sum(1 for r in records if r.st_failure is not None),
        st_rejection=st_rejection,
        st_se=mc_standard_error(st_rejection, len(st)),
        st_ratio_mean=float(np.mean([r.st_ratio for r in st])) if st else math.nan,
        parameter=sweep,
        parameter_value=parameter_value,
        runtime=sum(r.elapsed for r in records),
    )


def _map(tasks: list[_Task], workers: int) -> Iterable[ReplicationRecord]:
    if workers == 1:
        return map(_run_replication, tasks)
    chunksize = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_replication, tasks, chunksize=chunksize))


def run_plan(plan: ExperimentPlan, study: Study) -> ExperimentReport:
    """Run every cell of ``plan`` and aggregate in cell, then replication, order."""
    cells = plan.cells()
    tasks: list[_Task] = [
        (
            cell.index,
            rep,
            replication_seed(plan.base_seed, cell.index, rep),
            cell.spec,
            plan.alpha,
            plan.tests,
            plan.slope_window,
        )
        for cell in cells
        for rep in range(plan.replications)
    ]
    logger.info(
        "%s: %d cells x %d replications on %d worker(s)",
        plan.scenario,
        len(cells),
        plan.replications,
        plan.workers,
    )
    records = list(_map(tasks, plan.workers))

    rows = []
    for cell in cells:
        start = cell.index * plan.replications
        chunk = records[start : start + plan.replications]
        row = _aggregate(cell, chunk, plan.sweep if study == "power_curve" else None)
        logger.info(
            "%s: rejection %.4f (%d failures)",
            cell.label,
            row.cluster_rejection,
            row.cluster_failures,
        )
        rows.append(row)
    return ExperimentReport(
        scenario=plan.scenario,
        study=study,
        alpha=plan.alpha,
        base_seed=plan.base_seed,
        replications=plan.replications,
        rows=tuple(rows),
        records=tuple(records) if plan.keep_records else None,
    )


def run_level_study(plan: ExperimentPlan) -> ExperimentReport:
    """Rejection rates and mean p_n on jump-free paths."""
    if any(jm.kind != "none" for jm in plan.jump_models):
        raise ConfigError("a level study simulates paths without jumps only")
    return run_plan(plan, "level")


def run_power_study(plan: ExperimentPlan) -> ExperimentReport:
    """Rejection rates under jump alternatives; rows also carry the failure proportion."""
    return run_plan(plan, "power")


def run_power_curve(plan: ExperimentPlan) -> ExperimentReport:
    """Power as a function of the jump-size mean (tau) or variance (eta)."""
    if plan.sweep not in ("tau", "eta"):
        raise ConfigError("a power curve needs sweep = 'tau' or 'eta'")
    for jm in plan.jump_models:
        if jm.kind != "compound_poisson" or jm.size_law.kind != "normal":
            raise ConfigError("power curves sweep compound-Poisson normal jump sizes")
    return run_plan(plan, "power_curve")


# -- preset plans ------------------------------------------------------------


def level_study_plan(full: bool = False, **overrides: Any) -> ExperimentPlan:
    """Level under no jumps, mu = 0 and sigma = 1."""
    kwargs: dict[str, Any] = {
        "scenario": "level-grid",
        "n_values": (500, 1000, 5000, 10000, 25000, 50000),
        "replications": FULL_REPLICATIONS if full else DESK_REPLICATIONS,
    }
    kwargs.update(overrides)
    return ExperimentPlan(**kwargs)


def power_study_jump_models(lam: float = 0.2, bernoulli_prob: float = 0.2) -> tuple[JumpModel, ...]:
    return (
        JumpModel.compound_poisson(lam, SizeLaw.normal(10.0, 2.0)),
        JumpModel.compound_poisson(lam, SizeLaw.double_exponential(4.0, 1.0)),
        JumpModel.compound_poisson(lam, SizeLaw.normal(1.5, 1.0)),
        JumpModel.bernoulli(bernoulli_prob, SizeLaw.normal(10.0, 2.0)),
    )


def power_study_plan(
    full: bool = False, lam: float = 0.2, bernoulli_prob: float = 0.2, **overrides: Any
) -> ExperimentPlan:
    """Power against compound-Poisson and Bernoulli jumps, mu = 2 and sigma = 1."""
    kwargs: dict[str, Any] = {
        "scenario": "power-grid",
        "n_values": (100, 1000, 5000, 10000, 25000),
        "jump_models": power_study_jump_models(lam, bernoulli_prob),
        "mu": 2.0,
        "sigma": 1.0,
        "replications": FULL_REPLICATIONS if full else DESK_REPLICATIONS,
        "tests": frozenset({"cluster"}),
    }
    kwargs.update(overrides)
    return ExperimentPlan(**kwargs)


def power_curve_plan(
    sweep: Literal["tau", "eta"],
    values: Sequence[float] | None = None,
    n: int = 5000,
    lam: float = 0.2,
    **overrides: Any,
) -> ExperimentPlan:
    """Sweep tau with eta = 1, or eta with tau = 4."""
    if values is None:
        values = (
            tuple(float(t) for t in range(0, 13))
            if sweep == "tau"
            else (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)
        )
    if sweep == "tau":
        models = tuple(JumpModel.compound_poisson(lam, SizeLaw.normal(t, 1.0)) for t in values)
    else:
        models = tuple(JumpModel.compound_poisson(lam, SizeLaw.normal(4.0, e)) for e in values)
    kwargs: dict[str, Any] = {
        "scenario": f"power-curve-{sweep}",
        "n_values": (n,),
        "jump_models": models,
        "mu": 2.0,
        "sigma": 1.0,
        "tests": frozenset({"cluster"}),
        "sweep": sweep,
    }
    kwargs.update(overrides)
    return ExperimentPlan(**kwargs)
