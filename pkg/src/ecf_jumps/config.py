"""Run configuration: INI plan files merged under command-line options."""

from __future__ import annotations

import configparser
import os
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Literal

from ecf_jumps.errors import ConfigError
from ecf_jumps.experiments import (
    FULL_REPLICATIONS,
    TESTS,
    ExperimentPlan,
    power_curve_plan,
    level_study_plan,
    power_study_plan,
)
from ecf_jumps.inference import SlopeWindow
from ecf_jumps.simulate import JumpModel, ModelSpec, SizeLaw

Transform = Literal["raw_diff", "log_diff"]
TRANSFORMS: tuple[str, ...] = ("raw_diff", "log_diff")

SEED_ENV = "SEED"

SECTION_KEYS: dict[str, frozenset[str]] = {
    "run": frozenset(
        {"alpha", "transform", "seed", "slope_window", "date_column", "value_column"}
    ),
    "model": frozenset({"mu", "sigma", "n"}),
    "jumps": frozenset(
        {
            "kind",
            "lam",
            "prob_per_step",
            "h",
            "size_law",
            "tau",
            "eta_var",
            "location",
            "scale",
        }
    ),
    "experiment": frozenset(
        {
            "scenario",
            "n_values",
            "replications",
            "full_replications",
            "workers",
            "tests",
            "jump_grid",
            "sweep",
            "sweep_values",
        }
    ),
}


@dataclass(frozen=True)
class ExperimentSettings:
    scenario: str | None = None
    n_values: tuple[int, ...] | None = None
    replications: int | None = None
    full_replications: int = FULL_REPLICATIONS
    workers: int = 1
    tests: frozenset[str] | None = None
    jump_grid: tuple[float, ...] | None = None
    sweep: Literal["tau", "eta"] | None = None
    sweep_values: tuple[float, ...] | None = None


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.05
    transform: Transform = "log_diff"
    seed: int | None = None
    slope_window: SlopeWindow = "auto"
    date_column: str | None = "DATE"
    value_column: str = "SP500"
    model: ModelSpec = field(default_factory=ModelSpec)
    jumps_configured: bool = False
    experiment: ExperimentSettings = field(default_factory=ExperimentSettings)

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.transform not in TRANSFORMS:
            raise ConfigError(
                f"transform must be one of {', '.join(TRANSFORMS)}, got {self.transform!r}"
            )
        if self.seed is not None and self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")

    @property
    def base_seed(self) -> int:
        return 0 if self.seed is None else self.seed


# -- value parsers -----------------------------------------------------------


def _convert(kind: type, key: str, raw: str) -> Any:
    try:
        return kind(raw.strip())
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {kind.__name__}") from None


def _float(key: str, raw: str) -> float:
    return float(_convert(float, key, raw))


def _int(key: str, raw: str) -> int:
    return int(_convert(int, key, raw))


def _list(key: str, raw: str, kind: type) -> tuple[Any, ...]:
    items = [item for item in raw.replace(";", ",").split(",") if item.strip()]
    if not items:
        raise ConfigError(f"{key}: empty list")
    return tuple(_convert(kind, key, item) for item in items)


def parse_slope_window(raw: str | int) -> SlopeWindow:
    if isinstance(raw, int):
        return raw
    text = raw.strip().lower()
    if text == "auto":
        return "auto"
    value = _int("slope_window", text)
    if value < 1:
        raise ConfigError(f"slope_window must be a positive integer or 'auto', got {raw!r}")
    return value


def _optional_column(raw: str) -> str | None:
    text = raw.strip()
    return None if text.lower() in ("", "none") else text


# -- file reading ------------------------------------------------------------


def read_config_file(path: Path) -> dict[str, dict[str, str]]:
    """Parse an INI plan file, rejecting unknown sections and keys."""
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    sections: dict[str, dict[str, str]] = {}
    for name in parser.sections():
        if name not in SECTION_KEYS:
            raise ConfigError(f"{path}: unknown section [{name}]")
        items = dict(parser.items(name))
        unknown = sorted(set(items) - SECTION_KEYS[name])
        if unknown:
            raise ConfigError(f"{path}: unknown key(s) in [{name}]: {', '.join(unknown)}")
        sections[name] = items
    return sections


def parse_jump_model(items: Mapping[str, str]) -> JumpModel:
    kind = items.get("kind", "none").strip()
    if kind == "none":
        return JumpModel.none()
    if kind == "constant":
        return JumpModel.constant(
            _float("h", items.get("h", "0")), _float("lam", items.get("lam", "0"))
        )

    law = items.get("size_law", "normal").strip()
    if law == "normal":
        size = SizeLaw.normal(
            _float("tau", items.get("tau", "0")),
            _float("eta_var", items.get("eta_var", "1")),
        )
    elif law == "double_exponential":
        size = SizeLaw.double_exponential(
            _float("location", items.get("location", "0")),
            _float("scale", items.get("scale", "1")),
        )
    elif law == "constant":
        size = SizeLaw.constant(_float("h", items.get("h", "0")))
    else:
        raise ConfigError(f"unknown size_law {law!r}")

    if kind == "compound_poisson":
        return JumpModel.compound_poisson(_float("lam", items.get("lam", "0")), size)
    if kind == "bernoulli":
        return JumpModel.bernoulli(
            _float("prob_per_step", items.get("prob_per_step", "0")), size
        )
    raise ConfigError(f"unknown jump kind {kind!r}")


def _experiment_settings(items: Mapping[str, str]) -> ExperimentSettings:
    kwargs: dict[str, Any] = {}
    if "scenario" in items:
        kwargs["scenario"] = items["scenario"].strip()
    if "n_values" in items:
        kwargs["n_values"] = _list("n_values", items["n_values"], int)
    for key in ("replications", "full_replications", "workers"):
        if key in items:
            kwargs[key] = _int(key, items[key])
    if "tests" in items:
        tests = frozenset(t.strip() for t in _list("tests", items["tests"], str))
        if not tests <= TESTS:
            raise ConfigError(f"tests must be drawn from {sorted(TESTS)}, got {sorted(tests)}")
        kwargs["tests"] = tests
    if "jump_grid" in items:
        kwargs["jump_grid"] = _list("jump_grid", items["jump_grid"], float)
    if "sweep" in items:
        sweep = items["sweep"].strip()
        if sweep not in ("tau", "eta"):
            raise ConfigError(f"sweep must be 'tau' or 'eta', got {sweep!r}")
        kwargs["sweep"] = sweep
    if "sweep_values" in items:
        kwargs["sweep_values"] = _list("sweep_values", items["sweep_values"], float)
    return ExperimentSettings(**kwargs)


def load_run_config(
    path: Path | None = None,
    overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> RunConfig:
    """Build a RunConfig from an optional file, then command-line overrides.

    ``overrides`` maps RunConfig/model/experiment field names to values; keys
    whose value is None are ignored. ``SEED`` in the environment applies only
    when neither the file nor the overrides set a seed.
    """
    sections = read_config_file(path) if path is not None else {}
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    environ = os.environ if environ is None else environ

    run = sections.get("run", {})
    kwargs: dict[str, Any] = {}
    if "alpha" in run:
        kwargs["alpha"] = _float("alpha", run["alpha"])
    if "transform" in run:
        kwargs["transform"] = run["transform"].strip()
    if "seed" in run:
        kwargs["seed"] = _int("seed", run["seed"])
    if "slope_window" in run:
        kwargs["slope_window"] = parse_slope_window(run["slope_window"])
    if "date_column" in run:
        kwargs["date_column"] = _optional_column(run["date_column"])
    if "value_column" in run:
        kwargs["value_column"] = run["value_column"].strip()

    model_items = sections.get("model", {})
    model = ModelSpec(
        mu=_float("mu", model_items.get("mu", "0")),
        sigma=_float("sigma", model_items.get("sigma", "1")),
        n=_int("n", model_items.get("n", "1000")),
        jumps=parse_jump_model(sections.get("jumps", {})),
    )
    experiment = _experiment_settings(sections.get("experiment", {}))

    for key in ("alpha", "transform", "seed", "value_column"):
        if key in overrides:
            kwargs[key] = overrides[key]
    if "slope_window" in overrides:
        kwargs["slope_window"] = parse_slope_window(overrides["slope_window"])
    if "date_column" in overrides:
        kwargs["date_column"] = _optional_column(str(overrides["date_column"]))
    model_overrides = {k: overrides[k] for k in ("mu", "sigma", "n") if k in overrides}
    if model_overrides:
        model = replace(model, **model_overrides)
    experiment_overrides = {
        k: overrides[k]
        for k in ("n_values", "replications", "workers", "sweep")
        if k in overrides
    }
    if experiment_overrides:
        experiment = replace(experiment, **experiment_overrides)

    if "seed" not in kwargs and SEED_ENV in environ:
        kwargs["seed"] = _int(SEED_ENV, environ[SEED_ENV])

    return RunConfig(
        model=model,
        jumps_configured="jumps" in sections,
        experiment=experiment,
        **kwargs,
    )


# -- experiment plans --------------------------------------------------------


def _plan_overrides(config: RunConfig, full: bool) -> dict[str, Any]:
    exp = config.experiment
    out: dict[str, Any] = {
        "alpha": config.alpha,
        "base_seed": config.base_seed,
        "workers": exp.workers,
        "slope_window": config.slope_window,
    }
    if exp.scenario is not None:
        out["scenario"] = exp.scenario
    if exp.n_values is not None:
        out["n_values"] = exp.n_values
    if full:
        out["replications"] = exp.full_replications
    elif exp.replications is not None:
        out["replications"] = exp.replications
    if exp.tests is not None:
        out["tests"] = exp.tests
    return out


def _grid_models(config: RunConfig) -> tuple[JumpModel, ...]:
    base = config.model.jumps
    grid = config.experiment.jump_grid
    if grid is None:
        return (base,)
    if base.kind == "bernoulli":
        return tuple(replace(base, prob_per_step=v) for v in grid)
    if base.kind in ("constant", "compound_poisson"):
        return tuple(replace(base, lam=v) for v in grid)
    raise ConfigError("jump_grid needs a [jumps] section with an intensity to vary")


def level_plan(config: RunConfig, full: bool = False) -> ExperimentPlan:
    overrides = _plan_overrides(config, full)
    if config.jumps_configured:
        overrides.update(mu=config.model.mu, sigma=config.model.sigma)
    return level_study_plan(full=full, **overrides)


def power_plan(config: RunConfig, full: bool = False) -> ExperimentPlan:
    """Default power grid unless the config file describes its own jump law."""
    overrides = _plan_overrides(config, full)
    if config.jumps_configured:
        overrides.update(
            jump_models=_grid_models(config),
            mu=config.model.mu,
            sigma=config.model.sigma,
        )
    return power_study_plan(full=full, **overrides)


def curve_plan(config: RunConfig, full: bool = False) -> ExperimentPlan:
    exp = config.experiment
    if exp.sweep is None:
        raise ConfigError("power-curve needs a sweep ('tau' or 'eta')")
    overrides = _plan_overrides(config, full)
    n_values = overrides.pop("n_values", None)
    kwargs: dict[str, Any] = {"values": exp.sweep_values}
    if n_values is not None:
        if len(n_values) != 1:
            raise ConfigError("power-curve runs at a single n")
        kwargs["n"] = n_values[0]
    if config.model.jumps.is_poisson:
        kwargs["lam"] = config.model.jumps.lam
    return power_curve_plan(exp.sweep, **kwargs, **overrides)
