"""Tests for INI plan files and option layering."""

from __future__ import annotations

from pathlib import Path

import pytest

from ecf_jumps.config import (
    RunConfig,
    curve_plan,
    level_plan,
    load_run_config,
    parse_jump_model,
    parse_slope_window,
    power_plan,
    read_config_file,
)
from ecf_jumps.errors import ConfigError

PLAN = """\
[run]
alpha = 0.01
transform = raw_diff
seed = 17
slope_window = 12
date_column = none
value_column = value

[model]
mu = 2
sigma = 0.5
n = 800

[jumps]
kind = compound_poisson
lam = 0.4
size_law = normal
tau = 10
eta_var = 2

[experiment]
scenario = custom
n_values = 500, 1000
replications = 50
workers = 3
tests = cluster
jump_grid = 0.1; 0.2; 0.4
"""


def write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "plan.ini"
    path.write_text(text, encoding="utf-8")
    return path


class TestReadConfigFile:
    def test_reads_sections(self, tmp_path: Path) -> None:
        sections = read_config_file(write(tmp_path, PLAN))
        assert set(sections) == {"run", "model", "jumps", "experiment"}
        assert sections["run"]["alpha"] == "0.01"

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="not found"):
            read_config_file(tmp_path / "nope.ini")

    def test_unknown_section(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match=r"unknown section \[output\]"):
            read_config_file(write(tmp_path, "[output]\npath = x\n"))

    def test_unknown_key(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="colour"):
            read_config_file(write(tmp_path, "[run]\ncolour = red\n"))

    def test_malformed_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError):
            read_config_file(write(tmp_path, "alpha = 0.1\n"))


class TestLoadRunConfig:
    def test_defaults(self) -> None:
        config = load_run_config(environ={})
        assert config == RunConfig()
        assert config.base_seed == 0
        assert config.seed is None

    def test_file_values(self, tmp_path: Path) -> None:
        config = load_run_config(write(tmp_path, PLAN), environ={})
        assert config.alpha == 0.01
        assert config.transform == "raw_diff"
        assert config.seed == 17
        assert config.slope_window == 12
        assert config.date_column is None
        assert config.value_column == "value"
        assert config.model.n == 800
        assert config.model.jumps.lam == 0.4
        assert config.jumps_configured
        assert config.experiment.n_values == (500, 1000)
        assert config.experiment.jump_grid == (0.1, 0.2, 0.4)

    def test_overrides_beat_the_file(self, tmp_path: Path) -> None:
        config = load_run_config(
            write(tmp_path, PLAN),
            overrides={"alpha": 0.1, "seed": 3, "replications": 7, "transform": None},
            environ={},
        )
        assert config.alpha == 0.1
        assert config.seed == 3
        assert config.experiment.replications == 7
        assert config.transform == "raw_diff"

    def test_seed_environment_is_a_fallback(self, tmp_path: Path) -> None:
        assert load_run_config(environ={"SEED": "99"}).seed == 99
        assert load_run_config(write(tmp_path, PLAN), environ={"SEED": "99"}).seed == 17
        assert load_run_config(overrides={"seed": 4}, environ={"SEED": "99"}).seed == 4

    @pytest.mark.parametrize(
        "text",
        [
            "[run]\nalpha = 1.5\n",
            "[run]\nalpha = high\n",
            "[run]\ntransform = pct_change\n",
            "[run]\nseed = -1\n",
            "[experiment]\ntests = cluster, bpv\n",
            "[experiment]\nsweep = lam\n",
            "[experiment]\nn_values = ,\n",
        ],
    )
    def test_invalid_values(self, tmp_path: Path, text: str) -> None:
        with pytest.raises(ConfigError):
            load_run_config(write(tmp_path, text), environ={})


class TestParsers:
    def test_slope_window(self) -> None:
        assert parse_slope_window("auto") == "auto"
        assert parse_slope_window(" AUTO ") == "auto"
        assert parse_slope_window("7") == 7
        with pytest.raises(ConfigError):
            parse_slope_window("0")

    def test_jump_models(self) -> None:
        assert parse_jump_model({}).kind == "none"
        constant = parse_jump_model({"kind": "constant", "h": "3", "lam": "2"})
        assert (constant.size_law.h, constant.lam) == (3.0, 2.0)
        de = parse_jump_model(
            {"kind": "bernoulli", "prob_per_step": "0.1", "size_law": "double_exponential", "location": "4"}
        )
        assert de.prob_per_step == 0.1
        assert de.size_law.kind == "double_exponential"
        assert de.size_law.location == 4.0

    @pytest.mark.parametrize(
        "items",
        [{"kind": "levy"}, {"kind": "compound_poisson", "size_law": "cauchy"}, {"kind": "compound_poisson", "lam": "-1"}],
    )
    def test_bad_jump_models(self, items: dict[str, str]) -> None:
        with pytest.raises(ConfigError):
            parse_jump_model(items)


class TestPlans:
    def test_level_plan_defaults(self) -> None:
        plan = level_plan(load_run_config(overrides={"seed": 8}, environ={}))
        assert plan.scenario == "level-grid"
        assert plan.base_seed == 8
        assert plan.replications == 2000

    def test_full_replications(self) -> None:
        plan = level_plan(load_run_config(environ={}), full=True)
        assert plan.replications == 10000

    def test_power_plan_from_jump_grid(self, tmp_path: Path) -> None:
        plan = power_plan(load_run_config(write(tmp_path, PLAN), environ={}))
        assert plan.scenario == "custom"
        assert [jm.lam for jm in plan.jump_models] == [0.1, 0.2, 0.4]
        assert plan.n_values == (500, 1000)
        assert plan.mu == 2.0 and plan.sigma == 0.5
        assert plan.replications == 50
        assert plan.workers == 3
        assert plan.alpha == 0.01
        assert plan.slope_window == 12

    def test_power_plan_defaults_to_the_power_grid(self) -> None:
        plan = power_plan(load_run_config(environ={}))
        assert len(plan.jump_models) == 4

    def test_curve_plan(self) -> None:
        config = load_run_config(overrides={"sweep": "eta", "n_values": (1000,)}, environ={})
        plan = curve_plan(config)
        assert plan.sweep == "eta"
        assert plan.n_values == (1000,)
        assert len(plan.jump_models) == 7

    def test_curve_plan_needs_a_sweep(self) -> None:
        with pytest.raises(ConfigError):
            curve_plan(load_run_config(environ={}))

    def test_curve_plan_runs_at_one_n(self) -> None:
        config = load_run_config(overrides={"sweep": "tau", "n_values": (100, 200)}, environ={})
        with pytest.raises(ConfigError):
            curve_plan(config)
