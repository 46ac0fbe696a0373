"""Tests for the CSV series reader."""

from __future__ import annotations

import logging
import math
import os
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from ecf_jumps.ecf import IncrementSample
from ecf_jumps.errors import (
    ConfigError,
    CsvFormatError,
    NonFiniteInputError,
    NonPositivePriceError,
    TooFewObservationsError,
)
from ecf_jumps.exporter import write_path_csv
from ecf_jumps.extractor import PriceSeries, load_csv
from ecf_jumps.inference import Decision, jump_test
from ecf_jumps.simulate import JumpModel, ModelSpec, SizeLaw, simulate_path


def write_series(tmp_path: Path, values: list[str], dates: list[str] | None = None) -> Path:
    if dates is None:
        dates = [d.strftime("%Y-%m-%d") for d in pd.date_range("2015-01-01", periods=len(values))]
    path = tmp_path / "series.csv"
    lines = ["DATE,SP500", *(f"{d},{v}" for d, v in zip(dates, values, strict=True))]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestLoadCsv:
    def test_small_file(self, tmp_path: Path) -> None:
        series = load_csv(write_series(tmp_path, ["100", "110", "121", "133.1"]))
        assert len(series) == 4
        assert series.skipped == 0
        assert series.dates is not None
        assert series.dates[0] == np.datetime64("2015-01-01")
        np.testing.assert_allclose(series.increments(), [math.log(1.1)] * 3)

    def test_blank_value_is_skipped(self, tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
        values = [str(1000 + i) for i in range(1000)]
        values[500] = ""
        with caplog.at_level(logging.WARNING, logger="ecf_jumps"):
            series = load_csv(write_series(tmp_path, values))
        assert len(series) == 999
        assert series.skipped == 1
        assert "skipped 1 row" in caplog.text

    def test_dot_marks_a_missing_value(self, tmp_path: Path) -> None:
        series = load_csv(write_series(tmp_path, ["100", ".", "101", "102"]))
        np.testing.assert_array_equal(series.values, [100.0, 101.0, 102.0])
        assert series.skipped == 1

    def test_a_few_bad_rows_are_tolerated(self, tmp_path: Path) -> None:
        values = [str(100 + i) for i in range(100)]
        for i in range(5):
            values[10 + i] = "n/a"
        series = load_csv(write_series(tmp_path, values))
        assert len(series) == 95
        assert series.skipped == 5

    def test_too_many_bad_rows(self, tmp_path: Path) -> None:
        values = [str(100 + i) for i in range(100)]
        for i in range(6):
            values[10 + i] = "n/a"
        with pytest.raises(CsvFormatError, match="unparseable"):
            load_csv(write_series(tmp_path, values))

    def test_dates_must_increase(self, tmp_path: Path) -> None:
        path = write_series(
            tmp_path, ["1", "2", "3"], dates=["2020-01-02", "2020-01-01", "2020-01-03"]
        )
        with pytest.raises(CsvFormatError, match="increasing"):
            load_csv(path)

    def test_missing_column(self, tmp_path: Path) -> None:
        path = write_series(tmp_path, ["1", "2", "3"])
        with pytest.raises(CsvFormatError, match="CLOSE"):
            load_csv(path, value_column="CLOSE")

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "absent.csv")

    def test_non_positive_price(self, tmp_path: Path) -> None:
        path = write_series(tmp_path, ["1", "0", "3"])
        with pytest.raises(NonPositivePriceError):
            load_csv(path)
        assert len(load_csv(path, transform="raw_diff")) == 3

    def test_too_few_rows(self, tmp_path: Path) -> None:
        with pytest.raises(TooFewObservationsError):
            load_csv(write_series(tmp_path, ["1", "2"]))

    def test_simulated_path_round_trip(self, tmp_path: Path) -> None:
        spec = ModelSpec(mu=2.0, n=300, jumps=JumpModel.compound_poisson(3.0, SizeLaw.normal(1.0, 0.5)))
        path = simulate_path(spec, 12)
        target = tmp_path / "path.csv"
        write_path_csv(path, spec, target)
        series = load_csv(target, date_column=None, value_column="value", transform="raw_diff")
        np.testing.assert_array_equal(series.values, path.values)
        assert series.dates is None
        in_memory = jump_test(IncrementSample.from_increments(path.increments))
        assert jump_test(series.sample()).to_dict() == in_memory.to_dict()


class TestPriceSeries:
    def test_non_finite(self) -> None:
        with pytest.raises(NonFiniteInputError):
            PriceSeries(np.array([1.0, np.nan, 2.0]), "raw_diff")

    def test_raw_observations(self) -> None:
        series = PriceSeries(np.array([1.0, 4.0, 2.0]), "raw_diff")
        np.testing.assert_array_equal(series.increments(), [3.0, -2.0])
        assert series.sample().n == 2

    def test_between_dates(self, tmp_path: Path) -> None:
        series = load_csv(write_series(tmp_path, [str(100 + i) for i in range(10)]))
        window = series.between("2015-01-03", "2015-01-07")
        np.testing.assert_array_equal(window.values, [102.0, 103.0, 104.0, 105.0, 106.0])
        assert window.transform == "log_diff"
        assert window.dates is not None and window.dates[-1] == np.datetime64("2015-01-07")

    def test_between_needs_dates(self) -> None:
        with pytest.raises(ConfigError):
            PriceSeries(np.array([1.0, 2.0, 3.0]), "raw_diff").between("2015-01-01", "2015-12-31")


SP500_CSV = Path(os.environ.get("ECF_JUMPS_SP500", "data/SP500.csv"))


@pytest.mark.skipif(not SP500_CSV.is_file(), reason="S&P 500 daily closes not available")
class TestSp500CaseStudy:
    @pytest.mark.parametrize(
        ("start", "end", "p_n", "decision", "covers_half"),
        [
            ("1996-01-01", "2000-12-31", 0.479, Decision.NO_JUMPS, True),
            ("2006-01-01", "2010-12-31", 0.237, Decision.JUMPS, False),
        ],
        ids=["1996-2000", "2006-2010"],
    )
    def test_daily_window(
        self, start: str, end: str, p_n: float, decision: Decision, covers_half: bool
    ) -> None:
        window = load_csv(SP500_CSV).between(start, end)
        result = jump_test(window.sample())
        assert result.n == len(window) - 1
        assert result.p_n == pytest.approx(p_n, abs=0.02)
        assert result.decision is decision
        assert result.ci_lower is not None and result.ci_upper is not None
        assert (result.ci_lower <= 0.5 <= result.ci_upper) is covers_half

        raw = jump_test(replace(window, transform="raw_diff").sample())
        assert raw.n == result.n
        assert 0.0 < raw.p_n < 1.0
