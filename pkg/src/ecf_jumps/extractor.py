"""Read price or path series from CSV files."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from ecf_jumps.config import TRANSFORMS, Transform
from ecf_jumps.ecf import IncrementSample
from ecf_jumps.errors import (
    ConfigError,
    CsvFormatError,
    NonFiniteInputError,
    NonPositivePriceError,
    TooFewObservationsError,
)

logger = logging.getLogger(__name__)

# FRED writes "." for a missing observation.
MISSING_MARKERS = frozenset({"", "."})
MAX_BAD_FRACTION = 0.05


@dataclass(frozen=True, eq=False)
class PriceSeries:
    values: np.ndarray
    transform: Transform
    dates: np.ndarray | None = None
    skipped: int = 0

    def __post_init__(self) -> None:
        if self.transform not in TRANSFORMS:
            raise ConfigError(f"unknown transform {self.transform!r}")
        if self.values.shape[0] < 3:
            raise TooFewObservationsError(
                f"Need at least 3 observations, got {self.values.shape[0]}"
            )
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteInputError("Series contains NaN or infinite values")
        if self.transform == "log_diff" and np.any(self.values <= 0):
            raise NonPositivePriceError("log_diff needs strictly positive values")
        if self.dates is not None:
            if self.dates.shape != self.values.shape:
                raise CsvFormatError("dates and values differ in length")
            if np.any(np.diff(self.dates) <= np.timedelta64(0)):
                raise CsvFormatError("dates are not strictly increasing")

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def observations(self) -> np.ndarray:
        """The path the increments are taken from: log prices or raw values."""
        if self.transform == "log_diff":
            return np.log(self.values)
        return self.values

    def increments(self) -> np.ndarray:
        return np.diff(self.observations())

    def sample(self) -> IncrementSample:
        return IncrementSample.from_increments(self.increments())

    def between(self, start: str, end: str) -> PriceSeries:
        """Observations dated from ``start`` to ``end``, both inclusive."""
        if self.dates is None:
            raise ConfigError("series has no dates to select a window from")
        lo = np.datetime64(start, "ns")
        hi = np.datetime64(end, "ns")
        keep = (self.dates >= lo) & (self.dates <= hi)
        return PriceSeries(
            values=self.values[keep], transform=self.transform, dates=self.dates[keep]
        )


def _to_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return float("nan")


def load_csv(
    path: str | Path,
    date_column: str | None = "DATE",
    value_column: str = "SP500",
    transform: Transform = "log_diff",
    max_bad_fraction: float = MAX_BAD_FRACTION,
) -> PriceSeries:
    """Load a dated (or undated) series from a comma-separated file.

    Rows whose value is blank or ``.`` are skipped. Other unparseable rows
    are skipped too while they stay within ``max_bad_fraction`` of the file;
    beyond that the file is rejected.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Input file not found: {path}")
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, skipinitialspace=True, encoding="utf-8"
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise CsvFormatError(f"{path}: {exc}") from None

    needed = [c for c in (date_column, value_column) if c is not None]
    missing_cols = [c for c in needed if c not in frame.columns]
    if missing_cols:
        raise CsvFormatError(
            f"{path}: missing column(s) {', '.join(missing_cols)}; "
            f"found {', '.join(map(str, frame.columns))}"
        )

    raw = frame[value_column].str.strip()
    blank = raw.isin(MISSING_MARKERS)
    values = raw.map(_to_float)
    bad = ~blank & ~np.isfinite(values)

    dates = None
    if date_column is not None:
        parsed = pd.to_datetime(frame[date_column].str.strip(), errors="coerce", format="ISO8601")
        bad |= ~blank & parsed.isna()
        dates = parsed

    n_bad = int(bad.sum())
    if len(frame) and n_bad > max_bad_fraction * len(frame):
        raise CsvFormatError(
            f"{path}: {n_bad} of {len(frame)} rows are unparseable "
            f"(limit {max_bad_fraction:.0%})"
        )

    keep = ~(blank | bad)
    skipped = int((~keep).sum())
    if skipped:
        logger.warning("%s: skipped %d row(s) with missing or unparseable values", path, skipped)

    date_array = None
    if dates is not None:
        date_array = dates[keep].to_numpy(dtype="datetime64[ns]")
    return PriceSeries(
        values=values[keep].to_numpy(dtype=np.float64),
        transform=transform,
        dates=date_array,
        skipped=skipped,
    )
