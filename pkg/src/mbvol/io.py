"""Tick-data ingestion and previous-tick regularisation onto the grid ``i/n``."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import LoadError
from .simulate import Observations


@dataclass(frozen=True)
class TickSeries:
    timestamps: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        if len(self.timestamps) != len(self.prices):
            raise ValueError("timestamps and prices differ in length")
        if len(self.timestamps) < 2:
            raise ValueError("need at least two ticks")
        if np.any(np.diff(self.timestamps) <= 0):
            raise ValueError("timestamps must be strictly increasing")


def _parse_time(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return datetime.fromisoformat(text.strip()).timestamp()


def load_ticks(
    path: str | Path,
    time_col: str = "t",
    price_col: str = "price",
    require_positive: bool = True,
) -> TickSeries:
    """Read a delimited text file with a header row.

    Timestamps may be numbers or ISO-8601 strings. Rows must be strictly
    increasing in time; prices must be positive unless ``require_positive``
    is off (e.g. for series that already hold log prices).

    Raises
    ------
    LoadError
        On missing columns, unparseable values or non-monotone time. The
        message carries the 1-based line number.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise LoadError(f"cannot open {path}: {exc}") from exc
    with fh:
        sample = fh.read(4096)
        fh.seek(0)
        if not sample.strip():
            raise LoadError(f"{path}: file is empty")
        try:
            dialect = csv.Sniffer().sniff(sample, delimiters=",;\t")
        except csv.Error:
            dialect = csv.excel
        reader = csv.reader(fh, dialect)
        header = [h.strip() for h in next(reader)]
        missing = [c for c in (time_col, price_col) if c not in header]
        if missing:
            raise LoadError(f"{path}:1: missing column(s) {missing}; header is {header}")
        ti, pi = header.index(time_col), header.index(price_col)
        times, prices = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            try:
                t = _parse_time(row[ti])
                p = float(row[pi])
            except (IndexError, ValueError) as exc:
                raise LoadError(f"{path}:{line}: cannot parse row {row!r}") from exc
            if not math.isfinite(p) or (require_positive and p <= 0):
                raise LoadError(f"{path}:{line}: invalid price {row[pi]!r}")
            if times and t <= times[-1]:
                raise LoadError(f"{path}:{line}: timestamp {row[ti]!r} does not increase")
            times.append(t)
            prices.append(p)
    if len(times) < 2:
        raise LoadError(f"{path}: need at least two ticks, found {len(times)}")
    return TickSeries(np.array(times), np.array(prices))


def regularize(
    ticks: TickSeries,
    n: int,
    transform: str = "log",
    min_density: float = 1.0,
) -> Observations:
    """Previous-tick sampling on ``i/n``, ``i = 0..n``, after mapping the tick
    time span onto [0, 1].

    Each grid point takes the last tick at or before it; the first grid point
    takes the first tick. Warns when there are fewer than ``min_density``
    ticks per grid interval.
    """
    if n < 16:
        raise ValueError(f"n must be at least 16, got {n}")
    if transform not in ("log", "raw"):
        raise ValueError(f"transform must be 'log' or 'raw', got {transform!r}")
    t = ticks.timestamps
    s = (t - t[0]) / (t[-1] - t[0])
    if len(t) - 1 < min_density * n:
        warnings.warn(
            f"only {len(t)} ticks for {n} grid intervals; previous-tick sampling will repeat values",
            RuntimeWarning,
            stacklevel=2,
        )
    grid = np.arange(n + 1) / n
    # tolerance so that ticks sitting on the grid are not lost to rounding in s
    idx = np.searchsorted(s, grid + 1e-9 / n, side="right") - 1
    idx = np.clip(idx, 0, len(t) - 1)
    p = ticks.prices[idx]
    if transform == "log":
        if np.any(p <= 0):
            raise ValueError("log transform needs positive prices")
        p = np.log(p)
    y = np.array(p, dtype=float)
    y.setflags(write=False)
    return Observations(n=n, y=y)
