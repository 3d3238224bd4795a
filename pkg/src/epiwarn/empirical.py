"""Empirical incidence ingestion, effective-reproduction-number estimation,
and the empirical outbreak / non-outbreak labeling rules.

The estimator is the renewal-equation (infection pressure) form: the
serial interval is discretized to daily weights, each day's expected
pressure is the weight-convolved incidence history, and a gamma
prior/posterior over a trailing window gives the point estimate and
credible bounds.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date as Date
from datetime import timedelta
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.stats import gamma as gamma_dist

from .windows import LABEL_N, LABEL_T, LabeledWindow

__all__ = [
    "IncidenceSeries",
    "SerialInterval",
    "ReSeries",
    "DataConsistencyError",
    "load_incidence",
    "load_cumulative",
    "weekly_to_daily",
    "impute_linear",
    "prevalence_from_cumulative",
    "discretize_serial_interval",
    "estimate_re",
    "label_empirical_T",
    "label_empirical_N",
    "truncate_tail",
    "scale_counts",
    "re_to_csv",
]


class DataConsistencyError(ValueError):
    pass


@dataclass(frozen=True)
class IncidenceSeries:
    """Dated counts; NaN marks a missing observation awaiting imputation."""

    dates: tuple[Date, ...]
    counts: np.ndarray
    cadence: str = "daily"  # "daily" | "weekly"

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != len(counts):
            raise ValueError("dates and counts must align")
        if self.cadence not in ("daily", "weekly"):
            raise ValueError(f"unknown cadence {self.cadence!r}")
        for a, b in zip(self.dates, self.dates[1:]):
            if b <= a:
                raise ValueError(f"dates must be strictly increasing ({a} !< {b})")
        present = counts[~np.isnan(counts)]
        if (present < 0).any():
            raise ValueError("counts must be >= 0")

    def __len__(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class SerialInterval:
    mean: float
    sd: float

    def __post_init__(self):
        if self.mean <= 0 or self.sd <= 0:
            raise ValueError("serial interval mean and sd must be > 0")


@dataclass(frozen=True)
class ReSeries:
    """Per-day posterior mean and central 95% bounds; NaN where undefined."""

    dates: tuple[Date, ...]
    re_mean: np.ndarray
    re_lo: np.ndarray
    re_hi: np.ndarray


def _parse_count(text: str, line: int, path) -> float:
    text = text.strip()
    if text == "":
        return math.nan
    try:
        value = float(text)
    except ValueError as exc:
        raise ValueError(f"{path}:{line}: bad count {text!r}") from exc
    return value


def _parse_date(text: str, line: int, path) -> Date:
    try:
        return Date.fromisoformat(text.strip())
    except ValueError as exc:
        raise ValueError(f"{path}:{line}: bad date {text!r}") from exc


def _check_dates(dates: Sequence[Date], path) -> None:
    for i, (a, b) in enumerate(zip(dates, dates[1:])):
        if b == a:
            raise ValueError(f"{path}: duplicate date {a}")
        if b < a:
            raise ValueError(f"{path}: dates not sorted at {b}")


def load_incidence(path: str | Path, cadence: str = "daily") -> IncidenceSeries:
    """Read a date,count CSV (ISO-8601 dates; empty count = missing)."""
    path = Path(path)
    dates, counts = [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["date", "count"]:
            raise ValueError(f"{path}: expected header date,count")
        for line, row in enumerate(reader, start=2):
            if len(row) < 2:
                raise ValueError(f"{path}:{line}: expected 2 columns")
            dates.append(_parse_date(row[0], line, path))
            counts.append(_parse_count(row[1], line, path))
    _check_dates(dates, path)
    return IncidenceSeries(tuple(dates), np.array(counts), cadence)


def load_cumulative(path: str | Path) -> tuple[IncidenceSeries, IncidenceSeries, IncidenceSeries]:
    """Read date,cumulative,deaths,recovered; returns the three aligned series."""
    path = Path(path)
    dates, cum, dead, rec = [], [], [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["date", "cumulative", "deaths", "recovered"]
        if header is None or [h.strip().lower() for h in header[:4]] != expected:
            raise ValueError(f"{path}: expected header {','.join(expected)}")
        for line, row in enumerate(reader, start=2):
            if len(row) < 4:
                raise ValueError(f"{path}:{line}: expected 4 columns")
            dates.append(_parse_date(row[0], line, path))
            cum.append(_parse_count(row[1], line, path))
            dead.append(_parse_count(row[2], line, path))
            rec.append(_parse_count(row[3], line, path))
    _check_dates(dates, path)
    dates = tuple(dates)
    return (
        IncidenceSeries(dates, np.array(cum)),
        IncidenceSeries(dates, np.array(dead)),
        IncidenceSeries(dates, np.array(rec)),
    )


def weekly_to_daily(series: IncidenceSeries) -> IncidenceSeries:
    """Spread each weekly count evenly over its seven days.

    The seventh day absorbs the float remainder so the weekly total is
    conserved exactly.
    """
    if series.cadence != "weekly":
        raise ValueError("weekly_to_daily expects a weekly series")
    if np.isnan(series.counts).any():
        raise ValueError("impute missing weekly counts before smoothing")
    dates: list[Date] = []
    counts: list[float] = []
    for day0, w in zip(series.dates, series.counts):
        w = float(w)
        per_day = w / 7.0
        # the seventh day absorbs the exact rational remainder (<= 1 ulp),
        # so each week's true sum is w and totals are conserved exactly
        last = float(Fraction(w) - 6 * Fraction(per_day))
        for k in range(7):
            dates.append(day0 + timedelta(days=k))
            counts.append(per_day if k < 6 else last)
    _check_dates(dates, "<weekly expansion>")
    return IncidenceSeries(tuple(dates), np.array(counts), "daily")


def impute_linear(series: IncidenceSeries) -> IncidenceSeries:
    """Fill interior missing runs by linear interpolation between neighbors."""
    counts = series.counts
    missing = np.isnan(counts)
    if not missing.any():
        return series
    if missing[0] or missing[-1]:
        raise ValueError("cannot impute missing endpoints")
    idx = np.arange(len(counts), dtype=float)
    filled = counts.copy()
    filled[missing] = np.interp(idx[missing], idx[~missing], counts[~missing])
    return IncidenceSeries(series.dates, filled, series.cadence)


def prevalence_from_cumulative(
    cum: IncidenceSeries, deaths: IncidenceSeries, recovered: IncidenceSeries
) -> IncidenceSeries:
    """Active cases: cumulative minus deaths minus recovered, elementwise."""
    if not (cum.dates == deaths.dates == recovered.dates):
        raise ValueError("series must share identical dates")
    prevalence = cum.counts - deaths.counts - recovered.counts
    bad = np.flatnonzero(prevalence < 0)
    if len(bad):
        raise DataConsistencyError(
            f"negative prevalence on {cum.dates[bad[0]]}: "
            f"{cum.counts[bad[0]]} - {deaths.counts[bad[0]]} - {recovered.counts[bad[0]]}"
        )
    return IncidenceSeries(cum.dates, prevalence, cum.cadence)


def discretize_serial_interval(si: SerialInterval, support: int = 60) -> np.ndarray:
    """Daily weights w[1..support] from a gamma with the interval's mean and sd.

    Day s takes the gamma mass of (s - 1/2, s + 1/2]; the result is
    renormalized so the weights sum to one.  Index 0 is zero (a case
    cannot infect on its own day).
    """
    shape = (si.mean / si.sd) ** 2
    scale = si.sd**2 / si.mean
    edges = np.arange(support + 1) + 0.5  # 0.5 .. support+0.5
    cdf = gamma_dist.cdf(edges, a=shape, scale=scale)
    w = np.concatenate([[0.0], np.diff(cdf)])  # w[s] covers (s-1/2, s+1/2]
    total = w.sum()
    if total <= 0:
        raise ValueError("serial-interval support too short for the given gamma")
    return w / total


def estimate_re(
    series: IncidenceSeries,
    si: SerialInterval,
    window: int = 7,
    prior_shape: float = 1.0,
    prior_scale: float = 5.0,
    support: int = 60,
) -> ReSeries:
    """Posterior reproduction number over trailing windows.

    For each day t with a full trailing window, the gamma posterior has
    shape ``prior_shape + sum(I)`` and rate ``1/prior_scale + sum(L)``
    where L is the weight-convolved infection pressure.  Days with zero
    window pressure stay undefined.
    """
    if series.cadence != "daily":
        raise ValueError("reproduction-number estimation needs a daily series")
    counts = series.counts
    n = len(counts)
    if np.isnan(counts).any():
        raise ValueError("impute missing values before estimation")
    if n < window + 2:
        raise ValueError(f"need at least {window + 2} days, got {n}")
    w = discretize_serial_interval(si, support)
    pressure = np.convolve(counts, w)[:n]  # pressure[t] = sum_s counts[t-s] w[s]
    if pressure.sum() == 0:
        raise ValueError("zero infection pressure everywhere (all-zero incidence?)")

    mean = np.full(n, np.nan)
    lo = np.full(n, np.nan)
    hi = np.full(n, np.nan)
    csum_i = np.concatenate([[0.0], np.cumsum(counts)])
    csum_l = np.concatenate([[0.0], np.cumsum(pressure)])
    for t in range(window, n):  # 0-based end day; window days t-window+1..t all have history
        sum_i = csum_i[t + 1] - csum_i[t + 1 - window]
        sum_l = csum_l[t + 1] - csum_l[t + 1 - window]
        if sum_l == 0:
            continue
        shape = prior_shape + sum_i
        rate = 1.0 / prior_scale + sum_l
        mean[t] = shape / rate
        lo[t], hi[t] = gamma_dist.ppf([0.025, 0.975], a=shape, scale=1.0 / rate)
    return ReSeries(series.dates, mean, lo, hi)


def _below_one_runs(re_mean: np.ndarray) -> list[tuple[int, int]]:
    below = np.nan_to_num(re_mean, nan=np.inf) < 1.0
    runs = []
    start = None
    for i, flag in enumerate(below):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(below) - 1))
    return runs


def label_empirical_T(
    series: IncidenceSeries, re: ReSeries, min_len: int = 14
) -> list[LabeledWindow]:
    """Windows of sub-threshold estimates bracketed by super-threshold days.

    Each maximal run with the estimate below one throughout, at least one
    day at or above one immediately before and after, and length >=
    min_len becomes an outbreak-precursor (T) window of incidence values.
    """
    if re.dates != series.dates:
        raise ValueError("estimate must be aligned to the series")
    out = []
    n = len(series)
    for k0, k in _below_one_runs(re.re_mean):
        if k0 == 0 or k == n - 1:
            continue  # no bracketing crossing on that side
        if not (re.re_mean[k0 - 1] >= 1.0 and re.re_mean[k + 1] >= 1.0):
            continue
        if k - k0 + 1 < min_len:
            continue
        out.append(
            LabeledWindow(
                values=series.counts[k0 : k + 1],
                label=LABEL_T,
                source_id=f"T-{series.dates[k0].isoformat()}-{series.dates[k].isoformat()}",
                gap=0,
            )
        )
    return out


def label_empirical_N(
    series: IncidenceSeries,
    re: ReSeries,
    n_windows: int = 1200,
    min_len: int = 8,
    rng: Optional[np.random.Generator] = None,
) -> list[LabeledWindow]:
    """Random sub-windows of the final all-subcritical stretch, labeled N."""
    if re.dates != series.dates:
        raise ValueError("estimate must be aligned to the series")
    if rng is None:
        rng = np.random.default_rng(0)
    below = np.nan_to_num(re.re_mean, nan=np.inf) < 1.0
    not_below = np.flatnonzero(~below)
    start = int(not_below[-1]) + 1 if len(not_below) else 0
    n = len(series)
    suffix_len = n - start
    if suffix_len < min_len:
        raise ValueError(
            f"no qualifying suffix: {suffix_len} sub-threshold days at the end, need >= {min_len}"
        )
    out = []
    for i in range(n_windows):
        length = int(rng.integers(min_len, suffix_len + 1))
        s = int(rng.integers(start, n - length + 1))
        out.append(
            LabeledWindow(
                values=series.counts[s : s + length],
                label=LABEL_N,
                source_id=f"N-{i:04d}",
                gap=0,
            )
        )
    return out


def truncate_tail(window: LabeledWindow, days: int = 7) -> LabeledWindow:
    """Drop the last ``days`` points (lead-time variant)."""
    if window.length <= days:
        raise ValueError(f"window of length {window.length} cannot lose {days} points")
    return LabeledWindow(
        values=window.values[:-days], label=window.label, source_id=window.source_id, gap=window.gap
    )


def scale_counts(window: LabeledWindow, factor: float = 5.0) -> LabeledWindow:
    """Multiply every value by ``factor`` (under-ascertainment variant)."""
    if factor <= 0:
        raise ValueError("factor must be > 0")
    return LabeledWindow(
        values=window.values * factor, label=window.label, source_id=window.source_id, gap=window.gap
    )


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def re_to_csv(re: ReSeries, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "re_mean", "re_lo", "re_hi"])
        for d, m, lo, hi in zip(re.dates, re.re_mean, re.re_lo, re.re_hi):
            writer.writerow([d.isoformat(), _fmt(m), _fmt(lo), _fmt(hi)])
