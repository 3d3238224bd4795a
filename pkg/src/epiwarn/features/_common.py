"""Shared numeric helpers for the feature extractors."""

from __future__ import annotations

import numpy as np

__all__ = ["DegenerateSeriesError", "z_normalize", "acf", "first_zero_ac"]


class DegenerateSeriesError(ValueError):
    """The input series does not support the requested computation (e.g. constant)."""


def z_normalize(series) -> np.ndarray:
    """Center to mean 0 and scale to sample (N-1) standard deviation 1."""
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a 1-d series")
    if len(x) < 2:
        raise DegenerateSeriesError("need at least 2 points to z-normalize")
    if not np.isfinite(x).all():
        raise DegenerateSeriesError("series contains non-finite values")
    sd = x.std(ddof=1)
    if sd == 0:
        raise DegenerateSeriesError("constant series cannot be z-normalized")
    return (x - x.mean()) / sd


def acf(x: np.ndarray, max_lag: int | None = None) -> np.ndarray:
    """Autocorrelation at lags 0..max_lag: full-series mean, 1/N covariance scaling."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if max_lag is None:
        max_lag = n - 1
    d = x - x.mean()
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(d, nfft)
    autocov = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1] / n
    if autocov[0] == 0:
        raise DegenerateSeriesError("zero-variance series has no autocorrelation")
    return autocov / autocov[0]


def first_zero_ac(x: np.ndarray, max_tau: int | None = None) -> int:
    """Smallest lag where the autocorrelation is <= 0 (capped at max_tau)."""
    n = len(x)
    if max_tau is None:
        max_tau = n
    r = acf(x, min(max_tau, n - 1))
    below = np.flatnonzero(r <= 0)
    return int(below[0]) if len(below) else min(max_tau, n)
