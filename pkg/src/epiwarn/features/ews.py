"""Five early-warning-signal indicators of critical slowing down.

All five are computed on the raw window (no z-scoring): SD and CV carry
the scale, and CV additionally needs the raw mean.
"""

from __future__ import annotations

import numpy as np

from ._common import DegenerateSeriesError

__all__ = ["EWS5_NAMES", "compute_ews5"]

EWS5_NAMES = ("SD", "CV", "AR1", "Skewness", "Kurtosis")


def compute_ews5(series) -> np.ndarray:
    """[SD, CV, AR1, skewness, kurtosis] of a series.

    SD uses the N-1 denominator; CV = SD / mean * 100; AR1 is the lag-1
    product-moment correlation of (x_t, x_{t-1}); skewness divides the
    mean cubed deviation by SD^3; kurtosis is the non-excess fourth
    standardized moment with 1/N moments (Gaussian -> 3).
    """
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n < 3:
        raise DegenerateSeriesError("need at least 3 points for the indicator set")
    if not np.isfinite(x).all():
        raise DegenerateSeriesError("series contains non-finite values")
    mean = x.mean()
    sd = x.std(ddof=1)
    if sd == 0:
        raise DegenerateSeriesError("constant series")
    if mean == 0:
        raise DegenerateSeriesError("zero-mean series leaves CV undefined")
    cv = sd / mean * 100.0

    lead, lag = x[1:], x[:-1]
    sl, sg = lead.std(ddof=1), lag.std(ddof=1)
    if sl == 0 or sg == 0:
        raise DegenerateSeriesError("lag-1 pair series is constant")
    zl = (lead - lead.mean()) / sl
    zg = (lag - lag.mean()) / sg
    ar1 = float(np.sum(zl * zg) / (len(lead) - 1))

    d = x - mean
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        skew = float(np.sum(d**3) / (n * sd**3))
        m2 = np.sum(d**2) / n
        kurt = float((np.sum(d**4) / n) / (m2**2))
    out = np.array([sd, cv, ar1, skew, kurt])
    if not np.isfinite(out).all():
        # e.g. subnormal spread: sd > 0 but sd**3 underflows to zero
        raise DegenerateSeriesError("indicator moments overflow or underflow")
    return out
