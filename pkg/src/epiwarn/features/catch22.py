"""The 22-feature statistical summary of a univariate series (catch22 set).

The series is z-scored once up front; every feature below consumes the
z-scored values.  Conventions that the published feature names leave
open are pinned here and locked by the golden tests:

* histogram modes: equal-width bins over [min, max], ties broken to the
  leftmost bin;
* autocorrelation: full-series mean, 1/N covariance scaling;
* features with no well-defined answer on an input return a documented
  sentinel (series length for ACF-crossing lags, 1 for the periodicity
  lag, 0 for the remaining statistics) instead of raising, which keeps
  very short inputs usable;
* the embedding-distance feature compares a density-normalized histogram
  against the fitted exponential density;
* the symbol-alphabet features use Hazen (midpoint) quantiles, matching
  the published implementation's binning.
"""

from __future__ import annotations

import bisect
import math

import numpy as np

from ._common import DegenerateSeriesError, acf, first_zero_ac, z_normalize

__all__ = ["CATCH22_NAMES", "compute_catch22"]

CATCH22_NAMES = (
    "DN_HistogramMode_5",
    "DN_HistogramMode_10",
    "CO_f1ecac",
    "CO_FirstMin_ac",
    "CO_HistogramAMI_even_2_5",
    "CO_trev_1_num",
    "MD_hrv_classic_pnn40",
    "SB_BinaryStats_mean_longstretch1",
    "SB_TransitionMatrix_3ac_sumdiagcov",
    "PD_PeriodicityWang_th0_01",
    "CO_Embed2_Dist_tau_d_expfit_meandiff",
    "IN_AutoMutualInfoStats_40_gaussian_fmmi",
    "FC_LocalSimple_mean1_tauresrat",
    "DN_OutlierInclude_p_001_mdrmd",
    "DN_OutlierInclude_n_001_mdrmd",
    "SP_Summaries_welch_rect_area_5_1",
    "SB_BinaryStats_diff_longstretch0",
    "SB_MotifThree_quantile_hh",
    "SC_FluctAnal_2_rsrangefit_50_1_logi_prop_r1",
    "SC_FluctAnal_2_dfa_50_1_2_logi_prop_r1",
    "SP_Summaries_welch_rect_centroid",
    "FC_LocalSimple_mean3_stderr",
)


def _histogram_mode(y: np.ndarray, n_bins: int) -> float:
    """Center of the fullest equal-width bin (leftmost on ties)."""
    counts, edges = np.histogram(y, bins=n_bins, range=(y.min(), y.max()))
    best = int(np.argmax(counts))  # argmax takes the first maximum
    return float(0.5 * (edges[best] + edges[best + 1]))


def dn_histogram_mode_5(y):
    return _histogram_mode(y, 5)


def dn_histogram_mode_10(y):
    return _histogram_mode(y, 10)


def co_f1ecac(y):
    """Linearly interpolated lag at which the ACF first drops below 1/e."""
    n = len(y)
    thresh = 1.0 / math.e
    r = acf(y)
    for i in range(min(n - 2, len(r) - 1)):
        if r[i + 1] < thresh:
            slope = r[i + 1] - r[i]
            return float(i + (thresh - r[i]) / slope)
    return float(n)


def co_first_min_ac(y):
    """Lag of the first local minimum of the ACF (series length if none)."""
    n = len(y)
    r = acf(y)
    for i in range(1, len(r) - 1):
        if r[i] < r[i - 1] and r[i] < r[i + 1]:
            return float(i)
    return float(n)


def co_histogram_ami_even_2_5(y):
    """Automutual information at lag 2 from a 5-bin joint histogram."""
    tau, n_bins = 2, 5
    n = len(y)
    if n <= tau:
        return 0.0
    edges = np.linspace(y.min() - 0.1, y.max() + 0.1, n_bins + 1)
    a = np.clip(np.searchsorted(edges, y[:-tau], side="right") - 1, 0, n_bins - 1)
    b = np.clip(np.searchsorted(edges, y[tau:], side="right") - 1, 0, n_bins - 1)
    joint = np.zeros((n_bins, n_bins))
    np.add.at(joint, (a, b), 1.0)
    joint /= n - tau
    pi = joint.sum(axis=1)
    pj = joint.sum(axis=0)
    nz = joint > 0
    return float(np.sum(joint[nz] * np.log(joint[nz] / np.outer(pi, pj)[nz])))


def co_trev_1_num(y):
    """Time-reversal asymmetry: mean cubed successive difference."""
    d = np.diff(y)
    return float(np.mean(d**3)) if len(d) else 0.0


def md_hrv_classic_pnn40(y):
    """Share of successive differences larger than 0.04 (z units)."""
    d = np.abs(np.diff(y))
    return float(np.mean(d > 0.04)) if len(d) else 0.0


def _longest_run(mask: np.ndarray) -> int:
    best = run = 0
    for flag in mask:
        run = run + 1 if flag else 0
        best = max(best, run)
    return best


def sb_binarystats_mean_longstretch1(y):
    """Longest run of values strictly above the mean."""
    return float(_longest_run(y > y.mean()))


def sb_binarystats_diff_longstretch0(y):
    """Longest run of strictly decreasing steps."""
    return float(_longest_run(np.diff(y) < 0))


def _quantile_symbols(y: np.ndarray, n_groups: int = 3) -> np.ndarray:
    """Equiprobable symbolization via Hazen quantile thresholds."""
    th = np.quantile(y, np.linspace(0, 1, n_groups + 1), method="hazen")
    th[0] -= 1.0  # values equal to the minimum fall in group 0
    return np.clip(np.searchsorted(th[1:], y, side="left"), 0, n_groups - 1)


def sb_transitionmatrix_3ac_sumdiagcov(y):
    """Trace of the covariance of a 3-symbol transition matrix at the ACF-zero lag."""
    tau = max(1, first_zero_ac(y))
    down = y[::tau]
    if len(down) < 2:
        return 0.0
    sym = _quantile_symbols(down, 3)
    t = np.zeros((3, 3))
    np.add.at(t, (sym[:-1], sym[1:]), 1.0)
    t /= len(down) - 1
    # variance of each incoming-transition column, summed
    return float(np.sum(np.var(t, axis=0, ddof=1)))


def _spline_detrend(y: np.ndarray) -> np.ndarray:
    """Residuals of a least-squares cubic spline with one interior knot."""
    n = len(y)
    u = np.arange(n) / max(n - 1, 1)
    knot = u[n // 2]
    basis = np.column_stack(
        [np.ones(n), u, u**2, u**3, np.clip(u - knot, 0, None) ** 3]
    )
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return y - basis @ coef


def pd_periodicitywang_th0_01(y):
    """First sufficiently prominent autocovariance peak of the spline-detrended series."""
    thresh = 0.01
    n = len(y)
    resid = _spline_detrend(y)
    acmax = math.ceil(n / 3)
    d = resid - resid.mean()
    acv = np.array(
        [np.dot(d[: n - lag], d[lag:]) / n for lag in range(1, acmax + 1)]
    )
    troughs, peaks = [], []
    for i in range(1, acmax - 1):
        slope_in = acv[i] - acv[i - 1]
        slope_out = acv[i + 1] - acv[i]
        if slope_in < 0 and slope_out > 0:
            troughs.append(i)
        elif slope_in > 0 and slope_out < 0:
            peaks.append(i)
    for ip in peaks:
        before = [it for it in troughs if it < ip]
        if not before:
            continue
        if acv[ip] - acv[before[-1]] < thresh or acv[ip] < 0:
            continue
        return float(ip + 1)  # array index i holds lag i+1
    return 1.0


def co_embed2_dist_tau_d_expfit_meandiff(y):
    """Mismatch between successive 2-d embedding distances and an exponential fit."""
    n = len(y)
    tau = first_zero_ac(y)
    tau = max(1, min(tau, n // 10 if n >= 10 else 1))
    m = n - tau - 1
    if m < 2:
        return 0.0
    d = np.hypot(y[1 : m + 1] - y[:m], y[tau + 1 : tau + m + 1] - y[tau:tau + m])
    mean_d = d.mean()
    spread = d.max() - d.min()
    if mean_d == 0 or spread == 0:
        return 0.0
    sd = d.std(ddof=1)
    width = 3.5 * sd / len(d) ** (1.0 / 3.0)
    n_bins = max(1, math.ceil(spread / width)) if width > 0 else 1
    density, edges = np.histogram(d, bins=n_bins, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    pdf = np.exp(-centers / mean_d) / mean_d
    return float(np.mean(np.abs(density - pdf)))


def in_automutualinfostats_40_gaussian_fmmi(y):
    """Lag of the first local minimum of the Gaussian automutual information."""
    n = len(y)
    tau_max = min(40, math.ceil(n / 2))
    rho = acf(y, min(tau_max, n - 1))[1:]
    rho = np.clip(rho, -1 + 1e-15, 1 - 1e-15)
    ami = -0.5 * np.log(1 - rho**2)
    for lag in range(2, len(ami)):
        if ami[lag - 1] < ami[lag - 2] and ami[lag - 1] < ami[lag]:
            return float(lag)
    return float(tau_max)


def fc_localsimple_mean1_tauresrat(y):
    """ACF-zero lag of one-step forecast residuals over that of the series."""
    res = np.diff(y)  # window-1 mean forecast: predict the previous value
    if len(res) < 2:
        return 0.0
    denom = first_zero_ac(y)
    return float(first_zero_ac(res) / denom) if denom else 0.0


def fc_localsimple_mean3_stderr(y):
    """Spread of rolling 3-point-mean forecast residuals."""
    n = len(y)
    if n < 5:
        return 0.0
    window = 3
    means = np.convolve(y, np.ones(window) / window, mode="valid")[:-1]
    res = y[window:] - means
    return float(res.std(ddof=1))


def _outlier_include_mdrmd(y: np.ndarray, positive: bool) -> float:
    inc = 0.01
    n = len(y)
    work = y if positive else -y
    max_val = work.max()
    if max_val < inc:
        return 0.0
    n_thresh = int(max_val / inc) + 1

    # The point set at threshold j*inc is a prefix of the value-descending
    # order, so one sweep yields every threshold's median / extreme / count.
    order = np.argsort(-work, kind="stable")
    pos = order + 1.0  # 1-based positions
    pref_min = np.minimum.accumulate(pos)
    pref_max = np.maximum.accumulate(pos)
    pref_median = np.empty(n)
    sorted_pos: list[float] = []
    for c, p in enumerate(pos):
        bisect.insort(sorted_pos, p)
        m = (c + 1) // 2
        pref_median[c] = sorted_pos[m] if (c + 1) % 2 else 0.5 * (sorted_pos[m - 1] + sorted_pos[m])

    values_asc = np.sort(work)
    thresholds = np.arange(n_thresh) * inc
    counts = n - np.searchsorted(values_asc, thresholds, side="left")

    mean_gap = np.where(
        counts >= 2, (pref_max[counts - 1] - pref_min[counts - 1]) / np.maximum(counts - 1, 1), np.nan
    )
    gap_pct = (counts - 1) * 100.0 / n
    med_pos = pref_median[counts - 1] / (n / 2.0) - 1.0

    over = np.flatnonzero(gap_pct > 2.0)
    mj = int(over[-1]) if len(over) else 0
    nan_at = np.flatnonzero(np.isnan(mean_gap))
    fbi = int(nan_at[0]) if len(nan_at) else n_thresh - 1
    trim = min(mj, fbi)
    return float(np.median(med_pos[: trim + 1]))


def dn_outlierinclude_p_001_mdrmd(y):
    """Drift of the median position of increasingly extreme high points."""
    return _outlier_include_mdrmd(y, positive=True)


def dn_outlierinclude_n_001_mdrmd(y):
    """Drift of the median position of increasingly extreme low points."""
    return _outlier_include_mdrmd(y, positive=False)


def _welch_rect(y: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Single full-length rectangular-window spectrum on an angular frequency grid."""
    n = len(y)
    nfft = 1 << max(0, math.ceil(math.log2(n)))
    spec = np.abs(np.fft.rfft(y, nfft)) ** 2 / n
    spec[1:-1] *= 2.0  # one-sided, keep DC and Nyquist single
    w = 2 * np.pi * np.arange(len(spec)) / nfft
    sw = spec / (2 * np.pi)
    dw = 2 * np.pi / nfft
    return w, sw, dw


def sp_summaries_welch_rect_area_5_1(y):
    """Power in the lowest fifth of the frequency grid."""
    _, sw, dw = _welch_rect(y)
    return float(np.sum(sw[: len(sw) // 5]) * dw)


def sp_summaries_welch_rect_centroid(y):
    """Angular frequency at which the cumulative spectrum passes half its mass."""
    w, sw, _ = _welch_rect(y)
    cs = np.cumsum(sw)
    if cs[-1] <= 0:
        return 0.0
    return float(w[np.searchsorted(cs, cs[-1] * 0.5, side="right")])


def sb_motifthree_quantile_hh(y):
    """Entropy of successive-letter pairs in a 3-letter equiprobable alphabet."""
    sym = _quantile_symbols(y, 3)
    if len(sym) < 2:
        return 0.0
    joint = np.zeros((3, 3))
    np.add.at(joint, (sym[:-1], sym[1:]), 1.0)
    p = joint[joint > 0] / (len(sym) - 1)
    return float(-np.sum(p * np.log(p)))


def _linreg(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    n = len(x)
    sx, sy = x.sum(), y.sum()
    slope = (n * np.dot(x, y) - sx * sy) / (n * np.dot(x, x) - sx * sx)
    return float(slope), float((sy - slope * sx) / n)


def _fluct_anal_prop_r1(y: np.ndarray, how: str) -> float:
    """Share of the scale range best fit by the first of two log-log regimes."""
    n = len(y)
    if n < 10:
        return 0.0
    grid = np.unique(np.round(np.exp(np.linspace(math.log(5), math.log(n / 2), 50))).astype(int))
    grid = grid[grid >= 2]
    if len(grid) < 12:
        return 0.0
    cs = np.cumsum(y)
    fluct = np.empty(len(grid), dtype=float)
    for gi, tau in enumerate(grid):
        n_buf = n // tau
        segs = cs[: n_buf * tau].reshape(n_buf, tau)
        x = np.arange(1, tau + 1, dtype=float)
        sx, sxx = x.sum(), np.dot(x, x)
        sy = segs.sum(axis=1)
        sxy = segs @ x
        slope = (tau * sxy - sx * sy) / (tau * sxx - sx * sx)
        intercept = (sy - slope * sx) / tau
        resid = segs - slope[:, None] * x - intercept[:, None]
        if how == "dfa":
            fluct[gi] = math.sqrt(float(np.sum(resid**2)) / (n_buf * tau))
        else:  # rsrangefit
            ranges = resid.max(axis=1) - resid.min(axis=1)
            fluct[gi] = math.sqrt(float(np.sum(ranges**2)) / n_buf)
    if not (np.isfinite(fluct).all() and (fluct > 0).all()):
        return 0.0
    log_t = np.log(grid.astype(float))
    log_f = np.log(fluct)
    ntt = len(grid)
    min_points = 6
    best_err, best_size = math.inf, min_points
    for size in range(min_points, ntt - min_points + 1):
        s1, b1 = _linreg(log_t[:size], log_f[:size])
        s2, b2 = _linreg(log_t[size - 1 :], log_f[size - 1 :])
        err = float(
            np.linalg.norm(log_f[:size] - (s1 * log_t[:size] + b1))
            + np.linalg.norm(log_f[size - 1 :] - (s2 * log_t[size - 1 :] + b2))
        )
        if err < best_err:
            best_err, best_size = err, size
    return best_size / ntt


def sc_fluctanal_2_rsrangefit_50_1_logi_prop_r1(y):
    """Two-regime split of rescaled-range fluctuations across log-spaced scales."""
    return _fluct_anal_prop_r1(y, "rsrangefit")


def sc_fluctanal_2_dfa_50_1_2_logi_prop_r1(y):
    """Two-regime split of detrended-fluctuation sums across log-spaced scales."""
    return _fluct_anal_prop_r1(y, "dfa")


_FEATURES = (
    dn_histogram_mode_5,
    dn_histogram_mode_10,
    co_f1ecac,
    co_first_min_ac,
    co_histogram_ami_even_2_5,
    co_trev_1_num,
    md_hrv_classic_pnn40,
    sb_binarystats_mean_longstretch1,
    sb_transitionmatrix_3ac_sumdiagcov,
    pd_periodicitywang_th0_01,
    co_embed2_dist_tau_d_expfit_meandiff,
    in_automutualinfostats_40_gaussian_fmmi,
    fc_localsimple_mean1_tauresrat,
    dn_outlierinclude_p_001_mdrmd,
    dn_outlierinclude_n_001_mdrmd,
    sp_summaries_welch_rect_area_5_1,
    sb_binarystats_diff_longstretch0,
    sb_motifthree_quantile_hh,
    sc_fluctanal_2_rsrangefit_50_1_logi_prop_r1,
    sc_fluctanal_2_dfa_50_1_2_logi_prop_r1,
    sp_summaries_welch_rect_centroid,
    fc_localsimple_mean3_stderr,
)

assert len(_FEATURES) == len(CATCH22_NAMES) == 22


def compute_catch22(series) -> np.ndarray:
    """All 22 features of a series (z-scored internally), in catalogue order."""
    y = z_normalize(series)
    out = np.array([f(y) for f in _FEATURES])
    if not np.isfinite(out).all():
        bad = [CATCH22_NAMES[i] for i in np.flatnonzero(~np.isfinite(out))]
        raise DegenerateSeriesError(f"non-finite feature values: {', '.join(bad)}")
    return out
