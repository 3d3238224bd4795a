"""Stochastic SIR incidence simulation.

Generates incidence time series from three noise-driven SIR variants
(additive white noise, multiplicative environmental noise, demographic
noise) with a linearly drifting transmission rate, and computes the
analytic time at which the reproduction number crosses one.

Only the (S, I) subsystem is integrated: the recovered compartment does
not feed back into the infection dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "NoiseKind",
    "SirParams",
    "SimulationConfig",
    "ScheduleCalibration",
    "Trajectory",
    "CalibrationError",
    "IntegrationError",
    "r0_at",
    "detect_transition",
    "sample_beta_schedule",
    "simulate",
    "generate_dataset",
    "default_params",
    "default_calibration",
    "replicate_rng",
]


class NoiseKind(str, Enum):
    WHITE = "white"
    ENVIRONMENTAL = "environmental"
    DEMOGRAPHIC = "demographic"


class CalibrationError(RuntimeError):
    """Rejection-sampling budget exhausted: the calibration cannot hit the target regime."""


class IntegrationError(RuntimeError):
    """The integrator produced a non-finite state."""

    def __init__(self, message: str, failure_time: float):
        super().__init__(message)
        self.failure_time = failure_time


@dataclass(frozen=True)
class SirParams:
    """Parameters of one stochastic SIR realization.

    ``beta(t) = beta0 + beta1 * t`` is the transmission rate; sigma1/sigma2
    scale the noise on S and I (ignored for demographic noise, which is
    fully state-determined).
    """

    lam: float
    mu: float
    alpha: float
    beta0: float
    beta1: float
    sigma1: float
    sigma2: float
    noise_kind: NoiseKind
    s0: float
    i0: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be > 0")
        if self.mu <= 0:
            raise ValueError("mu must be > 0")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.beta0 < 0:
            raise ValueError("beta0 must be >= 0")
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise ValueError("noise intensities must be >= 0")
        if self.s0 <= 0:
            raise ValueError("s0 must be > 0")
        if self.i0 < 0:
            raise ValueError("i0 must be >= 0")

    @property
    def carrying_factor(self) -> float:
        """K such that the reproduction number is K * beta(t)."""
        return self.lam / (self.mu * (self.alpha + self.mu))


@dataclass(frozen=True)
class SimulationConfig:
    horizon: int = 1500
    dt: float = 0.01
    seed: int = 0
    state_floor: float = 0.0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not (0 < self.dt <= 1):
            raise ValueError("dt must be in (0, 1]")
        steps = 1.0 / self.dt
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError("dt must divide 1 exactly (recording happens at integer times)")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.state_floor < 0:
            raise ValueError("state_floor must be >= 0")

    @property
    def steps_per_unit(self) -> int:
        return round(1.0 / self.dt)


@dataclass(frozen=True)
class Trajectory:
    """One simulated incidence series I[1..horizon] (index 0 holds time 1)."""

    incidence: np.ndarray
    transition_time: Optional[int]
    params: SirParams
    seed: int
    replicate: Optional[int] = None

    @property
    def replicate_id(self) -> str:
        kind = self.params.noise_kind.value
        label = "N" if self.transition_time is None else "T"
        idx = self.seed if self.replicate is None else self.replicate
        return f"{kind}-{label}-{idx}"


def r0_at(params: SirParams, t: float) -> float:
    """Reproduction number K * beta(t) at time t."""
    return params.carrying_factor * (params.beta0 + params.beta1 * t)


def detect_transition(params: SirParams, horizon: int) -> Optional[int]:
    """Smallest integer t in [1, horizon] with r0_at(params, t) >= 1, or None.

    None means the trajectory is a null replicate over this horizon.
    """
    if r0_at(params, 1) >= 1.0:
        return 1
    if params.beta1 <= 0:
        return None  # r0 non-increasing and below 1 at t=1
    k = params.carrying_factor
    t_star = (1.0 / k - params.beta0) / params.beta1
    t = max(1, math.ceil(t_star))
    # guard against float fuzz around the analytic crossing
    while t > 1 and r0_at(params, t - 1) >= 1.0:
        t -= 1
    while t <= horizon and r0_at(params, t) < 1.0:
        t += 1
    return t if t <= horizon else None


@dataclass(frozen=True)
class ScheduleCalibration:
    """Triangular (min, mode, max) draws for the transmission-rate schedule.

    Ranges are expressed on the reproduction-number scale (rho = K * beta),
    so one calibration serves any base parameter set: beta0 = rho0 / K and
    beta1 = rho1 / K.  ``null_rho1_max=None`` derives the per-draw upper
    endpoint (1 - rho0) / horizon * headroom, which keeps every null draw
    subcritical through the horizon.
    """

    rho0: tuple[float, float, float] = (0.2, 0.5, 0.8)
    trans_rho1: tuple[float, float, float] = (2e-4, 6e-4, 1e-3)
    null_rho1_min: float = 0.0
    null_rho1_mode: float = 5e-5
    null_rho1_max: Optional[float] = None
    null_headroom: float = 0.9
    horizon: int = 1500
    accept_window: tuple[int, int] = (401, 1500)
    max_attempts: int = 10_000

    def __post_init__(self):
        lo, mode, hi = self.rho0
        if not (0 <= lo <= mode <= hi):
            raise ValueError("rho0 triple must satisfy 0 <= min <= mode <= max")
        lo, mode, hi = self.trans_rho1
        if not (0 <= lo <= mode <= hi):
            raise ValueError("trans_rho1 triple must satisfy 0 <= min <= mode <= max")


def _draw_triangular(rng: np.random.Generator, lo: float, mode: float, hi: float) -> float:
    if lo == hi:
        return lo
    return float(rng.triangular(lo, mode, hi))


def sample_beta_schedule(
    rng: np.random.Generator,
    regime: str,
    calib: ScheduleCalibration,
    base: SirParams,
) -> tuple[float, float]:
    """Draw (beta0, beta1) for the requested regime by rejection sampling.

    ``regime`` is "transcritical" (crossing time inside calib.accept_window)
    or "null" (reproduction number below one through the horizon).
    """
    if regime not in ("transcritical", "null"):
        raise ValueError(f"unknown regime {regime!r}")
    k = base.carrying_factor
    lo_t, hi_t = calib.accept_window
    for _ in range(calib.max_attempts):
        rho0 = _draw_triangular(rng, *calib.rho0)
        if regime == "transcritical":
            rho1 = _draw_triangular(rng, *calib.trans_rho1)
        else:
            hi = calib.null_rho1_max
            if hi is None:
                hi = (1.0 - rho0) / calib.horizon * calib.null_headroom
            if hi < calib.null_rho1_min:
                raise CalibrationError(
                    "null rho1 range is empty: rho0 draw leaves no subcritical headroom"
                )
            mode = min(calib.null_rho1_mode, hi)
            rho1 = _draw_triangular(rng, calib.null_rho1_min, mode, hi)
        beta0, beta1 = rho0 / k, rho1 / k
        candidate = replace(base, beta0=beta0, beta1=beta1)
        t = detect_transition(candidate, calib.horizon)
        if regime == "transcritical":
            if t is not None and lo_t <= t <= hi_t:
                return beta0, beta1
        else:
            if t is None:
                return beta0, beta1
    raise CalibrationError(
        f"no acceptable ({regime}) schedule in {calib.max_attempts} attempts"
    )


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for replicate ``index`` of a run seeded by ``seed``.

    Streams are keyed by (seed, index), so generating replicates in any
    order, or in parallel, yields identical results.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


# Block length (in steps) for incremental Wiener draws.  Both the single
# and the batched integration paths draw per-replicate normals in blocks
# of this size, which keeps their outputs bit-identical.
_BLOCK_STEPS = 2000


def _euler_maruyama_batch(
    params_list: Sequence[SirParams],
    config: SimulationConfig,
    rngs: Sequence[np.random.Generator],
) -> np.ndarray:
    """Integrate a batch of replicates; returns incidence of shape (n, horizon)."""
    n = len(params_list)
    dt = config.dt
    sqrt_dt = math.sqrt(dt)
    steps_per_unit = config.steps_per_unit
    total_steps = config.horizon * steps_per_unit
    floor = config.state_floor

    kind = params_list[0].noise_kind
    if any(p.noise_kind is not kind for p in params_list):
        raise ValueError("a batch must share one noise kind")

    lam = np.array([p.lam for p in params_list])
    mu = np.array([p.mu for p in params_list])
    alpha = np.array([p.alpha for p in params_list])
    beta0 = np.array([p.beta0 for p in params_list])
    beta1 = np.array([p.beta1 for p in params_list])
    sigma1 = np.array([p.sigma1 for p in params_list])
    sigma2 = np.array([p.sigma2 for p in params_list])

    s = np.array([p.s0 for p in params_list], dtype=float)
    i = np.array([p.i0 for p in params_list], dtype=float)
    out = np.empty((n, config.horizon))

    step = 0
    rec = 0
    while step < total_steps:
        block = min(_BLOCK_STEPS, total_steps - step)
        # one (block, 2) draw per replicate keeps per-replicate streams intact
        dw = np.stack([rng.standard_normal((block, 2)) for rng in rngs], axis=1)
        dw *= sqrt_dt
        for b in range(block):
            t = (step + b) * dt
            beta = beta0 + beta1 * t
            inf = beta * s * i
            ds = (lam - inf - mu * s) * dt
            di = (inf - alpha * i - mu * i) * dt
            if kind is NoiseKind.WHITE:
                ds += sigma1 * dw[b, :, 0]
                di += sigma2 * dw[b, :, 1]
            elif kind is NoiseKind.ENVIRONMENTAL:
                ds += sigma1 * s * dw[b, :, 0]
                di += sigma2 * i * dw[b, :, 1]
            else:  # demographic: rate-determined two-channel noise
                a = lam + inf + mu * s
                bb = -inf
                c = inf + alpha * i + mu * i
                d = np.sqrt(np.maximum(a * c - bb * bb, 0.0))
                e = np.sqrt(a + c + 2.0 * d)
                ds += ((a + d) / e) * dw[b, :, 0] + (bb / e) * dw[b, :, 1]
                di += (bb / e) * dw[b, :, 0] + ((c + d) / e) * dw[b, :, 1]
            s = np.maximum(s + ds, floor)
            i = np.maximum(i + di, floor)
            if (step + b + 1) % steps_per_unit == 0:
                out[:, rec] = i
                rec += 1
        if not (np.isfinite(s).all() and np.isfinite(i).all()):
            bad = int(np.flatnonzero(~(np.isfinite(s) & np.isfinite(i)))[0])
            raise IntegrationError(
                f"non-finite state in replicate {bad}", failure_time=(step + block) * dt
            )
        step += block
    return out


def demographic_noise_matrix(params: SirParams, t: float, s: float, i: float) -> np.ndarray:
    """Coefficient matrix G of (dW1, dW2) for the demographic model at state (s, i).

    G @ G.T reproduces the event-rate covariance [[a, b], [b, c]].
    """
    beta = params.beta0 + params.beta1 * t
    inf = beta * s * i
    a = params.lam + inf + params.mu * s
    b = -inf
    c = inf + params.alpha * i + params.mu * i
    d = math.sqrt(max(a * c - b * b, 0.0))
    e = math.sqrt(a + c + 2.0 * d)
    return np.array([[(a + d) / e, b / e], [b / e, (c + d) / e]])


def simulate(params: SirParams, config: SimulationConfig) -> Trajectory:
    """Euler-Maruyama integration of one replicate, recorded at integer times.

    Identical (params, config) including config.seed give bit-identical output.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(config.seed)))
    incidence = _euler_maruyama_batch([params], config, [rng])[0]
    return Trajectory(
        incidence=incidence,
        transition_time=detect_transition(params, config.horizon),
        params=params,
        seed=config.seed,
    )


def default_params(noise_kind: NoiseKind) -> SirParams:
    """Nominal base parameters per noise kind.

    The demographic model carries its fluctuation scale in the event rates
    themselves, so it runs at a larger population than the two
    fixed-intensity models.
    """
    kind = NoiseKind(noise_kind)
    if kind is NoiseKind.DEMOGRAPHIC:
        lam, mu, alpha = 200.0, 0.2, 0.3
        i0 = 20.0
    else:
        lam, mu, alpha = 1.0, 0.2, 0.3
        i0 = 1.0
    sigma = 0.0 if kind is NoiseKind.DEMOGRAPHIC else 0.05
    return SirParams(
        lam=lam,
        mu=mu,
        alpha=alpha,
        beta0=0.0,
        beta1=0.0,
        sigma1=sigma,
        sigma2=sigma,
        noise_kind=kind,
        s0=lam / mu,
        i0=i0,
    )


def default_calibration(horizon: int = 1500) -> ScheduleCalibration:
    return ScheduleCalibration(horizon=horizon, accept_window=(401, horizon))


@dataclass(frozen=True)
class _ReplicateSpec:
    index: int
    regime: str


def generate_dataset(
    noise_kind: NoiseKind,
    n_trans: int,
    n_null: int,
    calib: Optional[ScheduleCalibration] = None,
    seed: int = 0,
    config: Optional[SimulationConfig] = None,
    base: Optional[SirParams] = None,
    batch_size: int = 512,
) -> list[Trajectory]:
    """Generate n_trans transcritical and n_null null replicates.

    Replicates 0..n_trans-1 are transcritical, the rest null.  Each
    replicate's schedule draw and Wiener increments come from its own
    (seed, index)-keyed stream, so regeneration of any subset reproduces
    the full run's values.
    """
    if n_trans < 1 or n_null < 1:
        raise ValueError("replicate counts must be >= 1")
    kind = NoiseKind(noise_kind)
    if calib is None:
        calib = default_calibration()
    if config is None:
        config = SimulationConfig(horizon=calib.horizon, seed=seed)
    if base is None:
        base = default_params(kind)

    specs = [_ReplicateSpec(i, "transcritical") for i in range(n_trans)]
    specs += [_ReplicateSpec(n_trans + i, "null") for i in range(n_null)]

    trajectories: list[Trajectory] = []
    for start in range(0, len(specs), batch_size):
        chunk = specs[start : start + batch_size]
        rngs, plist = [], []
        for spec in chunk:
            rng = replicate_rng(seed, spec.index)
            try:
                beta0, beta1 = sample_beta_schedule(rng, spec.regime, calib, base)
            except CalibrationError as exc:
                raise CalibrationError(f"replicate {spec.index}: {exc}") from exc
            plist.append(replace(base, beta0=beta0, beta1=beta1))
            rngs.append(rng)
        try:
            incidence = _euler_maruyama_batch(plist, config, rngs)
        except IntegrationError as exc:
            raise IntegrationError(
                f"batch starting at replicate {start}: {exc}", exc.failure_time
            ) from exc
        for spec, params, row in zip(chunk, plist, incidence):
            trajectories.append(
                Trajectory(
                    incidence=row,
                    transition_time=detect_transition(params, config.horizon),
                    params=params,
                    seed=seed,
                    replicate=spec.index,
                )
            )
    return trajectories
