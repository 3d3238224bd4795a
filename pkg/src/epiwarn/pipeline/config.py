"""Run configuration: INI file sections overridden by CLI flags."""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

__all__ = ["RunConfig", "EmpiricalSource", "ConfigError", "load_config", "derive_seed"]

DATASET_LETTERS = {"white": "W", "env": "E", "dem": "D", "mixed": "M"}
FEATURE_TOKENS = {"22": "SF22", "5": "EWSI5"}
MODEL_LETTERS = {"GBM": "G", "LRM": "L", "KNN": "K", "SVM": "S"}

# fixed stream codes so derived seeds never depend on dict order
_STREAM_CODES = {"white": 1, "env": 2, "dem": 3, "mixed": 4, "slice": 5, "split": 6, "null_pick": 7}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def derive_seed(seed: int, *tags: str) -> int:
    """Deterministic child seed for a named pipeline stage."""
    codes = tuple(_STREAM_CODES[t] if isinstance(t, str) else int(t) for t in tags)
    ss = np.random.SeedSequence(entropy=seed, spawn_key=codes)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class EmpiricalSource:
    """One empirical incidence input and its labeling recipe."""

    name: str
    path: str
    label: str  # "T" or "N"
    format: str = "incidence"  # incidence | cumulative
    cadence: str = "daily"
    si_mean: float = 6.3
    si_sd: float = 4.2
    min_len: int = 14
    n_windows: int = 1200
    null_min_len: int = 8
    variants: tuple[str, ...] = ()

    def __post_init__(self):
        if self.label not in ("T", "N"):
            raise ConfigError(f"empirical.{self.name}.label must be T or N")
        if self.format not in ("incidence", "cumulative"):
            raise ConfigError(f"empirical.{self.name}.format must be incidence or cumulative")
        if self.cadence not in ("daily", "weekly"):
            raise ConfigError(f"empirical.{self.name}.cadence must be daily or weekly")
        if not self.variants:
            defaults = ("base", "shorter", "larger") if self.label == "T" else ("base",)
            self.variants = defaults
        for v in self.variants:
            if v not in ("base", "shorter", "larger"):
                raise ConfigError(f"empirical.{self.name}.variants: unknown variant {v!r}")


@dataclass
class RunConfig:
    seed: int = 0
    out_dir: Path = Path("results")
    noise_kinds: tuple[str, ...] = ("white", "env", "dem", "mixed")
    feature_sets: tuple[str, ...] = ("SF22", "EWSI5")
    models: tuple[str, ...] = ("GBM", "LRM", "KNN", "SVM")
    train_per_class: int = 6000
    test_per_class: int = 1200
    window_length: int = 400
    horizon: int = 1500
    dt: float = 0.01
    sweep_kind: str = "rolling"
    workers: int = 1
    desk_scale: bool = False
    trajectories_dir: Optional[Path] = None
    models_dir: Optional[Path] = None
    features_dir: Optional[Path] = None
    empirical: tuple[EmpiricalSource, ...] = ()

    def __post_init__(self):
        if self.seed is None:
            raise ConfigError("seed is required (no implicit entropy)")
        if self.desk_scale:
            self.train_per_class = 600
            self.test_per_class = 150
            self.noise_kinds = tuple(k for k in self.noise_kinds if k in ("white", "env")) or (
                "white",
                "env",
            )
        self.validate()

    def validate(self) -> None:
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.train_per_class < 1:
            raise ConfigError("train_per_class must be >= 1")
        if self.test_per_class < 1:
            raise ConfigError("test_per_class must be >= 1")
        if self.window_length < 2:
            raise ConfigError("window_length must be >= 2")
        if self.horizon < self.window_length:
            raise ConfigError("horizon must be >= window_length")
        for k in self.noise_kinds:
            if k not in DATASET_LETTERS:
                raise ConfigError(f"noise: unknown kind {k!r} (expected white/env/dem/mixed)")
        for f in self.feature_sets:
            if f not in ("SF22", "EWSI5"):
                raise ConfigError(f"features: unknown set {f!r}")
        for m in self.models:
            if m not in MODEL_LETTERS:
                raise ConfigError(f"models: unknown model {m!r}")
        if self.sweep_kind not in ("rolling", "expanding"):
            raise ConfigError("sweep_kind must be rolling or expanding")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if "mixed" in self.noise_kinds:
            missing = [k for k in ("white", "env", "dem") if k not in self.noise_kinds]
            if missing:
                raise ConfigError(f"noise: mixed requires white, env, and dem (missing {missing})")

    def classifier_name(self, kind_token: str, feature_set: str, model: str) -> str:
        number = "22" if feature_set == "SF22" else "5"
        return f"{DATASET_LETTERS[kind_token]}{number}{MODEL_LETTERS[model]}"


def _parse_features(text: str) -> tuple[str, ...]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok in FEATURE_TOKENS:
            out.append(FEATURE_TOKENS[tok])
        elif tok in ("SF22", "EWSI5"):
            out.append(tok)
        else:
            raise ConfigError(f"features: unknown token {tok!r} (use 22, 5, SF22, or EWSI5)")
    return tuple(out)


def _parse_list(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Build a RunConfig from an INI file; flag overrides win over the file."""
    overrides = dict(overrides or {})
    parser = configparser.ConfigParser()
    if path:
        if not Path(path).exists():
            raise ConfigError(f"config: file not found: {path}")
        parser.read(path)

    kwargs: dict = {}
    run = parser["run"] if parser.has_section("run") else {}
    sim = parser["simulation"] if parser.has_section("simulation") else {}

    def pick(key, cast, source, default=None):
        if key in overrides and overrides[key] is not None:
            raw = overrides[key]
        elif key in source:
            raw = source[key]
        else:
            return default
        try:
            return cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: {exc}") from exc

    kwargs["seed"] = pick("seed", int, run, 0)
    kwargs["out_dir"] = Path(pick("out", str, run, "results"))
    kwargs["noise_kinds"] = pick("noise", _parse_list, run, ("white", "env", "dem", "mixed"))
    kwargs["feature_sets"] = pick("features", _parse_features, run, ("SF22", "EWSI5"))
    kwargs["models"] = pick("models", _parse_list, run, ("GBM", "LRM", "KNN", "SVM"))
    kwargs["train_per_class"] = pick("train_per_class", int, run, 6000)
    kwargs["test_per_class"] = pick("test_per_class", int, run, 1200)
    kwargs["window_length"] = pick("window_length", int, run, 400)
    kwargs["sweep_kind"] = pick("sweep_kind", str, run, "rolling")
    kwargs["desk_scale"] = bool(pick("desk_scale", _parse_bool, run, False))
    kwargs["horizon"] = pick("horizon", int, sim, 1500)
    kwargs["dt"] = pick("dt", float, sim, 0.01)
    for key in ("trajectories_dir", "models_dir", "features_dir"):
        value = pick(key, str, run, None)
        kwargs[key] = Path(value) if value else None

    env_workers = os.environ.get("EPIWARN_WORKERS")
    kwargs["workers"] = pick("workers", int, run, int(env_workers) if env_workers else 1)

    sources = []
    for section in parser.sections():
        if not section.startswith("empirical."):
            continue
        sec = parser[section]
        name = section.split(".", 1)[1]
        if "path" not in sec or "label" not in sec:
            raise ConfigError(f"{section}: path and label are required")
        sources.append(
            EmpiricalSource(
                name=name,
                path=sec["path"],
                label=sec["label"].strip(),
                format=sec.get("format", "incidence").strip(),
                cadence=sec.get("cadence", "daily").strip(),
                si_mean=sec.getfloat("si_mean", 6.3),
                si_sd=sec.getfloat("si_sd", 4.2),
                min_len=sec.getint("min_len", 14),
                n_windows=sec.getint("n_windows", 1200),
                null_min_len=sec.getint("null_min_len", 8),
                variants=_parse_list(sec.get("variants", "")),
            )
        )
    kwargs["empirical"] = tuple(sources)
    return RunConfig(**kwargs)


def _parse_bool(raw) -> bool:
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")
