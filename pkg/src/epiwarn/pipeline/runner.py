"""End-to-end experiment orchestration.

Every command is a pure function of (config, input files): outputs are
written with round-trip float formatting, sorted JSON keys, and fixed row
order, so reruns with the same config are byte-identical regardless of
worker count.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .. import empirical as emp
from ..features import EWSI5, SF22, FeatureMatrix, featurize, feature_matrix_from_csv, feature_matrix_to_csv
from ..learners import TrainConfig, load_model, make_model, save_model
from ..metrics import (
    EvalReport,
    accuracy_ci,
    delong_test,
    delong_test_unpaired,
    evaluate,
    mann_whitney_u,
)
from ..sim import (
    NoiseKind,
    ScheduleCalibration,
    SimulationConfig,
    SirParams,
    Trajectory,
    default_params,
    generate_dataset,
    replicate_rng,
)
from ..windows import (
    EXPANDING_LENGTHS,
    ROLLING_GAPS,
    LabeledWindow,
    SplitSpec,
    build_mixed,
    expanding_windows,
    partition,
    rolling_windows,
    slice_null,
    slice_transcritical,
)
from .config import DATASET_LETTERS, MODEL_LETTERS, ConfigError, RunConfig, derive_seed

__all__ = [
    "run_simulate",
    "run_experiment",
    "run_sweep",
    "run_classify_empirical",
    "run_mwu_features",
    "trajectories_to_csv",
    "trajectories_from_dir",
]

REPORT_SCHEMA = "epiwarn-report/1"
TRAJECTORY_SCHEMA = "epiwarn-trajectories/1"

_BASE_KINDS = ("white", "env", "dem")


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# trajectory generation and round-trip


def _calibration(cfg: RunConfig) -> ScheduleCalibration:
    lo = max(401, cfg.window_length)
    return ScheduleCalibration(horizon=cfg.horizon, accept_window=(lo, cfg.horizon))


def _simulate_kind(cfg: RunConfig, kind: str) -> list[Trajectory]:
    n = cfg.train_per_class + cfg.test_per_class
    sim_seed = derive_seed(cfg.seed, kind)
    config = SimulationConfig(horizon=cfg.horizon, dt=cfg.dt, seed=sim_seed)
    return generate_dataset(
        NoiseKind(kind), n, n, calib=_calibration(cfg), seed=sim_seed, config=config
    )


def trajectories_to_csv(trajs: Sequence[Trajectory], path: Path) -> None:
    rows = []
    for traj in trajs:
        rid = traj.replicate_id
        for t, value in enumerate(traj.incidence, start=1):
            rows.append([rid, t, _fmt(value)])
    _write_csv(path, ["replicate_id", "t", "I"], rows)
    manifest = {
        "schema": TRAJECTORY_SCHEMA,
        "replicates": [
            {
                "replicate_id": traj.replicate_id,
                "index": traj.replicate,
                "seed": traj.seed,
                "transition_time": traj.transition_time,
                "params": {
                    "lam": traj.params.lam,
                    "mu": traj.params.mu,
                    "alpha": traj.params.alpha,
                    "beta0": traj.params.beta0,
                    "beta1": traj.params.beta1,
                    "sigma1": traj.params.sigma1,
                    "sigma2": traj.params.sigma2,
                    "noise_kind": traj.params.noise_kind.value,
                    "s0": traj.params.s0,
                    "i0": traj.params.i0,
                },
            }
            for traj in trajs
        ],
    }
    _write_json(path.with_suffix(".json"), manifest)


def trajectories_from_dir(directory: Path, kind: str) -> list[Trajectory]:
    csv_path = directory / f"trajectories_{kind}.csv"
    manifest_path = csv_path.with_suffix(".json")
    if not csv_path.exists() or not manifest_path.exists():
        raise FileNotFoundError(f"no stored trajectories for {kind!r} under {directory}")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("schema") != TRAJECTORY_SCHEMA:
        raise ValueError(f"{manifest_path}: unsupported schema {manifest.get('schema')!r}")
    series: dict[str, list[float]] = {}
    order: list[str] = []
    with csv_path.open(newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for rid, _, value in reader:
            if rid not in series:
                series[rid] = []
                order.append(rid)
            series[rid].append(float(value))
    out = []
    for entry in manifest["replicates"]:
        rid = entry["replicate_id"]
        p = dict(entry["params"])
        p["noise_kind"] = NoiseKind(p["noise_kind"])
        out.append(
            Trajectory(
                incidence=np.array(series[rid]),
                transition_time=entry["transition_time"],
                params=SirParams(**p),
                seed=entry["seed"],
                replicate=entry["index"],
            )
        )
    return out


def run_simulate(cfg: RunConfig) -> list[Path]:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for kind in cfg.noise_kinds:
        if kind == "mixed":
            continue  # mixed is assembled from stored base kinds, not simulated
        trajs = _simulate_kind(cfg, kind)
        path = cfg.out_dir / f"trajectories_{kind}.csv"
        trajectories_to_csv(trajs, path)
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# dataset assembly


def _slice_kind(cfg: RunConfig, kind: str, trajs: Sequence[Trajectory]) -> list[LabeledWindow]:
    slice_seed = derive_seed(cfg.seed, kind, "slice")
    out = []
    for traj in trajs:
        if traj.transition_time is not None:
            out.append(slice_transcritical(traj, cfg.window_length))
        else:
            rng = replicate_rng(slice_seed, traj.replicate or 0)
            out.append(slice_null(traj, cfg.window_length, rng))
    return out


def _build_datasets(cfg: RunConfig) -> dict[str, tuple[list[LabeledWindow], list[LabeledWindow]]]:
    """Per dataset letter: (train windows, test windows)."""
    pools: dict[str, list[LabeledWindow]] = {}
    for kind in cfg.noise_kinds:
        if kind == "mixed":
            continue
        if cfg.trajectories_dir is not None:
            trajs = trajectories_from_dir(cfg.trajectories_dir, kind)
        else:
            trajs = _simulate_kind(cfg, kind)
        pools[kind] = _slice_kind(cfg, kind, trajs)

    if "mixed" in cfg.noise_kinds:
        total = cfg.train_per_class + cfg.test_per_class
        if total % 3:
            raise ConfigError(
                f"train_per_class + test_per_class must be divisible by 3 for mixed, got {total}"
            )
        rng = np.random.default_rng(derive_seed(cfg.seed, "mixed"))
        pools["mixed"] = build_mixed(
            pools["white"], pools["env"], pools["dem"], per_class=total // 3, rng=rng
        )

    datasets = {}
    for kind in cfg.noise_kinds:
        split_seed = derive_seed(cfg.seed, kind, "split")
        spec = SplitSpec(cfg.train_per_class, cfg.test_per_class, seed=split_seed)
        datasets[DATASET_LETTERS[kind]] = partition(pools[kind], spec)
    return datasets


def _featurize_pair(args):
    train_windows, test_windows, set_id = args
    return (
        featurize(train_windows, set_id, fail_fast=False),
        featurize(test_windows, set_id, fail_fast=False),
    )


def _fit_cell(args):
    kind, X, y, seed = args
    return make_model(kind, TrainConfig(seed=seed)).fit(X, y)


class _Pool:
    """Map helper: a process pool when workers > 1, inline otherwise."""

    def __init__(self, workers: int):
        self.workers = workers

    def map(self, fn, items):
        items = list(items)
        if self.workers > 1 and len(items) > 1:
            with ProcessPoolExecutor(max_workers=self.workers) as ex:
                return list(ex.map(fn, items))
        return [fn(item) for item in items]


def _feature_name(letter: str, set_id: str) -> str:
    return f"{letter}{'22' if set_id == SF22 else '5'}"


def run_experiment(cfg: RunConfig) -> Path:
    """Train and evaluate the classifier grid; emit reports, models, and test grids."""
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    pool = _Pool(cfg.workers)
    datasets = _build_datasets(cfg)
    letters = [DATASET_LETTERS[k] for k in cfg.noise_kinds]

    # feature matrices per (dataset, feature set)
    feature_jobs = []
    keys = []
    for letter in letters:
        train_w, test_w = datasets[letter]
        for set_id in cfg.feature_sets:
            keys.append((letter, set_id))
            feature_jobs.append((train_w, test_w, set_id))
    matrices = dict(zip(keys, pool.map(_featurize_pair, feature_jobs)))

    error_rows = []
    for (letter, set_id), (train_m, test_m) in matrices.items():
        feature_matrix_to_csv(train_m, out / "features" / f"{_feature_name(letter, set_id)}_train.csv")
        feature_matrix_to_csv(test_m, out / "features" / f"{_feature_name(letter, set_id)}_test.csv")
        for split_name, m in (("train", train_m), ("test", test_m)):
            for wid, msg in m.errors:
                error_rows.append([letter, set_id, split_name, wid, msg])
    if error_rows:
        _write_csv(
            out / "feature_errors.csv",
            ["dataset", "feature_set", "split", "window_id", "error"],
            error_rows,
        )

    # train the grid
    cells = []
    for letter in letters:
        for set_id in cfg.feature_sets:
            for kind in cfg.models:
                cells.append((letter, set_id, kind))
    fit_jobs = []
    for letter, set_id, kind in cells:
        train_m, _ = matrices[(letter, set_id)]
        if len(np.unique(train_m.y)) < 2:
            raise RuntimeError(
                f"dataset {letter}/{set_id}: training matrix lost a class to degenerate windows"
            )
        fit_jobs.append((kind, train_m.values, train_m.y, derive_seed(cfg.seed, 8)))
    models = dict(zip(cells, pool.map(_fit_cell, fit_jobs)))

    number = {SF22: "22", EWSI5: "5"}
    reports: dict[str, EvalReport] = {}
    scores: dict[str, tuple[str, np.ndarray, np.ndarray, list[str]]] = {}
    report_rows = []
    for letter, set_id, kind in cells:
        name = f"{letter}{number[set_id]}{MODEL_LETTERS[kind]}"
        model = models[(letter, set_id, kind)]
        _, test_m = matrices[(letter, set_id)]
        report = evaluate(model, test_m, classifier_id=name, dataset_id=letter)
        reports[name] = report
        scores[name] = (letter, test_m.y, model.predict_score(test_m.values), test_m.window_ids)
        save_model(model, out / "models" / f"{name}.json", kind=kind, feature_set=set_id)
        report_rows.append(
            [
                name,
                letter,
                set_id,
                kind,
                report.n_pos,
                report.n_neg,
                _fmt(report.accuracy),
                _fmt(report.accuracy_ci_halfwidth),
                _fmt(report.auc),
                _fmt(report.auc_ci_halfwidth),
                report.tp,
                report.fp,
                report.tn,
                report.fn,
            ]
        )
    _write_csv(
        out / "reports.csv",
        [
            "classifier",
            "dataset",
            "feature_set",
            "model",
            "n_pos",
            "n_neg",
            "accuracy",
            "accuracy_ci",
            "auc",
            "auc_ci",
            "tp",
            "fp",
            "tn",
            "fn",
        ],
        report_rows,
    )

    _emit_delong_grids(cfg, out, scores, letters, number)

    manifest = {
        "schema": REPORT_SCHEMA,
        "classifiers": sorted(reports),
        "config": {
            "seed": cfg.seed,
            "noise": list(cfg.noise_kinds),
            "features": list(cfg.feature_sets),
            "models": list(cfg.models),
            "train_per_class": cfg.train_per_class,
            "test_per_class": cfg.test_per_class,
            "window_length": cfg.window_length,
            "horizon": cfg.horizon,
            "dt": cfg.dt,
        },
        "n_feature_errors": len(error_rows),
    }
    _write_json(out / "manifest.json", manifest)
    return out / "reports.csv"


def _delong_pair(a, b) -> float:
    """Paired when the two score vectors share the same test rows, else unpaired."""
    letter_a, y_a, s_a, ids_a = a
    letter_b, y_b, s_b, ids_b = b
    if ids_a == ids_b:
        return delong_test(s_a, s_b, y_a)
    return delong_test_unpaired(s_a, y_a, s_b, y_b)


def _emit_delong_grids(cfg, out, scores, letters, number) -> None:
    # fixed model, grid over (dataset x feature set)
    for kind in cfg.models:
        suffix = MODEL_LETTERS[kind]
        names = [
            f"{letter}{number[set_id]}{suffix}"
            for set_id in cfg.feature_sets
            for letter in letters
        ]
        rows = []
        for na in names:
            row = [na]
            for nb in names:
                row.append(_fmt(_delong_pair(scores[na], scores[nb])))
            rows.append(row)
        _write_csv(out / "delong" / f"delong_model_{suffix}.csv", ["classifier"] + names, rows)
    # fixed dataset and feature set, grid over models
    for letter in letters:
        for set_id in cfg.feature_sets:
            names = [f"{letter}{number[set_id]}{MODEL_LETTERS[k]}" for k in cfg.models]
            rows = []
            for na in names:
                row = [na]
                for nb in names:
                    row.append(_fmt(_delong_pair(scores[na], scores[nb])))
                rows.append(row)
            _write_csv(
                out / "delong" / f"delong_data_{_feature_name(letter, set_id)}.csv",
                ["classifier"] + names,
                rows,
            )


# ---------------------------------------------------------------------------
# earliness sweeps


def run_sweep(cfg: RunConfig, kind: Optional[str] = None) -> Path:
    """Retrain and re-evaluate along the rolling or expanding schedule."""
    sweep_kind = kind or cfg.sweep_kind
    if sweep_kind not in ("rolling", "expanding"):
        raise ConfigError(f"sweep kind must be rolling or expanding, got {sweep_kind!r}")
    if cfg.window_length != 400:
        raise ConfigError("sweeps require window_length = 400")
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    pool = _Pool(cfg.workers)
    datasets = _build_datasets(cfg)
    number = {SF22: "22", EWSI5: "5"}
    grid = ROLLING_GAPS if sweep_kind == "rolling" else EXPANDING_LENGTHS
    slicer = rolling_windows if sweep_kind == "rolling" else expanding_windows

    rows = []
    for noise in cfg.noise_kinds:
        letter = DATASET_LETTERS[noise]
        train_w, test_w = datasets[letter]
        train_slices = [slicer(w) for w in train_w]
        test_slices = [slicer(w) for w in test_w]
        for i, value in enumerate(grid):
            train_i = [s[i] for s in train_slices]
            test_i = [s[i] for s in test_slices]
            for set_id in cfg.feature_sets:
                train_m = featurize(train_i, set_id, fail_fast=False)
                test_m = featurize(test_i, set_id, fail_fast=False)
                if len(np.unique(train_m.y)) < 2 or len(test_m.values) == 0:
                    raise RuntimeError(
                        f"sweep {sweep_kind} iteration {value} ({letter}/{set_id}): "
                        "degenerate windows exhausted a class"
                    )
                fitted = dict(
                    zip(
                        cfg.models,
                        pool.map(
                            _fit_cell,
                            [
                                (m, train_m.values, train_m.y, derive_seed(cfg.seed, 8))
                                for m in cfg.models
                            ],
                        ),
                    )
                )
                for model_kind in cfg.models:
                    name = f"{letter}{number[set_id]}{MODEL_LETTERS[model_kind]}"
                    report = evaluate(fitted[model_kind], test_m, name, letter)
                    rows.append(
                        [
                            sweep_kind,
                            letter,
                            set_id,
                            model_kind,
                            name,
                            value,
                            report.n_pos + report.n_neg,
                            _fmt(report.auc),
                            _fmt(report.auc_ci_halfwidth),
                            _fmt(report.accuracy),
                            _fmt(report.accuracy_ci_halfwidth),
                        ]
                    )
    path = out / f"sweep_{sweep_kind}.csv"
    _write_csv(
        path,
        [
            "sweep",
            "dataset",
            "feature_set",
            "model",
            "classifier",
            "gap" if sweep_kind == "rolling" else "length",
            "n_test",
            "auc",
            "auc_ci",
            "accuracy",
            "accuracy_ci",
        ],
        rows,
    )
    return path


# ---------------------------------------------------------------------------
# empirical classification


def _load_empirical_series(source) -> emp.IncidenceSeries:
    if source.format == "cumulative":
        cum, deaths, recovered = emp.load_cumulative(source.path)
        cum = emp.impute_linear(cum)
        deaths = emp.impute_linear(deaths)
        recovered = emp.impute_linear(recovered)
        series = emp.prevalence_from_cumulative(cum, deaths, recovered)
    else:
        series = emp.load_incidence(source.path, cadence=source.cadence)
        series = emp.impute_linear(series)
    if series.cadence == "weekly":
        series = emp.weekly_to_daily(series)
    return series


def _empirical_windows(cfg: RunConfig, source) -> tuple[list[LabeledWindow], emp.ReSeries]:
    series = _load_empirical_series(source)
    re = emp.estimate_re(series, emp.SerialInterval(source.si_mean, source.si_sd))
    if source.label == "T":
        windows = emp.label_empirical_T(series, re, min_len=source.min_len)
        if not windows:
            raise RuntimeError(f"empirical source {source.name}: no qualifying T windows")
    else:
        rng = np.random.default_rng(derive_seed(cfg.seed, "null_pick"))
        windows = emp.label_empirical_N(
            series, re, n_windows=source.n_windows, min_len=source.null_min_len, rng=rng
        )
    return windows, re


def _variant_windows(windows: list[LabeledWindow], variant: str) -> list[LabeledWindow]:
    if variant == "base":
        return windows
    if variant == "shorter":
        return [emp.truncate_tail(w, 7) for w in windows]
    if variant == "larger":
        return [emp.scale_counts(w, 5.0) for w in windows]
    raise ValueError(f"unknown variant {variant!r}")


def run_classify_empirical(cfg: RunConfig) -> Path:
    """Apply stored classifiers to empirical windows; per-variant accuracy."""
    if not cfg.empirical:
        raise ConfigError("empirical: at least one [empirical.<name>] section is required")
    models_dir = cfg.models_dir or (cfg.out_dir / "models")
    model_paths = sorted(Path(models_dir).glob("*.json"))
    if not model_paths:
        raise ConfigError(f"models_dir: no model files under {models_dir}")
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    loaded = [(p.stem, *load_model(p)) for p in model_paths]

    rows = []
    for source in cfg.empirical:
        windows, re = _empirical_windows(cfg, source)
        emp.re_to_csv(re, out / f"re_{source.name}.csv")
        y_true = 1 if source.label == "T" else 0
        for variant in source.variants:
            vwindows = _variant_windows(windows, variant)
            matrices: dict[str, FeatureMatrix] = {}
            for name, model, meta in loaded:
                set_id = meta["feature_set"]
                if set_id not in matrices:
                    matrices[set_id] = featurize(vwindows, set_id, fail_fast=False)
            for name, model, meta in loaded:
                matrix = matrices[meta["feature_set"]]
                if len(matrix.values) == 0:
                    raise RuntimeError(
                        f"{source.name}/{variant}: every window degenerate under {meta['feature_set']}"
                    )
                pred = model.predict(matrix.values)
                acc = float((pred == y_true).mean())
                rows.append(
                    [
                        name,
                        source.name,
                        variant,
                        source.label,
                        len(vwindows),
                        len(matrix.values),
                        _fmt(acc),
                        _fmt(accuracy_ci(acc, len(matrix.values))),
                    ]
                )
    path = out / "empirical_accuracy.csv"
    _write_csv(
        path,
        ["classifier", "source", "variant", "label", "n_windows", "n_used", "accuracy", "accuracy_ci"],
        rows,
    )
    return path


# ---------------------------------------------------------------------------
# feature separation tables


def run_mwu_features(cfg: RunConfig) -> Path:
    """Per-feature rank-test p-values between labels, from stored matrices."""
    features_dir = cfg.features_dir or (cfg.out_dir / "features")
    number = {SF22: "22", EWSI5: "5"}
    rows = []
    for noise in cfg.noise_kinds:
        letter = DATASET_LETTERS[noise]
        for set_id in cfg.feature_sets:
            path = Path(features_dir) / f"{letter}{number[set_id]}_train.csv"
            if not path.exists():
                raise ConfigError(f"features_dir: missing feature matrix {path}")
            matrix = feature_matrix_from_csv(path)
            t_rows = matrix.rows_with_label("T")
            n_rows = matrix.rows_with_label("N")
            if len(t_rows) == 0 or len(n_rows) == 0:
                raise RuntimeError(f"{path}: both labels are required for the rank test")
            for j, feature in enumerate(matrix.names):
                u, p = mann_whitney_u(t_rows[:, j], n_rows[:, j], alternative="two-sided")
                rows.append([letter, set_id, feature, _fmt(u), _fmt(p)])
    path = cfg.out_dir / "mwu_features.csv"
    _write_csv(path, ["dataset", "feature_set", "feature", "u", "p"], rows)
    return path
