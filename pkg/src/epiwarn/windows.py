"""Slicing trajectories into labeled windows and assembling datasets.

Index arithmetic mirrors 1-based inclusive slicing I[a:b]: the window
I[T-L+1 .. T] of a trajectory whose first recorded time is 1 maps to
``incidence[T-L : T]``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .sim import Trajectory

__all__ = [
    "LABEL_T",
    "LABEL_N",
    "LabeledWindow",
    "SplitSpec",
    "SliceError",
    "slice_transcritical",
    "slice_null",
    "build_mixed",
    "partition",
    "rolling_windows",
    "expanding_windows",
    "ROLLING_GAPS",
    "EXPANDING_LENGTHS",
    "windows_to_csv",
    "windows_from_csv",
]

LABEL_T = "T"
LABEL_N = "N"

# Sweep schedules: 61 rolling gaps, 74 expanding lengths.
ROLLING_GAPS = tuple(range(0, 301, 5))
EXPANDING_LENGTHS = tuple(range(5, 371, 5))
ROLLING_LENGTH = 100
EXPANDING_GAP = 30


class SliceError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledWindow:
    """A fixed-length sub-series with a binary outbreak label.

    ``gap`` is the distance from the window's end to its reference point:
    the transition time for freshly sliced T windows (0 there by
    construction), the parent window's end for sweep sub-windows, and 0 by
    convention for sliced N windows.
    """

    values: np.ndarray
    label: str
    source_id: str
    gap: int = 0
    length: int = 0

    def __post_init__(self):
        if self.label not in (LABEL_T, LABEL_N):
            raise ValueError(f"label must be {LABEL_T!r} or {LABEL_N!r}")
        if self.gap < 0:
            raise ValueError("gap must be >= 0")
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "length", len(values))


@dataclass(frozen=True)
class SplitSpec:
    train_per_class: int
    test_per_class: int
    seed: int = 0

    def __post_init__(self):
        if self.train_per_class < 1 or self.test_per_class < 1:
            raise ValueError("split counts must be >= 1")


def slice_transcritical(traj: Trajectory, length: int = 400) -> LabeledWindow:
    """The L points ending at the transition: I[T-L+1 .. T], labeled T."""
    t = traj.transition_time
    if t is None:
        raise SliceError(f"{traj.replicate_id}: no transition to slice at")
    if t < length:
        raise SliceError(f"{traj.replicate_id}: transition at {t} < window length {length}")
    return LabeledWindow(
        values=traj.incidence[t - length : t],
        label=LABEL_T,
        source_id=traj.replicate_id,
        gap=0,
    )


def slice_null(traj: Trajectory, length: int = 400, rng: Optional[np.random.Generator] = None) -> LabeledWindow:
    """L consecutive points ending at a uniform t in [L, horizon], labeled N."""
    if traj.transition_time is not None:
        raise SliceError(f"{traj.replicate_id}: transcritical trajectory passed to slice_null")
    horizon = len(traj.incidence)
    if horizon < length:
        raise SliceError(f"{traj.replicate_id}: horizon {horizon} < window length {length}")
    if rng is None:
        rng = np.random.default_rng(0)
    end = int(rng.integers(length, horizon + 1))
    return LabeledWindow(
        values=traj.incidence[end - length : end],
        label=LABEL_N,
        source_id=traj.replicate_id,
        gap=0,
    )


def build_mixed(
    white: Sequence[LabeledWindow],
    env: Sequence[LabeledWindow],
    dem: Sequence[LabeledWindow],
    per_class: int = 2400,
    rng: Optional[np.random.Generator] = None,
) -> list[LabeledWindow]:
    """Uniform draw without replacement of per_class windows per label from each source."""
    if rng is None:
        rng = np.random.default_rng(0)
    out: list[LabeledWindow] = []
    for name, source in (("white", white), ("env", env), ("dem", dem)):
        for label in (LABEL_T, LABEL_N):
            pool = [w for w in source if w.label == label]
            if len(pool) < per_class:
                raise ValueError(
                    f"source {name} has {len(pool)} {label} windows, need {per_class}"
                )
            picks = rng.choice(len(pool), size=per_class, replace=False)
            out.extend(pool[int(i)] for i in picks)
    return out


def partition(
    windows: Sequence[LabeledWindow], spec: SplitSpec
) -> tuple[list[LabeledWindow], list[LabeledWindow]]:
    """Seeded stratified split with train/test disjoint by source_id."""
    rng = np.random.default_rng(spec.seed)
    train: list[LabeledWindow] = []
    test: list[LabeledWindow] = []
    for label in (LABEL_T, LABEL_N):
        pool = [w for w in windows if w.label == label]
        by_source: dict[str, list[LabeledWindow]] = {}
        for w in pool:
            by_source.setdefault(w.source_id, []).append(w)
        sources = sorted(by_source)
        rng.shuffle(sources)
        want_train, want_test = spec.train_per_class, spec.test_per_class
        got_train: list[LabeledWindow] = []
        got_test: list[LabeledWindow] = []
        for sid in sources:
            group = by_source[sid]
            if len(got_train) < want_train:
                got_train.extend(group)
            elif len(got_test) < want_test:
                got_test.extend(group)
        if len(got_train) != want_train or len(got_test) != want_test:
            raise ValueError(
                f"label {label}: cannot split {len(pool)} windows into "
                f"{want_train} train + {want_test} test on source boundaries"
            )
        train.extend(got_train)
        test.extend(got_test)
    assert not {w.source_id for w in train} & {w.source_id for w in test}
    return train, test


def _subwindow(parent: LabeledWindow, start: int, end: int, gap: int) -> LabeledWindow:
    # start/end are 1-based inclusive positions within the parent
    return LabeledWindow(
        values=parent.values[start - 1 : end],
        label=parent.label,
        source_id=parent.source_id,
        gap=gap,
    )


def rolling_windows(window: LabeledWindow) -> list[LabeledWindow]:
    """61 length-100 sub-windows whose ends recede from the parent's end by D in {0,5,..,300}."""
    if window.length != 400:
        raise ValueError(f"rolling sweep expects length-400 windows, got {window.length}")
    out = []
    for gap in ROLLING_GAPS:
        end = window.length - gap
        out.append(_subwindow(window, end - ROLLING_LENGTH + 1, end, gap))
    return out


def expanding_windows(window: LabeledWindow) -> list[LabeledWindow]:
    """74 sub-windows of length L in {5,10,..,370}, each ending 30 before the parent's end."""
    if window.length != 400:
        raise ValueError(f"expanding sweep expects length-400 windows, got {window.length}")
    end = window.length - EXPANDING_GAP
    return [
        _subwindow(window, end - length + 1, end, EXPANDING_GAP)
        for length in EXPANDING_LENGTHS
    ]


def _fmt(x: float) -> str:
    return repr(float(x))


def windows_to_csv(windows: Sequence[LabeledWindow], path: str | Path, manifest: Optional[dict] = None) -> None:
    """Write windows as window_id,label,gap,length,v1..vL (short rows padded empty)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    max_len = max((w.length for w in windows), default=0)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window_id", "label", "gap", "length"] + [f"v{i+1}" for i in range(max_len)])
        for w in windows:
            row = [w.source_id, w.label, str(w.gap), str(w.length)]
            row += [_fmt(v) for v in w.values]
            row += [""] * (max_len - w.length)
            writer.writerow(row)
    meta = {"n_windows": len(windows), "max_length": max_len}
    if manifest:
        meta.update(manifest)
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def windows_from_csv(path: str | Path) -> list[LabeledWindow]:
    out = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:4] != ["window_id", "label", "gap", "length"]:
            raise ValueError(f"{path}: unexpected window CSV header")
        for row in reader:
            length = int(row[3])
            values = np.array([float(v) for v in row[4 : 4 + length]])
            out.append(
                LabeledWindow(values=values, label=row[1], source_id=row[0], gap=int(row[2]))
            )
    return out
