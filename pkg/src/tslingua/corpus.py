"""Pre-training and fine-tuning corpus construction.

Sources are sliced with multi-resolution sliding windows (largest fitting
configuration first), deduplicated by seeded k-means representative
selection, and rendered into line-delimited instruction records.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import codec, prompts
from .errors import DataError, InsufficientSlicesError, SourceTooSmallError, TooFewValuesError
from .records import CorpusRecord, write_records


@dataclass(frozen=True)
class SliceConfig:
    window: int
    history: int
    prediction: int
    step: int

    def __post_init__(self):
        if self.window != self.history + self.prediction:
            raise ValueError("window must equal history + prediction")
        if self.step < 1:
            raise ValueError("step must be >= 1")


# Production window configurations, largest first.
PAPER_SLICE_CONFIGS = (
    SliceConfig(576, 512, 64, 32),
    SliceConfig(288, 256, 32, 16),
    SliceConfig(144, 128, 16, 8),
    SliceConfig(72, 64, 8, 4),
    SliceConfig(36, 32, 4, 2),
)

# Production corpus magnitudes; tests and the CLI default far smaller.
PRODUCTION_RAW_SLICES = 10_000_000
PRODUCTION_PRETRAIN_GROUPS = 1_000_000
PRODUCTION_FINETUNE_GROUPS = 25_000
PRODUCTION_PER_TASK = 25_000


@dataclass(frozen=True)
class Slice:
    source_id: str
    offset: int
    config: SliceConfig
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != self.config.window:
            raise ValueError("slice length must equal the config window")

    @property
    def history_values(self) -> tuple[float, ...]:
        return self.values[: self.config.history]

    @property
    def prediction_values(self) -> tuple[float, ...]:
        return self.values[self.config.history:]


def slice_count(length: int, config: SliceConfig) -> int:
    if length < config.window:
        return 0
    return (length - config.window) // config.step + 1


def slice_series(series, configs=PAPER_SLICE_CONFIGS, policy: str = "largest_only",
                 source_id: str = "series") -> list[Slice]:
    """Sliding-window slices of one source series.

    ``largest_only`` applies the single largest configuration that fits;
    ``all_configs`` applies every fitting configuration, largest first.
    A series shorter than every window yields no slices.
    """
    if policy not in ("largest_only", "all_configs"):
        raise ValueError(f"unknown policy {policy!r}")
    values = [float("nan") if v is None else float(v) for v in series]
    length = len(values)
    configs = sorted(configs, key=lambda c: c.window, reverse=True)
    out: list[Slice] = []
    for config in configs:
        if length < config.window:
            continue
        for offset in range(0, length - config.window + 1, config.step):
            out.append(Slice(source_id, offset, config,
                             tuple(values[offset:offset + config.window])))
        if policy == "largest_only":
            break
    return out


def featurize_slice(s: Slice, target_len: int = 32) -> np.ndarray:
    """Fixed-length feature vector: interpolate missing values, resample to
    ``target_len`` by linear interpolation, then z-normalize."""
    values = np.asarray(s.values, dtype=float)
    finite = np.isfinite(values)
    if finite.sum() < 2:
        raise TooFewValuesError("need at least 2 non-missing values")
    idx = np.arange(len(values))
    filled = np.interp(idx, idx[finite], values[finite])
    grid = np.linspace(0.0, len(values) - 1, target_len)
    resampled = np.interp(grid, idx, filled)
    std = resampled.std()
    if std == 0.0:
        return np.zeros(target_len)
    return (resampled - resampled.mean()) / std


def _kmeans(features: np.ndarray, k: int, rng: np.random.Generator,
            max_iter: int = 50, tol: float = 1e-4) -> np.ndarray:
    """Seeded Lloyd's k-means with k-means++ init; returns point labels.

    Empty clusters are backfilled with the farthest point of the largest
    cluster. Deterministic for a fixed generator state.
    """
    n = len(features)
    centers = np.empty((k, features.shape[1]))
    centers[0] = features[rng.integers(n)]
    dist = ((features - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = dist.sum()
        if total <= 0:
            centers[j] = features[rng.integers(n)]
        else:
            centers[j] = features[rng.choice(n, p=dist / total)]
        dist = np.minimum(dist, ((features - centers[j]) ** 2).sum(axis=1))

    prev_inertia = math.inf
    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        d2 = ((features[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        inertia = d2[np.arange(n), labels].sum()
        for j in range(k):
            members = labels == j
            if members.any():
                centers[j] = features[members].mean(axis=0)
            else:
                largest = np.bincount(labels, minlength=k).argmax()
                pool = np.flatnonzero(labels == largest)
                far = pool[d2[pool, largest].argmax()]
                centers[j] = features[far]
                labels[far] = j
        if prev_inertia - inertia <= tol * max(prev_inertia, 1e-12):
            break
        prev_inertia = inertia
    return labels


def select_representatives(slices: list[Slice], k: int, seed: int) -> list[Slice]:
    """One uniformly sampled member per k-means cluster, in input order."""
    if k < 1 or k > len(slices):
        raise InsufficientSlicesError(f"k={k} with {len(slices)} slices")
    if k == len(slices):
        return list(slices)
    rng = np.random.default_rng(seed)
    features = np.stack([featurize_slice(s) for s in slices])
    labels = _kmeans(features, k, rng)
    chosen: list[int] = []
    for j in range(k):
        members = np.flatnonzero(labels == j)
        chosen.append(int(rng.choice(members)))
    return [slices[i] for i in sorted(chosen)]


def pretrain_records(slices) -> list[CorpusRecord]:
    """One autoregressive forecast record per slice, history/prediction split
    at the slice configuration's boundary."""
    records = []
    for s in slices:
        window = codec.SeriesWindow(list(s.history_values), horizon=s.config.prediction)
        history_words, params = codec.encode(window)
        future_words = codec.encode_values(s.prediction_values, params)
        bundle = prompts.render_forecast_prompt(history_words, future_words)
        records.append(prompts.to_corpus_record(bundle, task="forecast"))
    return records


def build_pretrain_corpus(slices, path, header: str | None = None) -> list[CorpusRecord]:
    records = pretrain_records(slices)
    write_records(records, path, header=header)
    return records


def build_finetune_mix(sources: dict[str, list[CorpusRecord]], per_task: int,
                       seed: int, path=None, header: str | None = None) -> list[CorpusRecord]:
    """Seeded uniform sample of ``per_task`` records per task, concatenated in
    fixed task order and then shuffled with the same seed."""
    rng = np.random.default_rng(seed)
    mixed: list[CorpusRecord] = []
    for task in sorted(sources):
        pool = sources[task]
        if len(pool) < per_task:
            raise SourceTooSmallError(
                f"task {task!r} has {len(pool)} records, need {per_task}")
        picks = rng.choice(len(pool), size=per_task, replace=False)
        mixed.extend(pool[i] for i in sorted(picks))
    order = rng.permutation(len(mixed))
    mixed = [mixed[i] for i in order]
    if path is not None:
        write_records(mixed, path, header=header)
    return mixed


def read_series_csv(path) -> tuple[list[str], list[float]]:
    """Read a ``timestamp,value`` CSV; empty value fields become missing."""
    timestamps: list[str] = []
    values: list[float] = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [c.strip().lower() for c in head[:2]] != ["timestamp", "value"]:
            raise DataError(f"{path}: expected 'timestamp,value' header")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise DataError(f"{path}:{lineno}: expected two columns")
            timestamps.append(row[0])
            text = row[1].strip()
            if text == "":
                values.append(float("nan"))
            else:
                try:
                    values.append(float(text))
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: bad value {text!r}") from exc
    return timestamps, values


def write_series_csv(path, timestamps, values) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["timestamp", "value"])
        for ts, v in zip(timestamps, values):
            writer.writerow([ts, "" if not math.isfinite(v) else repr(float(v))])
