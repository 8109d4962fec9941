"""Evaluation protocols: chronological splits, rolling-origin MAE, QA
accuracy, and cross-method rank aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from . import inference
from .codec import SeriesWindow
from .errors import IncompleteTableError, LengthMismatchError, TooShortError
from .prompts import ContextBlock
from .qasynth import QASample

DEFAULT_SPLIT = (0.6, 0.2, 0.2)
DEFAULT_HISTORY_MULTIPLES = (2, 3, 4, 5)


@dataclass(frozen=True)
class EvalConfig:
    prediction_len: int
    history_multiples: tuple[int, ...] = DEFAULT_HISTORY_MULTIPLES
    split_ratio: tuple[float, float, float] = DEFAULT_SPLIT
    stride: int | None = None  # defaults to prediction_len (non-overlapping)

    def __post_init__(self):
        if self.prediction_len < 1:
            raise ValueError("prediction_len must be >= 1")
        if any(m < 1 for m in self.history_multiples):
            raise ValueError("history multiples must be >= 1")
        if not math.isclose(sum(self.split_ratio), 1.0):
            raise ValueError("split ratios must sum to 1")

    @property
    def effective_stride(self) -> int:
        return self.stride if self.stride is not None else self.prediction_len


def chronological_split(series, ratio=DEFAULT_SPLIT):
    """Contiguous (train, valid, test) with boundaries at floor(r1*L) and
    floor((r1+r2)*L); concatenation reconstructs the series."""
    values = list(series)
    if len(values) < 10:
        raise TooShortError(f"need at least 10 points, got {len(values)}")
    b1 = math.floor(ratio[0] * len(values))
    b2 = math.floor((ratio[0] + ratio[1]) * len(values))
    return values[:b1], values[b1:b2], values[b2:]


@dataclass(frozen=True)
class ForecastResult:
    history_len: int
    mae: float
    origins: int


@dataclass(frozen=True)
class EvalReport:
    results: tuple[ForecastResult, ...]

    @property
    def mean_mae(self) -> float:
        return float(np.mean([r.mae for r in self.results]))


def evaluate_forecaster(series, config: EvalConfig, backend,
                        ctx: ContextBlock | None = None) -> EvalReport:
    """Rolling-origin evaluation over the test segment.

    Origins step through the test segment at the configured stride; each
    origin's history is drawn from the immediately preceding values, crossing
    into valid/train as needed. MAE is computed in raw units.
    """
    values = [float(v) for v in series]
    n = len(values)
    b2 = math.floor((config.split_ratio[0] + config.split_ratio[1]) * n)
    pred = config.prediction_len
    results = []
    for mult in config.history_multiples:
        hist = mult * pred
        errors: list[float] = []
        origins = 0
        origin = b2
        while origin + pred <= n:
            if origin - hist >= 0:
                window = SeriesWindow(values[origin - hist:origin], horizon=pred)
                predicted = inference.forecast(window, backend, ctx=ctx)
                truth = values[origin:origin + pred]
                errors.extend(abs(p - t) for p, t in zip(predicted, truth))
                origins += 1
            origin += config.effective_stride
        if origins == 0:
            raise TooShortError(
                f"test segment too short for history multiple {mult}")
        results.append(ForecastResult(hist, float(np.mean(errors)), origins))
    return EvalReport(tuple(results))


def score_qa(responses: list[str], samples: list[QASample]) -> dict[tuple[str, int], float]:
    """Accuracy per (feature, length); a response is correct iff the gold
    category occurs in it case-insensitively."""
    if len(responses) != len(samples):
        raise LengthMismatchError(
            f"{len(responses)} responses vs {len(samples)} samples")
    correct: dict[tuple[str, int], list[int]] = {}
    for response, sample in zip(responses, samples):
        key = (sample.feature, len(sample.series))
        hit = sample.category.lower() in response.lower()
        cell = correct.setdefault(key, [0, 0])
        cell[0] += int(hit)
        cell[1] += 1
    return {key: hits / total for key, (hits, total) in correct.items()}


def rank_methods(mae_table: dict[str, list[float]]) -> dict[str, float]:
    """Mean rank per method across settings; rank 1 = lowest MAE, ties share
    the mean of the tied ranks."""
    methods = sorted(mae_table)
    lengths = {len(mae_table[m]) for m in methods}
    if len(lengths) != 1:
        raise IncompleteTableError("methods cover different setting counts")
    n_settings = lengths.pop()
    if n_settings == 0:
        raise IncompleteTableError("table has no settings")
    for m in methods:
        if any(v is None or not math.isfinite(v) for v in mae_table[m]):
            raise IncompleteTableError(f"method {m!r} has missing cells")
    ranks = {m: 0.0 for m in methods}
    for j in range(n_settings):
        column = rankdata([mae_table[m][j] for m in methods], method="average")
        for m, r in zip(methods, column):
            ranks[m] += float(r)
    return {m: total / n_settings for m, total in ranks.items()}
