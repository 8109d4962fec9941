"""Synthetic series generation for the question-answering dataset.

Each sample activates exactly one feature contrast (trend, volatility,
season, outlier) with margins wide enough that an independent rule-based
classifier recovers the construction label. The oracle below never looks at
the generation parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, InvalidCombinationError
from .features import FEATURE_CATEGORIES, FEATURES, SERIES_LENGTHS


@dataclass(frozen=True)
class QASample:
    series: tuple[float, ...]
    feature: str
    category: str
    gen_params: dict
    seed: int


def _trend(rng: np.random.Generator, category: str, n: int):
    sigma = rng.uniform(0.5, 1.5)
    base = rng.uniform(-5.0, 5.0)
    t = np.arange(n)
    if category == "constant trend":
        rise = 0.0
    else:
        # total rise of at least 5 noise stds keeps the OLS t-stat unambiguous
        rise = rng.uniform(5.0, 10.0) * sigma
        if category == "downward trend":
            rise = -rise
    series = base + rise * t / (n - 1) + rng.normal(0.0, sigma, n)
    return series, {"base": base, "noise_std": sigma, "rise": rise}


def _volatility(rng: np.random.Generator, category: str, n: int):
    base = rng.uniform(-5.0, 5.0)
    sigma = rng.uniform(0.5, 1.5)
    ratio = rng.uniform(4.0, 6.0)
    half = n // 2
    if category == "increased volatility":
        s1, s2 = sigma, sigma * ratio
    elif category == "decreased volatility":
        s1, s2 = sigma * ratio, sigma
    else:
        s1 = s2 = sigma
    noise = np.concatenate([rng.normal(0.0, s1, half), rng.normal(0.0, s2, n - half)])
    return base + noise, {"base": base, "std_first": s1, "std_second": s2}


def _season(rng: np.random.Generator, category: str, n: int):
    base = rng.uniform(-5.0, 5.0)
    sigma = rng.uniform(0.3, 0.8)
    amp = rng.uniform(6.0, 10.0) * sigma
    phase0 = rng.uniform(0.0, 2 * np.pi)
    params = {"base": base, "noise_std": sigma, "amplitude": amp}
    t = np.arange(n)
    if category == "no seasonality":
        seasonal = 0.0
        params["amplitude"] = 0.0
    elif category == "fixed seasonality":
        period = int(rng.integers(8, n // 4 + 1))
        seasonal = amp * np.sin(2 * np.pi * t / period + phase0)
        params["period"] = period
    else:  # shifting seasonality: linear period drift of 40-60%
        period0 = int(rng.integers(8, max(9, n // 8 + 1)))
        drift = rng.uniform(0.4, 0.6)
        inst_period = period0 * (1.0 + drift * t / (n - 1))
        phase = phase0 + 2 * np.pi * np.cumsum(1.0 / inst_period)
        seasonal = amp * np.sin(phase)
        params.update({"period_start": period0, "drift": drift})
    return base + seasonal + rng.normal(0.0, sigma, n), params


def _outlier(rng: np.random.Generator, category: str, n: int):
    base = rng.uniform(-5.0, 5.0)
    sigma = rng.uniform(0.5, 1.5)
    series = base + rng.normal(0.0, sigma, n)
    params = {"base": base, "noise_std": sigma}
    sign = 1.0 if rng.random() < 0.5 else -1.0
    if category == "sudden spike":
        pos = int(rng.integers(2, n - 2))
        offset = sign * rng.uniform(8.0, 12.0) * sigma
        series[pos] += offset
        params.update({"position": pos, "offset": offset})
    elif category == "level shift":
        pos = int(rng.integers(n // 5, n - n // 5))
        offset = sign * rng.uniform(5.0, 8.0) * sigma
        series[pos:] += offset
        params.update({"position": pos, "offset": offset})
    return series, params


_GENERATORS = {
    "trend": _trend,
    "volatility": _volatility,
    "season": _season,
    "outlier": _outlier,
}


def generate_sample(feature: str, category: str, length: int, seed: int) -> QASample:
    if feature not in FEATURES or category not in FEATURE_CATEGORIES[feature] \
            or length not in SERIES_LENGTHS:
        raise InvalidCombinationError(f"({feature!r}, {category!r}, {length})")
    rng = np.random.default_rng(seed)
    series, params = _GENERATORS[feature](rng, category, length)
    return QASample(tuple(float(v) for v in series), feature, category, params, seed)


def generate_dataset(per_feature: dict[tuple[str, int], int] | int, seed: int,
                     lengths=SERIES_LENGTHS) -> list[QASample]:
    """Samples balanced (to within one) across the 3 categories per feature.

    ``per_feature`` is either a count applied to every (feature, length)
    combination or an explicit mapping. Per-sample seeds are derived from the
    master seed so the dataset is a pure function of (counts, seed).
    """
    if isinstance(per_feature, int):
        counts = {(f, n): per_feature for f in FEATURES for n in lengths}
    else:
        counts = dict(per_feature)
    samples = []
    seed_rng = np.random.default_rng(seed)
    for feature in FEATURES:
        for length in lengths:
            total = counts.get((feature, length), 0)
            categories = FEATURE_CATEGORIES[feature]
            for i in range(total):
                category = categories[i % len(categories)]
                samples.append(generate_sample(
                    feature, category, length, int(seed_rng.integers(2 ** 63))))
    return samples


# --- rule-based oracle -------------------------------------------------------

def _best_acf(x: np.ndarray, max_lag: int) -> tuple[int, float]:
    """(lag, value) of the autocorrelation peak over lags 2..max_lag."""
    x = np.asarray(x, dtype=float)
    x = (x - x.mean()) / (x.std() + 1e-12)
    best_lag, best = 2, -1.0
    for lag in range(2, max_lag + 1):
        a, b = x[:-lag], x[lag:]
        denom = a.std() * b.std()
        r = 0.0 if denom == 0 else float(((a - a.mean()) * (b - b.mean())).mean() / denom)
        if r > best:
            best_lag, best = lag, r
    return best_lag, best


def _classify_trend(x: np.ndarray) -> str:
    n = len(x)
    t = np.arange(n)
    slope, intercept = np.polyfit(t, x, 1)
    resid = x - (slope * t + intercept)
    se = resid.std(ddof=2) / np.sqrt(((t - t.mean()) ** 2).sum())
    tstat = slope / (se + 1e-12)
    if tstat > 4.0:
        return "upward trend"
    if tstat < -4.0:
        return "downward trend"
    return "constant trend"


def _classify_volatility(x: np.ndarray) -> str:
    half = len(x) // 2
    s1 = x[:half].std()
    s2 = x[half:].std()
    ratio = s2 / (s1 + 1e-12)
    if ratio >= 2.0:
        return "increased volatility"
    if ratio <= 0.5:
        return "decreased volatility"
    return "constant volatility"


def _acf_curve(x: np.ndarray, max_lag: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    x = (x - x.mean()) / (x.std() + 1e-12)
    out = np.empty(max_lag)
    for lag in range(1, max_lag + 1):
        a, b = x[:-lag], x[lag:]
        denom = a.std() * b.std()
        out[lag - 1] = 0.0 if denom == 0 else ((a - a.mean()) * (b - b.mean())).mean() / denom
    return out


def _acf_peak_after_dip(x: np.ndarray, max_lag: int) -> tuple[int, float]:
    """Autocorrelation peak past the first local minimum.

    Skipping the short-lag shoulder (any smooth series correlates at lag 1-2)
    makes the peak read the cycle itself. Returns (lag, value).
    """
    r = _acf_curve(x, max_lag)
    i = 0
    while i + 1 < len(r) and r[i + 1] <= r[i]:
        i += 1
    if i + 1 >= len(r):
        return 2, -1.0
    j = int(np.argmax(r[i + 1:]))
    return i + 2 + j, float(r[i + 1 + j])


def _classify_season(x: np.ndarray) -> str:
    # cap the scan at n/4, the largest period the generator's drift reaches;
    # longer lags leave too few pairs and read spuriously high
    _, peak = _acf_peak_after_dip(x, len(x) // 4)
    if peak < 0.55:
        return "no seasonality"
    # a steady period keeps the peak near 1; period drift decoheres it
    if peak >= 0.89:
        return "fixed seasonality"
    return "shifting seasonality"


def _classify_outlier(x: np.ndarray) -> str:
    n = len(x)
    median = np.median(x)
    cand = int(np.argmax(np.abs(x - median)))
    rest = np.delete(x, cand)
    z = abs(x[cand] - rest.mean()) / (rest.std() + 1e-12)
    if z >= 5.0:
        return "sudden spike"
    best = 0.0
    for k in range(3, n - 2):
        left, right = x[:k], x[k:]
        pooled = np.sqrt((k * left.var() + (n - k) * right.var()) / n)
        stat = abs(left.mean() - right.mean()) / \
            (pooled * np.sqrt(1.0 / k + 1.0 / (n - k)) + 1e-12)
        best = max(best, stat)
    if best >= 6.0:
        return "level shift"
    return "no outlier"


_ORACLES = {
    "trend": _classify_trend,
    "volatility": _classify_volatility,
    "season": _classify_season,
    "outlier": _classify_outlier,
}


def oracle_classify(series, feature: str) -> str:
    """Label a series within one feature taxonomy, independent of how (or
    whether) it was generated."""
    if feature not in FEATURES:
        raise InvalidCombinationError(f"unknown feature {feature!r}")
    return _ORACLES[feature](np.asarray(series, dtype=float))


# --- persistence -------------------------------------------------------------

def save_dataset(samples, path, header: str | None = None) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(f"# {header}\n")
        for s in samples:
            fh.write(json.dumps({
                "series": list(s.series), "feature": s.feature,
                "category": s.category, "gen_params": s.gen_params,
                "seed": s.seed,
            }, ensure_ascii=False) + "\n")


def load_dataset(path) -> list[QASample]:
    samples = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            try:
                obj = json.loads(line)
                samples.append(QASample(
                    tuple(obj["series"]), obj["feature"], obj["category"],
                    obj["gen_params"], obj["seed"]))
            except (json.JSONDecodeError, KeyError) as exc:
                raise DataError(f"{path}:{lineno}: bad sample ({exc})") from exc
    return samples
