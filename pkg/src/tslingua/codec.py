"""Reversible translation between real-valued windows and foreign-word sequences.

A window's history is min-max scaled into [-0.5, 0.5] (the outer halves of
[-1, 1] are a buffer for out-of-range future values), quantized onto a uniform
bin grid, and rendered as ``###<4-decimal>###`` words with ``###Nan###`` for
missing values. Decoding inverts every step.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import AllMissingError, MalformedWordError, NonFiniteError

DEFAULT_BIN_COUNT = 10_000
DEFAULT_LOWER = -1.0
DEFAULT_UPPER = 1.0
PRECISION = 4

NAN_WORD = "###Nan###"
WORD_SEP = " "

_WORD_RE = re.compile(r"^###(.*)###$")
_PAYLOAD_RE = re.compile(r"^-?\d+\.\d{4}$")


def _as_float_list(values) -> list[float]:
    return [float("nan") if v is None else float(v) for v in values]


@dataclass(frozen=True)
class SeriesWindow:
    """A history segment plus the number of future steps to forecast."""

    history: list[float]
    horizon: int = 0

    def __post_init__(self):
        object.__setattr__(self, "history", _as_float_list(self.history))
        if len(self.history) < 1:
            raise ValueError("history must contain at least one value")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")


@dataclass(frozen=True)
class ScalingParams:
    """Min/max of the non-missing history; derived from history only."""

    lo: float
    hi: float

    @property
    def degenerate(self) -> bool:
        return self.hi == self.lo

    @staticmethod
    def identity() -> "ScalingParams":
        """Params under which scale() is the identity map into [-0.5, 0.5]."""
        return ScalingParams(-0.5, 0.5)


@dataclass(frozen=True)
class BinGrid:
    """Uniform bins over [lower, upper]; words carry bin centers."""

    count: int = DEFAULT_BIN_COUNT
    lower: float = DEFAULT_LOWER
    upper: float = DEFAULT_UPPER

    def __post_init__(self):
        if self.count < 1 or not self.upper > self.lower:
            raise ValueError("grid needs count >= 1 and upper > lower")

    @property
    def width(self) -> float:
        return (self.upper - self.lower) / self.count

    def center(self, i: int) -> float:
        if not 0 <= i < self.count:
            raise IndexError(f"bin index {i} outside [0, {self.count})")
        return self.lower + (i + 0.5) * self.width

    def index_of_center(self, value: float) -> int | None:
        """Bin index whose center renders identically to ``value``, or None."""
        i = int(round((value - self.lower) / self.width - 0.5))
        if 0 <= i < self.count and format_value(self.center(i)) == format_value(value):
            return i
        return None


@dataclass(frozen=True)
class BinWord:
    center: float

    def render(self) -> str:
        return f"###{format_value(self.center)}###"


@dataclass(frozen=True)
class NanWord:
    def render(self) -> str:
        return NAN_WORD


Word = BinWord | NanWord


@dataclass(frozen=True)
class ForeignWordSeq:
    words: tuple[Word, ...]

    def __init__(self, words):
        object.__setattr__(self, "words", tuple(words))

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def render(self) -> str:
        return WORD_SEP.join(w.render() for w in self.words)


@dataclass(frozen=True)
class ParseResult:
    """Words parsed from a text plus how many whitespace tokens were consumed."""

    seq: ForeignWordSeq
    consumed_tokens: int


def format_value(value: float) -> str:
    """Fixed 4-decimal rendering; sign only for negatives, no negative zero."""
    text = f"{value:.{PRECISION}f}"
    return "0.0000" if text == "-0.0000" else text


def compute_scaling(window: SeriesWindow) -> ScalingParams:
    """Min/max over the non-missing history values."""
    finite = [v for v in window.history if math.isfinite(v)]
    if not finite:
        raise AllMissingError("history contains no finite value")
    return ScalingParams(lo=min(finite), hi=max(finite))


def scale(values, params: ScalingParams) -> list[float]:
    """Map raw values into the scaled band; history lands in [-0.5, 0.5].

    Degenerate params (hi == lo) send every non-missing value to 0.0.
    Missing values pass through unchanged.
    """
    out = []
    for v in _as_float_list(values):
        if not math.isfinite(v):
            out.append(v)
        elif params.degenerate:
            out.append(0.0)
        else:
            out.append((v - params.lo) / (params.hi - params.lo) - 0.5)
    return out


def unscale(values, params: ScalingParams) -> list[float]:
    """Inverse of scale(); degenerate params decode everything to lo."""
    out = []
    for v in _as_float_list(values):
        if not math.isfinite(v):
            out.append(v)
        elif params.degenerate:
            out.append(params.lo)
        else:
            out.append((v + 0.5) * (params.hi - params.lo) + params.lo)
    return out


def quantize(scaled: float, grid: BinGrid = BinGrid()) -> BinWord:
    """Containing bin's center word; boundary values fall into the upper bin.

    Values outside the grid clamp to the extreme bins. NaN is rejected here;
    callers route missing values to NanWord.
    """
    if not math.isfinite(scaled):
        raise NonFiniteError(f"cannot quantize {scaled!r}")
    # count * fraction keeps exact float results on half-grid boundaries,
    # unlike dividing by the (inexact) bin width.
    idx = math.floor(grid.count * (scaled - grid.lower) / (grid.upper - grid.lower))
    idx = min(max(idx, 0), grid.count - 1)
    return BinWord(grid.center(idx))


def encode(window: SeriesWindow, grid: BinGrid = BinGrid()) -> tuple[ForeignWordSeq, ScalingParams]:
    """Scale the history on its own min/max and quantize each value to a word."""
    params = compute_scaling(window)
    words: list[Word] = []
    for v in scale(window.history, params):
        words.append(NanWord() if not math.isfinite(v) else quantize(v, grid))
    return ForeignWordSeq(words), params


def encode_values(values, params: ScalingParams, grid: BinGrid = BinGrid()) -> ForeignWordSeq:
    """Encode arbitrary values (e.g. future targets) under existing params."""
    words: list[Word] = []
    for v in scale(values, params):
        words.append(NanWord() if not math.isfinite(v) else quantize(v, grid))
    return ForeignWordSeq(words)


_DECIMAL_DEN = 10 ** PRECISION


def _decode_value(center: float, lo: float, hi: float) -> float:
    """Exact reconstruction lo + (center + 1/2)*(hi - lo), final float rounded
    toward -inf.

    Quantization is boundary-up, so a value sits anywhere in
    [center - w/2, center + w/2) of its bin and the lower edge is the
    attainable worst case (the window min and max always land there). Exact
    integer arithmetic plus downward rounding keeps the reconstruction error
    at most half a bin width in raw units even when the range is ~1e6, where
    ordinary float evaluation overshoots by several ulps.
    """
    # bin centers are 4-decimal numbers by construction; recover the exact
    # payload when the stored float merely approximates one
    k = round(center * _DECIMAL_DEN)
    if abs(center - k / _DECIMAL_DEN) <= 4 * math.ulp(center):
        cnum, cden = k, _DECIMAL_DEN
    else:
        cnum, cden = center.as_integer_ratio()
    lon, lod = lo.as_integer_ratio()
    hin, hid = hi.as_integer_ratio()
    # ideal = lo + (cnum/cden + 1/2) * (hin/hid - lon/lod), as num/den
    span_num = hin * lod - lon * hid
    num = (2 * cnum + cden) * span_num + 2 * cden * lon * hid
    den = 2 * cden * lod * hid
    value = num / den  # int true division rounds correctly to nearest
    vn, vd = value.as_integer_ratio()
    if vn * den > num * vd:
        value = math.nextafter(value, -math.inf)
    return value


def decode(seq: ForeignWordSeq, params: ScalingParams) -> list[float]:
    """Invert encode(): bin centers back to raw units, NanWord to NaN."""
    out = []
    for w in seq:
        if isinstance(w, NanWord):
            out.append(float("nan"))
        elif params.degenerate:
            out.append(params.lo)
        else:
            out.append(_decode_value(w.center, params.lo, params.hi))
    return out


def parse_words(text: str, grid: BinGrid = BinGrid()) -> ParseResult:
    """Parse a run of foreign words from text, stopping at the first non-word.

    Tokens are space-separated. A token wrapped in ``###`` whose payload is
    neither ``Nan`` nor a grid center raises MalformedWordError; any other
    token ends parsing cleanly (backends may emit trailing prose).
    """
    words: list[Word] = []
    consumed = 0
    for token in text.split(WORD_SEP):
        m = _WORD_RE.match(token)
        if m is None:
            break
        payload = m.group(1)
        if payload == "Nan":
            words.append(NanWord())
        elif _PAYLOAD_RE.match(payload):
            idx = grid.index_of_center(float(payload))
            if idx is None:
                raise MalformedWordError(f"{payload} is not a bin center")
            words.append(BinWord(grid.center(idx)))
        else:
            raise MalformedWordError(f"invalid word payload {payload!r}")
        consumed += 1
    return ParseResult(ForeignWordSeq(words), consumed)


def _digit_string(value: float) -> tuple[bool, str]:
    """(negative, digits) of the fixed-4 rendering, decimal point removed and
    leading zeros stripped, matching the bit-by-bit baselines' rendering."""
    text = format_value(value)
    negative = text.startswith("-")
    digits = text.lstrip("-").replace(".", "").lstrip("0") or "0"
    return negative, digits


def count_tokens(style: str, values) -> int:
    """Token cost of a value list under each tokenization scheme.

    ``chattime``: one token per word plus one per separating space.
    ``gpt_bitwise``: every digit its own space-separated token.
    ``llama_bitwise``: per-character tokens over the plain digit rendering.
    """
    values = _as_float_list(values)
    n = len(values)
    if n == 0:
        return 0
    if style == "chattime":
        return 2 * n - 1
    if style == "gpt_bitwise":
        # per value: digits interleaved with spaces; between values: '_,' '_'
        total = sum(2 * len(d) - 1 + (1 if neg else 0)
                    for neg, d in map(_digit_string, values))
        return total + 2 * (n - 1)
    if style == "llama_bitwise":
        # per value: one token per digit (plus sign); between values: ',' '_'
        total = sum(len(d) + (1 if neg else 0)
                    for neg, d in map(_digit_string, values))
        return total + 2 * (n - 1)
    raise ValueError(f"unknown token style {style!r}")


def decode_array(seq: ForeignWordSeq, params: ScalingParams) -> np.ndarray:
    return np.asarray(decode(seq, params), dtype=float)
