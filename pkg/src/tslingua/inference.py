"""Generation backends and the autoregressive forecast driver.

The driver runs the full loop: encode history, render a prompt, request text
from a backend, parse the leading foreign words, decode back to raw units.
Native backends (last-value, seasonal-naive, n-gram) keep the whole pipeline
runnable without any external model; the external backend speaks a
line-delimited JSON protocol to a child process.
"""

from __future__ import annotations

import json
import math
import os
import select
import subprocess
from dataclasses import dataclass

import numpy as np

from . import codec
from .codec import BinGrid, BinWord, ForeignWordSeq, NanWord, SeriesWindow
from .errors import (
    BackendError,
    InsufficientWordsError,
    MalformedWordError,
    UnparseableHistoryError,
)
from .prompts import SECTION_INPUT, SECTION_RESPONSE, ContextBlock, render_context_prompt, render_forecast_prompt


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_new_tokens: int
    stop: str | None = None

    def __post_init__(self):
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")


def _word_budget(max_new_tokens: int) -> int:
    # n words cost 2n-1 tokens (words plus separating spaces)
    return (max_new_tokens + 1) // 2


def extract_history_words(prompt: str, grid: BinGrid = BinGrid()) -> ForeignWordSeq:
    """Foreign words in the prompt's input section."""
    start = prompt.rfind(SECTION_INPUT)
    if start < 0:
        raise UnparseableHistoryError("prompt has no input section")
    body = prompt[start + len(SECTION_INPUT):]
    end = body.find(SECTION_RESPONSE)
    if end >= 0:
        body = body[:end]
    try:
        seq = codec.parse_words(body.strip(), grid).seq
    except MalformedWordError as exc:
        raise UnparseableHistoryError(str(exc)) from exc
    if len(seq) == 0:
        raise UnparseableHistoryError("input section contains no foreign words")
    return seq


class LastValueBackend:
    """Repeats the final history word."""

    kind = "last_value"

    def __init__(self, grid: BinGrid = BinGrid()):
        self.grid = grid

    def generate(self, request: GenerationRequest) -> str:
        words = extract_history_words(request.prompt, self.grid)
        last = words.words[-1]
        return ForeignWordSeq([last] * _word_budget(request.max_new_tokens)).render()


def dominant_period(values, max_lag: int | None = None) -> int:
    """Smallest lag in [2, len/2] attaining the autocorrelation maximum.

    Multiples of the true period tie with it (up to rounding), so the
    smallest lag within tolerance of the peak is the fundamental period.
    """
    x = np.asarray(values, dtype=float)
    if max_lag is None:
        max_lag = len(x) // 2
    acf: dict[int, float] = {}
    for lag in range(2, max_lag + 1):
        a, b = x[:-lag], x[lag:]
        denom = a.std() * b.std()
        acf[lag] = -math.inf if denom == 0 else \
            float(((a - a.mean()) * (b - b.mean())).mean() / denom)
    if not acf:
        return 1
    best = max(acf.values())
    return min(lag for lag, r in acf.items() if r >= best - 1e-9)


class SeasonalNaiveBackend:
    """Detects the dominant period on the decoded history and repeats the
    last full period."""

    kind = "seasonal_naive"

    def __init__(self, grid: BinGrid = BinGrid()):
        self.grid = grid

    def generate(self, request: GenerationRequest) -> str:
        words = extract_history_words(request.prompt, self.grid)
        values = []
        prev = 0.0
        for w in words:
            if isinstance(w, NanWord):
                values.append(prev)
            else:
                prev = w.center
                values.append(prev)
        if len(values) < 4:
            period = 1
        else:
            period = dominant_period(values)
        tail = list(words.words[-period:])
        budget = _word_budget(request.max_new_tokens)
        out = [tail[i % period] for i in range(budget)]
        return ForeignWordSeq(out).render()


class NgramBackend:
    """Order-k frequency model over a coarse re-binning of the history.

    The fine vocabulary is far too sparse to fit on one window, so contexts
    live on a coarse grid; emitted words are the coarse centers re-quantized
    onto the fine grid. Greedy (argmax) continuation, ties broken by the
    lowest bin, so output is deterministic.
    """

    kind = "ngram"

    def __init__(self, grid: BinGrid = BinGrid(), coarse_bins: int = 100,
                 order: int = 3, seed: int = 0):
        self.grid = grid
        self.coarse = BinGrid(coarse_bins, grid.lower, grid.upper)
        self.order = order
        self.seed = seed

    def _coarse_index(self, center: float) -> int:
        idx = math.floor(self.coarse.count * (center - self.coarse.lower)
                         / (self.coarse.upper - self.coarse.lower))
        return min(max(idx, 0), self.coarse.count - 1)

    def generate(self, request: GenerationRequest) -> str:
        words = extract_history_words(request.prompt, self.grid)
        seq: list[int] = []
        prev = self.coarse.count // 2
        for w in words:
            if isinstance(w, BinWord):
                prev = self._coarse_index(w.center)
            seq.append(prev)

        counts: dict[tuple[int, ...], dict[int, int]] = {}
        k = min(self.order, max(1, len(seq) - 1))
        for i in range(k, len(seq)):
            ctx = tuple(seq[i - k:i])
            bucket = counts.setdefault(ctx, {})
            bucket[seq[i]] = bucket.get(seq[i], 0) + 1

        budget = _word_budget(request.max_new_tokens)
        out: list[int] = []
        state = list(seq)
        for _ in range(budget):
            ctx = tuple(state[-k:])
            bucket = counts.get(ctx)
            if bucket:
                # add-one smoothing never changes the argmax over observed
                # continuations; unseen contexts back off to the last value
                nxt = min(b for b, c in bucket.items() if c == max(bucket.values()))
            else:
                nxt = state[-1]
            out.append(nxt)
            state.append(nxt)
        fine = [codec.quantize(self.coarse.center(i), self.grid) for i in out]
        return ForeignWordSeq(fine).render()


class ExternalBackend:
    """Client side of the line-delimited JSON wire protocol.

    One request in flight per connection; ids must echo. The transport is a
    child process's stdin/stdout.
    """

    kind = "external"

    def __init__(self, command: list[str] | str, timeout: float = 30.0):
        if isinstance(command, str):
            import shlex
            command = shlex.split(command)
        try:
            self._proc = subprocess.Popen(
                command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, encoding="utf-8", bufsize=1)
        except OSError as exc:
            raise BackendError(f"cannot launch backend command: {exc}") from exc
        self._timeout = timeout
        self._next_id = 0

    def generate(self, request: GenerationRequest) -> str:
        self._next_id += 1
        rid = self._next_id
        line = json.dumps({
            "id": rid, "prompt": request.prompt,
            "max_new_tokens": request.max_new_tokens, "stop": request.stop,
        }, ensure_ascii=False)
        try:
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BackendError(f"backend stream closed: {exc}") from exc
        response = self._read_line()
        try:
            obj = json.loads(response)
        except json.JSONDecodeError as exc:
            raise BackendError(f"malformed response line: {response!r}") from exc
        if obj.get("id") != rid:
            raise BackendError(f"response id {obj.get('id')!r} != request id {rid}")
        if "error" in obj:
            raise BackendError(f"backend error: {obj['error']}")
        if not isinstance(obj.get("text"), str):
            raise BackendError("response missing 'text' field")
        return obj["text"]

    def _read_line(self) -> str:
        ready, _, _ = select.select([self._proc.stdout], [], [], self._timeout)
        if not ready:
            raise BackendError(f"backend timed out after {self._timeout}s")
        line = self._proc.stdout.readline()
        if line == "":
            raise BackendError("backend closed the stream mid-response")
        return line.rstrip("\n")

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


BACKENDS = {
    "last_value": LastValueBackend,
    "seasonal_naive": SeasonalNaiveBackend,
    "ngram": NgramBackend,
}


def make_backend(kind: str, grid: BinGrid = BinGrid(), seed: int = 0,
                 command: str | None = None) -> object:
    if kind == "external":
        command = command or os.environ.get("TSLINGUA_BACKEND_CMD")
        if not command:
            raise BackendError("external backend needs a command "
                               "(flag or TSLINGUA_BACKEND_CMD)")
        return ExternalBackend(command)
    if kind == "ngram":
        return NgramBackend(grid, seed=seed)
    try:
        return BACKENDS[kind](grid)
    except KeyError:
        raise ValueError(f"unknown backend kind {kind!r}") from None


def forecast(window: SeriesWindow, backend, ctx: ContextBlock | None = None,
             grid: BinGrid = BinGrid()) -> list[float]:
    """Full encode -> prompt -> generate -> parse -> decode loop.

    Returns exactly ``horizon`` raw-unit values or raises. Short generations
    get one retry with a doubled token budget; NanWords in the output are
    filled with the previous valid prediction (or the last history value).
    """
    if window.horizon < 1:
        raise ValueError("horizon must be >= 1 to forecast")
    history_words, params = codec.encode(window, grid)
    if ctx is not None:
        bundle = render_context_prompt(ctx, history_words)
    else:
        bundle = render_forecast_prompt(history_words)
    prompt = bundle.render()

    budget = 2 * window.horizon
    words = _request_words(backend, prompt, budget, grid)
    if len(words) < window.horizon:
        words = _request_words(backend, prompt, 2 * budget, grid)
    if len(words) < window.horizon:
        raise InsufficientWordsError(
            f"got {len(words)} words, horizon {window.horizon}")

    decoded = codec.decode(ForeignWordSeq(words[: window.horizon]), params)
    finite_history = [v for v in window.history if math.isfinite(v)]
    fill = finite_history[-1]
    out = []
    for v in decoded:
        if math.isfinite(v):
            fill = v
        out.append(fill)
    return out


def _request_words(backend, prompt: str, budget: int, grid: BinGrid):
    text = backend.generate(GenerationRequest(prompt=prompt, max_new_tokens=budget))
    try:
        return list(codec.parse_words(text.strip(), grid).seq)
    except MalformedWordError:
        return []
