"""Four-part prompt rendering (system, introduction, input, response).

Template prose lives in versioned assets under ``templates/``; rendering here
only fills placeholders and assembles sections, so byte-stable goldens can
freeze the exact output. The inference rendering (response concealed) is a
strict prefix of the training rendering.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .codec import ForeignWordSeq
from .errors import InvalidCategoryError, MissingResponseError
from .features import FEATURE_CATEGORIES
from .records import CorpusRecord

SECTION_SYSTEM = "[SYSTEM]"
SECTION_INTRODUCTION = "[INTRODUCTION]"
SECTION_INPUT = "[INPUT]"
SECTION_RESPONSE = "[RESPONSE]"


def _template(name: str) -> str:
    path = resources.files("tslingua") / "templates" / f"{name}.txt"
    return path.read_text(encoding="utf-8").rstrip("\n")


@dataclass(frozen=True)
class PromptBundle:
    system: str
    introduction: str
    input: str
    response: str | None = None

    def render(self) -> str:
        """Full prompt text; ends after the response header when concealed."""
        text = (
            f"{SECTION_SYSTEM}\n{self.system}\n\n"
            f"{SECTION_INTRODUCTION}\n{self.introduction}\n\n"
            f"{SECTION_INPUT}\n{self.input}\n\n"
            f"{SECTION_RESPONSE}\n"
        )
        if self.response is not None:
            text += f"{self.response}\n"
        return text


@dataclass(frozen=True)
class ContextBlock:
    """Leakage-safe textual side information, aligned by day.

    Only metadata known at the forecast origin may appear: the dataset
    background, forecast weather, and calendar information.
    """

    background: str = ""
    weather: str = ""
    date: str = ""
    day_of_week: str = ""
    holiday: bool = False

    def render(self) -> str:
        lines = []
        if self.background:
            lines.append(f"Background: {self.background}")
        if self.weather:
            lines.append(f"Weather: {self.weather}")
        if self.date:
            date_line = f"Date: {self.date}"
            if self.day_of_week:
                date_line += f" ({self.day_of_week})"
            date_line += ", a public holiday." if self.holiday else "."
            lines.append(date_line)
        return "\n".join(lines)


@dataclass(frozen=True)
class QAPrompt:
    feature: str
    series_words: ForeignWordSeq
    answer: str | None = None

    def __post_init__(self):
        if self.feature not in FEATURE_CATEGORIES:
            raise InvalidCategoryError(f"unknown feature {self.feature!r}")
        if self.answer is not None and self.answer not in FEATURE_CATEGORIES[self.feature]:
            raise InvalidCategoryError(
                f"{self.answer!r} is not a {self.feature} category")


def render_forecast_prompt(history_words: ForeignWordSeq,
                           future_words: ForeignWordSeq | None = None) -> PromptBundle:
    if len(history_words) == 0:
        raise ValueError("history must be non-empty")
    return PromptBundle(
        system=_template("forecast_system"),
        introduction=_template("forecast_introduction"),
        input=history_words.render(),
        response=future_words.render() if future_words is not None else None,
    )


def render_context_prompt(ctx: ContextBlock, history_words: ForeignWordSeq,
                          future_words: ForeignWordSeq | None = None) -> PromptBundle:
    if len(history_words) == 0:
        raise ValueError("history must be non-empty")
    return PromptBundle(
        system=_template("context_system"),
        introduction=_template("context_introduction").format(context=ctx.render()).rstrip("\n"),
        input=history_words.render(),
        response=future_words.render() if future_words is not None else None,
    )


def render_qa_prompt(q: QAPrompt) -> PromptBundle:
    knowledge = _template(f"qa_knowledge_{q.feature}")
    return PromptBundle(
        system=_template("qa_system"),
        introduction=_template("qa_introduction").format(
            feature=q.feature, knowledge=knowledge),
        input=q.series_words.render(),
        response=q.answer,
    )


def to_corpus_record(bundle: PromptBundle, task: str) -> CorpusRecord:
    """Alpaca-shaped record: instruction = system + introduction."""
    if bundle.response is None:
        raise MissingResponseError("bundle has no response section")
    return CorpusRecord(
        instruction=f"{bundle.system}\n\n{bundle.introduction}",
        input=bundle.input,
        output=bundle.response,
        task=task,
    )
