"""Instruction-record shape and its line-delimited file format.

Records serialize as one JSON object per line with fields
instruction/input/output/task. Lines starting with ``#`` are header comments
and are skipped on read.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import DataError

TASKS = ("text_qa", "forecast", "context_forecast", "ts_qa")


@dataclass(frozen=True)
class CorpusRecord:
    instruction: str
    input: str
    output: str
    task: str

    def __post_init__(self):
        if not (self.instruction and self.input and self.output):
            raise ValueError("instruction, input, and output must be non-empty")
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")


def write_records(records, path, header: str | None = None) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(f"# {header}\n")
        for rec in records:
            fh.write(json.dumps(asdict(rec), ensure_ascii=False) + "\n")


def read_records(path) -> list[CorpusRecord]:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            try:
                obj = json.loads(line)
                records.append(CorpusRecord(**obj))
            except (json.JSONDecodeError, TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad record ({exc})") from exc
    return records
