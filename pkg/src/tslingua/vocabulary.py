"""Extended foreign-language vocabulary: bin-center words plus the Nan word.

Entries are ordered by ascending bin center with the Nan word last, giving a
stable word<->index bijection. The on-disk format is one word per line; the
line number is the index.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .codec import NAN_WORD, BinGrid, BinWord
from .errors import CorruptVocabularyError, IndexOutOfRangeError, UnknownWordError


@dataclass(frozen=True)
class Vocabulary:
    entries: tuple[str, ...]
    grid: BinGrid

    def __post_init__(self):
        object.__setattr__(self, "_index", {w: i for i, w in enumerate(self.entries)})

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def word_to_index(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise UnknownWordError(f"{word!r} not in vocabulary") from None

    def index_to_word(self, i: int) -> str:
        if not 0 <= i < len(self.entries):
            raise IndexOutOfRangeError(f"index {i} outside [0, {len(self.entries)})")
        return self.entries[i]


def build_vocabulary(grid: BinGrid = BinGrid()) -> Vocabulary:
    """All bin-center words in ascending order, then the Nan word."""
    entries = [BinWord(grid.center(i)).render() for i in range(grid.count)]
    entries.append(NAN_WORD)
    return Vocabulary(tuple(entries), grid)


def save_vocabulary(vocab: Vocabulary, path) -> None:
    """One word per line, UTF-8, LF endings, no trailing blank line."""
    Path(path).write_text("\n".join(vocab.entries) + "\n", encoding="utf-8")


def load_vocabulary(path, grid: BinGrid = BinGrid()) -> Vocabulary:
    """Read and validate a vocabulary file against the expected grid."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    expected = build_vocabulary(grid)
    if len(lines) != len(expected.entries):
        raise CorruptVocabularyError(
            f"expected {len(expected.entries)} words, found {len(lines)}")
    if len(set(lines)) != len(lines):
        raise CorruptVocabularyError("duplicate words in vocabulary file")
    for lineno, (got, want) in enumerate(zip(lines, expected.entries)):
        if got != want:
            raise CorruptVocabularyError(
                f"line {lineno}: {got!r} is not the expected word {want!r}")
    return Vocabulary(tuple(lines), grid)
