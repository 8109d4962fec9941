"""Exception hierarchy shared across the package."""


class TsLinguaError(Exception):
    """Base class for all package errors."""


class AllMissingError(TsLinguaError):
    """History contains no finite value."""


class NonFiniteError(TsLinguaError):
    """A finite value was required."""


class MalformedWordError(TsLinguaError):
    """Token looks like a foreign word but carries an invalid payload."""


class UnknownWordError(TsLinguaError):
    """Word not present in the vocabulary."""


class IndexOutOfRangeError(TsLinguaError):
    """Vocabulary index outside [0, size)."""


class CorruptVocabularyError(TsLinguaError):
    """Vocabulary file fails validation against its grid."""


class InvalidCategoryError(TsLinguaError):
    """Answer is not one of the feature's categories."""


class MissingResponseError(TsLinguaError):
    """Corpus record requested from an inference-mode bundle."""


class InvalidCombinationError(TsLinguaError):
    """Unsupported (feature, category, length) combination."""


class TooFewValuesError(TsLinguaError):
    """Slice has too few non-missing values to featurize."""


class InsufficientSlicesError(TsLinguaError):
    """Fewer slices than requested representatives."""


class SourceTooSmallError(TsLinguaError):
    """A fine-tuning source has fewer records than requested."""


class BackendError(TsLinguaError):
    """Generation backend failed (transport, timeout, malformed response)."""


class InsufficientWordsError(TsLinguaError):
    """Backend produced fewer valid words than the horizon after retry."""


class UnparseableHistoryError(TsLinguaError):
    """Prompt contains no parseable history word sequence."""


class TooShortError(TsLinguaError):
    """Series too short for the requested split or evaluation."""


class LengthMismatchError(TsLinguaError):
    """Paired lists have different lengths."""


class IncompleteTableError(TsLinguaError):
    """Ranking table has missing cells."""


class DataError(TsLinguaError):
    """Input file violates its documented format."""
