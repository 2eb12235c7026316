"""Exception types shared across the package."""


class HevolveError(Exception):
    """Base class for all package-specific errors."""


class DuplicateIdError(HevolveError):
    """An individual with this id is already archived."""


class NoEliteError(HevolveError):
    """No member with a finite objective exists."""


class MalformedRecordError(HevolveError):
    """A persisted archive line could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message)
        self.line_no = line_no


class SourceParseError(HevolveError):
    """Heuristic source does not parse in the generation language."""


class EmbeddingError(HevolveError):
    """Embedding backend failed or produced an unusable vector."""


class BackendUnavailableError(EmbeddingError):
    """Remote embedding endpoint unreachable after bounded retries."""


class UndefinedSimilarityError(HevolveError):
    """Cosine similarity requested against a zero vector."""


class EmptyArchiveError(HevolveError):
    """Diversity metric requested on an empty embedding set."""


class InsufficientArchiveError(HevolveError):
    """Fewer than two embeddings: no spanning tree exists."""


class BudgetExhaustedError(HevolveError):
    """Token budget cannot cover the next request.

    Signals graceful run termination, not a failure.
    """


class TransportError(HevolveError):
    """Chat backend unreachable after bounded retries."""


class MockScriptExhaustedError(HevolveError):
    """The scripted mock has no reply left for this request."""


class ExtractionError(HevolveError):
    """No fenced code block found in a model reply."""


class RangeParseError(HevolveError):
    """The parameter-ranges block is missing or malformed."""


class SelectionError(HevolveError):
    """Fewer than two valid members available for pairing."""


class OracleTooLargeError(HevolveError):
    """Exact enumeration requested beyond desk scale."""


class ParameterExtractionError(HevolveError):
    """Elite parameterization failed (parse or non-evaluable template)."""


class ConfigError(HevolveError):
    """Invalid run configuration."""
