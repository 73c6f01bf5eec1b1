class ClaimexError(Exception):
    """Base class for data errors raised by this package."""


class CorpusFormatError(ClaimexError, ValueError):
    pass


class ConfigurationError(ClaimexError, ValueError):
    pass


class EmbeddingFormatError(ClaimexError, ValueError):
    pass


class EvaluationError(ClaimexError, ValueError):
    pass
