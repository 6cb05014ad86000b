"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class BacsumError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(BacsumError):
    """Inconsistent or missing configuration (mode requirements, dimension mismatch)."""


# -- capture / decode ---------------------------------------------------------


class CaptureError(BacsumError):
    pass


class UnsupportedFormatError(CaptureError):
    pass


class TruncatedCaptureError(CaptureError):
    def __init__(self, record_index: int, detail: str = "") -> None:
        self.record_index = record_index
        msg = f"truncated capture at record {record_index}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class DecodeError(BacsumError, ValueError):
    pass


class MalformedBvlcError(DecodeError):
    pass


class UnsupportedVersionError(DecodeError):
    pass


class MalformedNpduError(DecodeError):
    pass


class MalformedApduError(DecodeError):
    pass


class NoApduError(DecodeError):
    """The frame is valid BACnet but carries no APDU (BVLC control or network-layer message)."""


# -- registry / knowledge base ------------------------------------------------


class ValidationError(BacsumError, ValueError):
    pass


class DuplicateRecordError(BacsumError):
    pass


class DuplicateEntryError(BacsumError):
    pass


# -- retrieval ----------------------------------------------------------------


class EmbedError(BacsumError):
    """Provider transport failure. Safe to retry."""

    retryable = True


class PreconditionError(BacsumError, ValueError):
    pass


class UndefinedSimilarityError(BacsumError, ValueError):
    pass


class IndexFileError(BacsumError):
    pass


class IncompatibleIndexError(IndexFileError):
    pass


class CorruptIndexError(IndexFileError):
    pass


# -- summarizer ---------------------------------------------------------------


class LlmError(BacsumError):
    pass


class LlmUnavailableError(LlmError):
    pass


class ChatTransportError(LlmError):
    """Connection failure, timeout or 5xx from the chat endpoint. Safe to retry."""


class RequestRejectedError(LlmError):
    def __init__(self, status: int, message: str) -> None:
        self.status = status
        self.endpoint_message = message
        super().__init__(f"endpoint rejected request ({status}): {message}")


class EmptyResponseError(LlmError):
    pass


# -- evaluation ---------------------------------------------------------------


class RatingsError(BacsumError):
    pass


class RatingValidationError(RatingsError, ValueError):
    def __init__(self, row: int, detail: str) -> None:
        self.row = row
        super().__init__(f"row {row}: {detail}")


class DuplicateRatingError(RatingsError):
    pass


class NoDataError(RatingsError):
    pass
