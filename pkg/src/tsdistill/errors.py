"""Exception taxonomy shared by the whole pipeline.

The CLI maps these onto exit codes: validation errors exit 1, transport
errors exit 2, data errors exit 3.
"""


class PipelineError(Exception):
    exit_code = 1


class ValidationError(PipelineError):
    """Caller-supplied parameters, config, or inputs are invalid."""

    exit_code = 1


class TransportError(PipelineError):
    """A remote endpoint is unreachable, times out, or rejects the request."""

    exit_code = 2


class DataError(PipelineError):
    """Data on disk or from a model is malformed or out of range."""

    exit_code = 3


class ParseError(DataError):
    """Malformed serialized text; carries the byte offset of the defect."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message)
        self.offset = offset


class AnnotationFormatError(DataError):
    """Model reply could not be parsed into the three-sentence annotation."""

    def __init__(self, message: str, raw_reply: str | None = None):
        super().__init__(message)
        self.raw_reply = raw_reply
