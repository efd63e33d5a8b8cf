"""Error types and helpers for consistent error reporting."""

import logging
from enum import Enum
from typing import Any

logger = logging.getLogger(__name__)


class ErrorCode(str, Enum):
    """Standard error codes for library and CLI failures."""

    # Configuration errors
    CONFIGURATION_ERROR = "CONFIGURATION_ERROR"

    # Input errors
    VALIDATION_ERROR = "VALIDATION_ERROR"
    PARSE_ERROR = "PARSE_ERROR"
    SHAPE_ERROR = "SHAPE_ERROR"
    INDEX_ERROR = "INDEX_ERROR"

    # Graph and sampling errors
    EMPTY_GRAPH = "EMPTY_GRAPH"
    EMPTY_DISTRIBUTION = "EMPTY_DISTRIBUTION"
    NO_CANDIDATE = "NO_CANDIDATE"
    CONSTRAINT_ERROR = "CONSTRAINT_ERROR"

    # Runtime errors
    NUMERICAL_ERROR = "NUMERICAL_ERROR"
    BLACK_BOX_VIOLATION = "BLACK_BOX_VIOLATION"
    DOWNLOAD_ERROR = "DOWNLOAD_ERROR"
    STAGE_FAILED = "STAGE_FAILED"
    INTERNAL_ERROR = "INTERNAL_ERROR"


# Default messages by error code
DEFAULT_MESSAGES: dict[ErrorCode, str] = {
    ErrorCode.CONFIGURATION_ERROR: "Invalid or incomplete configuration",
    ErrorCode.VALIDATION_ERROR: "Input validation failed",
    ErrorCode.PARSE_ERROR: "Input could not be parsed",
    ErrorCode.SHAPE_ERROR: "Tensor shapes are incompatible",
    ErrorCode.INDEX_ERROR: "Index out of range",
    ErrorCode.EMPTY_GRAPH: "Graph has no nodes",
    ErrorCode.EMPTY_DISTRIBUTION: "Every entry of the distribution is masked",
    ErrorCode.NO_CANDIDATE: "No candidate node is left to wire",
    ErrorCode.CONSTRAINT_ERROR: "Graph mutation violates an attack constraint",
    ErrorCode.NUMERICAL_ERROR: "Non-finite value encountered",
    ErrorCode.BLACK_BOX_VIOLATION: "Attacker tried to access victim internals",
    ErrorCode.DOWNLOAD_ERROR: "Dataset download failed",
    ErrorCode.STAGE_FAILED: "Experiment stage failed",
    ErrorCode.INTERNAL_ERROR: "An unexpected error occurred",
}

DEFAULT_MESSAGE = "An unexpected error occurred"

# Maximum length for error details
MAX_ERROR_LENGTH = 500

# CLI exit codes
EXIT_OK = 0
EXIT_CONFIGURATION_ERROR = 2
EXIT_RUNTIME_FAILURE = 3


def get_default_message(code: ErrorCode | None, default: str | None = None) -> str:
    """Get the default message for an error code.

    Args:
        code: The error code.
        default: Fallback message if code not found.

    Returns:
        Human-readable error message.
    """
    if code is None:
        return default or DEFAULT_MESSAGE

    return DEFAULT_MESSAGES.get(code, default or DEFAULT_MESSAGE)


def truncate_error(error: str, max_length: int = MAX_ERROR_LENGTH) -> str:
    """Truncate error message if too long.

    Args:
        error: The error message.
        max_length: Maximum allowed length.

    Returns:
        Truncated error message.
    """
    if len(error) <= max_length:
        return error

    return error[: max_length - 3] + "..."


class GA2CError(Exception):
    """Base class for all errors raised by the package.

    Attributes:
        code: Machine-readable error code.
        detail: Human-readable detail, truncated to MAX_ERROR_LENGTH.
    """

    code: ErrorCode = ErrorCode.INTERNAL_ERROR

    def __init__(self, detail: str | None = None):
        self.detail = truncate_error(detail or get_default_message(self.code))
        super().__init__(self.detail)


class ConfigurationError(GA2CError):
    """Configuration is missing, inconsistent or points at absent files."""

    code = ErrorCode.CONFIGURATION_ERROR


class GraphMismatchError(ConfigurationError):
    """An attacked graph, victim or dataset does not share the same clean graph."""


class FeatureValidationError(GA2CError):
    """Input data violates a structural requirement (binary features, splits)."""

    code = ErrorCode.VALIDATION_ERROR


class EmptyInputError(GA2CError, ValueError):
    """A sequence argument that must be nonempty is empty."""

    code = ErrorCode.VALIDATION_ERROR


class ParseError(GA2CError):
    """A dataset file contains a malformed row."""

    code = ErrorCode.PARSE_ERROR

    def __init__(self, detail: str, line_number: int | None = None, path: str | None = None):
        self.line_number = line_number
        self.path = path
        location = ""
        if path is not None:
            location = f"{path}:"
        if line_number is not None:
            location = f"{location}{line_number}: "
        elif location:
            location = f"{location} "
        super().__init__(f"{location}{detail}")


class ShapeError(GA2CError):
    """Operand shapes do not agree."""

    code = ErrorCode.SHAPE_ERROR


class GraphIndexError(GA2CError, IndexError):
    """Node id or class id out of range."""

    code = ErrorCode.INDEX_ERROR


class EmptyGraphError(GA2CError):
    """Operation requires at least one node or row."""

    code = ErrorCode.EMPTY_GRAPH


class EmptyDistributionError(GA2CError):
    """Every logit of a categorical distribution is masked."""

    code = ErrorCode.EMPTY_DISTRIBUTION


class NoCandidateError(EmptyDistributionError):
    """No node is left that the injected node could be wired to."""

    code = ErrorCode.NO_CANDIDATE


class ConstraintError(GA2CError):
    """Graph mutation breaks an injection constraint."""

    code = ErrorCode.CONSTRAINT_ERROR


class NumericalError(GA2CError):
    """NaN or infinite loss or gradient."""

    code = ErrorCode.NUMERICAL_ERROR


class BlackBoxViolationError(GA2CError, AttributeError):
    """Attacker code reached for something other than the query interface."""

    code = ErrorCode.BLACK_BOX_VIOLATION


class DownloadError(GA2CError):
    """Dataset archive could not be fetched or unpacked."""

    code = ErrorCode.DOWNLOAD_ERROR


class StageError(GA2CError):
    """An experiment stage failed.

    Attributes:
        stage: Name of the failing stage.
        cause: The underlying exception.
    """

    code = ErrorCode.STAGE_FAILED

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"Stage '{stage}' failed: {type(cause).__name__}: {cause}")


def classify_exception(exc: Exception) -> ErrorCode:
    """Classify an exception to an error code.

    Args:
        exc: The exception to classify.

    Returns:
        Appropriate error code.
    """
    # Import here to avoid import cost for library users
    import httpx
    from pydantic import ValidationError

    if isinstance(exc, StageError):
        return classify_exception(exc.cause)

    if isinstance(exc, GA2CError):
        return exc.code

    if isinstance(exc, ValidationError):
        return ErrorCode.CONFIGURATION_ERROR

    if isinstance(exc, FileNotFoundError):
        return ErrorCode.CONFIGURATION_ERROR

    if isinstance(exc, (httpx.HTTPError, ConnectionError, TimeoutError)):
        return ErrorCode.DOWNLOAD_ERROR

    return ErrorCode.INTERNAL_ERROR


def exit_code_for(exc: Exception) -> int:
    """Map an exception to the CLI exit code.

    Args:
        exc: The exception that terminated the command.

    Returns:
        2 for configuration problems, 3 for any other failure.
    """
    if classify_exception(exc) == ErrorCode.CONFIGURATION_ERROR:
        return EXIT_CONFIGURATION_ERROR
    return EXIT_RUNTIME_FAILURE


def log_error(
    exc: Exception,
    code: ErrorCode | None = None,
    **context: Any,
) -> None:
    """Log an error with context.

    Args:
        exc: The exception that occurred.
        code: Optional pre-classified error code.
        **context: Additional context to include in log.
    """
    if code is None:
        code = classify_exception(exc)

    log_extra = {
        "error_code": code.value,
        "error_type": type(exc).__name__,
        **context,
    }

    # Full traceback only for errors we did not anticipate
    if code == ErrorCode.INTERNAL_ERROR:
        logger.exception("Internal error occurred", extra=log_extra)
    else:
        logger.error(f"Command failed: {exc}", extra=log_extra)
