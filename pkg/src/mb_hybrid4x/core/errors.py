"""Domain errors.

Every user-facing failure is a `CliError` with a stable upper-snake code, so the CLI renders it
the same way in text and JSON modes. Wire surfaces translate these into structured responses.
"""

from mm_clikit import CliError


class GameError(CliError):
    """Base class for all domain errors.

    Attributes:
        code: Stable error code, e.g. "TERMINAL_STATE".
        field: Name of the offending field or value, when one can be singled out.

    """

    default_code = "GAME_ERROR"

    def __init__(self, message: str, code: str | None = None, *, field: str | None = None) -> None:
        """Initialize with a message, an optional code override and the offending field."""
        resolved = code or self.default_code
        super().__init__(message, resolved)
        self.code = resolved
        self.field = field
        self.message = message


class InvalidConfigError(GameError):
    """Game or experiment configuration violates an invariant."""

    default_code = "INVALID_CONFIG"


class TerminalStateError(GameError):
    """Operation requires a running game but a victory has been recorded."""

    default_code = "TERMINAL_STATE"


class UnknownPlayerError(GameError):
    """Player index is out of range."""

    default_code = "UNKNOWN_PLAYER"


class DeadPlayerError(GameError):
    """Player has been eliminated."""

    default_code = "DEAD_PLAYER"


class IllegalItemError(GameError):
    """Production item cannot be built in the city."""

    default_code = "ILLEGAL_ITEM"


class NoLegalItemsError(GameError):
    """City has nothing it could produce."""

    default_code = "NO_LEGAL_ITEMS"


class UnknownStrategyError(GameError):
    """Strategy name is not in the catalog."""

    default_code = "UNKNOWN_STRATEGY"


class InvalidPersonaError(GameError):
    """Persona parameter missing or outside [1, 10]."""

    default_code = "INVALID_PERSONA"


class OptionRejectedError(GameError):
    """Override choice is not in the current option catalog."""

    default_code = "INVALID_OPTION"


class UnknownToolError(GameError):
    """Tool name is not among the published schemas."""

    default_code = "UNKNOWN_TOOL"


class SchemaError(GameError):
    """Tool arguments or a request body do not match the schema."""

    default_code = "SCHEMA"


class ToolReusedError(GameError):
    """Tool was already consumed in this episode."""

    default_code = "REUSED"


class EpisodeClosedError(GameError):
    """Episode was already closed by a finishing tool."""

    default_code = "CLOSED"


class MalformedFrameError(GameError):
    """Frame payload cannot be decoded."""

    default_code = "MALFORMED"


class FrameTooLargeError(GameError):
    """Declared frame length exceeds the cap."""

    default_code = "FRAME_TOO_LARGE"


class TransportError(GameError):
    """Strategist endpoint failed after retries."""

    default_code = "TRANSPORT"


class SchemaVersionError(GameError):
    """Persisted record uses an unsupported schema version."""

    default_code = "SCHEMA_VERSION"


class EmptyInputError(GameError):
    """No included records to compute on."""

    default_code = "EMPTY_INPUT"


class RankDeficientError(GameError):
    """Design matrix is not full column rank."""

    default_code = "RANK_DEFICIENT"


class NotBinaryError(GameError):
    """Response vector holds values other than 0 and 1."""

    default_code = "NOT_BINARY"


class DivergedError(GameError):
    """Optimizer did not converge within the iteration cap."""

    default_code = "DIVERGED"


class UnderdeterminedError(GameError):
    """Too few distinct points for the requested fit."""

    default_code = "UNDERDETERMINED"


class SingleLevelError(GameError):
    """Categorical factor has fewer than two levels."""

    default_code = "SINGLE_LEVEL"


class BatchHaltedError(GameError):
    """Batch stopped because records could not be persisted; it can be resumed."""

    default_code = "BATCH_HALTED"


class UnwritableError(GameError):
    """Output path cannot be written."""

    default_code = "UNWRITABLE"


class NotReplayableError(GameError):
    """Record cannot be regenerated by re-simulation."""

    default_code = "NOT_REPLAYABLE"


class RecordNotFoundError(GameError):
    """No record for the requested (condition, seed)."""

    default_code = "RECORD_NOT_FOUND"
