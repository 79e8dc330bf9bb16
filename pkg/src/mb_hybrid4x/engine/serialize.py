"""Versioned canonical save format: a header line followed by the state as JSON."""

from mb_hybrid4x.core.errors import SchemaVersionError
from mb_hybrid4x.engine.models import SAVE_VERSION, GameState

SAVE_HEADER = f"mb-hybrid4x-save v{SAVE_VERSION}"


def dump_state(state: GameState) -> str:
    """Serialize a state. Field order follows the model definitions, so equal states give equal text."""
    return f"{SAVE_HEADER}\n{state.model_dump_json()}\n"


def load_state(text: str) -> GameState:
    """Parse a save produced by `dump_state`.

    Raises:
        SchemaVersionError: If the header is missing or names another version.

    """
    header, _, body = text.partition("\n")
    if header != SAVE_HEADER:
        raise SchemaVersionError(f"Unsupported save header: {header[:40]!r}; expected {SAVE_HEADER!r}.", field="header")
    state = GameState.model_validate_json(body)
    if state.version != SAVE_VERSION:
        raise SchemaVersionError(f"Unsupported save version: {state.version}.", field="version")
    return state
