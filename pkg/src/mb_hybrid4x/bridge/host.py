"""One hosted game: state, per-player seats and open decision episodes.

Every transport (frames, REST, the in-process harness) goes through the same methods, so their
answers are identical for the same state. Methods are synchronous and never yield, which keeps
engine access serialized per game when several handlers share an event loop.
"""

import logging

from mb_hybrid4x.bridge.tool_server import EpisodeSession, ToolRequest, ToolResponse
from mb_hybrid4x.codec.document import MarkdownDoc, encode_state, event_visible
from mb_hybrid4x.codec.tools import ToolSchema, tool_schemas
from mb_hybrid4x.core.errors import DeadPlayerError, TerminalStateError, UnknownPlayerError
from mb_hybrid4x.engine.game import advance_turn
from mb_hybrid4x.engine.models import Event, GameState
from mb_hybrid4x.strategy.catalog import option_catalog
from mb_hybrid4x.strategy.models import OptionCatalog
from mb_hybrid4x.strategy.seat import PlayerSeat

logger = logging.getLogger(__name__)


class GameHost:
    """Owns a game state and the macro seats of all its players."""

    def __init__(self, state: GameState) -> None:
        """Seat every player with its archetype defaults."""
        self.state = state
        self.seats = [PlayerSeat(p.id, p.archetype) for p in state.players]
        self.episodes: dict[int, EpisodeSession] = {}

    def _player(self, player: int) -> int:
        if not 0 <= player < len(self.state.players):
            raise UnknownPlayerError(f"Unknown player: {player}.", field="player")
        if not self.state.players[player].alive:
            raise DeadPlayerError(f"Player {player} has been eliminated.", field="player")
        return player

    def state_doc(self, player: int) -> MarkdownDoc:
        """State document for a player, with the player's rationales and event window."""
        seat = self.seats[self._player(player)]
        return encode_state(self.state, player, seat.overrides, seat.last_decision, active=seat.active)

    def catalog(self, player: int) -> OptionCatalog:
        """Options a player may choose from this turn."""
        return option_catalog(self.state, self._player(player), self.seats[player].active)

    def tools(self, player: int) -> list[ToolSchema]:
        """Tools the player may still call this turn; all of them before its episode opens."""
        session = self.episodes.get(self._player(player))
        return session.list_tools() if session is not None else list(tool_schemas())

    def events(self, since: int | None = None, player: int | None = None) -> list[Event]:
        """Logged events after turn `since`; only those the player saw when a player is given."""
        if player is not None:
            self._player(player)
        return [
            e
            for e in self.state.event_log
            if (since is None or e.turn > since) and (player is None or event_visible(self.state, player, e))
        ]

    def open_episode(self, player: int) -> EpisodeSession:
        """The player's episode for this turn, opened on first use.

        A closed episode stays in place until the next round, so late calls get CLOSED.

        Raises:
            TerminalStateError: If the game has ended.

        """
        self._player(player)
        if self.state.is_terminal:
            raise TerminalStateError("The game has ended.", field="turn")
        session = self.episodes.get(player)
        if session is None:
            session = EpisodeSession(player, self.catalog(player), self.seats[player].overrides)
            self.episodes[player] = session
        return session

    def call_tool(self, player: int, request: ToolRequest) -> ToolResponse:
        """Route a tool call to the player's episode and commit it when it closes."""
        session = self.open_episode(player)
        response = session.call_tool(request)
        if response.ok and session.closed:
            self._commit(session)
        return response

    def force_close(self, player: int) -> None:
        """Close the player's episode with a synthetic keep-status-quo and commit it."""
        session = self.open_episode(player)
        if not session.closed:
            session.force_close()
            self._commit(session)

    def discard_episode(self, player: int) -> None:
        """Drop an unfinished episode; the player's previous overrides stay in force."""
        session = self.episodes.get(player)
        if session is not None and not session.closed:
            del self.episodes[player]
            logger.debug("Episode discarded player=%d turn=%d", player, self.state.turn)

    def _commit(self, session: EpisodeSession) -> None:
        # The strategist has seen every event up to the round that just ended.
        self.seats[session.player].commit(session.staged, self.state.turn - 1)

    def advance(self) -> list[Event]:
        """Run one round with every seat's directive. Unfinished episodes are discarded.

        Raises:
            TerminalStateError: If the game has ended.

        """
        if self.state.is_terminal:
            raise TerminalStateError(f"Game already ended at turn {self.state.turn}.", field="turn")
        self.episodes.clear()
        directives = {p.id: self.seats[p.id].directive(self.state) for p in self.state.alive_players()}
        _, events = advance_turn(self.state, directives)
        return events
