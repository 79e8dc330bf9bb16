"""Tests for the state codec: documents, baseline dump, token estimates, tools and prompts."""

from collections.abc import Iterator

import pytest

from mb_hybrid4x.codec.baseline import encode_baseline
from mb_hybrid4x.codec.document import (
    SECTION_TITLES,
    TRUNCATED_MARKER,
    UNMET_MAJOR,
    encode_events,
    encode_state,
    event_visible,
    player_labels,
)
from mb_hybrid4x.codec.prompts import load_example_user, render_system_prompt, system_template
from mb_hybrid4x.codec.tokens import DEFAULT_ESTIMATOR, estimate_tokens
from mb_hybrid4x.codec.tools import FINISHING_TOOLS, ToolName, parse_tool_call, persona_changes, tool_schemas
from mb_hybrid4x.core.errors import DeadPlayerError, SchemaError, UnknownPlayerError, UnknownToolError
from mb_hybrid4x.engine.entities import create_unit, found_city
from mb_hybrid4x.engine.game import advance_turn, new_game
from mb_hybrid4x.engine.models import Event, EventKind, GameConfig, GameState, Terrain, VictoryKind
from mb_hybrid4x.engine.rules import load_ruleset
from mb_hybrid4x.engine.visibility import visible_tiles

# Compact document size relative to the verbose dump, at most.
COMPACTNESS = 0.6


@pytest.fixture
def state() -> GameState:
    game = new_game(GameConfig(seed=17))
    for _ in range(3):
        advance_turn(game, {})
    return game


def _hidden_land(state: GameState, viewer: int) -> tuple[int, int]:
    """A free land tile the viewer has neither revealed nor can see."""
    seen = state.players[viewer].revealed | visible_tiles(state, viewer)
    taken = {state.tile_index(c.x, c.y) for c in state.cities.values()}
    taken |= {state.tile_index(u.x, u.y) for u in state.units.values()}
    for index, tile in enumerate(state.tiles):
        if index not in seen and index not in taken and tile.terrain not in {Terrain.WATER, Terrain.MOUNTAIN}:
            return tile.x, tile.y
    pytest.fail("no hidden land tile")


def _mid_game_corpus() -> Iterator[tuple[GameState, int]]:
    """Ten seeds sampled every five turns from turn 30 to 75: 100 states with a living viewer each.

    The same game object is advanced between samples of one seed.
    """
    for seed in range(10):
        game = new_game(GameConfig(seed=seed, victory_toggles=(VictoryKind.TIME,)))
        for turn in range(1, 76):
            advance_turn(game, {})
            if turn >= 30 and turn % 5 == 0:
                alive = [p.id for p in game.players if p.alive]
                yield game, alive[seed % len(alive)]


def _done(index: int, turn: int, player: int, next_player: int | None) -> Event:
    return Event(index=index, turn=turn, kind=EventKind.PLAYER_DONE_TURN, player=player, payload={"next_player": next_player})


class TestEncodeState:
    """Tests for encode_state."""

    def test_sections_in_order(self, state: GameState):
        """Six sections, fixed titles, fixed order."""
        doc = encode_state(state, 0)
        assert [s.title for s in doc.sections] == list(SECTION_TITLES)
        positions = [doc.text.index(f"# {title}\n") for title in SECTION_TITLES]
        assert positions == sorted(positions)

    def test_header(self, state: GameState):
        """The document opens with the viewer and the last finished turn."""
        doc = encode_state(state, 1)
        assert doc.text.startswith("You, Player 1, are making strategic decisions after turn 2.")
        assert doc.turn == 2

    def test_offsets_point_at_headings(self, state: GameState):
        """Byte offsets locate each section heading."""
        doc = encode_state(state, 0)
        raw = doc.text.encode("utf-8")
        for title in SECTION_TITLES:
            assert raw[doc.offsets[title] :].startswith(f"# {title}".encode())

    def test_deterministic(self, state: GameState):
        """Encoding twice gives identical text."""
        assert encode_state(state, 2).text == encode_state(state, 2).text

    def test_unknown_viewer(self, state: GameState):
        """An out-of-range viewer is rejected."""
        with pytest.raises(UnknownPlayerError):
            encode_state(state, 8)

    def test_dead_viewer(self, state: GameState):
        """An eliminated viewer gets no document."""
        state.players[2].alive = False
        with pytest.raises(DeadPlayerError):
            encode_state(state, 2)

    def test_smaller_than_baseline(self, state: GameState):
        """The Markdown document is smaller than the verbose dump of the same facts."""
        doc = encode_state(state, 0)
        assert estimate_tokens(doc.text).input_tokens < estimate_tokens(encode_baseline(state, 0)).input_tokens

    @pytest.mark.slow
    def test_compact_over_mid_game_corpus(self):
        """Across 100 mid-game states the document stays within the compactness ratio of the dump."""
        checked = 0
        for game, viewer in _mid_game_corpus():
            compact = estimate_tokens(encode_state(game, viewer).text).input_tokens
            verbose = estimate_tokens(encode_baseline(game, viewer)).input_tokens
            assert compact <= COMPACTNESS * verbose, (game.config.seed, game.turn, compact, verbose)
            checked += 1
        assert checked == 100


class TestFog:
    """Tests for what a viewer's document leaves out."""

    def test_hidden_city_absent(self, state: GameState):
        """A city on a tile only player 1 has revealed is in player 1's document and nowhere in player 0's."""
        x, y = _hidden_land(state, 0)
        state.players[1].revealed.add(state.tile_index(x, y))
        found_city(state, 1, x, y, name="Hiddenvale")
        assert "Hiddenvale" not in encode_state(state, 0).text
        assert "Hiddenvale" in encode_state(state, 1).section("Cities")

    def test_hidden_unit_absent(self, state: GameState):
        """A unit on a tile player 0 cannot see changes nothing in player 0's military, city or event view."""
        x, y = _hidden_land(state, 0)
        state.players[1].revealed.add(state.tile_index(x, y))
        titles = ("Cities", "Military", "Events")
        before = [encode_state(state, 0).section(t) for t in titles]
        theirs = encode_state(state, 1).section("Military")
        create_unit(state, 1, "warrior", x, y)
        assert [encode_state(state, 0).section(t) for t in titles] == before
        assert encode_state(state, 1).section("Military") != theirs


class TestPlayerLabels:
    """Tests for player_labels."""

    def test_unmet_players_hidden(self, state: GameState):
        """Players the viewer has not met show no archetype."""
        state.players[0].diplomacy.clear()
        labels = player_labels(state, 0)
        assert labels[1] == f"1: {UNMET_MAJOR}"
        assert labels[0] == f"0: {load_ruleset().archetypes[state.players[0].archetype].name}"


class TestEncodeEvents:
    """Tests for encode_events."""

    def test_grouped_and_numbered(self):
        """Events are grouped under their turn and numbered from 0."""
        events = [_done(0, 4, 0, 1), _done(1, 4, 1, None)]
        text = encode_events(events, since_episode=None)
        assert text.startswith("## Turn 4")
        assert "### 0" in text
        assert "### 1" in text
        assert "- Type: PlayerDoneTurn" in text

    def test_since_episode(self):
        """Only turns after the last decision are rendered."""
        events = [_done(0, 3, 0, 1), _done(1, 5, 0, 1)]
        text = encode_events(events, since_episode=3)
        assert "## Turn 3" not in text
        assert "## Turn 5" in text

    def test_window_truncates(self):
        """Older turns beyond the window are dropped with a marker."""
        events = [_done(i, turn, 0, 1) for i, turn in enumerate([1, 2, 3])]
        text = encode_events(events, since_episode=None, window=2)
        assert text.splitlines()[0] == TRUNCATED_MARKER
        assert "## Turn 1" not in text
        assert "## Turn 3" in text

    def test_player_fields_use_labels(self):
        """Player ids in payloads are shown with labels."""
        text = encode_events([_done(0, 1, 0, 1)], since_episode=None, labels={0: "0: Alpha", 1: "1: Beta"})
        assert "- Player: 0: Alpha" in text
        assert "- NextPlayer: 1: Beta" in text

    def test_empty(self):
        """No events render as nothing."""
        assert encode_events([], since_episode=None) == ""


class TestEventVisibility:
    """Tests for event_visible."""

    def test_own_and_public_events(self, state: GameState):
        """Own events and public announcements are always visible."""
        own = _done(0, 0, 0, 1)
        victory = Event(index=1, turn=0, kind=EventKind.VICTORY, player=3, payload={"winner": 3, "victory": "Time"})
        assert event_visible(state, 0, own)
        assert event_visible(state, 0, victory)

    def test_private_events(self, state: GameState):
        """Another player's research is never visible."""
        tech = Event(index=0, turn=0, kind=EventKind.TECH_FINISHED, player=1, payload={"tech": "pottery", "next": None})
        assert not event_visible(state, 0, tech)


class TestBaseline:
    """Tests for encode_baseline."""

    def test_key_per_line(self, state: GameState):
        """Every line is one dotted key and a value."""
        lines = encode_baseline(state, 0).splitlines()
        assert lines[0] == f"game.turn = {state.turn}"
        assert all(" = " in line for line in lines)

    def test_dead_viewer(self, state: GameState):
        """An eliminated viewer has nothing to dump."""
        state.players[1].alive = False
        with pytest.raises(DeadPlayerError):
            encode_baseline(state, 1)


class TestEstimateTokens:
    """Tests for estimate_tokens."""

    @pytest.mark.parametrize(("text", "expected"), [("", 0), ("abcd", 1), ("abcde", 2), ("é" * 2, 1), ("x" * 400, 100)])
    def test_bytes_over_four(self, text: str, expected: int):
        """Default estimate is the ceiling of UTF-8 bytes over four."""
        estimate = estimate_tokens(text)
        assert estimate.input_tokens == expected
        assert estimate.method == DEFAULT_ESTIMATOR

    def test_custom_tokenizer(self):
        """A plugged-in tokenizer replaces the estimate."""
        estimate = estimate_tokens("one two three", tokenizer=lambda t: len(t.split()), method="words")
        assert (estimate.input_tokens, estimate.method) == (3, "words")


class TestTools:
    """Tests for tool descriptors and argument parsing."""

    def test_five_tools_published(self):
        """Descriptors are published in order with the finishing flag."""
        schemas = tool_schemas()
        assert [s.name for s in schemas] == list(ToolName)
        assert {s.name for s in schemas if s.finishing} == FINISHING_TOOLS

    def test_parse_research(self):
        """PascalCase arguments validate into the tool's model."""
        tool, args = parse_tool_call("set-research", {"Technology": "writing", "Rationale": "libraries"})
        assert tool == ToolName.SET_RESEARCH
        assert args.technology == "writing"  # type: ignore[attr-defined]

    def test_persona_changes(self):
        """Only the persona values actually passed are reported."""
        _, args = parse_tool_call("set-persona", {"WarBias": 2, "Loyalty": 9, "Rationale": "calm down"})
        assert persona_changes(args) == {"WarBias": 2, "Loyalty": 9}

    def test_unknown_tool(self):
        """Names outside the published set are refused."""
        with pytest.raises(UnknownToolError):
            parse_tool_call("declare-war", {"Rationale": "why not"})

    @pytest.mark.parametrize(
        ("name", "arguments"),
        [
            ("keep-status-quo", {}),
            ("keep-status-quo", {"Rationale": ""}),
            ("set-policy", {"Rationale": "x"}),
            ("set-policy", {"Policy": "tradition", "Rationale": "x", "Extra": 1}),
            ("set-persona", {"WarBias": 11, "Rationale": "x"}),
            ("set-strategy", {"GrandStrategy": "Culture", "EconomicStrategies": "TechLeader", "Rationale": "x"}),
        ],
    )
    def test_schema_errors(self, name: str, arguments: dict[str, object]):
        """Missing, empty, extra and mistyped arguments are schema errors."""
        with pytest.raises(SchemaError):
            parse_tool_call(name, arguments)


class TestPrompts:
    """Tests for prompt rendering."""

    def test_system_prompt_situation(self, state: GameState):
        """The situation block names the archetype and the turn limit."""
        prompt = render_system_prompt(state, 0)
        assert load_ruleset().archetypes[state.players[0].archetype].name in prompt
        assert str(state.config.max_turns) in prompt

    def test_unknown_player(self, state: GameState):
        """An out-of-range player is rejected."""
        with pytest.raises(UnknownPlayerError):
            render_system_prompt(state, 12)

    def test_example_document(self):
        """The shipped example follows the section layout."""
        example = load_example_user()
        assert all(f"# {title}" in example for title in SECTION_TITLES)

    @pytest.mark.parametrize(
        ("name", "target"),
        [("system", 989), ("example_user", 3875)],
    )
    def test_calibration(self, name: str, target: int):
        """The shipped prompt texts estimate within 25% of their reference token counts."""
        text = system_template().template if name == "system" else load_example_user()
        tokens = estimate_tokens(text).input_tokens
        assert 0.75 * target <= tokens <= 1.25 * target

    def test_rendered_system_prompt_calibrated(self, state: GameState):
        """Filling in the situation block keeps the system prompt within the same band."""
        tokens = estimate_tokens(render_system_prompt(state, 0)).input_tokens
        assert 0.75 * 989 <= tokens <= 1.25 * 989
