"""Tests for the tactical layer."""

from collections.abc import Iterator, Mapping

import pytest

from mb_hybrid4x.core.errors import DeadPlayerError, IllegalItemError, NoLegalItemsError, UnknownPlayerError
from mb_hybrid4x.engine.diplomacy import declare_war
from mb_hybrid4x.engine.economy import unit_class
from mb_hybrid4x.engine.entities import create_unit
from mb_hybrid4x.engine.game import advance_turn, new_game
from mb_hybrid4x.engine.hexgrid import grid_for
from mb_hybrid4x.engine.models import COMBAT_CLASSES, City, GameConfig, GameState, Unit, UnitClass
from mb_hybrid4x.engine.rules import load_ruleset
from mb_hybrid4x.engine.visibility import refresh_sight
from mb_hybrid4x.strategy.mapping import apply_strategy_set
from mb_hybrid4x.strategy.models import EconomicStrategy, MilitaryStrategy
from mb_hybrid4x.strategy.tables import load_strategy_table
from mb_hybrid4x.tactical.flavors import FLAVOR_NAMES, FlavorVector, base_flavors
from mb_hybrid4x.tactical.macro import LOSING_RATIO, WINNING_RATIO, builtin_macro_decide, war_ratio
from mb_hybrid4x.tactical.production import (
    ProductionContext,
    choose_city_production,
    legal_items,
    production_context,
    score_production_item,
)
from mb_hybrid4x.tactical.units import ActionKind, UnitAction, can_enter, plan_unit_turn
from mb_hybrid4x.tactical.zones import Dominance, compute_tactical_zones, dominance_for, zone_lookup


@pytest.fixture
def state() -> GameState:
    return new_game(GameConfig(seed=21))


def _city() -> City:
    return City(id=1, name="Testville", owner=0, original_owner=0, x=0, y=0)


def _capital(state: GameState, player: int) -> City:
    capital = state.players[player].original_capital
    assert capital is not None
    return state.cities[capital]


def _unit(state: GameState, player: int, unit_type: str) -> Unit:
    return next(u for u in state.units_of(player) if u.unit_type == unit_type)


def _reinforce(state: GameState, player: int, warriors: int) -> None:
    capital = _capital(state, player)
    for _ in range(warriors):
        create_unit(state, player, "warrior", capital.x, capital.y)


def _is_military(unit: Unit) -> bool:
    cls = unit_class(unit.unit_type)
    return cls in COMBAT_CLASSES and cls != UnitClass.RECON


def _holds_or_falls_back(state: GameState, unit: Unit, action: UnitAction) -> bool:
    """Fortifying, or a move that brings the unit closer to one of its own cities."""
    if action.kind == ActionKind.FORTIFY:
        return True
    if action.kind != ActionKind.MOVE or action.target is None:
        return False
    grid = grid_for(state.width, state.height)
    here = grid.index(unit.x, unit.y)
    homes = [grid.index(c.x, c.y) for c in state.cities_of(unit.owner)]
    return any(grid.distance(action.target, home) < grid.distance(here, home) for home in homes)


def _unit_corpus() -> Iterator[tuple[GameState, int]]:
    """Fifty mid-game states over ten seeds, each with one living viewer."""
    for seed in range(10):
        game = new_game(GameConfig(seed=seed, max_turns=60))
        for turn in (10, 20, 30, 40, 50):
            while game.turn < turn and not game.is_terminal:
                advance_turn(game, {})
            alive = [p.id for p in game.alive_players()]
            yield game, alive[turn // 10 % len(alive)]


def _plans(state: GameState, viewer: int, deltas: Mapping[str, int]) -> list[tuple[Unit, UnitAction]]:
    zones = compute_tactical_zones(state, viewer)
    flavors = base_flavors(state.players[viewer].archetype).plus(deltas)
    return [(u, plan_unit_turn(u, state, zones, flavors)) for u in state.units_of(viewer)]


def _deltas(name: str) -> dict[str, int]:
    entry = load_strategy_table().entry(name)
    assert entry is not None
    return entry.deltas


class TestFlavorVector:
    """Tests for FlavorVector."""

    def test_clamped_fills_and_bounds(self):
        """Missing names become 0 and values are clamped to [0, 100]."""
        vector = FlavorVector.clamped({"Offense": 140, "Defense": -5, "Gold": 30})
        assert vector["Offense"] == 100
        assert vector["Defense"] == 0
        assert vector["Gold"] == 30
        assert list(vector.as_dict()) == list(FLAVOR_NAMES)

    def test_plus_clamps_once(self):
        """Deltas are added to the base and the sum is clamped."""
        vector = FlavorVector.clamped({"Culture": 90}).plus({"Culture": 30, "Science": 5})
        assert vector["Culture"] == 100
        assert vector["Science"] == 5

    def test_unknown_name(self):
        """Names outside the canonical set are refused."""
        with pytest.raises(ValueError, match="unknown flavor"):
            FlavorVector.clamped({"Piracy": 10})

    def test_base_flavors_complete(self, state: GameState):
        """Every archetype yields all fourteen flavors."""
        vector = base_flavors(state.players[0].archetype)
        assert set(vector.as_dict()) == set(FLAVOR_NAMES)


class TestDominance:
    """Tests for dominance_for."""

    @pytest.mark.parametrize(
        ("friendly", "enemy", "expected"),
        [
            (0, 0, Dominance.NEUTRAL),
            (15, 10, Dominance.FRIENDLY),
            (10, 15, Dominance.ENEMY),
            (12, 10, Dominance.CONTESTED),
            (5, 0, Dominance.FRIENDLY),
            (0, 5, Dominance.ENEMY),
        ],
    )
    def test_thresholds(self, friendly: int, enemy: int, expected: Dominance):
        """A 1.5x strength advantage decides the zone."""
        assert dominance_for(friendly, enemy) == expected


class TestTacticalZones:
    """Tests for compute_tactical_zones."""

    def test_partition(self, state: GameState):
        """Every tile belongs to exactly one zone."""
        zones = compute_tactical_zones(state, 0)
        tiles = [t for z in zones for t in z.tiles]
        assert sorted(tiles) == list(range(len(state.tiles)))
        assert all(z.plots == len(z.tiles) for z in zones)

    def test_own_capital_zone_is_friendly(self, state: GameState):
        """The viewer's capital zone counts the capital as friendly strength."""
        capital = state.players[0].original_capital
        zone = next(z for z in compute_tactical_zones(state, 0) if z.city_id == capital)
        assert zone.city_owner == 0
        assert zone.friendly_strength > 0
        assert zone.dominance == Dominance.FRIENDLY

    def test_unknown_viewer(self, state: GameState):
        """An out-of-range viewer is rejected."""
        with pytest.raises(UnknownPlayerError):
            compute_tactical_zones(state, 9)

    def test_dead_viewer(self, state: GameState):
        """An eliminated viewer is rejected."""
        state.players[1].alive = False
        with pytest.raises(DeadPlayerError):
            compute_tactical_zones(state, 1)


class TestProduction:
    """Tests for production scoring and selection."""

    def test_fresh_capital_items(self, state: GameState):
        """A size-1 capital can train warriors and fall back to wealth, but not settlers."""
        capital = state.cities[state.players[0].original_capital]
        items = legal_items(state, capital)
        assert "warrior" in items
        assert "wealth" in items
        assert "settler" not in items
        assert items == sorted(items)

    def test_flavor_raises_affine_item(self):
        """Raising a flavor never lowers the score of any item."""
        context = ProductionContext(legal_items=("library", "warrior"))
        low = FlavorVector.clamped({"Science": 10})
        high = FlavorVector.clamped({"Science": 90})
        for item in context.legal_items:
            assert score_production_item(item, _city(), high, context) >= score_production_item(item, _city(), low, context)

    def test_choice_follows_flavor(self):
        """Science-heavy flavors pick the library, offense-heavy ones the warrior."""
        context = ProductionContext(legal_items=("library", "warrior"))
        assert choose_city_production(_city(), FlavorVector.clamped({"Science": 80}), context) == "library"
        assert choose_city_production(_city(), FlavorVector.clamped({"Offense": 80}), context) == "warrior"

    def test_tie_goes_to_lowest_id(self):
        """With all flavors at zero the lexically smallest item wins."""
        context = ProductionContext(legal_items=("market", "library"))
        assert choose_city_production(_city(), FlavorVector.zeros(), context) == "library"

    def test_illegal_item(self):
        """Scoring an item outside the legal set fails."""
        with pytest.raises(IllegalItemError):
            score_production_item("pyramids", _city(), FlavorVector.zeros(), ProductionContext(legal_items=("warrior",)))

    def test_no_legal_items(self):
        """A city with nothing to build reports it."""
        with pytest.raises(NoLegalItemsError):
            choose_city_production(_city(), FlavorVector.zeros(), ProductionContext(legal_items=()))

    def test_context_of_fresh_capital(self, state: GameState):
        """At peace a fresh capital sees no threat."""
        capital = state.cities[state.players[0].original_capital]
        context = production_context(state, capital)
        assert context.threat == 0
        assert not context.at_war
        assert context.cities == 1


class TestUnitPlanning:
    """Tests for plan_unit_turn."""

    def test_every_unit_gets_an_action(self, state: GameState):
        """Each starting unit is planned for itself."""
        zones = compute_tactical_zones(state, 0)
        flavors = base_flavors(state.players[0].archetype)
        for unit in state.units_of(0):
            action = plan_unit_turn(unit, state, zones, flavors)
            assert action.unit_id == unit.id

    def test_scout_explores_most_unrevealed(self, state: GameState):
        """A scout steps to the enterable neighbor that would reveal the most unseen tiles."""
        scout = _unit(state, 0, "scout")
        action = plan_unit_turn(scout, state, compute_tactical_zones(state, 0), FlavorVector.clamped({"LandRecon": 50}))
        assert action.kind == ActionKind.EXPLORE

        grid = grid_for(state.width, state.height)
        revealed = state.players[0].revealed
        sight = load_ruleset().units["scout"].sight
        options = [n for n in grid.neighbors[grid.index(scout.x, scout.y)] if can_enter(state, scout, n)]
        unseen = {n: sum(1 for t in grid.within(n, sight) if t not in revealed) for n in options}
        assert action.target in options
        assert unseen[action.target] == max(unseen.values())

    def test_melee_falls_back_from_enemy_zone(self, state: GameState):
        """A defensive warrior next to a hostile capital heads home instead of attacking."""
        declare_war(state, 1, 0)
        _reinforce(state, 1, 1)
        grid = grid_for(state.width, state.height)
        warrior = _unit(state, 0, "warrior")
        enemy = _capital(state, 1)
        post = next(n for n in grid.neighbors[grid.index(enemy.x, enemy.y)] if can_enter(state, warrior, n))
        warrior.x, warrior.y = grid.coords(post)
        refresh_sight(state, 0)

        zones = compute_tactical_zones(state, 0)
        assert zone_lookup(zones)[post].dominance == Dominance.ENEMY
        action = plan_unit_turn(warrior, state, zones, FlavorVector.clamped({"Offense": 5, "Defense": 90}))
        assert action.kind in {ActionKind.MOVE, ActionKind.FORTIFY}
        if action.kind == ActionKind.MOVE:
            home = _capital(state, 0)
            assert action.target is not None
            assert grid.distance(action.target, grid.index(home.x, home.y)) < grid.distance(post, grid.index(home.x, home.y))

    @pytest.mark.parametrize(
        ("expansion", "expected"),
        [
            (0, {ActionKind.FORTIFY}),
            (80, {ActionKind.FOUND_CITY, ActionKind.MOVE}),
        ],
    )
    def test_settler_follows_expansion(self, state: GameState, expansion: int, expected: set[ActionKind]):
        """Without Expansion a settler holds; with it the settler founds or heads for a site."""
        capital = _capital(state, 0)
        settler = create_unit(state, 0, "settler", capital.x, capital.y)
        flavors = FlavorVector.clamped({"Expansion": expansion})
        action = plan_unit_turn(settler, state, compute_tactical_zones(state, 0), flavors)
        assert action.kind in expected

    @pytest.mark.slow
    def test_winning_wars_attacks_at_least_baseline(self):
        """Over the corpus, WinningWars deltas never lower the number of attacks chosen."""
        boost = _deltas("WinningWars")
        for game, viewer in _unit_corpus():
            baseline = sum(1 for _, a in _plans(game, viewer, {}) if a.kind == ActionKind.ATTACK)
            winning = sum(1 for _, a in _plans(game, viewer, boost) if a.kind == ActionKind.ATTACK)
            assert winning >= baseline, (game.config.seed, game.turn, viewer)

    @pytest.mark.slow
    def test_homeland_defense_holds_at_least_baseline(self):
        """Over the corpus, defense-heavy deltas never lower how many military units hold or fall back."""
        boost = _deltas("LosingWars")
        for game, viewer in _unit_corpus():
            counts = [
                sum(1 for u, a in _plans(game, viewer, deltas) if _is_military(u) and _holds_or_falls_back(game, u, a))
                for deltas in ({}, boost)
            ]
            assert counts[1] >= counts[0], (game.config.seed, game.turn, viewer)


class TestBuiltinMacro:
    """Tests for builtin_macro_decide."""

    def test_pure(self, state: GameState):
        """The same state yields the same decision."""
        assert builtin_macro_decide(state, 2) == builtin_macro_decide(state, 2)

    def test_decision_at_start(self, state: GameState):
        """At turn 0 a player is at peace, expands and researches something."""
        decision = builtin_macro_decide(state, 0)
        assert decision.next_research is not None
        assert MilitaryStrategy.AT_WAR not in decision.strategy.military
        assert EconomicStrategy.EARLY_EXPANSION in decision.strategy.economic
        assert EconomicStrategy.ENOUGH_EXPANSION not in decision.strategy.economic

    def test_losing_wars(self, state: GameState):
        """Outnumbered more than two to one in a war, a player turns to LosingWars and its Defense rises."""
        me = state.players[0]
        base = base_flavors(me.archetype)
        peace = builtin_macro_decide(state, 0)
        declare_war(state, 1, 0)
        _reinforce(state, 1, 3)
        ratio = war_ratio(state, me)
        assert ratio is not None
        assert ratio < LOSING_RATIO

        decision = builtin_macro_decide(state, 0)
        military = decision.strategy.military
        assert MilitaryStrategy.AT_WAR in military
        assert MilitaryStrategy.LOSING_WARS in military
        assert MilitaryStrategy.WINNING_WARS not in military

        at_war = apply_strategy_set(decision.strategy, base, decision.adjustments)
        assert at_war["Defense"] > apply_strategy_set(peace.strategy, base, peace.adjustments)["Defense"]
        without = decision.strategy.model_copy(
            update={"military": tuple(m for m in military if m != MilitaryStrategy.LOSING_WARS)}
        )
        assert at_war["Defense"] > apply_strategy_set(without, base, decision.adjustments)["Defense"]

    def test_winning_wars(self, state: GameState):
        """Outnumbering the enemy by half again switches to WinningWars instead."""
        declare_war(state, 0, 1)
        _reinforce(state, 0, 3)
        ratio = war_ratio(state, state.players[0])
        assert ratio is not None
        assert ratio >= WINNING_RATIO
        military = builtin_macro_decide(state, 0).strategy.military
        assert MilitaryStrategy.WINNING_WARS in military
        assert MilitaryStrategy.LOSING_WARS not in military
