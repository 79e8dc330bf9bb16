"""Player-visible Markdown state documents.

A document has six sections in fixed order. Everything in it is what the viewer could know in
game: unrevealed tiles, unmet players and other players' stockpiles never appear.
"""

from collections.abc import Iterable, Mapping

from pydantic import BaseModel, ConfigDict
from pydantic.alias_generators import to_pascal

from mb_hybrid4x.core.errors import DeadPlayerError, UnknownPlayerError
from mb_hybrid4x.engine.diplomacy import patron_of
from mb_hybrid4x.engine.economy import city_strength, city_yield, growth_threshold, is_coastal, unit_class
from mb_hybrid4x.engine.game import compute_score
from mb_hybrid4x.engine.models import City, Event, EventKind, EventValue, GameState, Stance, Unit, VictoryKind
from mb_hybrid4x.engine.rules import load_ruleset
from mb_hybrid4x.engine.visibility import known_cities, visible_units
from mb_hybrid4x.strategy.catalog import default_strategy, option_catalog
from mb_hybrid4x.strategy.mapping import archetype_persona
from mb_hybrid4x.strategy.models import DecisionKind, OptionCatalog, OverrideState, StrategySet
from mb_hybrid4x.tactical.zones import compute_tactical_zones

SECTION_TITLES: tuple[str, ...] = ("Victory Progress", "Strategies", "Players", "Cities", "Military", "Events")
SECTION_INTROS: dict[str, str] = {
    "Victory Progress": "Victory Progress: current progress towards each type of victory.",
    "Strategies": "Strategies: existing strategic decisions and available options for you.",
    "Players": "Players: summary reports about visible players in the world.",
    "Cities": "Cities: summary reports about discovered cities in the world.",
    "Military": "Military: summary reports about tactical zones and visible units.",
    "Events": "Events: events since you last made a decision.",
}
EVENT_WINDOW = 2
TRUNCATED_MARKER = "(truncated)"
UNMET_MAJOR = "Unmet Major Civilization"
LATER_ERAS = "Unlocked in later eras"
BUILTIN_RATIONALE = "Set by in-game AI"

# Payload fields holding a player id; rendered with the player's label.
_PLAYER_FIELDS = frozenset(
    {"next_player", "target", "defender_owner", "previous_owner", "owner", "winner", "leader", "eliminated"}
)
# Kinds that everyone learns about.
_PUBLIC_KINDS = frozenset({EventKind.VOTE_HELD, EventKind.VICTORY, EventKind.PLAYER_ELIMINATED})
# Kinds only the acting player sees.
_PRIVATE_KINDS = frozenset({EventKind.POLICY_ADOPTED, EventKind.TECH_FINISHED})


class DocSection(BaseModel):
    """One titled section."""

    model_config = ConfigDict(frozen=True)

    title: str
    body: str


class MarkdownDoc(BaseModel):
    """Rendered state document for one viewer."""

    model_config = ConfigDict(frozen=True)

    viewer: int
    turn: int
    sections: tuple[DocSection, ...]
    text: str
    offsets: dict[str, int]

    def section(self, title: str) -> str:
        """Body of one section."""
        for s in self.sections:
            if s.title == title:
                return s.body
        raise KeyError(title)


class _Lines:
    """Accumulates "- Key: value" lines with two-space nesting."""

    def __init__(self) -> None:
        self.lines: list[str] = []

    def item(self, key: object, value: object = None, depth: int = 0) -> None:
        prefix = "  " * depth + f"- {key}"
        self.lines.append(prefix if value is None else f"{prefix}: {value}")

    def raw(self, line: str) -> None:
        self.lines.append(line)

    def text(self) -> str:
        return "\n".join(self.lines)


def _percent(part: float, whole: float) -> str:
    return f"{round(100 * part / whole) if whole else 0:.0f}"


def player_labels(state: GameState, viewer: int) -> dict[int, str]:
    """Display label of every player as the viewer knows them."""
    rules = load_ruleset()
    me = state.players[viewer]
    labels: dict[int, str] = {}
    for player in state.players:
        if player.id == viewer or me.has_met(player.id):
            labels[player.id] = f"{player.id}: {rules.archetypes[player.archetype].name}"
        else:
            labels[player.id] = f"{player.id}: {UNMET_MAJOR}"
    return labels


def _name(labels: Mapping[int, str], player: int) -> str:
    """Label without the id prefix."""
    return labels[player].split(": ", 1)[1]


def _victory_progress(state: GameState, viewer: int, labels: Mapping[int, str]) -> str:
    rules = load_ruleset()
    me = state.players[viewer]
    out = _Lines()
    config = state.config

    if config.enabled(VictoryKind.DOMINATION):
        capitals = [p.original_capital for p in state.players if p.original_capital is not None]
        needed = sum(1 for cid in capitals if cid in state.cities and state.cities[cid].owner != viewer)
        out.item("DominationVictory")
        out.item("CapitalsNeeded", needed, 1)
    if config.enabled(VictoryKind.SCIENCE):
        if "rocketry" not in me.techs_known:
            out.item("ScienceVictory", LATER_ERAS)
        else:
            out.item("ScienceVictory")
            out.item("PartsBuilt", me.spaceship_parts, 1)
            out.item("PartsNeeded", rules.limits.spaceship_parts_needed, 1)
    if config.enabled(VictoryKind.CULTURAL):
        rivals = [p for p in state.alive_players() if p.id != viewer]
        out.item("CulturalVictory")
        out.item("CivsNeeded", len(rivals), 1)
        branch_policies = sum(1 for p in rules.policies.values() if p.ideology is None)
        for player in state.alive_players():
            if player.id != viewer and not me.has_met(player.id):
                continue
            others = [o for o in state.alive_players() if o.id != player.id]
            influential = sum(1 for o in others if player.tourism_exported.get(o.id, 0) > o.culture_total)
            adopted = sum(1 for p in player.policies_adopted if rules.policies[p].ideology is None)
            out.item(_name(labels, player.id), None, 1)
            out.item("PolicyPercentage", _percent(adopted, branch_policies), 2)
            out.item("InfluentialCivs", influential, 2)
    if config.enabled(VictoryKind.DIPLOMATIC):
        if not any("diplomacy" in p.techs_known for p in state.alive_players()):
            out.item("DiplomaticVictory", LATER_ERAS)
        else:
            out.item("DiplomaticVictory")
            out.item("DelegatesNeeded", config.player_count + 1, 1)
            out.item("OurDelegates", me.delegates, 1)
            if state.last_vote is not None:
                out.item("LastVoteTurn", state.last_vote.turn, 1)
    if config.enabled(VictoryKind.TIME):
        out.item("TimeVictory")
        out.item("TurnsLeft", max(0, config.max_turns - state.turn), 1)
    return out.text()


def _strategies(catalog: OptionCatalog, overrides: OverrideState, state: GameState, viewer: int) -> str:
    rules = load_ruleset()
    me = state.players[viewer]
    active = catalog.active
    out = _Lines()

    out.raw("## Strategy")
    out.item("Rationale", overrides.rationales.get(DecisionKind.STRATEGY) or active.rationale or BUILTIN_RATIONALE)
    out.raw("")
    out.raw("### GrandStrategy")
    out.item("Current", active.grand)
    out.raw("")
    out.raw("#### Options")
    for i, entry in enumerate(catalog.grand):
        out.item(i, entry.name)
    for title, current, entries in (
        ("EconomicStrategies", active.economic, catalog.economic),
        ("MilitaryStrategies", active.military, catalog.military),
    ):
        out.raw("")
        out.raw(f"### {title}")
        out.raw("")
        out.raw("#### Current")
        for i, name in enumerate(current):
            out.item(i, name)
        out.raw("")
        out.raw("#### Options")
        for entry in entries:
            out.item(entry.name, entry.description)

    out.raw("")
    out.raw("## Persona")
    for name, value in overrides.persona.as_pascal().items():
        out.item(name, value)
    out.item("Rationale", overrides.rationales.get(DecisionKind.PERSONA) or f"{BUILTIN_RATIONALE} (archetype default)")

    out.raw("")
    out.raw("## Research")
    if me.current_research is not None:
        out.item("Current", rules.techs[me.current_research].name)
    queued = overrides.next_research
    out.item("Next", rules.techs[queued].name if queued else BUILTIN_RATIONALE)
    if DecisionKind.RESEARCH in overrides.rationales:
        out.item("Rationale", overrides.rationales[DecisionKind.RESEARCH])
    out.raw("")
    out.raw("### Options")
    for entry in catalog.research:
        out.item(entry.name, entry.description)
        if entry.leads_to:
            out.raw(f"  Leading to: {', '.join(entry.leads_to)}")

    out.raw("")
    out.raw("## Policies")
    if me.policies_adopted:
        out.item("Adopted", ", ".join(rules.policies[p].name for p in me.policies_adopted))
    queued = overrides.next_policy
    out.item("Next", rules.policies[queued].name if queued else BUILTIN_RATIONALE)
    if DecisionKind.POLICY in overrides.rationales:
        out.item("Rationale", overrides.rationales[DecisionKind.POLICY])
    out.raw("")
    out.raw("### Options")
    for entry in catalog.policies:
        out.item(entry.name, entry.description)
    return out.text()


def _territory(state: GameState, player: int) -> int:
    owned = {c.id for c in state.cities_of(player)}
    return sum(1 for t in state.tiles if t.owner_city in owned)


def _players(state: GameState, viewer: int, labels: Mapping[int, str]) -> str:
    rules = load_ruleset()
    me = state.players[viewer]
    out = _Lines()
    for player in state.players:
        if player.id != viewer and not me.has_met(player.id):
            continue
        cities = state.cities_of(player.id)
        out.raw(f"## Player {player.id}")
        out.item("Archetype", rules.archetypes[player.archetype].name)
        out.item("Alive", str(player.alive).lower())
        if not player.alive:
            out.raw("")
            continue
        out.item("Territory", _territory(state, player.id))
        out.item("Score", compute_score(state, player.id))
        out.item("TourismPerTurn", player.tourism_rate)
        out.item("Technologies", len(player.techs_known))
        out.item("Cities", len(cities))
        out.item("Population", sum(c.population for c in cities))
        out.item("GoldPerTurn", player.gold_rate)
        out.item("CulturePerTurn", player.culture_rate)
        if player.ideology is not None:
            out.item("Ideology", player.ideology)
        if player.id == viewer:
            out.item("Gold", player.gold)
            research = player.current_research
            out.item("CurrentResearch", rules.techs[research].name if research else "None")
            out.item("SciencePerTurn", player.science_rate)
            out.item("FaithPerTurn", player.faith_rate)
            out.item("Happiness", player.happiness)
            out.item("Delegates", player.delegates)
            for other in state.players:
                if other.id == viewer:
                    continue
                relation = player.diplomacy.get(other.id)
                if relation is None or not relation.met:
                    out.item(other.id, UNMET_MAJOR)
                elif other.alive:
                    war = f" for {relation.war_turns} turns" if relation.stance == Stance.WAR else ""
                    out.item(other.id, f"{relation.stance}{war} (Opinion: {relation.opinion})")
        else:
            relation = me.diplomacy[player.id]
            out.item("OpinionFromMe", f"{relation.stance} ({relation.opinion})")
            back = player.diplomacy.get(viewer)
            out.item("StanceToMe", back.stance if back else Stance.NEUTRAL)
        out.raw("")

    city_states = [c for c in known_cities(state, viewer) if c.is_city_state]
    for city in city_states:
        out.raw(f"## City-State {city.name}")
        out.item("Relationships")
        for pid, label in labels.items():
            if pid == viewer or me.has_met(pid):
                out.item(_name(labels, pid), f"Influence {city.influence.get(pid, 0)}", 1)
        patron = patron_of(state, city.id)
        out.item("Patron", labels[patron] if patron is not None else "None")
        out.item("Population", city.population)
        out.raw("")
    return out.text().rstrip("\n")


def _cities(state: GameState, viewer: int, labels: Mapping[int, str]) -> str:
    rules = load_ruleset()
    out = _Lines()
    groups: dict[int | None, list[City]] = {}
    for city in known_cities(state, viewer):
        groups.setdefault(city.owner, []).append(city)
    order = sorted((k for k in groups if k is not None), key=lambda k: (k != viewer, k))
    if None in groups:
        order.append(None)
    for owner in order:
        out.raw(f"## Player: {_name(labels, owner) if owner is not None else "City-States"}")
        for city in groups[owner]:
            out.item(city.name)
            out.item("ID", city.id, 1)
            out.item("X", city.x, 1)
            out.item("Y", city.y, 1)
            out.item("Population", city.population, 1)
            out.item("DefenseStrength", city_strength(state, city), 1)
            if is_coastal(state, city):
                out.item("IsCoastal", "true", 1)
            if owner != viewer:
                continue
            cy = city_yield(state, city)
            item = city.production_item
            out.item("FoodStored", f"{city.food_stored}/{growth_threshold(city.population)}", 1)
            out.item("FoodPerTurn", cy.food - 2 * city.population, 1)
            out.item("ProductionStored", city.production_stored, 1)
            out.item("ProductionPerTurn", cy.production, 1)
            out.item("CurrentProduction", rules.item_name(item) if item else "None", 1)
            out.item("GoldPerTurn", cy.gold, 1)
            out.item("SciencePerTurn", cy.science, 1)
            out.item("CulturePerTurn", cy.culture, 1)
            out.item("HitPoints", f"{city.hp}/{city.max_hp}", 1)
            wonders = [b for b in city.buildings if rules.buildings[b].wonder]
            out.item("BuildingCount", len(city.buildings) - len(wonders), 1)
            out.item("WonderCount", len(wonders), 1)
        out.raw("")
    return out.text().rstrip("\n")


def _military(state: GameState, viewer: int, labels: Mapping[int, str]) -> str:
    rules = load_ruleset()
    out = _Lines()
    units = visible_units(state, viewer)
    by_tile: dict[int, list[Unit]] = {}
    for unit in units:
        by_tile.setdefault(state.tile_index(unit.x, unit.y), []).append(unit)

    out.raw("## Unit Stats")
    by_class: dict[str, list[str]] = {}
    for unit_type in sorted({u.unit_type for u in units}):
        by_class.setdefault(str(unit_class(unit_type)).capitalize(), []).append(unit_type)
    for cls_name in sorted(by_class):
        out.item(cls_name)
        for unit_type in by_class[cls_name]:
            rule = rules.units[unit_type]
            out.item(rule.name, None, 1)
            out.item("Strength", rule.strength, 2)
            if rule.ranged_strength:
                out.item("RangedStrength", rule.ranged_strength, 2)

    cities = {c.id: c for c in state.cities.values()}
    for zone in compute_tactical_zones(state, viewer):
        members = [u for t in zone.tiles for u in by_tile.get(t, [])]
        if zone.city_id is None and not members:
            continue
        out.raw("")
        out.raw(f"## Zone {zone.zone_id}")
        out.item("ZoneValue", zone.zone_value)
        out.item("Dominance", zone.dominance)
        for key, value in (
            ("FriendlyStrength", zone.friendly_strength),
            ("EnemyStrength", zone.enemy_strength),
            ("NeutralStrength", zone.neutral_strength),
        ):
            if value:
                out.item(key, value)
        if zone.city_id is not None:
            out.item("City", cities[zone.city_id].name)
            out.item("CenterX", zone.center[0])
            out.item("CenterY", zone.center[1])
        out.item("Plots", zone.plots)
        if members:
            out.item("Units")
            counts: dict[int, dict[str, int]] = {}
            for unit in sorted(members, key=lambda u: (u.owner, u.unit_type)):
                bucket = counts.setdefault(unit.owner, {})
                bucket[rules.units[unit.unit_type].name] = bucket.get(rules.units[unit.unit_type].name, 0) + 1
            for owner, types in counts.items():
                out.item(_name(labels, owner), None, 1)
                for name, count in types.items():
                    out.item(name, count, 2)
        if zone.neighbors:
            out.item("Neighbors", ", ".join(str(n) for n in zone.neighbors))
    return out.text()


def event_visible(state: GameState, viewer: int, event: Event) -> bool:
    """Whether the viewer would have learned about an event."""
    me = state.players[viewer]
    if event.kind in _PUBLIC_KINDS or event.player == viewer:
        return True
    if event.kind in _PRIVATE_KINDS:
        return False
    if event.player is not None and not me.has_met(event.player):
        return False
    if event.kind in {EventKind.WAR_DECLARED, EventKind.PEACE_MADE, EventKind.PLAYER_DONE_TURN}:
        return event.player is not None
    location = event.location
    return location is not None and state.tile_index(*location) in me.revealed


def _render_value(key: str, value: EventValue, labels: Mapping[int, str]) -> str:
    if key in _PLAYER_FIELDS and isinstance(value, int):
        return labels.get(value, f"Player {value}")
    return str(value)


def encode_events(
    events: Iterable[Event],
    since_episode: int | None,
    labels: Mapping[int, str] | None = None,
    window: int = EVENT_WINDOW,
) -> str:
    """Render events after turn `since_episode`, grouped by turn and numbered within each turn.

    At most the latest `window` turns are kept; dropping older turns adds a "(truncated)" line.
    """
    labels = labels or {}
    selected = [e for e in events if since_episode is None or e.turn > since_episode]
    turns = sorted({e.turn for e in selected})
    out = _Lines()
    if len(turns) > window:
        out.raw(TRUNCATED_MARKER)
        turns = turns[-window:]
        selected = [e for e in selected if e.turn >= turns[0]]

    for turn in turns:
        if out.lines:
            out.raw("")
        out.raw(f"## Turn {turn}")
        for i, event in enumerate(e for e in selected if e.turn == turn):
            out.raw("")
            out.raw(f"### {i}")
            out.item("Type", event.kind)
            if event.player is not None:
                out.item("Player", labels.get(event.player, f"Player {event.player}"))
            for key, value in event.payload.items():
                if value is not None:
                    out.item(to_pascal(key), _render_value(key, value, labels))
    return out.text()


def _assemble(viewer: int, turn: int, bodies: Mapping[str, str]) -> MarkdownDoc:
    header = f"You, Player {viewer}, are making strategic decisions after turn {turn}."
    parts = [header]
    offsets: dict[str, int] = {}
    position = len(header.encode("utf-8"))
    sections = []
    for title in SECTION_TITLES:
        body = bodies[title]
        chunk = f"# {title}\n{SECTION_INTROS[title]}" + (f"\n{body}" if body else "")
        position += 2
        offsets[title] = position
        position += len(chunk.encode("utf-8"))
        parts.append(chunk)
        sections.append(DocSection(title=title, body=body))
    return MarkdownDoc(viewer=viewer, turn=turn, sections=tuple(sections), text="\n\n".join(parts) + "\n", offsets=offsets)


def encode_state(
    state: GameState,
    viewer: int,
    overrides: OverrideState | None = None,
    last_decision: int | None = None,
    *,
    active: StrategySet | None = None,
    catalog: OptionCatalog | None = None,
) -> MarkdownDoc:
    """Render the viewer's state document.

    Args:
        state: Game state at a turn boundary.
        viewer: Player the document is written for.
        overrides: The viewer's override state; prior rationales are shown from it.
        last_decision: Turn of the viewer's previous decision episode; events after it are included.
        active: Strategy set currently in effect for the viewer.
        catalog: Option catalog to list; built from the state when omitted.

    Raises:
        UnknownPlayerError: If the viewer index is out of range.
        DeadPlayerError: If the viewer has been eliminated.

    """
    if not 0 <= viewer < len(state.players):
        raise UnknownPlayerError(f"Unknown player: {viewer}.", field="viewer")
    if not state.players[viewer].alive:
        raise DeadPlayerError(f"Player {viewer} has been eliminated.", field="viewer")

    if overrides is None:
        overrides = OverrideState(persona=archetype_persona(state.players[viewer].archetype))
    active = active or overrides.strategy or default_strategy(state, viewer)
    catalog = catalog or option_catalog(state, viewer, active)
    labels = player_labels(state, viewer)
    events = [e for e in state.event_log if event_visible(state, viewer, e)]
    bodies = {
        "Victory Progress": _victory_progress(state, viewer, labels),
        "Strategies": _strategies(catalog, overrides, state, viewer),
        "Players": _players(state, viewer, labels),
        "Cities": _cities(state, viewer, labels),
        "Military": _military(state, viewer, labels),
        "Events": encode_events(events, last_decision, labels),
    }
    return _assemble(viewer, max(0, state.turn - 1), bodies)
