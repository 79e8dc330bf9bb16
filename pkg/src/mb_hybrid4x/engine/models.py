"""World model: configuration, map, players, cities, units, events and the game state."""

from enum import StrEnum
from typing import Any, Self

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

SAVE_VERSION = 1


class VictoryKind(StrEnum):
    """The five ways a game can be won."""

    DOMINATION = "Domination"
    SCIENCE = "Science"
    CULTURAL = "Cultural"
    DIPLOMATIC = "Diplomatic"
    TIME = "Time"


# Checked in this order when several conditions hold on the same step.
VICTORY_PRECEDENCE: tuple[VictoryKind, ...] = (
    VictoryKind.DOMINATION,
    VictoryKind.SCIENCE,
    VictoryKind.CULTURAL,
    VictoryKind.DIPLOMATIC,
    VictoryKind.TIME,
)


class Terrain(StrEnum):
    """Tile terrain."""

    GRASSLAND = "grassland"
    PLAINS = "plains"
    HILLS = "hills"
    FOREST = "forest"
    DESERT = "desert"
    MOUNTAIN = "mountain"
    WATER = "water"


class UnitClass(StrEnum):
    """Unit classes; drives tactical scoring."""

    MELEE = "melee"
    RANGED = "ranged"
    MOUNTED = "mounted"
    RECON = "recon"
    SETTLER = "settler"
    WORKER = "worker"


COMBAT_CLASSES = frozenset({UnitClass.MELEE, UnitClass.RANGED, UnitClass.MOUNTED, UnitClass.RECON})


class Stance(StrEnum):
    """Diplomatic stance toward another player."""

    WAR = "War"
    HOSTILE = "Hostile"
    NEUTRAL = "Neutral"
    FRIENDLY = "Friendly"


class Ideology(StrEnum):
    """Late-game ideologies. At most one per player, adopted once."""

    FREEDOM = "Freedom"
    ORDER = "Order"
    AUTOCRACY = "Autocracy"


class EventKind(StrEnum):
    """Kinds of logged events."""

    UNIT_MOVED = "UnitMoved"
    TILE_REVEALED = "TileRevealed"
    SET_POPULATION = "SetPopulation"
    UNIT_PROMOTED = "UnitPromoted"
    PLAYER_DONE_TURN = "PlayerDoneTurn"
    CITY_FOUNDED = "CityFounded"
    COMBAT_RESOLVED = "CombatResolved"
    WAR_DECLARED = "WarDeclared"
    PEACE_MADE = "PeaceMade"
    POLICY_ADOPTED = "PolicyAdopted"
    TECH_FINISHED = "TechFinished"
    UNIT_CREATED = "UnitCreated"
    UNIT_DESTROYED = "UnitDestroyed"
    CITY_CAPTURED = "CityCaptured"
    BUILDING_COMPLETED = "BuildingCompleted"
    TILE_IMPROVED = "TileImproved"
    PLAYER_ELIMINATED = "PlayerEliminated"
    VOTE_HELD = "VoteHeld"
    VICTORY = "Victory"


# Payload fields per kind, in rendering order.
EVENT_FIELDS: dict[EventKind, tuple[str, ...]] = {
    EventKind.UNIT_MOVED: ("unit", "unit_type", "from_x", "from_y", "x", "y"),
    EventKind.TILE_REVEALED: ("unit", "count", "x", "y"),
    EventKind.SET_POPULATION: ("city", "city_name", "old", "new", "x", "y"),
    EventKind.UNIT_PROMOTED: ("unit", "unit_type", "level", "x", "y"),
    EventKind.PLAYER_DONE_TURN: ("next_player",),
    EventKind.CITY_FOUNDED: ("city", "city_name", "x", "y"),
    EventKind.COMBAT_RESOLVED: (
        "attacker",
        "attacker_type",
        "defender",
        "defender_type",
        "defender_owner",
        "attacker_damage",
        "defender_damage",
        "result",
        "x",
        "y",
    ),
    EventKind.WAR_DECLARED: ("target",),
    EventKind.PEACE_MADE: ("target",),
    EventKind.POLICY_ADOPTED: ("policy", "branch"),
    EventKind.TECH_FINISHED: ("tech", "next"),
    EventKind.UNIT_CREATED: ("unit", "unit_type", "city", "x", "y"),
    EventKind.UNIT_DESTROYED: ("unit", "unit_type", "owner", "reason", "x", "y"),
    EventKind.CITY_CAPTURED: ("city", "city_name", "previous_owner", "x", "y"),
    EventKind.BUILDING_COMPLETED: ("city", "building", "x", "y"),
    EventKind.TILE_IMPROVED: ("unit", "improvement", "x", "y"),
    EventKind.PLAYER_ELIMINATED: ("eliminated",),
    EventKind.VOTE_HELD: ("leader", "delegates", "needed"),
    EventKind.VICTORY: ("winner", "victory"),
}

type EventValue = int | str | None


class GameConfig(BaseModel):
    """Parameters of one game. Invariants are checked by `new_game`."""

    model_config = ConfigDict(frozen=True)

    map_width: int = 16
    map_height: int = 16
    player_count: int = 4
    max_turns: int = 200
    archetype_pool_size: int = 8
    victory_toggles: tuple[VictoryKind, ...] = VICTORY_PRECEDENCE
    seed: int = Field(default=0, ge=0, lt=2**64)

    @field_validator("victory_toggles", mode="after")
    @classmethod
    def _normalize_toggles(cls, value: tuple[VictoryKind, ...]) -> tuple[VictoryKind, ...]:
        """Deduplicate and order toggles by precedence so serialization is stable."""
        return tuple(kind for kind in VICTORY_PRECEDENCE if kind in value)

    def enabled(self, kind: VictoryKind) -> bool:
        """Whether a victory kind is toggled on."""
        return kind in self.victory_toggles


class Tile(BaseModel):
    """One map tile."""

    x: int
    y: int
    terrain: Terrain
    improvement: str | None = None
    owner_city: int | None = None
    region: int = 0


class Unit(BaseModel):
    """A unit on the map."""

    id: int
    owner: int
    unit_type: str
    x: int
    y: int
    hp: int = 100
    moves_left: int = 0
    fortified: bool = False
    xp: int = 0
    level: int = 1


class City(BaseModel):
    """A city. `owner` is None for city-states."""

    id: int
    name: str
    owner: int | None
    original_owner: int | None
    x: int
    y: int
    founded_turn: int = 0
    is_capital: bool = False
    population: int = 1
    food_stored: int = 0
    production_item: str | None = None
    production_stored: int = 0
    buildings: list[str] = Field(default_factory=list)
    hp: int = 100
    max_hp: int = 100
    influence: dict[int, int] = Field(default_factory=dict)

    @property
    def is_city_state(self) -> bool:
        """City-states have no owner and cannot be attacked."""
        return self.owner is None


class Relation(BaseModel):
    """One player's view of another player."""

    met: bool = False
    stance: Stance = Stance.NEUTRAL
    opinion: int = 0
    war_turns: int = 0


class PlayerState(BaseModel):
    """A major player."""

    id: int
    archetype: str
    alive: bool = True
    original_capital: int | None = None
    gold: int = 0
    gold_rate: int = 0
    science: int = 0
    science_rate: int = 0
    culture: int = 0
    culture_total: int = 0
    culture_rate: int = 0
    faith: int = 0
    faith_rate: int = 0
    tourism_rate: int = 0
    tourism_exported: dict[int, int] = Field(default_factory=dict)
    happiness: int = 0
    techs_known: list[str] = Field(default_factory=list)
    current_research: str | None = None
    policies_adopted: list[str] = Field(default_factory=list)
    ideology: Ideology | None = None
    delegates: int = 0
    spaceship_parts: int = 0
    diplomacy: dict[int, Relation] = Field(default_factory=dict)
    revealed: set[int] = Field(default_factory=set)
    eliminated_turn: int | None = None

    @model_validator(mode="after")
    def _check_policies(self) -> Self:
        """Policies are adopted at most once."""
        if len(set(self.policies_adopted)) != len(self.policies_adopted):
            raise ValueError("policies_adopted has duplicates")
        return self

    @field_serializer("revealed")
    def _serialize_revealed(self, revealed: set[int]) -> list[int]:
        return sorted(revealed)

    def stance_toward(self, other: int) -> Stance:
        """Stance toward another player, Neutral when unknown."""
        relation = self.diplomacy.get(other)
        return relation.stance if relation else Stance.NEUTRAL

    def has_met(self, other: int) -> bool:
        """Whether this player has met another player."""
        relation = self.diplomacy.get(other)
        return relation is not None and relation.met


class VictoryResult(BaseModel):
    """Outcome of a won game."""

    model_config = ConfigDict(frozen=True)

    winner: int
    kind: VictoryKind
    turn: int


class Event(BaseModel):
    """An immutable log entry."""

    model_config = ConfigDict(frozen=True)

    index: int
    turn: int
    kind: EventKind
    player: int | None
    payload: dict[str, EventValue]

    @model_validator(mode="after")
    def _check_payload(self) -> Self:
        """Payload keys must match the kind's field list."""
        expected = EVENT_FIELDS[self.kind]
        if tuple(self.payload) != expected:
            raise ValueError(f"payload for {self.kind} must have fields {expected}, got {tuple(self.payload)}")
        return self

    @property
    def location(self) -> tuple[int, int] | None:
        """Map coordinates the event happened at, if it has any."""
        x, y = self.payload.get("x"), self.payload.get("y")
        if isinstance(x, int) and isinstance(y, int):
            return x, y
        return None


class VoteRecord(BaseModel):
    """Result of the last world-leader vote."""

    turn: int
    delegates: dict[int, int]
    needed: int


class GameState(BaseModel):
    """Complete world at a turn boundary. Owned by one game task at a time."""

    version: int = SAVE_VERSION
    config: GameConfig
    turn: int = 0
    width: int
    height: int
    tiles: list[Tile]
    players: list[PlayerState]
    cities: dict[int, City] = Field(default_factory=dict)
    units: dict[int, Unit] = Field(default_factory=dict)
    event_log: list[Event] = Field(default_factory=list)
    rng_state: dict[str, Any]
    next_id: int = 1
    names_used: int = 0
    last_vote: VoteRecord | None = None
    victory: VictoryResult | None = None
    draw: bool = False

    @property
    def is_terminal(self) -> bool:
        """A game ends with a victory, or a draw when time runs out with Time victory disabled."""
        return self.victory is not None or self.draw

    def tile_at(self, x: int, y: int) -> Tile:
        """Tile at the given coordinates."""
        return self.tiles[y * self.width + x]

    def tile_index(self, x: int, y: int) -> int:
        """Flat index of the given coordinates."""
        return y * self.width + x

    def alive_players(self) -> list[PlayerState]:
        """Players still in the game, by id."""
        return [p for p in self.players if p.alive]

    def cities_of(self, player: int) -> list[City]:
        """Cities owned by a player, by id."""
        return [c for c in self.cities.values() if c.owner == player]

    def units_of(self, player: int) -> list[Unit]:
        """Units owned by a player, by id."""
        return sorted((u for u in self.units.values() if u.owner == player), key=lambda u: u.id)

    def city_at(self, x: int, y: int) -> City | None:
        """City on a tile, if any."""
        for city in self.cities.values():
            if city.x == x and city.y == y:
                return city
        return None

    def units_at(self, x: int, y: int) -> list[Unit]:
        """Units on a tile, by id."""
        return sorted((u for u in self.units.values() if u.x == x and u.y == y), key=lambda u: u.id)

    def allocate_id(self) -> int:
        """Next entity id, shared by cities and units."""
        new_id = self.next_id
        self.next_id += 1
        return new_id


class DiplomacyWeights(BaseModel):
    """Stance-transition propensities derived from a persona. Probabilities are per turn."""

    model_config = ConfigDict(frozen=True)

    war: float = 0.02
    peace: float = 0.1
    friendship: float = 1.0
    hostility: float = 1.0
    denounce: float = 0.05
    forgiveness: float = 1.0
    deception: float = 0.0
    minor_civ: float = 1.0


class PlayerDirective(BaseModel):
    """What the macro layer hands the engine for one player's turn."""

    model_config = ConfigDict(frozen=True)

    flavors: dict[str, int]
    diplomacy: DiplomacyWeights = Field(default_factory=DiplomacyWeights)
    next_research: str | None = None
    next_policy: str | None = None
    pacified: bool = False
