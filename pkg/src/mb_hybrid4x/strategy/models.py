"""Macro-decision types: strategies, persona, option catalogs and the override queue."""

from collections.abc import Iterable
from enum import StrEnum
from typing import Annotated, Self

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic.alias_generators import to_pascal

from mb_hybrid4x.core.errors import InvalidPersonaError, UnknownStrategyError
from mb_hybrid4x.engine.models import VictoryKind
from mb_hybrid4x.strategy.tables import exclusive_conflict


class GrandStrategy(StrEnum):
    """Victory type a player targets."""

    CULTURE = "Culture"
    UNITED_NATIONS = "UnitedNations"
    SPACESHIP = "Spaceship"
    CONQUEST = "Conquest"


# Victory kind each grand strategy aims for.
GRAND_VICTORY: dict[GrandStrategy, VictoryKind] = {
    GrandStrategy.CULTURE: VictoryKind.CULTURAL,
    GrandStrategy.UNITED_NATIONS: VictoryKind.DIPLOMATIC,
    GrandStrategy.SPACESHIP: VictoryKind.SCIENCE,
    GrandStrategy.CONQUEST: VictoryKind.DOMINATION,
}


class EconomicStrategy(StrEnum):
    """Economic strategies, in catalog order."""

    EARLY_EXPANSION = "EarlyExpansion"
    ENOUGH_EXPANSION = "EnoughExpansion"
    NEED_RECON = "NeedRecon"
    ENOUGH_RECON = "EnoughRecon"
    NEED_RECON_SEA = "NeedReconSea"
    ENOUGH_RECON_SEA = "EnoughReconSea"
    NEED_HAPPINESS = "NeedHappiness"
    NEED_HAPPINESS_CRITICAL = "NeedHappinessCritical"
    CITIES_NEED_NAVAL_GROWTH = "CitiesNeedNavalGrowth"
    CITIES_NEED_NAVAL_TILE_IMPROVEMENT = "CitiesNeedNavalTileImprovement"
    ISLAND_START = "IslandStart"
    TECH_LEADER = "TechLeader"
    STARTED_PIETY = "StartedPiety"


class MilitaryStrategy(StrEnum):
    """Military strategies, in catalog order."""

    AT_WAR = "AtWar"
    WAR_MOBILIZATION = "WarMobilization"
    NEED_RANGED_EARLY = "NeedRangedEarly"
    WINNING_WARS = "WinningWars"
    LOSING_WARS = "LosingWars"


class DecisionKind(StrEnum):
    """Categories a strategist can take control of."""

    STRATEGY = "strategy"
    PERSONA = "persona"
    RESEARCH = "research"
    POLICY = "policy"


class ChoiceKind(StrEnum):
    """Option lists a single choice is validated against."""

    GRAND = "grand"
    ECONOMIC = "economic"
    MILITARY = "military"
    RESEARCH = "research"
    POLICY = "policy"


def _ordered[E: StrEnum](values: Iterable[E], enum: type[E]) -> tuple[E, ...]:
    chosen = set(values)
    return tuple(member for member in enum if member in chosen)


class StrategySet(BaseModel):
    """Grand strategy plus active economic and military strategies.

    Economic and military members are deduplicated and kept in catalog order, so equal sets compare equal.
    """

    model_config = ConfigDict(frozen=True)

    grand: GrandStrategy
    economic: tuple[EconomicStrategy, ...] = ()
    military: tuple[MilitaryStrategy, ...] = ()
    rationale: str = ""

    @field_validator("economic", mode="after")
    @classmethod
    def _order_economic(cls, value: tuple[EconomicStrategy, ...]) -> tuple[EconomicStrategy, ...]:
        return _ordered(value, EconomicStrategy)

    @field_validator("military", mode="after")
    @classmethod
    def _order_military(cls, value: tuple[MilitaryStrategy, ...]) -> tuple[MilitaryStrategy, ...]:
        return _ordered(value, MilitaryStrategy)

    @model_validator(mode="after")
    def _check_exclusive(self) -> Self:
        """Reject mutually exclusive pairs."""
        conflict = exclusive_conflict([*self.economic, *self.military])
        if conflict is not None:
            raise ValueError(f"{conflict[0]} and {conflict[1]} cannot be active together")
        return self

    @classmethod
    def parse(cls, grand: str, economic: Iterable[str] = (), military: Iterable[str] = (), rationale: str = "") -> Self:
        """Build from plain names.

        Raises:
            UnknownStrategyError: If any name is not a catalog strategy of its kind.

        """
        economic, military = list(economic), list(military)
        checks: list[tuple[str, type[StrEnum]]] = [(grand, GrandStrategy)]
        checks += [(e, EconomicStrategy) for e in economic] + [(m, MilitaryStrategy) for m in military]
        for value, enum in checks:
            if value not in enum:
                raise UnknownStrategyError(f"Unknown {enum.__name__}: {value}.", field=value)
        return cls(
            grand=GrandStrategy(grand),
            economic=tuple(EconomicStrategy(e) for e in economic),
            military=tuple(MilitaryStrategy(m) for m in military),
            rationale=rationale,
        )

    def same_choices(self, other: StrategySet | None) -> bool:
        """Whether two sets select the same strategies, ignoring the rationale."""
        return other is not None and (self.grand, self.economic, self.military) == (other.grand, other.economic, other.military)


PersonaValue = Annotated[int, Field(ge=1, le=10, strict=True)]


class Persona(BaseModel):
    """The 26 diplomacy bias parameters, each an integer in [1, 10]. Aliases are the PascalCase names."""

    model_config = ConfigDict(alias_generator=to_pascal, populate_by_name=True, validate_assignment=True)

    victory_competitiveness: PersonaValue = 5
    wonder_competitiveness: PersonaValue = 5
    minor_civ_competitiveness: PersonaValue = 5
    boldness: PersonaValue = 5
    war_bias: PersonaValue = 5
    hostile_bias: PersonaValue = 5
    warmonger_hate: PersonaValue = 5
    neutral_bias: PersonaValue = 5
    friendly_bias: PersonaValue = 5
    guarded_bias: PersonaValue = 5
    afraid_bias: PersonaValue = 5
    diplomatic_balance: PersonaValue = 5
    friendliness: PersonaValue = 5
    work_with_willingness: PersonaValue = 5
    work_against_willingness: PersonaValue = 5
    loyalty: PersonaValue = 5
    minor_civ_friendly_bias: PersonaValue = 5
    minor_civ_neutral_bias: PersonaValue = 5
    minor_civ_hostile_bias: PersonaValue = 5
    minor_civ_war_bias: PersonaValue = 5
    denounce_willingness: PersonaValue = 5
    forgiveness: PersonaValue = 5
    meanness: PersonaValue = 5
    neediness: PersonaValue = 5
    chattiness: PersonaValue = 5
    deceptive_bias: PersonaValue = 5

    @classmethod
    def from_values(cls, values: dict[str, int], base: Persona | None = None) -> Persona:
        """Overlay PascalCase values on a base persona.

        Raises:
            InvalidPersonaError: If a name is unknown or a value is outside [1, 10].

        """
        merged = (base or cls()).as_pascal()
        for name, value in values.items():
            if name not in merged:
                raise InvalidPersonaError(f"Unknown persona parameter: {name}.", field=name)
            merged[name] = value
        try:
            return cls.model_validate(merged)
        except ValidationError as e:
            bad = ".".join(str(p) for p in e.errors()[0]["loc"])
            raise InvalidPersonaError(f"Persona parameter {bad} must be an integer in [1, 10].", field=bad) from e

    def as_pascal(self) -> dict[str, int]:
        """Values keyed by PascalCase name, in declaration order."""
        return self.model_dump(by_alias=True)


class CatalogEntry(BaseModel):
    """One selectable option."""

    model_config = ConfigDict(frozen=True)

    id: str
    name: str
    description: str = ""
    leads_to: tuple[str, ...] = ()


class OptionCatalog(BaseModel):
    """Every legal choice for a player this turn, in fixed order."""

    model_config = ConfigDict(frozen=True)

    player: int
    turn: int
    grand: tuple[CatalogEntry, ...]
    economic: tuple[CatalogEntry, ...]
    military: tuple[CatalogEntry, ...]
    research: tuple[CatalogEntry, ...]
    policies: tuple[CatalogEntry, ...]
    active: StrategySet

    def entries(self, kind: ChoiceKind) -> tuple[CatalogEntry, ...]:
        """Option list of one kind."""
        match kind:
            case ChoiceKind.GRAND:
                return self.grand
            case ChoiceKind.ECONOMIC:
                return self.economic
            case ChoiceKind.MILITARY:
                return self.military
            case ChoiceKind.RESEARCH:
                return self.research
            case ChoiceKind.POLICY:
                return self.policies


class ChoiceError(BaseModel):
    """Why a choice was rejected. `suggestion` is the nearest legal option by edit distance."""

    model_config = ConfigDict(frozen=True)

    kind: ChoiceKind
    value: str
    reason: str
    suggestion: str | None = None

    @property
    def message(self) -> str:
        """Human-readable message naming the offending value."""
        hint = f" Did you mean {self.suggestion!r}?" if self.suggestion else ""
        return f"{self.kind} option {self.value!r} rejected: {self.reason}.{hint}"


class OverrideState(BaseModel):
    """What an external strategist has taken over for one player."""

    controlled: set[DecisionKind] = Field(default_factory=set)
    next_research: str | None = None
    next_policy: str | None = None
    strategy: StrategySet | None = None
    persona: Persona = Field(default_factory=Persona)
    rationales: dict[DecisionKind, str] = Field(default_factory=dict)

    def is_controlled(self, kind: DecisionKind) -> bool:
        """Whether the builtin strategist must leave this category alone."""
        return kind in self.controlled


class StrategyDecision(BaseModel):
    """Output of the builtin macro strategist for one player and turn."""

    model_config = ConfigDict(frozen=True)

    strategy: StrategySet
    adjustments: tuple[str, ...] = ()
    next_research: str | None = None
    next_policy: str | None = None
