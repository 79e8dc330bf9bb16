"""Typed view of the bundled ruleset (`data/ruleset.toml`)."""

import functools
import tomllib
from importlib.resources import files

from pydantic import BaseModel, ConfigDict, Field


class TerrainRule(BaseModel):
    """Yields and movement properties of one terrain type."""

    model_config = ConfigDict(frozen=True)

    food: int
    production: int
    gold: int
    defense_pct: int
    land: bool
    passable: bool
    improvement: str
    weight: int


class UnitRule(BaseModel):
    """Stats of one unit type."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    name: str
    unit_class: str = Field(alias="class")
    strength: int
    ranged_strength: int = 0
    attack_range: int = 0
    cost: int
    moves: int
    sight: int = 2
    requires: str = ""


class BuildingRule(BaseModel):
    """Yields of a building or wonder."""

    model_config = ConfigDict(frozen=True)

    name: str
    cost: int
    wonder: bool = False
    food: int = 0
    production: int = 0
    gold: int = 0
    science: int = 0
    culture: int = 0
    tourism: int = 0
    happiness: int = 0
    faith: int = 0
    defense: int = 0
    requires: str = ""


class ProjectRule(BaseModel):
    """A city project that produces no building."""

    model_config = ConfigDict(frozen=True)

    name: str
    cost: int
    requires: str = ""


class TechRule(BaseModel):
    """A node of the tech DAG."""

    model_config = ConfigDict(frozen=True)

    name: str
    tier: int
    cost: int
    requires: list[str]
    grand: list[str]
    description: str


class PolicyRule(BaseModel):
    """A social policy. Policies of a branch are adopted in rank order."""

    model_config = ConfigDict(frozen=True)

    name: str
    branch: str
    rank: int
    description: str
    modifiers: dict[str, int]
    ideology: str | None = None


class ArchetypeRule(BaseModel):
    """A stat-modifier bundle assigned to a player."""

    model_config = ConfigDict(frozen=True)

    name: str
    grand_bias: str
    modifiers: dict[str, int]
    flavors: dict[str, int]
    persona: dict[str, int]


class MapRule(BaseModel):
    """Map-wide constants."""

    model_config = ConfigDict(frozen=True)

    zone_radius: int
    territory_radius: int
    city_min_distance: int
    base_sight: int


class LimitsRule(BaseModel):
    """Numeric game constants."""

    model_config = ConfigDict(frozen=True)

    max_population: int
    city_hp: int
    capital_hp: int
    unit_hp: int
    base_combat_damage: int
    spaceship_parts_needed: int
    ideology_min_policies: int
    policy_base_cost: int
    policy_cost_step: int
    vote_interval: int
    influence_patron_minimum: int
    early_game_turns: int
    free_unit_upkeep: int


class ScoreWeights(BaseModel):
    """Published score weight table."""

    model_config = ConfigDict(frozen=True)

    population: int
    city: int
    wonder: int
    policy: int
    tech: int
    military_per_strength: int


class Ruleset(BaseModel):
    """All static game rules."""

    model_config = ConfigDict(frozen=True)

    version: int
    map: MapRule
    limits: LimitsRule
    score_weights: ScoreWeights
    terrain: dict[str, TerrainRule]
    improvements: dict[str, dict[str, int]]
    units: dict[str, UnitRule]
    buildings: dict[str, BuildingRule]
    projects: dict[str, ProjectRule]
    techs: dict[str, TechRule]
    policies: dict[str, PolicyRule]
    archetypes: dict[str, ArchetypeRule]
    base_flavors: dict[str, int]
    city_state_names: list[str]
    city_names: list[str]

    def policy_cost(self, adopted: int) -> int:
        """Culture needed for the next policy after `adopted` policies."""
        return self.limits.policy_base_cost + self.limits.policy_cost_step * adopted

    def item_cost(self, item: str) -> int:
        """Production cost of any producible item."""
        if item in self.units:
            return self.units[item].cost
        if item in self.buildings:
            return self.buildings[item].cost
        return self.projects[item].cost

    def item_name(self, item: str) -> str:
        """Display name of any producible item."""
        if item in self.units:
            return self.units[item].name
        if item in self.buildings:
            return self.buildings[item].name
        return self.projects[item].name

    def tech_by_name(self, name: str) -> str | None:
        """Resolve a tech id from either its id or display name."""
        if name in self.techs:
            return name
        for tech_id, tech in self.techs.items():
            if tech.name.casefold() == name.casefold():
                return tech_id
        return None

    def policy_by_name(self, name: str) -> str | None:
        """Resolve a policy id from its id, display name, or the '(New Branch)' form."""
        stripped = name.removesuffix("(New Branch)").strip()
        if stripped in self.policies:
            return stripped
        for policy_id, policy in self.policies.items():
            if policy.name.casefold() == stripped.casefold():
                return policy_id
        return None


@functools.cache
def load_ruleset() -> Ruleset:
    """Load and cache the bundled ruleset."""
    raw = tomllib.loads(files("mb_hybrid4x.data").joinpath("ruleset.toml").read_text(encoding="utf-8"))
    raw["city_state_names"] = raw.pop("city_states")["names"]
    raw["city_names"] = raw.pop("names")["cities"]
    return Ruleset.model_validate(raw)
