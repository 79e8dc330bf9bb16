"""Flavor vectors: the named weight modifiers that couple macro strategy to tactical scoring."""

from collections.abc import Mapping
from typing import Self

from pydantic import BaseModel, ConfigDict, model_validator

from mb_hybrid4x.engine.rules import load_ruleset

FLAVOR_NAMES: tuple[str, ...] = (
    "Offense",
    "Defense",
    "Expansion",
    "Growth",
    "Gold",
    "Science",
    "Culture",
    "Faith",
    "Diplomacy",
    "Wonder",
    "NavalRecon",
    "LandRecon",
    "Happiness",
    "Production",
)
FLAVOR_MIN = 0
FLAVOR_MAX = 100


def _clamp(value: int) -> int:
    return max(FLAVOR_MIN, min(FLAVOR_MAX, value))


class FlavorVector(BaseModel):
    """Complete flavor map with every value clamped to [0, 100]."""

    model_config = ConfigDict(frozen=True)

    values: dict[str, int]

    @model_validator(mode="after")
    def _check(self) -> Self:
        missing = [n for n in FLAVOR_NAMES if n not in self.values]
        unknown = [n for n in self.values if n not in FLAVOR_NAMES]
        if missing or unknown:
            raise ValueError(f"flavor names mismatch: missing={missing} unknown={unknown}")
        out_of_range = [n for n, v in self.values.items() if v != _clamp(v)]
        if out_of_range:
            raise ValueError(f"flavors out of range: {out_of_range}")
        return self

    def __getitem__(self, name: str) -> int:
        """Value of one flavor."""
        return self.values[name]

    @classmethod
    def clamped(cls, values: Mapping[str, int]) -> FlavorVector:
        """Build from a partial mapping: missing names are 0, values are clamped."""
        unknown = [n for n in values if n not in FLAVOR_NAMES]
        if unknown:
            raise ValueError(f"unknown flavor names: {unknown}")
        return cls(values={n: _clamp(values.get(n, 0)) for n in FLAVOR_NAMES})

    @classmethod
    def zeros(cls) -> FlavorVector:
        """All flavors at 0."""
        return cls.clamped({})

    def plus(self, deltas: Mapping[str, int]) -> FlavorVector:
        """Add deltas and clamp once."""
        return FlavorVector.clamped({n: self.values[n] + deltas.get(n, 0) for n in FLAVOR_NAMES})

    def as_dict(self) -> dict[str, int]:
        """Plain dict in canonical order."""
        return {n: self.values[n] for n in FLAVOR_NAMES}


def base_flavors(archetype: str) -> FlavorVector:
    """Personality flavors of an archetype: ruleset defaults overridden by the archetype's own values."""
    rules = load_ruleset()
    merged = dict(rules.base_flavors)
    merged.update(rules.archetypes[archetype].flavors)
    return FlavorVector.clamped(merged)
