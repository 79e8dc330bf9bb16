"""Loaders for the strategy catalog and persona coefficient data files."""

import functools
import tomllib
from collections.abc import Iterable
from importlib.resources import files
from typing import Any

from pydantic import BaseModel, ConfigDict


class StrategyEntry(BaseModel):
    """Description and flavor deltas of one strategy."""

    model_config = ConfigDict(frozen=True)

    description: str
    deltas: dict[str, int]


class StrategyTable(BaseModel):
    """Contents of `data/strategies.toml`."""

    model_config = ConfigDict(frozen=True)

    version: int
    magnitudes: dict[str, int]
    exclusive: list[tuple[str, str]]
    grand: dict[str, StrategyEntry]
    economic: dict[str, StrategyEntry]
    military: dict[str, StrategyEntry]
    adjustments: dict[str, StrategyEntry]

    def entry(self, name: str) -> StrategyEntry | None:
        """Look a strategy or adjustment up in every section."""
        for section in (self.grand, self.economic, self.military, self.adjustments):
            if name in section:
                return section[name]
        return None


class PersonaWeight(BaseModel):
    """Linear mapping from persona parameters to one diplomacy weight."""

    model_config = ConfigDict(frozen=True)

    base: float
    floor: float
    terms: dict[str, float]
    products: list[tuple[str, str, float]] = []

    def evaluate(self, values: dict[str, int]) -> float:
        """Apply the mapping to PascalCase persona values."""
        total = self.base + sum(coef * values[name] for name, coef in self.terms.items())
        total += sum(coef * values[a] * values[b] for a, b, coef in self.products)
        return max(self.floor, total)


def _load(name: str) -> dict[str, Any]:
    return tomllib.loads(files("mb_hybrid4x.data").joinpath(name).read_text(encoding="utf-8"))


@functools.cache
def load_strategy_table() -> StrategyTable:
    """Load and cache the strategy catalog."""
    return StrategyTable.model_validate(_load("strategies.toml"))


@functools.cache
def load_persona_weights() -> dict[str, PersonaWeight]:
    """Load and cache the persona coefficient table, keyed by diplomacy weight name."""
    raw = _load("persona.toml")
    return {name: PersonaWeight.model_validate(spec) for name, spec in raw["weights"].items()}


def exclusive_conflict(names: Iterable[str]) -> tuple[str, str] | None:
    """First mutually exclusive pair present among the names, if any."""
    active = set(names)
    for a, b in load_strategy_table().exclusive:
        if a in active and b in active:
            return a, b
    return None
