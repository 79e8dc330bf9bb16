"""Deviation (sum) coded design matrices."""

from collections.abc import Callable, Iterable, Mapping, Sequence

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict

from mb_hybrid4x.core.errors import EmptyInputError, InvalidConfigError, SingleLevelError
from mb_hybrid4x.harness.models import GameRecord

INTERCEPT = "Intercept"

# How each factor reads off a record.
FACTORS: dict[str, Callable[[GameRecord], str]] = {
    "condition": lambda r: r.condition,
    "archetype": lambda r: r.archetypes[0] if r.archetypes else "",
}


class DesignMatrix(BaseModel):
    """Coded columns with their names. Each factor's last level (sorted) is the reference, coded -1."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    names: list[str]
    x: NDArray[np.float64]
    levels: dict[str, list[str]]

    def reference(self, factor: str) -> str:
        """Reference level of a factor."""
        return self.levels[factor][-1]

    def columns(self, factor: str) -> list[str]:
        """Names of a factor's coded columns."""
        return [column_name(factor, level) for level in self.levels[factor][:-1]]

    def level_effects(self, factor: str, coefficients: Mapping[str, float]) -> dict[str, float]:
        """Effect of every level, the reference being minus the sum of the others."""
        effects = {level: coefficients[column_name(factor, level)] for level in self.levels[factor][:-1]}
        effects[self.reference(factor)] = -sum(effects.values())
        return effects


def column_name(factor: str, level: str) -> str:
    """Stable name of a coded column."""
    return f"{factor}[{level}]"


def deviation_code(values: Sequence[str], factor: str) -> tuple[list[str], list[str], NDArray[np.float64]]:
    """Sum-code one categorical variable: k levels give k-1 columns.

    Returns:
        The sorted levels, the column names and the coded block.

    Raises:
        SingleLevelError: If the variable takes fewer than two distinct values.

    """
    levels = sorted(set(values))
    if len(levels) < 2:
        raise SingleLevelError(f"Factor {factor} needs at least two levels, got {levels}.", field=factor)
    index = {level: i for i, level in enumerate(levels)}
    block = np.zeros((len(values), len(levels) - 1))
    for row, value in enumerate(values):
        i = index[value]
        if i == len(levels) - 1:
            block[row, :] = -1.0
        else:
            block[row, i] = 1.0
    return levels, [column_name(factor, level) for level in levels[:-1]], block


def deviation_design_matrix(records: Iterable[GameRecord], factors: Sequence[str] = ("condition", "archetype")) -> DesignMatrix:
    """Intercept plus sum-coded columns for each factor, one row per included record.

    Raises:
        EmptyInputError: If no included record is given.
        InvalidConfigError: If a factor is unknown.
        SingleLevelError: If a factor has only one level.

    """
    rows = [r for r in records if r.included]
    if not rows:
        raise EmptyInputError("No included records to build a design matrix from.")
    names = [INTERCEPT]
    blocks = [np.ones((len(rows), 1))]
    levels: dict[str, list[str]] = {}
    for factor in factors:
        read = FACTORS.get(factor)
        if read is None:
            raise InvalidConfigError(f"Unknown factor: {factor}; known: {', '.join(FACTORS)}.", field=factor)
        factor_levels, columns, block = deviation_code([read(r) for r in rows], factor)
        levels[factor] = factor_levels
        names += columns
        blocks.append(block)
    return DesignMatrix(names=names, x=np.hstack(blocks), levels=levels)
