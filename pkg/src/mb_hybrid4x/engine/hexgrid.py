"""Hex geometry on an odd-row offset grid.

Tiles are addressed by flat index `y * width + x`. Odd rows are shifted half a tile to the right.
Distances come from a precomputed cube-coordinate matrix, which is cheap at this map scale.
"""

import functools

import numpy as np
import numpy.typing as npt


class HexGrid:
    """Neighbor lists and pairwise distances for a fixed map size."""

    def __init__(self, width: int, height: int) -> None:
        """Precompute cube coordinates, the distance matrix and neighbor lists."""
        self.width = width
        self.height = height
        idx = np.arange(width * height)
        xs = idx % width
        ys = idx // width
        q = xs - (ys - (ys & 1)) // 2
        r = ys
        s = -q - r
        self.distances: npt.NDArray[np.int16] = np.maximum.reduce(
            [
                np.abs(q[:, None] - q[None, :]),
                np.abs(r[:, None] - r[None, :]),
                np.abs(s[:, None] - s[None, :]),
            ]
        ).astype(np.int16)
        self.neighbors: tuple[tuple[int, ...], ...] = tuple(
            tuple(int(j) for j in np.flatnonzero(self.distances[i] == 1)) for i in range(width * height)
        )
        self._within: dict[tuple[int, int], tuple[int, ...]] = {}

    @property
    def size(self) -> int:
        """Number of tiles."""
        return self.width * self.height

    def index(self, x: int, y: int) -> int:
        """Flat index of (x, y)."""
        return y * self.width + x

    def coords(self, index: int) -> tuple[int, int]:
        """(x, y) of a flat index."""
        return index % self.width, index // self.width

    def distance(self, a: int, b: int) -> int:
        """Hex distance between two tiles."""
        return int(self.distances[a, b])

    def within(self, center: int, radius: int) -> tuple[int, ...]:
        """Tiles within `radius` of `center`, including it, in index order."""
        key = (center, radius)
        if key not in self._within:
            self._within[key] = tuple(int(i) for i in np.flatnonzero(self.distances[center] <= radius))
        return self._within[key]

    def ring(self, center: int, radius: int) -> list[int]:
        """Tiles at exactly `radius` from `center`, in index order."""
        return [int(i) for i in np.flatnonzero(self.distances[center] == radius)]


@functools.cache
def grid_for(width: int, height: int) -> HexGrid:
    """Shared grid for a map size."""
    return HexGrid(width, height)
