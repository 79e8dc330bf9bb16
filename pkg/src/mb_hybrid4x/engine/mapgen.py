"""Seeded map generation: terrain, lakes, capital anchors and city-state sites."""

from collections import deque

import numpy as np

from mb_hybrid4x.engine.hexgrid import HexGrid
from mb_hybrid4x.engine.models import Terrain, Tile
from mb_hybrid4x.engine.rules import Ruleset

_CLEAR_TERRAIN = (Terrain.GRASSLAND, Terrain.PLAINS)


def capital_anchors(width: int, height: int) -> list[tuple[int, int]]:
    """Candidate capital positions: four inset corners, then four edge midpoints."""
    inset = max(2, min(width, height) // 5)
    left, right = inset, width - 1 - inset
    top, bottom = inset, height - 1 - inset
    return [
        (left, top),
        (right, top),
        (left, bottom),
        (right, bottom),
        (width // 2, top),
        (width // 2, bottom),
        (left, height // 2),
        (right, height // 2),
    ]


def city_state_sites(width: int, height: int) -> list[tuple[int, int]]:
    """Fixed sites of the two city-states, between the capitals."""
    return [(width // 2 - 1, height // 3), (width // 2, (2 * height) // 3)]


def generate_map(width: int, height: int, rng: np.random.Generator, rules: Ruleset, grid: HexGrid) -> list[Tile]:
    """Generate the tile grid. Draws only from `rng`, so the map is a pure function of the seed."""
    land = [t for t, rule in rules.terrain.items() if rule.land]
    weights = np.array([rules.terrain[t].weight for t in land], dtype=float)
    picks = rng.choice(len(land), size=width * height, p=weights / weights.sum())
    terrain = [Terrain(land[int(p)]) for p in picks]

    for i in range(width * height):
        x, y = grid.coords(i)
        if x in {0, width - 1} or y in {0, height - 1}:
            terrain[i] = Terrain.WATER

    protected = [grid.index(x, y) for x, y in capital_anchors(width, height) + city_state_sites(width, height)]
    lake_count = max(1, (width * height) // 128)
    for _ in range(lake_count):
        center = grid.index(int(rng.integers(2, width - 2)), int(rng.integers(2, height - 2)))
        if any(grid.distance(center, p) < 3 for p in protected):
            continue
        terrain[center] = Terrain.WATER
        for n in grid.neighbors[center]:
            if rng.random() < 0.4 and all(grid.distance(n, p) >= 3 for p in protected):
                terrain[n] = Terrain.WATER

    for site in protected:
        for i in grid.within(site, 1):
            if not rules.terrain[terrain[i]].passable:
                terrain[i] = _CLEAR_TERRAIN[i % 2]
        terrain[site] = Terrain.GRASSLAND

    regions = _label_regions(terrain, rules, grid)
    return [
        Tile(x=grid.coords(i)[0], y=grid.coords(i)[1], terrain=terrain[i], region=regions[i]) for i in range(width * height)
    ]


def _label_regions(terrain: list[Terrain], rules: Ruleset, grid: HexGrid) -> list[int]:
    """Connected components of land and of water. Ids ascend with each component's lowest tile index."""
    regions = [-1] * len(terrain)
    next_region = 0
    for start in range(len(terrain)):
        if regions[start] != -1:
            continue
        is_land = rules.terrain[terrain[start]].land
        regions[start] = next_region
        queue = deque([start])
        while queue:
            current = queue.popleft()
            for n in grid.neighbors[current]:
                if regions[n] == -1 and rules.terrain[terrain[n]].land == is_land:
                    regions[n] = next_region
                    queue.append(n)
        next_region += 1
    return regions
