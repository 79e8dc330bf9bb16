"""Combat strengths and attack resolution."""

import numpy as np

from mb_hybrid4x.engine.economy import city_strength, strength_pct
from mb_hybrid4x.engine.entities import capture_city, destroy_unit
from mb_hybrid4x.engine.events import log_event
from mb_hybrid4x.engine.models import EventKind, GameState, Unit
from mb_hybrid4x.engine.rules import load_ruleset

XP_PER_COMBAT = 5
XP_PER_LEVEL = 15
MAX_LEVEL = 4
FORTIFY_BONUS_PCT = 25
LEVEL_BONUS_PCT = 10


def attack_strength(state: GameState, unit: Unit) -> int:
    """Effective attack strength: ranged strength for ranged units, scaled by level, modifiers and health."""
    rule = load_ruleset().units[unit.unit_type]
    base = rule.ranged_strength if rule.attack_range > 0 else rule.strength
    pct = strength_pct(state.players[unit.owner]) + LEVEL_BONUS_PCT * (unit.level - 1)
    return max(1, base * (100 + pct) * unit.hp // 10000)


def defense_strength(state: GameState, unit: Unit) -> int:
    """Effective defensive strength including terrain and fortification."""
    rules = load_ruleset()
    pct = strength_pct(state.players[unit.owner]) + LEVEL_BONUS_PCT * (unit.level - 1)
    pct += rules.terrain[state.tile_at(unit.x, unit.y).terrain].defense_pct
    if unit.fortified:
        pct += FORTIFY_BONUS_PCT
    return max(1, rules.units[unit.unit_type].strength * (100 + pct) * unit.hp // 10000)


def combat_damage(attack: int, defense: int, rng: np.random.Generator) -> int:
    """Base damage x strength ratio x uniform(0.8, 1.2), rounded."""
    base = load_ruleset().limits.base_combat_damage
    return round(base * attack / defense * float(rng.uniform(0.8, 1.2)))


def _gain_xp(state: GameState, unit: Unit) -> None:
    unit.xp += XP_PER_COMBAT
    level = min(MAX_LEVEL, 1 + unit.xp // XP_PER_LEVEL)
    if level > unit.level:
        unit.level = level
        log_event(
            state, EventKind.UNIT_PROMOTED, unit.owner, unit=unit.id, unit_type=unit.unit_type, level=level, x=unit.x, y=unit.y
        )


def _move(state: GameState, unit: Unit, x: int, y: int) -> None:
    log_event(
        state, EventKind.UNIT_MOVED, unit.owner, unit=unit.id, unit_type=unit.unit_type, from_x=unit.x, from_y=unit.y, x=x, y=y
    )
    unit.x, unit.y = x, y
    unit.fortified = False


def resolve_attack(state: GameState, attacker: Unit, x: int, y: int, rng: np.random.Generator) -> None:
    """Resolve an attack on the tile (x, y): the strongest enemy unit defends, otherwise the city.

    Melee winners advance into an emptied tile; a city at zero hit points falls to a melee attacker.
    Ranged attackers take no damage and cannot bring a city below 1 hit point.
    """
    rules = load_ruleset()
    ranged = rules.units[attacker.unit_type].attack_range > 0
    attack = attack_strength(state, attacker)
    defenders = [u for u in state.units_at(x, y) if u.owner != attacker.owner]
    city = state.city_at(x, y)
    attacker.fortified = False

    if defenders:
        defender = max(defenders, key=lambda u: (defense_strength(state, u), -u.id))
        defense = defense_strength(state, defender)
        defender_damage = combat_damage(attack, defense, rng)
        attacker_damage = combat_damage(defense, attack, rng)
        if ranged:
            attacker_damage = 0
        defender.hp -= defender_damage
        attacker.hp -= attacker_damage
        result = _result(attacker.hp, defender.hp)
        log_event(
            state,
            EventKind.COMBAT_RESOLVED,
            attacker.owner,
            attacker=attacker.id,
            attacker_type=attacker.unit_type,
            defender=defender.id,
            defender_type=defender.unit_type,
            defender_owner=defender.owner,
            attacker_damage=attacker_damage,
            defender_damage=defender_damage,
            result=result,
            x=x,
            y=y,
        )
        if defender.hp <= 0:
            destroy_unit(state, defender, "killed")
        else:
            _gain_xp(state, defender)
        if attacker.hp <= 0:
            destroy_unit(state, attacker, "killed")
            return
        _gain_xp(state, attacker)
        survivors = [u for u in state.units_at(x, y) if u.owner != attacker.owner]
        if not ranged and defender.hp <= 0 and city is None and not survivors:
            _move(state, attacker, x, y)
        return

    if city is None or city.owner is None:
        return
    defense = city_strength(state, city)
    defender_damage = combat_damage(attack, defense, rng)
    attacker_damage = 0 if ranged else combat_damage(defense, attack, rng)
    city.hp -= defender_damage
    if ranged:
        city.hp = max(1, city.hp)
    attacker.hp -= attacker_damage
    log_event(
        state,
        EventKind.COMBAT_RESOLVED,
        attacker.owner,
        attacker=attacker.id,
        attacker_type=attacker.unit_type,
        defender=city.id,
        defender_type="city",
        defender_owner=city.owner,
        attacker_damage=attacker_damage,
        defender_damage=defender_damage,
        result=_result(attacker.hp, city.hp),
        x=x,
        y=y,
    )
    if attacker.hp <= 0:
        destroy_unit(state, attacker, "killed")
        return
    _gain_xp(state, attacker)
    if city.hp <= 0 and not ranged:
        _move(state, attacker, x, y)
        capture_city(state, city, attacker)


def _result(attacker_hp: int, defender_hp: int) -> str:
    if defender_hp <= 0 and attacker_hp <= 0:
        return "both_destroyed"
    if defender_hp <= 0:
        return "defender_destroyed"
    if attacker_hp <= 0:
        return "attacker_destroyed"
    return "both_survived"
