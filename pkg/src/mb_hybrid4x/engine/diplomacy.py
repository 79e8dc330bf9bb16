"""Opinion drift, war and peace between majors; city-state influence and world-leader votes."""

import logging

import numpy as np

from mb_hybrid4x.engine.economy import modifier_total
from mb_hybrid4x.engine.events import log_event
from mb_hybrid4x.engine.hexgrid import grid_for
from mb_hybrid4x.engine.models import EventKind, GameState, PlayerDirective, Relation, Stance, VoteRecord
from mb_hybrid4x.engine.rules import load_ruleset

logger = logging.getLogger(__name__)

OPINION_LIMIT = 100
STANCE_THRESHOLD = 30
DENOUNCE_THRESHOLD = -50
DENOUNCE_PENALTY = 10
WAR_DECLARATION_PENALTY = 30
MIN_WAR_TURNS_FOR_PEACE = 10
BORDER_DISTANCE = 5
FRIENDLY_WAR_FACTOR = 0.2
OFFENSE_REFERENCE = 25
GIFT_COST = 60
GIFT_INFLUENCE = 15
GIFT_FLAVOR_THRESHOLD = 25
INFLUENCE_FLAVOR_THRESHOLD = 30


def _clamp_opinion(value: int) -> int:
    return max(-OPINION_LIMIT, min(OPINION_LIMIT, value))


def stance_from_opinion(opinion: int) -> Stance:
    """Peacetime stance implied by an opinion score."""
    if opinion >= STANCE_THRESHOLD:
        return Stance.FRIENDLY
    if opinion <= -STANCE_THRESHOLD:
        return Stance.HOSTILE
    return Stance.NEUTRAL


def _share_border(state: GameState, a: int, b: int) -> bool:
    grid = grid_for(state.width, state.height)
    mine = [grid.index(c.x, c.y) for c in state.cities_of(a)]
    theirs = [grid.index(c.x, c.y) for c in state.cities_of(b)]
    return any(grid.distance(m, t) <= BORDER_DISTANCE for m in mine for t in theirs)


def declare_war(state: GameState, aggressor: int, target: int) -> None:
    """Both sides enter War; the target's opinion of the aggressor drops."""
    mine = state.players[aggressor].diplomacy.setdefault(target, Relation(met=True))
    theirs = state.players[target].diplomacy.setdefault(aggressor, Relation(met=True))
    for relation in (mine, theirs):
        relation.stance = Stance.WAR
        relation.war_turns = 0
    theirs.opinion = _clamp_opinion(theirs.opinion - WAR_DECLARATION_PENALTY)
    log_event(state, EventKind.WAR_DECLARED, aggressor, target=target)
    logger.debug("War declared aggressor=%d target=%d turn=%d", aggressor, target, state.turn)


def make_peace(state: GameState, a: int, b: int) -> None:
    """Both sides return to Neutral with a wary opinion."""
    for me, other in ((a, b), (b, a)):
        relation = state.players[me].diplomacy.setdefault(other, Relation(met=True))
        relation.stance = Stance.NEUTRAL
        relation.war_turns = 0
        relation.opinion = min(relation.opinion, -10)
    log_event(state, EventKind.PEACE_MADE, a, target=b)
    logger.debug("Peace made a=%d b=%d turn=%d", a, b, state.turn)


def update_relations(state: GameState, player: int, directive: PlayerDirective, rng: np.random.Generator) -> None:
    """One player's diplomacy step toward every met, living major."""
    me = state.players[player]
    weights = directive.diplomacy
    offense = directive.flavors.get("Offense", 0)
    for other_id in sorted(me.diplomacy):
        relation = me.diplomacy[other_id]
        other = state.players[other_id]
        if not relation.met or not other.alive:
            continue
        if relation.stance == Stance.WAR:
            relation.war_turns += 1
            if relation.war_turns >= MIN_WAR_TURNS_FOR_PEACE and rng.random() < weights.peace:
                make_peace(state, player, other_id)
            continue

        rivalry = 2 if _share_border(state, player, other_id) else 1
        relation.opinion = _clamp_opinion(relation.opinion + round(weights.friendship - weights.hostility * rivalry))
        if relation.opinion < 0:
            relation.opinion += min(-relation.opinion, round(weights.forgiveness))
        if relation.opinion <= DENOUNCE_THRESHOLD and rng.random() < weights.denounce:
            theirs = other.diplomacy.setdefault(player, Relation(met=True))
            theirs.opinion = _clamp_opinion(theirs.opinion - DENOUNCE_PENALTY)
        relation.stance = stance_from_opinion(relation.opinion)

        if directive.pacified:
            continue
        propensity = weights.war * (offense / OFFENSE_REFERENCE) * (1 + max(0, -relation.opinion) / 50)
        if relation.stance == Stance.FRIENDLY:
            propensity *= FRIENDLY_WAR_FACTOR + weights.deception
        if rng.random() < min(1.0, propensity):
            declare_war(state, player, other_id)


def update_influence(state: GameState, player: int, directive: PlayerDirective) -> None:
    """Passive influence with known city-states, plus a gold gift when the Diplomacy flavor is high."""
    me = state.players[player]
    known = [c for c in state.cities.values() if c.is_city_state and state.tile_index(c.x, c.y) in me.revealed]
    if not known:
        return
    diplomacy = directive.flavors.get("Diplomacy", 0)
    gain = modifier_total(me, "influence") + round(directive.diplomacy.minor_civ)
    if diplomacy >= INFLUENCE_FLAVOR_THRESHOLD:
        gain += 1
    for city in known:
        city.influence[player] = max(0, city.influence.get(player, 0) + gain)
    if diplomacy >= GIFT_FLAVOR_THRESHOLD and me.gold >= GIFT_COST:
        target = min(known, key=lambda c: (c.influence.get(player, 0), c.id))
        me.gold -= GIFT_COST
        target.influence[player] = target.influence.get(player, 0) + GIFT_INFLUENCE


def decay_influence(state: GameState) -> None:
    """Influence fades by one point per round."""
    for city in state.cities.values():
        if city.is_city_state:
            for pid in sorted(city.influence):
                city.influence[pid] = max(0, city.influence[pid] - 1)


def patron_of(state: GameState, city_id: int) -> int | None:
    """Living player with the most influence over a city-state, at least the minimum; ties by lowest id."""
    minimum = load_ruleset().limits.influence_patron_minimum
    city = state.cities[city_id]
    best: tuple[int, int] | None = None
    for pid, influence in sorted(city.influence.items()):
        if influence >= minimum and state.players[pid].alive and (best is None or influence > best[1]):
            best = (pid, influence)
    return best[0] if best else None


def compute_delegates(state: GameState, player: int) -> int:
    """Own vote + diplomacy tech + policy delegates + patronized city-states."""
    me = state.players[player]
    if not me.alive:
        return 0
    delegates = 1 + (1 if "diplomacy" in me.techs_known else 0) + modifier_total(me, "delegates")
    delegates += sum(1 for c in state.cities.values() if c.is_city_state and patron_of(state, c.id) == player)
    return delegates


def update_delegates(state: GameState) -> None:
    """Refresh every player's delegate count."""
    for player in state.players:
        player.delegates = compute_delegates(state, player.id)


def vote_due(state: GameState) -> bool:
    """Votes are held every interval once anyone knows diplomacy."""
    interval = load_ruleset().limits.vote_interval
    return (
        state.turn > 0
        and state.turn % interval == 0
        and any("diplomacy" in p.techs_known for p in state.players if p.alive)
    )


def hold_vote(state: GameState) -> VoteRecord:
    """Hold a world-leader vote and record it."""
    update_delegates(state)
    delegates = {p.id: p.delegates for p in state.players if p.alive}
    needed = state.config.player_count + 1
    leader = min(delegates, key=lambda pid: (-delegates[pid], pid))
    record = VoteRecord(turn=state.turn, delegates=delegates, needed=needed)
    state.last_vote = record
    log_event(state, EventKind.VOTE_HELD, None, leader=leader, delegates=delegates[leader], needed=needed)
    logger.debug("Vote held turn=%d leader=%d delegates=%d needed=%d", state.turn, leader, delegates[leader], needed)
    return record
