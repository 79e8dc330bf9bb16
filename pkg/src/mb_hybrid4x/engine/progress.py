"""Tech and policy legality shared by the engine and the option catalog."""

from mb_hybrid4x.engine.models import Ideology, PlayerState
from mb_hybrid4x.engine.rules import load_ruleset


def available_techs(player: PlayerState) -> list[str]:
    """Techs whose prerequisites are known and which are neither known nor being researched, in ruleset order."""
    rules = load_ruleset()
    known = set(player.techs_known)
    return [
        tech_id
        for tech_id, tech in rules.techs.items()
        if tech_id not in known and tech_id != player.current_research and all(r in known for r in tech.requires)
    ]


def cheapest_tech(candidates: list[str]) -> str | None:
    """Cheapest tech, ties by id."""
    rules = load_ruleset()
    if not candidates:
        return None
    return min(candidates, key=lambda t: (rules.techs[t].cost, t))


def available_policies(player: PlayerState) -> list[str]:
    """Policies adoptable next: the next rank of every unfinished branch, then ideologies once eligible.

    Ordered by branch order in the ruleset, ideologies last.
    """
    rules = load_ruleset()
    adopted = set(player.policies_adopted)
    result: list[str] = []
    branches: dict[str, list[str]] = {}
    for policy_id, policy in rules.policies.items():
        if policy.ideology is None:
            branches.setdefault(policy.branch, []).append(policy_id)
    for members in branches.values():
        ranked = sorted(members, key=lambda p: rules.policies[p].rank)
        pending = [p for p in ranked if p not in adopted]
        if pending:
            result.append(pending[0])
    if player.ideology is None and len(adopted) >= rules.limits.ideology_min_policies:
        result.extend(p for p, policy in rules.policies.items() if policy.ideology is not None)
    return result


def opens_branch(player: PlayerState, policy_id: str) -> bool:
    """Whether adopting the policy starts a branch the player has not touched."""
    rules = load_ruleset()
    branch = rules.policies[policy_id].branch
    return all(rules.policies[p].branch != branch for p in player.policies_adopted)


def adopt_policy(player: PlayerState, policy_id: str) -> None:
    """Record a policy adoption; ideology policies also set the ideology."""
    rules = load_ruleset()
    player.policies_adopted.append(policy_id)
    ideology = rules.policies[policy_id].ideology
    if ideology is not None and player.ideology is None:
        player.ideology = Ideology(ideology)
