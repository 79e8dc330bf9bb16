"""The standard set of regressions run by `analyze`."""

import logging
from collections.abc import Sequence

import numpy as np

from mb_hybrid4x.analytics.design import deviation_design_matrix
from mb_hybrid4x.analytics.metrics import score_ratio
from mb_hybrid4x.analytics.models import RegressionResult, ScoreTiming
from mb_hybrid4x.analytics.regression import fit_logistic_l1, fit_ols, fit_polynomial
from mb_hybrid4x.core.errors import GameError
from mb_hybrid4x.engine.models import Ideology, VictoryKind
from mb_hybrid4x.harness.models import GameRecord
from mb_hybrid4x.strategy.models import GrandStrategy

logger = logging.getLogger(__name__)

DEFAULT_PENALTY = 0.01


def _adoption_share(record: GameRecord, grand: GrandStrategy) -> float:
    turns = record.survived_turns[0]
    return sum(g == grand for g in record.grand_by_turn[:turns]) / turns if turns else 0.0


def _token_fits(records: Sequence[GameRecord]) -> dict[str, RegressionResult]:
    """Linear and quadratic fits of per-episode tokens against turn, per condition."""
    fits: dict[str, RegressionResult] = {}
    for condition in sorted({r.condition for r in records}):
        episodes = [e for r in records if r.condition == condition for e in r.episodes]
        turns = [e.turn for e in episodes]
        for side, values in (("input", [e.input_tokens for e in episodes]), ("output", [e.output_tokens for e in episodes])):
            if not any(values):
                continue
            for degree in (1, 2):
                try:
                    fits[f"tokens_{side}_deg{degree}[{condition}]"] = fit_polynomial(
                        turns, values, degree, target=f"{side}_tokens"
                    )
                except GameError as e:
                    logger.info("Skipping token fit condition=%s side=%s degree=%d: %s", condition, side, degree, e.message)
    return fits


def standard_regressions(
    records: Sequence[GameRecord],
    penalty: float = DEFAULT_PENALTY,
    score_timing: ScoreTiming = ScoreTiming.PEAK,
) -> dict[str, RegressionResult]:
    """Condition and archetype effects on outcomes, plus token growth curves.

    Binary outcomes (win, each victory kind, each ideology) get L1 logistic fits; score ratio and
    adoption shares get OLS. Outcomes that never vary and models that cannot be fitted on these
    records are skipped with a log line, so a one-condition dataset still yields its token curves.
    """
    included = [r for r in records if r.included]
    fits: dict[str, RegressionResult] = {}
    try:
        design = deviation_design_matrix(included)
    except GameError as e:
        logger.info("Skipping effect regressions: %s", e.message)
        return _token_fits(included)

    binary: dict[str, list[float]] = {"win": [float(r.player0_won) for r in included]}
    for kind in VictoryKind:
        binary[f"victory_{kind}"] = [float(r.player0_won and r.outcome.victory == kind) for r in included]
    for ideology in Ideology:
        binary[f"ideology_{ideology}"] = [float(r.ideology == ideology) for r in included]
    continuous: dict[str, list[float]] = {"score_ratio": [score_ratio(r, score_timing) for r in included]}
    for grand in GrandStrategy:
        continuous[f"adoption_{grand}"] = [_adoption_share(r, grand) for r in included]

    for target, y in binary.items():
        if len(set(y)) < 2:
            logger.info("Skipping logistic fit target=%s: outcome never varies", target)
            continue
        try:
            fits[target] = fit_logistic_l1(design.x, np.asarray(y), penalty, design.names, target=target)
        except GameError as e:
            logger.info("Skipping logistic fit target=%s: %s", target, e.message)
    for target, y in continuous.items():
        try:
            fits[target] = fit_ols(design.x, np.asarray(y), design.names, target=target)
        except GameError as e:
            logger.info("Skipping OLS fit target=%s: %s", target, e.message)
    fits.update(_token_fits(included))
    return fits
