"""Exact scores through the weighted-counting pipeline."""

from __future__ import annotations

import math

from ttscore.encoder.psi import encode_psi
from ttscore.encoder.weighting import WeightedFormula, to_literal_weighted
from ttscore.encoder.wmc import DEFAULT_DECISION_CAP, NEG_INF, log_weighted_count
from ttscore.model.network import Scenario


def weighted_formula(s: Scenario, goal: str = "good", exact_crashes: int | None = None) -> WeightedFormula:
    cnf, book = encode_psi(s, goal=goal, exact_crashes=exact_crashes)
    return to_literal_weighted(cnf, book, s)


def weighted_probability(wf: WeightedFormula, cap: int = DEFAULT_DECISION_CAP) -> float:
    """``gamma * WMC``, combined in log space."""
    lc = log_weighted_count(wf, cap)
    return 0.0 if lc == NEG_INF else math.exp(lc + wf.log_gamma)


def score_exact(s: Scenario, cap: int = DEFAULT_DECISION_CAP) -> float:
    return weighted_probability(weighted_formula(s), cap)
