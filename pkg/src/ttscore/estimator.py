"""Score estimation: crash-count bracketing and Hoeffding-sized Monte-Carlo."""

from __future__ import annotations

import hashlib
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from ttscore.encoder.exact import weighted_formula, weighted_probability
from ttscore.errors import ContractError, UnsupportedModel
from ttscore.model.network import PROB_TOL, Scenario
from ttscore.simulator.outcomes import simulate_success


def k_crash_probability(edge_count: int, k: int, p: float, t: int) -> float:
    """Probability that exactly ``k`` of ``edge_count`` edges crash permanently within ``t`` slots."""
    if not 0 <= k <= edge_count:
        raise ContractError(f"k={k} outside 0..{edge_count}")
    survive = (1.0 - p) ** t
    return math.comb(edge_count, k) * survive ** (edge_count - k) * (1.0 - survive) ** k


def tilt_bound(k: int, p: float, t: int) -> float:
    """Max/min weight ratio among outcomes with exactly ``k`` crashes: ``(1-p)^(-k(t-1))``."""
    if not 0.0 < p < 1.0:
        raise ContractError(f"tilt needs 0 < p < 1, got {p}")
    return (1.0 - p) ** (-k * (t - 1))


def uniform_crash_probability(s: Scenario) -> float:
    """The common crash probability, rejecting anything the bracketing cannot handle."""
    if not s.permanent:
        raise UnsupportedModel("iterative bounds need the permanent crash model")
    edges = s.network.edges
    if not edges:
        raise UnsupportedModel("iterative bounds need at least one edge")
    if any(e.p_omit > 0.0 for e in edges):
        raise UnsupportedModel("iterative bounds need omissions disabled (p_omit = 0 everywhere)")
    p = edges[0].p_crash
    if any(abs(e.p_crash - p) > PROB_TOL for e in edges):
        raise UnsupportedModel("iterative bounds need a uniform crash probability")
    return p


def count_bad_with_k_crashes(s: Scenario, k: int) -> float:
    """Probability of outcomes with exactly ``k`` crashed edges and fewer than ``guarantee`` arrivals."""
    uniform_crash_probability(s)
    return weighted_probability(weighted_formula(s, goal="bad", exact_crashes=k))


@dataclass
class IterativeState:
    k: int = -1
    score: float = 0.0
    uncertainty: float = 1.0
    trace: list[dict] = field(default_factory=list)


def score_iterative(s: Scenario, epsilon: float) -> tuple[float, float, IterativeState]:
    """Bracket the score by handling crash counts ``k = 0, 1, ...`` until the gap is <= epsilon.

    After round ``k`` the outcomes with at most ``k`` crashes are settled;
    the rest (``uncertainty``) may go either way.
    """
    p = uniform_crash_probability(s)
    n_edges = len(s.network.edges)
    st = IterativeState()
    while st.uncertainty > epsilon and st.k < n_edges:
        st.k += 1
        all_k = k_crash_probability(n_edges, st.k, p, s.timeout)
        bad_k = count_bad_with_k_crashes(s, st.k)
        st.uncertainty = max(0.0, st.uncertainty - all_k)
        st.score += all_k - bad_k
        st.trace.append({
            "k": st.k,
            "all": all_k,
            "bad": bad_k,
            "lower": st.score,
            "upper": min(1.0, st.score + st.uncertainty),
            "tilt": tilt_bound(st.k, p, s.timeout) if 0.0 < p < 1.0 else 1.0,
        })
    return st.score, min(1.0, st.score + st.uncertainty), st


# -- Monte-Carlo ----------------------------------------------------------------


def mc_sample_size(epsilon: float, delta: float) -> int:
    """Smallest ``n`` with ``exp(-2 n eps^2) <= 1 - delta``."""
    if not epsilon > 0 or not 0 < delta < 1:
        raise ContractError(f"need epsilon > 0 and 0 < delta < 1, got {epsilon}, {delta}")
    return math.ceil(math.log(1.0 / (1.0 - delta)) / (2.0 * epsilon * epsilon) - 1e-9)


@dataclass(frozen=True)
class McConfig:
    epsilon: float = 0.01
    delta: float = 0.99
    n: int | None = None
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not 0 < self.epsilon < 1 or not 0 < self.delta < 1:
            raise ContractError("McConfig needs 0 < epsilon < 1 and 0 < delta < 1")
        if self.n is not None and self.n < 1:
            raise ContractError("McConfig.n must be >= 1")
        if self.workers < 1:
            raise ContractError("McConfig.workers must be >= 1")

    @property
    def samples(self) -> int:
        return self.n if self.n is not None else mc_sample_size(self.epsilon, self.delta)


@dataclass(frozen=True)
class McResult:
    estimate: float
    successes: int
    n: int
    seed: int
    epsilon: float
    delta: float


def trial_seed(base_seed: int, index: int) -> int:
    digest = hashlib.blake2b(f"{base_seed}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _count_successes(s: Scenario, seed: int, start: int, stop: int) -> int:
    return sum(simulate_success(s, random.Random(trial_seed(seed, i))) for i in range(start, stop))


def _chunks(n: int, parts: int) -> list[tuple[int, int]]:
    step = -(-n // parts)
    return [(a, min(n, a + step)) for a in range(0, n, step)]


def score_monte_carlo(s: Scenario, cfg: McConfig = McConfig()) -> McResult:
    """Fraction of ``n`` simulated outcomes with at least ``guarantee`` arrivals.

    Trial ``i`` draws from its own stream seeded by ``(seed, i)``, so the
    estimate does not depend on how trials are split across workers.
    """
    n = cfg.samples
    if cfg.workers == 1 or n < 2 * cfg.workers:
        hits = _count_successes(s, cfg.seed, 0, n)
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_count_successes, s, cfg.seed, a, b) for a, b in _chunks(n, cfg.workers)]
            hits = sum(f.result() for f in futures)
    return McResult(hits / n, hits, n, cfg.seed, cfg.epsilon, cfg.delta)


def default_workers() -> int:
    env = os.environ.get("TTSCORE_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ContractError(f"TTSCORE_WORKERS must be a positive integer, got {env!r}") from None
    return os.cpu_count() or 1
