"""Score reports: one JSON object per scoring run, checked against a shipped schema."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Callable

from ttscore import __version__
from ttscore.encoder.exact import score_exact
from ttscore.estimator import McConfig, score_iterative, score_monte_carlo
from ttscore.errors import ContractError
from ttscore.model.io import dumps_scenario
from ttscore.model.network import Scenario
from ttscore.simulator.chain import score_chain
from ttscore.simulator.outcomes import score_enumerate

METHODS = ("enumerate", "chain", "wmc", "iterative", "monte-carlo")
INTERVAL_METHODS = frozenset({"iterative"})

# the bound as stated in the literature is (1-p)^(k t), below 1; the ratio
# it is meant to bound is the reciprocal with one slot fewer
TILT_FORMULA = "(1-p)^(-k*(t-1)); stated form (1-p)^(k*t) is < 1 and cannot bound a max/min ratio"


def scenario_digest(s: Scenario) -> str:
    return "sha256:" + hashlib.sha256(dumps_scenario(s).encode()).hexdigest()


@dataclass
class ScoreReport:
    method: str
    digest: str
    score: float | None = None
    interval: tuple[float, float] | None = None
    parameters: dict[str, Any] = field(default_factory=dict)
    duration_s: float = 0.0
    path: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ContractError(f"unknown method {self.method!r}")
        if (self.score is None) == (self.interval is None):
            raise ContractError("a report carries exactly one of score / interval")

    @property
    def value(self) -> float:
        """The point estimate; the midpoint for an interval."""
        if self.score is not None:
            return self.score
        return (self.interval[0] + self.interval[1]) / 2

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {
            "tool": "ttscore",
            "version": __version__,
            "scenario": {"path": self.path, "digest": self.digest},
            "method": self.method,
        }
        if self.score is not None:
            doc["score"] = self.score
        else:
            doc["interval"] = {"lower": self.interval[0], "upper": self.interval[1]}
        doc["parameters"] = self.parameters
        doc["duration_s"] = self.duration_s
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def load_schema() -> dict:
    text = resources.files("ttscore").joinpath("schemas/score_report.schema.json").read_text()
    return json.loads(text)


def _clamp(x: float) -> float:
    # exact engines may overshoot [0, 1] by rounding noise
    return min(1.0, max(0.0, x))


def run_method(s: Scenario, method: str, *, epsilon: float = 0.01, delta: float = 0.99,
               n: int | None = None, seed: int = 0, workers: int = 1, cap: int | None = None,
               path: str | None = None) -> ScoreReport:
    """Score ``s`` with one method and wrap the result in a report."""
    if method not in METHODS:
        raise ContractError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    params: dict[str, Any] = {}
    capped: dict[str, Callable] = {"enumerate": score_enumerate, "chain": score_chain, "wmc": score_exact}
    start = time.perf_counter()
    score = interval = None
    if method in capped:
        fn = capped[method]
        if cap is not None:
            params["cap"] = cap
            score = fn(s, cap)
        else:
            score = fn(s)
        score = _clamp(score)
    elif method == "iterative":
        lo, hi, st = score_iterative(s, epsilon)
        interval = (_clamp(lo), _clamp(hi))
        params.update(epsilon=epsilon, k_trace=st.trace, tilt_formula=TILT_FORMULA)
    else:
        res = score_monte_carlo(s, McConfig(epsilon, delta, n, seed, workers))
        score = res.estimate
        params.update(epsilon=epsilon, delta=delta, n=res.n, successes=res.successes, seed=seed,
                      workers=workers)
    return ScoreReport(method, scenario_digest(s), score, interval, params,
                       time.perf_counter() - start, path)
