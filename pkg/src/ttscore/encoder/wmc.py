"""Exact weighted model counting: DPLL with unit propagation, components and caching."""

from __future__ import annotations

import math
import sys
from collections import defaultdict
from typing import Iterable, Mapping, Sequence

from ttscore.encoder.cnf import Cnf
from ttscore.encoder.weighting import WeightedFormula
from ttscore.errors import CapExceeded

DEFAULT_DECISION_CAP = 2**22
NEG_INF = float("-inf")


def _logaddexp(a: float, b: float) -> float:
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    hi, lo = (a, b) if a > b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def _propagate(clauses: Sequence[tuple[int, ...]], units: Iterable[int]):
    """Assign ``units`` and everything they force.

    Returns ``(residual clauses, assigned literals)`` or ``None`` on conflict.
    """
    occ: dict[int, list[int]] = defaultdict(list)
    for k, c in enumerate(clauses):
        for x in c:
            occ[x].append(k)
    false_count = [0] * len(clauses)
    satisfied = [False] * len(clauses)
    assigned: set[int] = set()
    queue = list(units)
    while queue:
        x = queue.pop()
        if x in assigned:
            continue
        if -x in assigned:
            return None
        assigned.add(x)
        for k in occ.get(x, ()):
            satisfied[k] = True
        for k in occ.get(-x, ()):
            if satisfied[k]:
                continue
            false_count[k] += 1
            c = clauses[k]
            left = len(c) - false_count[k]
            if left == 0:
                return None
            if left == 1:
                for y in c:
                    if -y not in assigned:
                        if y in assigned:
                            satisfied[k] = True
                        else:
                            queue.append(y)
                        break
    residual = []
    for k, c in enumerate(clauses):
        if satisfied[k]:
            continue
        if false_count[k]:
            c = tuple(y for y in c if -y not in assigned)
        if any(y in assigned for y in c):
            continue
        residual.append(c)
    return residual, assigned


def _components(clauses: list[tuple[int, ...]]) -> list[list[tuple[int, ...]]]:
    parent: dict[int, int] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in clauses:
        vs = [abs(y) for y in c]
        for v in vs:
            parent.setdefault(v, v)
        r = find(vs[0])
        for v in vs[1:]:
            q = find(v)
            if q != r:
                parent[q] = r
    groups: dict[int, list] = defaultdict(list)
    for c in clauses:
        groups[find(abs(c[0]))].append(c)
    return list(groups.values())


def _vars(clauses) -> set[int]:
    return {abs(y) for c in clauses for y in c}


class ModelCounter:
    """Log-space weighted #DPLL.

    ``priority`` maps variables to a branching rank (lower first); the
    remaining variables are picked by occurrence count.  Unlisted literals
    weigh 1.
    """

    def __init__(self, weights: Mapping[int, float], priority: Mapping[int, int] | None = None,
                 cap: int = DEFAULT_DECISION_CAP):
        self.logw = {x: (math.log(w) if w > 0 else NEG_INF) for x, w in weights.items()}
        self.priority = priority or {}
        self.cap = cap
        self.decisions = 0
        self.cache: dict[frozenset, float] = {}

    def lw(self, x: int) -> float:
        return self.logw.get(x, 0.0)

    def free(self, v: int) -> float:
        return _logaddexp(self.lw(v), self.lw(-v))

    def _after(self, clauses, units, scope: set[int]) -> float:
        """Log weight of ``clauses`` after forcing ``units``; ``scope`` are the variables accounted here."""
        res = _propagate(clauses, units)
        if res is None:
            return NEG_INF
        residual, assigned = res
        total = sum(self.lw(x) for x in assigned)
        rest = _vars(residual)
        for v in scope - rest - {abs(x) for x in assigned}:
            total += self.free(v)
        for comp in _components(residual):
            sub = self.count_component(comp)
            if sub == NEG_INF:
                return NEG_INF
            total += sub
        return total

    def count_component(self, clauses: list[tuple[int, ...]]) -> float:
        key = frozenset(clauses)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        units = [c[0] for c in clauses if len(c) == 1]
        scope = _vars(clauses)
        if units:
            result = self._after(clauses, units, scope)
        else:
            self.decisions += 1
            if self.decisions > self.cap:
                raise CapExceeded("weighted model count", self.cap, f"> {self.cap} decisions")
            v = self._pick(clauses)
            result = _logaddexp(self._after(clauses, [v], scope), self._after(clauses, [-v], scope))
        self.cache[key] = result
        return result

    def _pick(self, clauses) -> int:
        best, best_rank = None, None
        counts: dict[int, int] = defaultdict(int)
        for c in clauses:
            for y in c:
                v = abs(y)
                counts[v] += 1
                r = self.priority.get(v)
                if r is not None and (best_rank is None or r < best_rank):
                    best, best_rank = v, r
        if best is not None:
            return best
        return max(counts, key=lambda v: (counts[v], -v))

    def log_count(self, cnf: Cnf) -> float:
        if any(len(c) == 0 for c in cnf.clauses):
            return NEG_INF
        clauses = sorted(set(tuple(sorted(set(c), key=abs)) for c in cnf.clauses))
        clauses = [c for c in clauses if not any(-y in c for y in c)]
        all_vars = set(range(1, cnf.num_vars + 1))
        return self._after(clauses, [], all_vars)


def log_weighted_count(wf: WeightedFormula, cap: int = DEFAULT_DECISION_CAP,
                       priority: Mapping[int, int] | None = None) -> float:
    if priority is None:
        priority = fault_priority(wf)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20000))
    try:
        return ModelCounter(wf.weights, priority, cap).log_count(wf.cnf)
    finally:
        sys.setrecursionlimit(limit)


def exact_weighted_count(wf: WeightedFormula, cap: int = DEFAULT_DECISION_CAP) -> float:
    """Weighted model count of ``wf.cnf`` (multiply by ``wf.gamma`` for the score)."""
    lc = log_weighted_count(wf, cap)
    return 0.0 if lc == NEG_INF else math.exp(lc)


def fault_priority(wf: WeightedFormula) -> dict[int, int]:
    """Branch on fault variables first, earliest slot first."""
    if wf.book is None:
        return {}
    order = []
    for var, (role, key) in enumerate(wf.book.tags, start=1):
        if role in ("crash", "omit"):
            order.append(((key[1], 0 if role == "crash" else 1, str(key[0])), var))
    return {var: rank for rank, (_, var) in enumerate(sorted(order))}

