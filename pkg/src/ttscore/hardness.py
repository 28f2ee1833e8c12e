"""Counting 3CNF models by scoring a network built from the formula.

Every variable gets a message that picks one of two literal paths at slot 1
with probability 1/2 each.  Every clause gets a message on a private path of
exactly ``t = 4k + 1`` edges, three of which are shared with the paths of its
literals.  A literal message crossing such an edge arrives at its tail at
the same slot as the clause message and, having precedence, delays it past
the timeout.  With ``guarantee = 1`` the bad outcomes (no clause message on
time) are exactly the satisfying assignments.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, replace
from typing import Sequence

from ttscore.errors import ConsistencyError, ScenarioFormatError
from ttscore.model.network import Edge, FaultModel, Message, Network, Scenario
from ttscore.scheme.builders import build_hot_potato

Literal = tuple[int, bool]  # (variable index from 1, positive?)


@dataclass(frozen=True)
class ThreeCnf:
    n: int
    clauses: tuple[tuple[Literal, Literal, Literal], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a 3CNF needs at least one variable")
        for j, c in enumerate(self.clauses, start=1):
            if len(c) != 3:
                raise ValueError(f"clause {j} has {len(c)} literals, expected 3")
            for var, _ in c:
                if not 1 <= var <= self.n:
                    raise ValueError(f"clause {j} mentions undeclared variable {var}")

    @classmethod
    def of(cls, n: int, clauses: Sequence[Sequence[int]]) -> ThreeCnf:
        """From DIMACS-style signed integers, e.g. ``[[1, -2, 3]]``."""
        return cls(n, tuple(tuple((abs(x), x > 0) for x in c) for c in clauses))

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        return all(any(assignment[v - 1] == pos for v, pos in c) for c in self.clauses)


def parse_dimacs_3cnf(text: str) -> ThreeCnf:
    n = k = None
    lits: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0] in ("c", "%"):
            continue
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "cnf":
                raise ScenarioFormatError(f"line {lineno}: expected 'p cnf <vars> <clauses>'")
            n, k = int(parts[2]), int(parts[3])
            continue
        try:
            lits.extend(int(x) for x in parts)
        except ValueError:
            raise ScenarioFormatError(f"line {lineno}: non-integer literal in {raw!r}") from None
    if n is None:
        raise ScenarioFormatError("missing 'p cnf' header")
    clauses, cur = [], []
    for x in lits:
        if x == 0:
            clauses.append(cur)
            cur = []
        else:
            cur.append(x)
    if cur:
        raise ScenarioFormatError("last clause is not terminated by 0")
    if len(clauses) != k:
        raise ScenarioFormatError(f"header announces {k} clauses, found {len(clauses)}")
    bad = [c for c in clauses if len(c) != 3]
    if bad:
        raise ScenarioFormatError(f"not a 3CNF: clause {bad[0]} has {len(bad[0])} literals")
    try:
        return ThreeCnf.of(n, clauses)
    except ValueError as exc:
        raise ScenarioFormatError(str(exc)) from None


def brute_force_count(f: ThreeCnf) -> int:
    return sum(f.satisfied_by(a) for a in itertools.product((False, True), repeat=f.n))


def random_3cnf(n: int, k: int, rng: random.Random) -> ThreeCnf:
    clauses = [[rng.randint(1, n) * rng.choice((1, -1)) for _ in range(3)] for _ in range(k)]
    return ThreeCnf.of(n, clauses)


def _lit_name(lit: Literal) -> str:
    var, pos = lit
    return f"x{var}{'p' if pos else 'n'}"


def clause_layout(clause: Sequence[Literal]) -> list[tuple[int, Literal]]:
    """(position 1..3, literal) pairs; a position may stay unused.

    Duplicates are dropped.  Complementary literals go to positions 1 and 3:
    on adjacent positions both paths of one variable would meet at the
    vertex between the two shared edges, where a memoryless scheme cannot
    tell which path the message is on.
    """
    lits = sorted(set(clause))
    for a, b in itertools.combinations(lits, 2):
        if a[0] == b[0]:
            rest = [x for x in lits if x not in (a, b)]
            return [(1, a), (3, b)] + [(2, x) for x in rest]
    return list(enumerate(lits, start=1))


def reduce_3cnf(f: ThreeCnf) -> Scenario:
    """Scenario with ``score = 1 - #SAT(f) / 2^n`` (temporary crashes, guarantee 1)."""
    k = len(f.clauses)
    if k < 1:
        raise ValueError("a 3CNF needs at least one clause")
    t = 4 * k + 1
    vertices: list[str] = []
    edges: list[Edge] = []

    def vertex(name: str) -> str:
        vertices.append(name)
        return name

    def edge(eid: str, u: str, w: str, p_crash: float = 0.0) -> str:
        edges.append(Edge(eid, u, w, p_crash, 0.0))
        return eid

    # clause paths c{j}_0 -> ... -> c{j}_t; edge at position p is c{j}_e{p}
    clause_path: dict[int, list[str]] = {}
    for j in range(1, k + 1):
        vs = [vertex(f"c{j}_{q}") for q in range(t + 1)]
        clause_path[j] = [edge(f"c{j}_e{q}", vs[q - 1], vs[q]) for q in range(1, t + 1)]

    # (time the tail is reached, clause, position) for each literal
    visits: dict[Literal, list[tuple[int, int, int]]] = {}
    for j, clause in enumerate(f.clauses, start=1):
        for l, lit in clause_layout(clause):
            pos = 4 * j - 2 + l
            visits.setdefault(lit, []).append((pos - 1, j, pos))

    messages: list[Message] = []
    paths: dict[str, list[str]] = {}
    for i in range(1, f.n + 1):
        start, goal = vertex(f"x{i}"), vertex(f"x{i}_end")
        messages.append(Message(f"m_x{i}", start, goal))
        for positive in (True, False):
            lit = (i, positive)
            name = _lit_name(lit)
            path: list[str] = []
            here, now, hop = start, 0, 0

            def pad_to(target_vertex: str, when: int):
                nonlocal here, now, hop
                gap = when - now
                if gap < 0 or (gap == 0 and here != target_vertex):
                    raise ConsistencyError(f"literal path {name} cannot be synchronised")
                for step in range(gap):
                    hop += 1
                    nxt = target_vertex if step == gap - 1 else vertex(f"{name}_{hop}")
                    first = not path
                    eid = f"x{i}_{'pos' if positive else 'neg'}" if first else f"{name}_e{hop}"
                    path.append(edge(eid, here, nxt, 0.5 if first and positive else 0.0))
                    here = nxt
                now = when

            for when, j, p in sorted(visits.get(lit, ())):
                pad_to(f"c{j}_{p - 1}", when)
                path.append(clause_path[j][p - 1])
                here, now = f"c{j}_{p}", when + 1
            pad_to(goal, t + 1)
            paths.setdefault(f"m_x{i}", []).append(path)

    for j in range(1, k + 1):
        mid = f"m_c{j}"
        messages.append(Message(mid, f"c{j}_0", f"c{j}_{t}"))
        paths[mid] = [clause_path[j]]

    out_order: dict[str, list[str]] = {v: [] for v in vertices}
    for e in edges:
        out_order[e.source].append(e.id)
    net = Network(tuple(vertices), tuple(edges), {v: tuple(o) for v, o in out_order.items()})
    first_choice = {m: ps[0] for m, ps in paths.items()}
    draft = Scenario(net, tuple(messages), None, t, 1, FaultModel.TEMPORARY)
    scheme = build_hot_potato(draft, first_choice)

    # a message keeps to whichever of its paths it is on; at the start the
    # first path (the positive literal) stays the first choice
    edge_pref = {m: dict(per_v) for m, per_v in scheme.edge_pref.items()}
    for m, ps in paths.items():
        for path in reversed(ps):
            for eid in path:
                u = net.edge[eid].source
                edge_pref[m][u] = tuple(x for x in edge_pref[m][u] if x != eid) + (eid,)
    scheme = replace(scheme, edge_pref=edge_pref)

    # variable messages first; on a clause path its own message beats the others
    var_ids = [m.id for m in messages if m.id.startswith("m_x")]
    clause_ids = [m.id for m in messages if m.id.startswith("m_c")]
    priority = {}
    for v in vertices:
        owner = f"m_c{v[1:].split('_')[0]}" if v.startswith("c") else None
        ranked = var_ids + [owner] * (owner is not None) + [c for c in clause_ids if c != owner]
        priority[v] = tuple(reversed(ranked))
    return draft.replace(scheme=replace(scheme, msg_priority=priority))


def model_count_via_score(f: ThreeCnf, score=None) -> int:
    """``round((1 - score) * 2^n)`` on the reduced scenario, checked for rounding residue."""
    if score is None:
        from ttscore.encoder.exact import score_exact as score
    value = (1.0 - score(reduce_3cnf(f))) * 2**f.n
    count = round(value)
    if abs(value - count) > 1e-6 * 2**f.n:
        raise ConsistencyError(f"score gives {value} models, not an integer: reduction bug")
    return count
