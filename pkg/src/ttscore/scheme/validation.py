"""Structural checks, reachable-queue exploration and behavioural validation of schemes."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import TYPE_CHECKING

from ttscore.errors import SchemeEvaluationError, SchemeViolation
from ttscore.scheme.assertions import (
    EdgeLess,
    Exists,
    MsgLess,
    Not,
    Or,
    Present,
    free_vars,
    is_var,
    set_refs,
)
from ttscore.scheme.forwarding import ForwardingScheme, forwarding_output

if TYPE_CHECKING:
    from ttscore.model.network import Scenario

EXHAUSTIVE_BITS = 20
_INTLIKE = re.compile(r"-?\d+")


def _msg_constants(a) -> set[str]:
    if isinstance(a, Present):
        terms = (a.msg,)
    elif isinstance(a, MsgLess):
        terms = (a.lo, a.hi)
    elif isinstance(a, EdgeLess):
        terms = (a.msg,)
    elif isinstance(a, Or):
        return set().union(*(_msg_constants(x) for x in a.args))
    elif isinstance(a, Not):
        return _msg_constants(a.arg)
    elif isinstance(a, Exists):
        return _msg_constants(a.body)
    else:
        return set()
    return {t for t in terms if not is_var(t)}


def check_scheme_structure(scheme: ForwardingScheme, s: Scenario) -> list[str]:
    """Total-order, reference and well-formedness checks that need no simulation."""
    problems: list[str] = []
    net = s.network
    msgs = list(s.message_ids)
    known = set(msgs)
    for m in msgs:
        if _INTLIKE.fullmatch(m) or m.startswith("?"):
            problems.append(f"messages[{m}]: id must not look like an integer or a ?variable")

    for v in net.vertices:
        order = list(scheme.msg_priority.get(v, ()))
        if sorted(order) != sorted(msgs) or len(set(order)) != len(order):
            problems.append(f"msg_priority[{v}]: {order} is not a total order on messages {sorted(msgs)}")
    for v in scheme.msg_priority:
        if v not in net.out_edges:
            problems.append(f"msg_priority[{v}]: undeclared vertex")

    for m in msgs:
        per_v = scheme.edge_pref.get(m, {})
        for v in net.vertices:
            outs = sorted(e.id for e in net.out_edges[v])
            if not outs and v not in per_v:
                continue
            order = list(per_v.get(v, ()))
            if sorted(order) != outs or len(set(order)) != len(order):
                problems.append(f"edge_pref[{m}][{v}]: {order} is not a total order on out({v}) = {outs}")
    for m in scheme.edge_pref:
        if m not in known:
            problems.append(f"edge_pref[{m}]: unknown message")

    kinds: dict[str, str] = {}
    for d in scheme.set_defs:
        where = f"set_defs[{d.name}]"
        if d.name in kinds:
            problems.append(f"{where}: duplicate set name")
        if d.kind not in ("messages", "edges"):
            problems.append(f"{where}: kind must be 'messages' or 'edges', got {d.kind!r}")
        if d.is_comprehension:
            if not (isinstance(d.var, str) and is_var(d.var)):
                problems.append(f"{where}: comprehension must bind a ?variable")
            else:
                extra = free_vars(d.body) - {d.var}
                if extra:
                    problems.append(f"{where}: unbound variables {sorted(extra)}")
            for ref in sorted(set_refs(d.body)):
                if ref not in kinds:
                    problems.append(f"{where}: references {ref}, which is not defined earlier")
            for c in sorted(_msg_constants(d.body) - known):
                problems.append(f"{where}: unknown message {c}")
        else:
            if d.op not in ("union", "intersection", "difference"):
                problems.append(f"{where}: unknown set operation {d.op!r}")
            if not d.operands:
                problems.append(f"{where}: set operation without operands")
            for ref in d.operands:
                if ref not in kinds:
                    problems.append(f"{where}: references {ref}, which is not defined earlier")
                elif kinds[ref] != d.kind:
                    problems.append(f"{where}: operand {ref} holds {kinds[ref]}, not {d.kind}")
        kinds.setdefault(d.name, d.kind)

    for k, rule in enumerate(scheme.rules):
        where = f"rules[{k}]"
        bound = {t for t in (rule.message, rule.edge_index) if is_var(t)}
        if not is_var(rule.message) and rule.message not in known:
            problems.append(f"{where}: forwards unknown message {rule.message!r}")
        if not is_var(rule.edge_index) and not (isinstance(rule.edge_index, int) and rule.edge_index >= 1):
            problems.append(f"{where}: edge index must be a positive integer, got {rule.edge_index!r}")
        extra = free_vars(rule.guard) - bound
        if extra:
            problems.append(f"{where}: unbound variables {sorted(extra)} in guard")
        for ref in sorted(set_refs(rule.guard)):
            if ref not in kinds:
                problems.append(f"{where}: references undefined set {ref}")
        for c in sorted(_msg_constants(rule.guard) - known):
            problems.append(f"{where}: unknown message {c}")
    return problems


@dataclass
class Reachability:
    """Sound over-approximation of where messages can be and what can happen.

    ``positions[i][m]`` is the set of vertices ``m`` may occupy at time ``i``;
    ``sends[i]`` the (message, edge) pairs that may be forwarded in slot ``i``
    (1-based); ``occupied[i]`` the vertices whose queue may be non-empty at
    the start of slot ``i``.
    """

    positions: list[dict[str, frozenset[str]]]
    sends: dict[int, set[tuple[str, str]]]
    occupied: dict[int, set[str]]
    complete: bool = True
    violations: list[str] = field(default_factory=list)

    def possible(self, m: str, v: str, i: int) -> bool:
        return v in self.positions[i][m]

    def relevant_edges(self, s: Scenario, slot: int) -> list[str]:
        """Edges whose state in ``slot`` can influence forwarding."""
        return [e.id for v in sorted(self.occupied[slot]) for e in s.network.out_edges[v]]


def _subsets(items: list) -> list[tuple]:
    return [c for r in range(len(items) + 1) for c in combinations(items, r)]


def explore_reachable(s: Scenario, bound: int = EXHAUSTIVE_BITS, samples: int = 2000,
                      seed: int = 0) -> Reachability:
    """Forward abstract interpretation of the scenario's possible positions.

    At every (vertex, slot) all queues drawn from the possibly-present
    messages and all patterns of the uncertain out-edges are evaluated.  When
    that exceeds ``2**bound`` combinations the vertex falls back to "any
    out-edge or stay" and ``samples`` random combinations are still checked
    for violations; the result is then marked incomplete.
    """
    net = s.network
    rng = random.Random(seed)
    pos = {m.id: frozenset({m.source}) for m in s.messages}
    reach = Reachability([pos], {}, {})
    seen_violation: set[str] = set()

    def note(msg: str):
        if msg not in seen_violation:
            seen_violation.add(msg)
            reach.violations.append(msg)

    for slot in range(1, s.timeout + 1):
        nxt: dict[str, set[str]] = {m: set() for m in pos}
        sends: set[tuple[str, str]] = set()
        occupied: set[str] = set()
        for m, vs in pos.items():
            tgt = s.message[m].target
            if tgt in vs:
                nxt[m].add(tgt)
        for v in net.vertices:
            present = sorted(m for m, vs in pos.items() if v in vs and s.message[m].target != v)
            if not present:
                continue
            occupied.add(v)
            outs = net.out_edges[v]
            sure = [e.id for e in outs if e.p_crash <= 0.0]
            unsure = [e.id for e in outs if 0.0 < e.p_crash < 1.0]
            for m in present:
                nxt[m].add(v)  # waiting or an omission is always conceivable
            exhaustive = len(present) + len(unsure) <= bound
            if exhaustive:
                combos = [(M, T) for M in _subsets(present) if M for T in _subsets(unsure)]
            else:
                reach.complete = False
                combos = []
                for _ in range(samples):
                    M = tuple(m for m in present if rng.random() < 0.5)
                    T = tuple(e for e in unsure if rng.random() < 0.5)
                    if M:
                        combos.append((M, T))
                for m in present:
                    for e in outs:
                        if e.p_crash < 1.0:
                            sends.add((m, e.id))
                            nxt[m].add(e.target)
            for M, T in combos:
                active = sure + list(T)
                try:
                    out = forwarding_output(v, M, active, s)
                except (SchemeViolation, SchemeEvaluationError) as exc:
                    note(f"slot {slot}, vertex {v}, queue {sorted(M)}, active {sorted(active)}: {exc}")
                    for m in M:
                        for e in outs:
                            sends.add((m, e.id))
                            nxt[m].add(e.target)
                    continue
                if exhaustive:
                    for m, eid in out:
                        sends.add((m, eid))
                        if net.edge[eid].p_omit < 1.0:
                            nxt[m].add(net.edge[eid].target)
        pos = {m: frozenset(vs) for m, vs in nxt.items()}
        reach.positions.append(pos)
        reach.sends[slot] = sends
        reach.occupied[slot] = occupied
    return reach


@dataclass
class ValidationReport:
    violations: list[str]
    complete: bool = True

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_scheme(scheme: ForwardingScheme, s: Scenario, bound: int = EXHAUSTIVE_BITS,
                    samples: int = 2000, seed: int = 0) -> ValidationReport:
    """Total-order checks plus determinism and network-constraint checks on reachable queues."""
    problems = check_scheme_structure(scheme, s)
    if problems:
        return ValidationReport(problems, complete=True)
    reach = explore_reachable(s.replace(scheme=scheme), bound, samples, seed)
    return ValidationReport(reach.violations, reach.complete)
