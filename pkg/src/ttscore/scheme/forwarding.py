"""Forwarding schemes: rules, set definitions, local orders, and their evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping

from ttscore.errors import SchemeEvaluationError, SchemeViolation
from ttscore.scheme.assertions import (
    Active,
    Const,
    EdgeLess,
    Eq,
    Exists,
    In,
    MsgLess,
    Not,
    Or,
    Present,
    Term,
    is_var,
    to_sexpr,
)

if TYPE_CHECKING:
    from ttscore.model.network import Scenario


@dataclass(frozen=True)
class SetDef:
    """A named set of messages or edges.

    Either a comprehension ``{var : body}`` or a set operation
    (``union``/``intersection``/``difference``) over earlier definitions.
    """

    name: str
    kind: str  # "messages" or "edges"
    var: str | None = None
    body: object = None
    op: str | None = None
    operands: tuple[str, ...] = ()

    @property
    def is_comprehension(self) -> bool:
        return self.op is None


@dataclass(frozen=True)
class Rule:
    """``guard -> Forward(message, edge_index)``; either target may be a ?variable."""

    guard: object
    message: Term
    edge_index: Term

    def describe(self) -> str:
        return f"{to_sexpr(self.guard)} -> Forward({self.message}, e{self.edge_index})"


@dataclass(frozen=True)
class ForwardingScheme:
    rules: tuple[Rule, ...]
    set_defs: tuple[SetDef, ...] = ()
    # vertex -> message ids, highest priority last
    msg_priority: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    # message -> vertex -> edge ids, most preferred last
    edge_pref: Mapping[str, Mapping[str, tuple[str, ...]]] = field(default_factory=dict)

    @cached_property
    def set_def(self) -> dict[str, SetDef]:
        return {d.name: d for d in self.set_defs}

    @cached_property
    def msg_rank(self) -> dict[str, dict[str, int]]:
        return {v: {m: i for i, m in enumerate(order)} for v, order in self.msg_priority.items()}

    @cached_property
    def edge_rank(self) -> dict[tuple[str, str], dict[str, int]]:
        return {
            (m, v): {e: i for i, e in enumerate(order)}
            for m, per_v in self.edge_pref.items()
            for v, order in per_v.items()
        }


def rule_instances(rule: Rule, message_ids: Iterable[str], degree: int) -> Iterator[tuple[str, int, dict]]:
    """Ground (message, edge index, env) triples of a rule at a vertex of out-degree ``degree``.

    A rule whose constant edge index exceeds the out-degree does not apply.
    """
    msgs = tuple(message_ids) if is_var(rule.message) else (rule.message,)
    if is_var(rule.edge_index):
        idxs: Iterable[int] = range(1, degree + 1)
    elif rule.edge_index <= degree:
        idxs = (rule.edge_index,)
    else:
        idxs = ()
    for m in msgs:
        for j in idxs:
            env = {}
            if is_var(rule.message):
                env[rule.message] = m
            if is_var(rule.edge_index):
                if env.get(rule.edge_index, j) != j:
                    continue
                env[rule.edge_index] = j
            yield m, j, env


class LocalView:
    """Evaluates assertions at vertex ``v`` for queue ``M`` and active indices ``T``."""

    def __init__(self, s: Scenario, v: str, queue: Iterable[str], active: Iterable[int]):
        self.s = s
        self.scheme = s.scheme
        self.v = v
        self.queue = frozenset(queue)
        self.active = frozenset(active)
        self.out_ids = tuple(e.id for e in s.network.out_edges[v])
        self.degree = len(self.out_ids)
        self.msg_rank = self.scheme.msg_rank.get(v, {})
        self._sets: dict[tuple[str, Term], bool] = {}
        self._rule = None

    def _fail(self, why: str):
        where = f" in rule {self._rule.describe()}" if self._rule is not None else ""
        raise SchemeEvaluationError(f"at vertex {self.v}: {why}{where}")

    def _term(self, t: Term, env: Mapping[str, Term]) -> Term:
        if is_var(t):
            try:
                return env[t]
            except KeyError:
                self._fail(f"unbound variable {t}")
        return t

    def _edge(self, t: Term, env) -> int:
        i = self._term(t, env)
        if not isinstance(i, int) or not 1 <= i <= self.degree:
            self._fail(f"edge index {i} outside 1..{self.degree}")
        return i

    def _msg(self, t: Term, env) -> str:
        m = self._term(t, env)
        if m not in self.s.message:
            self._fail(f"unknown message {m!r}")
        return m

    def _msg_rank(self, m: str) -> int:
        try:
            return self.msg_rank[m]
        except KeyError:
            self._fail(f"message {m} missing from the priority order")

    def _edge_rank(self, m: str, i: int) -> int:
        ranks = self.scheme.edge_rank.get((m, self.v))
        eid = self.out_ids[i - 1]
        if ranks is None or eid not in ranks:
            self._fail(f"no edge preference of {m} for edge {eid}")
        return ranks[eid]

    def eval(self, a, env: Mapping[str, Term] = {}) -> bool:
        if isinstance(a, Present):
            return self._msg(a.msg, env) in self.queue
        if isinstance(a, Active):
            return self._edge(a.edge, env) in self.active
        if isinstance(a, Or):
            return any(self.eval(x, env) for x in a.args)
        if isinstance(a, Not):
            return not self.eval(a.arg, env)
        if isinstance(a, MsgLess):
            return self._msg_rank(self._msg(a.lo, env)) < self._msg_rank(self._msg(a.hi, env))
        if isinstance(a, EdgeLess):
            m = self._msg(a.msg, env)
            return self._edge_rank(m, self._edge(a.lo, env)) < self._edge_rank(m, self._edge(a.hi, env))
        if isinstance(a, Const):
            return a.value
        if isinstance(a, Eq):
            return self._term(a.left, env) == self._term(a.right, env)
        if isinstance(a, In):
            return self.member(a.set_name, self._term(a.elem, env))
        if isinstance(a, Exists):
            domain = self.s.message_ids if a.kind == "msg" else range(1, self.degree + 1)
            return any(self.eval(a.body, {**env, a.var: x}) for x in domain)
        self._fail(f"not an assertion: {a!r}")

    def member(self, name: str, x: Term) -> bool:
        key = (name, x)
        if key not in self._sets:
            d = self.scheme.set_def.get(name)
            if d is None:
                self._fail(f"unknown set {name}")
            if d.is_comprehension:
                result = self.eval(d.body, {d.var: x})
            elif d.op == "union":
                result = any(self.member(n, x) for n in d.operands)
            elif d.op == "intersection":
                result = all(self.member(n, x) for n in d.operands)
            else:
                first, *rest = d.operands
                result = self.member(first, x) and not any(self.member(n, x) for n in rest)
            self._sets[key] = result
        return self._sets[key]

    def rule_instances(self, rule: Rule) -> Iterator[tuple[str, int, dict]]:
        return rule_instances(rule, self.s.message_ids, self.degree)

    def fired(self) -> list[tuple[str, int, int]]:
        """(message, edge index, rule number) for every rule instance that fires."""
        out = []
        for k, rule in enumerate(self.scheme.rules):
            self._rule = rule
            for m, j, env in self.rule_instances(rule):
                if m in self.queue and self.eval(rule.guard, env):
                    out.append((m, j, k))
        self._rule = None
        return out


def eval_assertion(a, v: str, M: Iterable[str], T: Iterable[str], s: Scenario, env=None) -> bool:
    """Truth of assertion ``a`` at vertex ``v`` with queue ``M`` and active edges ``T``.

    ``T`` holds edge ids of ``out(v)``; ``M`` holds message ids.
    """
    idx = s.network.edge_index
    view = LocalView(s, v, M, (idx[e] for e in T if e in idx and s.network.edge[e].source == v))
    return view.eval(a, env or {})


def queue_at(s: Scenario, v: str, M: Iterable[str]) -> frozenset[str]:
    """Messages of ``M`` that are in ``v``'s queue (a message at its target is delivered)."""
    return frozenset(m for m in M if s.message[m].target != v)


def forwarding_output(v: str, M: Iterable[str], T: Iterable[str], s: Scenario) -> tuple[tuple[str, str], ...]:
    """The (message, edge id) pairs forwarded from ``v``.

    Raises :class:`SchemeViolation` when fired rules are non-deterministic or
    break a network constraint.
    """
    queue = queue_at(s, v, M)
    out_ids = {e.id for e in s.network.out_edges[v]}
    active = frozenset(e for e in T if e in out_ids)
    key = (v, queue, active)
    cache = s._memo.setdefault("forwarding", {})
    hit = cache.get(key)
    if hit is None:
        hit = _compute_output(s, v, queue, active)
        cache[key] = hit
    return hit


def _compute_output(s: Scenario, v: str, queue: frozenset, active: frozenset):
    if not queue:
        return ()
    idx = s.network.edge_index
    view = LocalView(s, v, queue, (idx[e] for e in active))
    by_msg: dict[str, tuple[int, int]] = {}
    by_edge: dict[int, tuple[str, int]] = {}
    rules = s.scheme.rules
    for m, j, k in view.fired():
        if m in by_msg and by_msg[m][0] != j:
            other = rules[by_msg[m][1]]
            raise SchemeViolation(
                f"at vertex {v}: {m} forwarded on both e{by_msg[m][0]} and e{j} "
                f"(rules {other.describe()} / {rules[k].describe()})"
            )
        if j in by_edge and by_edge[j][0] != m:
            other = rules[by_edge[j][1]]
            raise SchemeViolation(
                f"at vertex {v}: e{j} carries both {by_edge[j][0]} and {m} "
                f"(rules {other.describe()} / {rules[k].describe()})"
            )
        if j not in view.active:
            raise SchemeViolation(
                f"at vertex {v}: {m} forwarded on inactive e{j} (rule {rules[k].describe()})"
            )
        by_msg[m] = (j, k)
        by_edge[j] = (m, k)
    return tuple((m, view.out_ids[j - 1]) for j, (m, _) in sorted(by_edge.items()))
