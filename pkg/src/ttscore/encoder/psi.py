"""Unrolling a scenario into a CNF whose models are the good fault branchings."""

from __future__ import annotations

from collections import defaultdict

from ttscore.encoder.cnf import BOT, TOP, Cnf, CnfBuilder, Lit, VariableBook
from ttscore.encoder.counter import at_least, exactly
from ttscore.errors import ContractError, SchemeEvaluationError, SchemeViolation, UnsupportedModel
from ttscore.model.network import Scenario
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
    is_var,
)
from ttscore.scheme.forwarding import rule_instances
from ttscore.scheme.validation import Reachability, explore_reachable


class _Faults:
    """Crash and omission literals, created on first use.

    Crash variables mean "crashed by this slot".  Under permanent crashes an
    edge only gets variables at the slots where something reads it, chained
    ``x_{e,i} -> x_{e,j}`` for consecutive such slots ``i < j``; the
    weighting accounts for the slots skipped in between.
    """

    def __init__(self, b: CnfBuilder, s: Scenario):
        self.b = b
        self.s = s
        self.last_slot: dict[str, int] = {}

    def crashed(self, eid: str, slot: int) -> Lit:
        p = self.s.network.edge[eid].p_crash
        if p <= 0.0:
            return BOT
        if p >= 1.0:
            return TOP
        got = self.b.book.get("crash", (eid, slot))
        if got is not None:
            return got
        x = self.b.var("crash", (eid, slot))
        if self.s.permanent:
            prev = self.last_slot.get(eid)
            if prev is not None:
                if prev > slot:
                    raise ContractError(f"crash of {eid} read at slot {slot} after slot {prev}")
                self.b.add(-self.b.book.get("crash", (eid, prev)), x)
            self.last_slot[eid] = slot
        return x


class _Symbolic:
    """Assertion -> literal at one (vertex, slot), mirroring concrete evaluation."""

    def __init__(self, b: CnfBuilder, s: Scenario, v: str, slot: int, present: dict, faults: _Faults):
        self.b, self.s, self.v, self.slot = b, s, v, slot
        self.present = present
        self.faults = faults
        self.out_ids = tuple(e.id for e in s.network.out_edges[v])
        self.msg_rank = s.scheme.msg_rank.get(v, {})
        self.members: dict[tuple, Lit] = {}

    def _fail(self, why: str):
        raise SchemeEvaluationError(f"at vertex {self.v}, slot {self.slot}: {why}")

    def _term(self, t, env):
        if is_var(t):
            if t not in env:
                self._fail(f"unbound variable {t}")
            return env[t]
        return t

    def _edge(self, t, env) -> int:
        i = self._term(t, env)
        if not isinstance(i, int) or not 1 <= i <= len(self.out_ids):
            self._fail(f"edge index {i} outside 1..{len(self.out_ids)}")
        return i

    def _msg(self, t, env) -> str:
        m = self._term(t, env)
        if m not in self.s.message:
            self._fail(f"unknown message {m!r}")
        return m

    def _rank(self, m):
        if m not in self.msg_rank:
            self._fail(f"message {m} missing from the priority order")
        return self.msg_rank[m]

    def _edge_rank(self, m, i):
        ranks = self.s.scheme.edge_rank.get((m, self.v), {})
        eid = self.out_ids[i - 1]
        if eid not in ranks:
            self._fail(f"no edge preference of {m} for edge {eid}")
        return ranks[eid]

    def active(self, j: int) -> Lit:
        return -self.faults.crashed(self.out_ids[j - 1], self.slot)

    def lit(self, a, env) -> Lit:
        b = self.b
        if isinstance(a, Present):
            return self.present[self._msg(a.msg, env)]
        if isinstance(a, Active):
            return self.active(self._edge(a.edge, env))
        if isinstance(a, Or):
            return b.or_(self.lit(x, env) for x in a.args)
        if isinstance(a, Not):
            return -self.lit(a.arg, env)
        if isinstance(a, MsgLess):
            lo, hi = self._msg(a.lo, env), self._msg(a.hi, env)
            return TOP if self._rank(lo) < self._rank(hi) else BOT
        if isinstance(a, EdgeLess):
            m = self._msg(a.msg, env)
            lo, hi = self._edge(a.lo, env), self._edge(a.hi, env)
            return TOP if self._edge_rank(m, lo) < self._edge_rank(m, hi) else BOT
        if isinstance(a, Const):
            return TOP if a.value else BOT
        if isinstance(a, Eq):
            return TOP if self._term(a.left, env) == self._term(a.right, env) else BOT
        if isinstance(a, In):
            return self.member(a.set_name, self._term(a.elem, env))
        if isinstance(a, Exists):
            domain = self.s.message_ids if a.kind == "msg" else range(1, len(self.out_ids) + 1)
            return b.or_(self.lit(a.body, {**env, a.var: x}) for x in domain)
        self._fail(f"not an assertion: {a!r}")

    def member(self, name: str, x) -> Lit:
        key = (name, x)
        if key not in self.members:
            d = self.s.scheme.set_def.get(name)
            if d is None:
                self._fail(f"unknown set {name}")
            if d.is_comprehension:
                lit = self.lit(d.body, {d.var: x})
            elif d.op == "union":
                lit = self.b.or_(self.member(n, x) for n in d.operands)
            elif d.op == "intersection":
                lit = self.b.and_(self.member(n, x) for n in d.operands)
            else:
                first, *rest = d.operands
                lit = self.b.and_([self.member(first, x), -self.b.or_(self.member(n, x) for n in rest)])
            self.members[key] = self.b.define("set", (name, x, self.v, self.slot), lit)
        return self.members[key]


def encode_psi(
    s: Scenario,
    goal: str = "good",
    exact_crashes: int | None = None,
    reach: Reachability | None = None,
) -> tuple[Cnf, VariableBook]:
    """CNF over position, send, fault and counter variables for scenario ``s``.

    ``goal="good"`` keeps branchings with at least ``guarantee`` arrivals,
    ``"bad"`` those with fewer.  ``exact_crashes=k`` (permanent crashes only)
    further restricts to branchings where exactly ``k`` edges have crashed by
    the timeout.  Only positions and sends that the reachability analysis
    deems possible get variables.
    """
    if goal not in ("good", "bad"):
        raise ValueError(f"goal must be 'good' or 'bad', got {goal!r}")
    if exact_crashes is not None and not s.permanent:
        raise UnsupportedModel("exact crash counts need the permanent crash model")
    reach = reach or explore_reachable(s)
    if reach.violations:
        raise SchemeViolation(reach.violations[0])
    net = s.network
    msgs = s.message_ids
    b = CnfBuilder()
    faults = _Faults(b, s)

    pos: dict[tuple[str, str], Lit] = {}
    for m in s.messages:
        pos[(m.id, m.source)] = b.define("pos", (m.id, m.source, 0), TOP)

    for i in range(1, s.timeout + 1):
        sends: dict[str, dict[str, Lit]] = defaultdict(dict)  # edge -> message -> literal
        possible = reach.sends[i]
        for v in sorted(reach.occupied[i]):
            present = {
                m: BOT if s.message[m].target == v else pos.get((m, v), BOT) for m in msgs
            }
            if all(x is BOT for x in present.values()):
                continue
            sym = _Symbolic(b, s, v, i, present, faults)
            fire: dict[tuple[str, int], list[Lit]] = defaultdict(list)
            degree = net.degree(v)
            for rule in s.scheme.rules:
                for m, j, env in rule_instances(rule, msgs, degree):
                    if present[m] is BOT or (m, sym.out_ids[j - 1]) not in possible:
                        continue
                    fire[(m, j)].append(sym.lit(rule.guard, env))
            for (m, j), guards in sorted(fire.items()):
                eid = sym.out_ids[j - 1]
                lit = b.and_([present[m], sym.active(j), b.or_(guards)])
                sends[eid][m] = b.define("send", (m, eid, i), lit)

        delivered: dict[tuple[str, str], Lit] = {}
        for eid in sorted(sends):
            fr = b.define("fr", (eid, i), b.or_(sends[eid].values()))
            p = net.edge[eid].p_omit
            if p >= 1.0:
                omit: Lit = TOP
            elif p <= 0.0 or fr is BOT:
                omit = BOT
            else:
                omit = b.var("omit", (eid, i))
                b.add(-omit, fr)
            for m, x in sends[eid].items():
                delivered[(m, eid)] = b.and_([x, -omit])

        nxt: dict[tuple[str, str], Lit] = {}
        for m in s.messages:
            for w in sorted(reach.positions[i][m.id]):
                before = pos.get((m.id, w), BOT)
                leave = b.or_(delivered.get((m.id, e.id), BOT) for e in net.out_edges[w])
                arrive = b.or_(delivered.get((m.id, e.id), BOT) for e in net.in_edges.get(w, ()))
                lit = b.or_([b.and_([before, -leave]), arrive])
                nxt[(m.id, w)] = b.define("pos", (m.id, w, i), lit)
        pos = nxt

    X = [pos.get((m.id, m.target), BOT) for m in s.messages]
    good = at_least(b, X, s.guarantee)
    b.add(good if goal == "good" else -good)
    if exact_crashes is not None:
        indicators = [faults.crashed(e.id, s.timeout) for e in net.edges]
        b.add(exactly(b, indicators, exact_crashes))
    return b.cnf(), b.book
