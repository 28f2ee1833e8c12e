"""Concrete outcome semantics: slot stepping, fault sampling, exhaustive enumeration."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping

from ttscore.errors import CapExceeded, ContractError
from ttscore.model.network import Scenario
from ttscore.scheme.forwarding import forwarding_output

Configuration = Mapping[str, str]
Pair = tuple[str, str]

DEFAULT_BRANCH_CAP = 2**24


@dataclass(frozen=True)
class FaultSequence:
    """Per-slot crash letters (active edge ids) and omission letters (delivered pairs)."""

    active: tuple[frozenset[str], ...]
    delivered: tuple[frozenset[Pair], ...]

    @property
    def slots(self) -> int:
        return len(self.active)

    @classmethod
    def fault_free(cls, s: Scenario) -> FaultSequence:
        all_edges = frozenset(e.id for e in s.network.edges)
        config = initial_configuration(s)
        delivered = []
        for _ in range(s.timeout):
            pairs = forwarded_pairs(config, all_edges, s)
            delivered.append(frozenset(pairs))
            config = step(config, all_edges, {p: True for p in pairs}, s)
        return cls((all_edges,) * s.timeout, tuple(delivered))


@dataclass(frozen=True)
class Outcome:
    configurations: tuple[dict[str, str], ...]

    @property
    def final(self) -> dict[str, str]:
        return self.configurations[-1]


def initial_configuration(s: Scenario) -> dict[str, str]:
    return {m.id: m.source for m in s.messages}


def forwarded_pairs(c: Configuration, T, s: Scenario) -> list[Pair]:
    """Every (message, edge) pair forwarded in phase 1 of a slot."""
    queues: dict[str, list[str]] = {}
    for m, v in c.items():
        if s.message[m].target != v:
            queues.setdefault(v, []).append(m)
    pairs: list[Pair] = []
    for v in sorted(queues):
        pairs.extend(forwarding_output(v, queues[v], T, s))
    return pairs


def step(c: Configuration, T, omission_fate: Mapping[Pair, bool], s: Scenario) -> dict[str, str]:
    """Next configuration: forward on active edges, then apply per-pair omission fates.

    ``omission_fate[(m, e)]`` is True when the send succeeds; an omitted
    message stays in its sender's queue.
    """
    pairs = forwarded_pairs(c, T, s)
    if set(omission_fate) != set(pairs):
        raise ContractError(
            f"omission fates given for {sorted(omission_fate)} but forwarded pairs are {sorted(pairs)}"
        )
    nxt = dict(c)
    for m, eid in pairs:
        if omission_fate[(m, eid)]:
            nxt[m] = s.network.edge[eid].target
    return nxt


def run(s: Scenario, f: FaultSequence) -> Outcome:
    if f.slots != s.timeout:
        raise ContractError(f"fault sequence has {f.slots} slots, scenario timeout is {s.timeout}")
    if s.permanent:
        for i in range(1, f.slots):
            if not f.active[i] <= f.active[i - 1]:
                raise ContractError(f"permanent crashes: slot {i + 1} reactivates an edge")
    configs = [initial_configuration(s)]
    for T, ok in zip(f.active, f.delivered):
        pairs = forwarded_pairs(configs[-1], T, s)
        configs.append(step(configs[-1], T, {p: p in ok for p in pairs}, s))
    return Outcome(tuple(configs))


def arrivals(o: Outcome, s: Scenario) -> int:
    return sum(1 for m in s.messages if o.final[m.id] == m.target)


def _draw_active(s: Scenario, rng: random.Random, alive: set[str] | None) -> frozenset[str]:
    active = []
    for e in s.network.edges:
        if alive is not None and e.id not in alive:
            continue
        if e.p_crash <= 0.0 or (e.p_crash < 1.0 and rng.random() >= e.p_crash):
            active.append(e.id)
    return frozenset(active)


def simulate(s: Scenario, rng: random.Random) -> tuple[FaultSequence, Outcome]:
    """Sample a fault sequence while stepping (omission fates drawn only for real sends)."""
    alive = set(e.id for e in s.network.edges) if s.permanent else None
    config = initial_configuration(s)
    configs = [config]
    actives, delivered = [], []
    for _ in range(s.timeout):
        T = _draw_active(s, rng, alive)
        if alive is not None:
            alive = set(T)
        pairs = forwarded_pairs(config, T, s)
        fate = {}
        for m, eid in pairs:
            p = s.network.edge[eid].p_omit
            fate[(m, eid)] = p <= 0.0 or (p < 1.0 and rng.random() >= p)
        config = step(config, T, fate, s)
        configs.append(config)
        actives.append(T)
        delivered.append(frozenset(p for p, ok in fate.items() if ok))
    return FaultSequence(tuple(actives), tuple(delivered)), Outcome(tuple(configs))


def sample_fault_sequence(s: Scenario, rng: random.Random) -> FaultSequence:
    return simulate(s, rng)[0]


def simulate_success(s: Scenario, rng: random.Random) -> bool:
    """One Monte-Carlo trial: did at least ``guarantee`` messages arrive?"""
    net = s.network
    edges = net.edges
    alive = {e.id for e in edges} if s.permanent else None
    config = {m.id: m.source for m in s.messages}
    targets = {m.id: m.target for m in s.messages}
    for _ in range(s.timeout):
        T = []
        for e in edges:
            if alive is not None and e.id not in alive:
                continue
            if e.p_crash <= 0.0 or (e.p_crash < 1.0 and rng.random() >= e.p_crash):
                T.append(e.id)
        if alive is not None:
            alive = set(T)
        queues: dict[str, list[str]] = {}
        for m, v in config.items():
            if targets[m] != v:
                queues.setdefault(v, []).append(m)
        if not queues:
            break
        T = frozenset(T)
        for v in sorted(queues):
            for m, eid in forwarding_output(v, queues[v], T, s):
                p = net.edge[eid].p_omit
                if p <= 0.0 or (p < 1.0 and rng.random() >= p):
                    config[m] = net.edge[eid].target
    return sum(1 for m, v in config.items() if targets[m] == v) >= s.guarantee


# -- exhaustive enumeration --------------------------------------------------


def _hop_distance(s: Scenario) -> dict[str, dict[str, int]]:
    """Per message: hop distance from each vertex to the target over edges that can ever be active."""
    from collections import deque

    rev: dict[str, list[str]] = {}
    for e in s.network.edges:
        if e.p_crash < 1.0 and e.p_omit < 1.0:
            rev.setdefault(e.target, []).append(e.source)
    out = {}
    for m in s.messages:
        dist = {m.target: 0}
        todo = deque([m.target])
        while todo:
            u = todo.popleft()
            for w in rev.get(u, ()):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    todo.append(w)
        out[m.id] = dist
    return out


def score_enumerate(s: Scenario, cap: int = DEFAULT_BRANCH_CAP) -> float:
    """Exact score by depth-first enumeration of every fault branching.

    Only edges leaving an occupied queue are branched on.  Under permanent
    crashes an edge's fate between two observations is folded into one
    branch: alive since slot ``j`` and still alive at ``i`` has probability
    ``(1-p)^(i-j)``.  Branches where the target count is already met, or can
    no longer be met, are closed early.
    """
    net = s.network
    msgs = s.message_ids
    targets = tuple(s.message[m].target for m in msgs)
    dist = _hop_distance(s)
    t, ell = s.timeout, s.guarantee
    branches = 0

    def feasible(pos, slot) -> bool:
        left = t - slot
        hits = sum(1 for k, m in enumerate(msgs) if dist[m].get(pos[k], left + 1) <= left)
        return hits >= ell

    def arrived(pos) -> int:
        return sum(1 for v, tgt in zip(pos, targets) if v == tgt)

    def crash_patterns(relevant, slot, seen):
        """Yield (active ids, probability, updated edge knowledge)."""
        fixed = [e.id for e in relevant if e.p_crash <= 0.0]
        uncertain = []
        for e in relevant:
            if e.p_crash <= 0.0:
                continue
            if e.p_crash >= 1.0:
                continue
            if s.permanent:
                last = seen.get(e.id, 0)
                if last is None:
                    continue  # known dead
                q_alive = (1.0 - e.p_crash) ** (slot - last)
            else:
                q_alive = 1.0 - e.p_crash
            uncertain.append((e.id, q_alive))
        n = len(uncertain)
        for mask in range(1 << n):
            prob = 1.0
            active = list(fixed)
            knowledge = dict(seen) if s.permanent else seen
            for bit, (eid, q) in enumerate(uncertain):
                if mask >> bit & 1:
                    prob *= q
                    active.append(eid)
                    if s.permanent:
                        knowledge[eid] = slot
                else:
                    prob *= 1.0 - q
                    if s.permanent:
                        knowledge[eid] = None
            if prob > 0.0:
                yield frozenset(active), prob, knowledge

    def fates(pairs):
        uncertain = []
        moves = []
        for m, eid in pairs:
            p = net.edge[eid].p_omit
            if p <= 0.0:
                moves.append((m, eid))
            elif p < 1.0:
                uncertain.append((m, eid, p))
        for mask in range(1 << len(uncertain)):
            prob = 1.0
            done = list(moves)
            for bit, (m, eid, p) in enumerate(uncertain):
                if mask >> bit & 1:
                    prob *= 1.0 - p
                    done.append((m, eid))
                else:
                    prob *= p
            if prob > 0.0:
                yield done, prob

    index = {m: k for k, m in enumerate(msgs)}

    def visit(pos: tuple, slot: int, seen: dict) -> float:
        nonlocal branches
        if arrived(pos) >= ell:
            return 1.0
        if slot == t or not feasible(pos, slot):
            return 0.0
        queues: dict[str, list[str]] = {}
        for m, v, tgt in zip(msgs, pos, targets):
            if v != tgt:
                queues.setdefault(v, []).append(m)
        relevant = [e for v in sorted(queues) for e in net.out_edges[v]]
        total = 0.0
        for active, p_crash, knowledge in crash_patterns(relevant, slot + 1, seen):
            pairs = [pr for v in sorted(queues) for pr in forwarding_output(v, queues[v], active, s)]
            for moves, p_omit in fates(pairs):
                branches += 1
                if branches > cap:
                    raise CapExceeded("fault-branch enumeration", cap, f"> {cap} branches")
                nxt = list(pos)
                for m, eid in moves:
                    nxt[index[m]] = net.edge[eid].target
                total += p_crash * p_omit * visit(tuple(nxt), slot + 1, knowledge)
        return total

    start = tuple(s.message[m].source for m in msgs)
    return visit(start, 0, {})
