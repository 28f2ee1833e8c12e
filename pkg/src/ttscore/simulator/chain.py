"""Frame automata, their product Markov chain, and bounded reachability."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product

from ttscore.errors import CapExceeded
from ttscore.model.network import Scenario
from ttscore.scheme.forwarding import forwarding_output, queue_at

DEFAULT_STATE_CAP = 10**6


@dataclass(frozen=True)
class FrameAutomaton:
    """Deterministic automaton following one message through the network.

    Vertex states read a letter ``(M, T)`` (queue and active out-edges);
    edge states read whether the send was delivered.  Waiting is "stay at v".
    """

    message: str
    s: Scenario

    @property
    def initial(self) -> str:
        return self.s.message[self.message].source

    @property
    def states(self) -> tuple[tuple[str, str], ...]:
        net = self.s.network
        return tuple(("v", v) for v in net.vertices) + tuple(("e", e.id) for e in net.edges)

    def on_vertex(self, v: str, M, T) -> tuple[str, str]:
        if self.message not in queue_at(self.s, v, M):
            return ("v", v)
        for m, eid in forwarding_output(v, M, T, self.s):
            if m == self.message:
                return ("e", eid)
        return ("v", v)

    def on_edge(self, eid: str, delivered: bool) -> tuple[str, str]:
        e = self.s.network.edge[eid]
        return ("v", e.target if delivered else e.source)

    def trajectory(self, outcome, faults) -> list[str]:
        """Vertex visited at each time when driven by a concrete run's queues and letters."""
        here = self.initial
        path = [here]
        for i, (T, ok) in enumerate(zip(faults.active, faults.delivered)):
            config = outcome.configurations[i]
            M = [m for m, v in config.items() if v == here]
            kind, x = self.on_vertex(here, M, T)
            if kind == "e":
                kind, x = self.on_edge(x, (self.message, x) in ok)
            here = x
            path.append(here)
        return path


def build_frame(m: str, s: Scenario) -> FrameAutomaton:
    return FrameAutomaton(m, s)


@dataclass
class ExplicitChain:
    """Product chain with alternating position (V) and send (E) layers.

    A V-state is ``("V", positions, alive)``; an E-state is
    ``("E", positions, sends, alive)`` where ``sends`` lists the edge each
    message was put on (or None).  ``alive`` is the surviving edge set under
    permanent crashes and empty otherwise.
    """

    states: list[tuple]
    transitions: list[list[tuple[int, float]]]
    initial: int
    accepting: frozenset[int]
    horizon: int
    expanded: set[int] = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.states)


def _crash_letters(s: Scenario, relevant, alive):
    """(active edges, alive edges afterwards, probability) over the relevant edges."""
    net = s.network
    fixed, uncertain = [], []
    for eid in relevant:
        e = net.edge[eid]
        if s.permanent and eid not in alive:
            continue
        if e.p_crash <= 0.0:
            fixed.append(eid)
        elif e.p_crash < 1.0:
            uncertain.append(e)
    for bits in product((True, False), repeat=len(uncertain)):
        prob = 1.0
        active = list(fixed)
        for e, up in zip(uncertain, bits):
            prob *= (1.0 - e.p_crash) if up else e.p_crash
            if up:
                active.append(e.id)
        if prob > 0.0:
            active = frozenset(active)
            yield active, (active if s.permanent else frozenset()), prob


def build_product_chain(s: Scenario, cap: int = DEFAULT_STATE_CAP) -> ExplicitChain:
    """Reachable part of the product chain within ``2t`` micro-steps.

    Under temporary crashes only edges leaving an occupied queue are
    branched on (the others cannot influence anything); under permanent
    crashes every surviving edge is, since the state records the survivors.
    """
    net = s.network
    msgs = s.message_ids
    targets = tuple(s.message[m].target for m in msgs)
    horizon = 2 * s.timeout
    start_alive = frozenset(e.id for e in net.edges if e.p_crash < 1.0) if s.permanent else frozenset()
    start = ("V", tuple(s.message[m].source for m in msgs), start_alive)
    states = [start]
    index = {start: 0}
    transitions: list[list[tuple[int, float]]] = [[]]
    expanded: set[int] = set()

    def intern(state) -> int:
        k = index.get(state)
        if k is None:
            if len(states) >= cap:
                raise CapExceeded("product chain", cap, f"> {cap} states")
            k = index[state] = len(states)
            states.append(state)
            transitions.append([])
        return k

    def successors(state):
        out: dict[tuple, float] = {}
        if state[0] == "V":
            _, pos, alive = state
            queues: dict[str, list[str]] = {}
            for m, v, tgt in zip(msgs, pos, targets):
                if v != tgt:
                    queues.setdefault(v, []).append(m)
            if s.permanent:
                relevant = sorted(alive)
            else:
                relevant = [e.id for v in sorted(queues) for e in net.out_edges[v]]
            for active, survivors, prob in _crash_letters(s, relevant, alive):
                sends = [None] * len(msgs)
                for v in queues:
                    for m, eid in forwarding_output(v, queues[v], active, s):
                        sends[msgs.index(m)] = eid
                nxt = ("E", pos, tuple(sends), survivors)
                out[nxt] = out.get(nxt, 0.0) + prob
        else:
            _, pos, sends, alive = state
            choices = []
            for v, eid in zip(pos, sends):
                if eid is None:
                    choices.append([(v, 1.0)])
                    continue
                e = net.edge[eid]
                opts = []
                if e.p_omit < 1.0:
                    opts.append((e.target, 1.0 - e.p_omit))
                if e.p_omit > 0.0:
                    opts.append((v, e.p_omit))
                choices.append(opts)
            for combo in product(*choices):
                prob = 1.0
                for _, q in combo:
                    prob *= q
                nxt = ("V", tuple(v for v, _ in combo), alive)
                out[nxt] = out.get(nxt, 0.0) + prob
        return out

    frontier = deque([(0, 0)])
    depth_of = {0: 0}
    while frontier:
        k, depth = frontier.popleft()
        if depth >= horizon:
            continue
        expanded.add(k)
        for nxt, prob in successors(states[k]).items():
            j = intern(nxt)
            transitions[k].append((j, prob))
            if j not in depth_of:
                depth_of[j] = depth + 1
                frontier.append((j, depth + 1))

    accepting = frozenset(
        k for k, st in enumerate(states)
        if st[0] == "V" and sum(1 for v, tgt in zip(st[1], targets) if v == tgt) >= s.guarantee
    )
    return ExplicitChain(states, transitions, 0, accepting, horizon, expanded)


def chain_reachability(c: ExplicitChain, horizon: int | None = None) -> float:
    """Probability mass in accepting states after ``horizon`` micro-steps (default 2t)."""
    steps = c.horizon if horizon is None else horizon
    dist = {c.initial: 1.0}
    for _ in range(steps):
        nxt: dict[int, float] = {}
        for k, mass in dist.items():
            for j, prob in c.transitions[k]:
                nxt[j] = nxt.get(j, 0.0) + mass * prob
        dist = nxt
    return sum(mass for k, mass in dist.items() if k in c.accepting)


def score_chain(s: Scenario, cap: int = DEFAULT_STATE_CAP) -> float:
    return chain_reachability(build_product_chain(s, cap))
