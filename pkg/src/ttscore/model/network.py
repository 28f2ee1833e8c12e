"""Networks, messages and scoring scenarios."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Mapping

if TYPE_CHECKING:
    from ttscore.scheme import ForwardingScheme

PROB_TOL = 1e-9


class FaultModel(str, Enum):
    TEMPORARY = "temporary"
    PERMANENT = "permanent"


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str
    p_crash: float = 0.0
    p_omit: float = 0.0


@dataclass(frozen=True)
class Network:
    """Directed multigraph with per-edge fault probabilities.

    ``out_order`` fixes, per vertex, the order of outgoing edges; rule edge
    index ``i`` at vertex ``v`` denotes ``out_order[v][i - 1]``.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    out_order: Mapping[str, tuple[str, ...]]

    @cached_property
    def edge(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def out_edges(self) -> dict[str, tuple[Edge, ...]]:
        by_id = self.edge
        return {
            v: tuple(by_id[eid] for eid in self.out_order.get(v, ()) if eid in by_id)
            for v in self.vertices
        }

    @cached_property
    def in_edges(self) -> dict[str, tuple[Edge, ...]]:
        incoming: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            incoming.setdefault(e.target, []).append(e)
        return {v: tuple(es) for v, es in incoming.items()}

    @cached_property
    def max_out_degree(self) -> int:
        return max((len(es) for es in self.out_edges.values()), default=0)

    def degree(self, v: str) -> int:
        return len(self.out_edges[v])

    def edge_at(self, v: str, index: int) -> Edge:
        """The ``index``-th (1-based) outgoing edge of ``v``."""
        return self.out_edges[v][index - 1]

    @cached_property
    def edge_index(self) -> dict[str, int]:
        """Edge id -> its 1-based position in its source's out order."""
        return {
            e.id: i for v in self.vertices for i, e in enumerate(self.out_edges[v], start=1)
        }


@dataclass(frozen=True)
class Message:
    id: str
    source: str
    target: str


@dataclass(frozen=True)
class Scenario:
    network: Network
    messages: tuple[Message, ...]
    scheme: ForwardingScheme
    timeout: int
    guarantee: int
    fault_model: FaultModel = FaultModel.TEMPORARY
    # per-instance memo for scheme evaluation; excluded from equality
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    @cached_property
    def message(self) -> dict[str, Message]:
        return {m.id: m for m in self.messages}

    @property
    def message_ids(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.messages)

    @property
    def permanent(self) -> bool:
        return self.fault_model is FaultModel.PERMANENT

    def replace(self, **changes) -> Scenario:
        """Copy with some fields changed (caches are not carried over)."""
        from dataclasses import replace

        return replace(self, _memo={}, **changes)


def validate_scenario(s: Scenario) -> list[str]:
    """Every violated structural invariant, each prefixed by its location.

    Behavioural checks of the scheme (determinism over reachable queues) are
    done by :func:`ttscore.scheme.validate_scheme`.
    """
    from ttscore.scheme.validation import check_scheme_structure

    net = s.network
    problems: list[str] = []
    vset = set(net.vertices)
    if len(vset) != len(net.vertices):
        problems.append("vertices: duplicate vertex id")
    seen_edges: set[str] = set()
    for e in net.edges:
        where = f"edges[{e.id}]"
        if e.id in seen_edges:
            problems.append(f"{where}: duplicate edge id")
        seen_edges.add(e.id)
        for end, name in ((e.source, "from"), (e.target, "to")):
            if end not in vset:
                problems.append(f"{where}.{name}: undeclared vertex {end!r}")
        for name in ("p_crash", "p_omit"):
            p = getattr(e, name)
            if not (0.0 <= p <= 1.0):
                problems.append(f"{where}.{name}: probability {p} outside [0, 1]")
    for v in net.vertices:
        declared = sorted(e.id for e in net.edges if e.source == v)
        given = list(net.out_order.get(v, ()))
        if sorted(given) != declared:
            problems.append(
                f"out_order[{v}]: {given} is not a permutation of out({v}) = {declared}"
            )
    for v in net.out_order:
        if v not in vset:
            problems.append(f"out_order[{v}]: undeclared vertex")

    ids = [m.id for m in s.messages]
    if len(set(ids)) != len(ids):
        problems.append("messages: duplicate message id")
    for m in s.messages:
        where = f"messages[{m.id}]"
        for end, name in ((m.source, "source"), (m.target, "target")):
            if end not in vset:
                problems.append(f"{where}.{name}: undeclared vertex {end!r}")
        if m.source == m.target:
            problems.append(f"{where}: source equals target")

    if not isinstance(s.timeout, int) or s.timeout < 1:
        problems.append(f"timeout: must be a positive integer, got {s.timeout!r}")
    if not (1 <= s.guarantee <= len(s.messages)):
        problems.append(
            f"guarantee: {s.guarantee} outside 1..{len(s.messages)} (number of messages)"
        )
    if not isinstance(s.fault_model, FaultModel):
        problems.append(f"fault_model: unknown flavor {s.fault_model!r}")

    if not problems:
        problems.extend(check_scheme_structure(s.scheme, s))
    return problems
