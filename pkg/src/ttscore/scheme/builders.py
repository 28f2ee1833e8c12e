"""Assertion templates and scheme builders (hot-potato, TT-schedule)."""

from __future__ import annotations

from collections import defaultdict, deque
from typing import TYPE_CHECKING, Mapping, Sequence

from ttscore.errors import ScheduleError, TTScoreError
from ttscore.scheme.assertions import (
    Active,
    EdgeLess,
    Eq,
    Exists,
    In,
    MsgLess,
    Present,
    and_,
    forall,
    implies,
    or_,
)
from ttscore.scheme.forwarding import ForwardingScheme, Rule, SetDef

if TYPE_CHECKING:
    from ttscore.model.network import Network, Scenario


def priority(m, set_name: str, other: str = "?rival"):
    """``m`` belongs to ``set_name`` and outranks every other member at this vertex."""
    return and_(
        In(m, set_name),
        forall("msg", other, implies(In(other, set_name), or_(Eq(other, m), MsgLess(other, m)))),
    )


def prefers(m, e, set_name: str | None = None, other: str = "?alt"):
    """``e`` is ``m``'s most preferred edge among ``set_name`` (or among active edges).

    With a set, ``e`` must itself belong to it; without one this is the
    unconditioned ``prefers(m, e_i)`` of the TT-schedule rules.
    """
    member = In(other, set_name) if set_name else Active(other)
    best = forall("edge", other, implies(member, or_(Eq(other, e), EdgeLess(other, e, m))))
    return and_(In(e, set_name), best) if set_name else best


def hot_potato_rules(n_messages: int, max_degree: int) -> tuple[tuple[Rule, ...], tuple[SetDef, ...]]:
    """Rules and set chains S_1..S_k / T_1..T_k of the hot-potato algorithm.

    Level ``i`` lets the ``i``-th highest priority queued message claim its
    favourite edge among those still free; ``k = min(|M|, d)``.
    """
    k = max(1, min(n_messages, max_degree))
    defs = [SetDef("S1", "messages", "?x", Present("?x"))]
    defs.append(SetDef("T1", "edges", "?y", Active("?y")))
    rules = []
    for i in range(1, k + 1):
        defs.append(SetDef(f"top{i}", "messages", "?x", priority("?x", f"S{i}")))
        rules.append(Rule(and_(In("?m", f"top{i}"), prefers("?m", "?e", f"T{i}")), "?m", "?e"))
        if i < k:
            defs.append(SetDef(f"S{i + 1}", "messages", op="difference", operands=(f"S{i}", f"top{i}")))
            claimed = Exists("msg", "?x", and_(In("?x", f"top{i}"), prefers("?x", "?y", f"T{i}")))
            defs.append(SetDef(f"claimed{i}", "edges", "?y", claimed))
            defs.append(SetDef(f"T{i + 1}", "edges", op="difference", operands=(f"T{i}", f"claimed{i}")))
    return tuple(rules), tuple(defs)


def _hop_distances(net: Network, target: str, edges=None) -> dict[str, int]:
    """BFS distance to ``target`` over ``edges`` (default: all edges)."""
    rev = defaultdict(list)
    for e in edges if edges is not None else net.edges:
        rev[e.target].append(e.source)
    dist = {target: 0}
    todo = deque([target])
    while todo:
        u = todo.popleft()
        for w in rev[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                todo.append(w)
    return dist


def shortest_path_routes(net: Network, source: str, target: str):
    """First-choice shortest path and the shortest-path DAG towards ``target``.

    Returns ``(path_edge_ids, dag_edge_ids)`` or ``None`` if unreachable.
    """
    dist = _hop_distances(net, target)
    if source not in dist:
        return None
    dag = [e.id for e in net.edges if e.source in dist and e.target in dist
           and dist[e.target] == dist[e.source] - 1 and e.source != target]
    path = []
    v = source
    while v != target:
        e = next(e for e in net.out_edges[v] if dist.get(e.target) == dist[v] - 1)
        path.append(e.id)
        v = e.target
    return path, dag


def _check_path(net: Network, m, path: Sequence[str]) -> list[str]:
    if not path:
        raise TTScoreError(f"first-choice path of {m.id} is empty")
    at = m.source
    seen = {at}
    for eid in path:
        e = net.edge.get(eid)
        if e is None or e.source != at:
            raise TTScoreError(f"first-choice path of {m.id} breaks at {eid} (expected an edge out of {at})")
        at = e.target
        if at in seen:
            raise TTScoreError(f"first-choice path of {m.id} revisits {at}")
        seen.add(at)
    if at != m.target:
        raise TTScoreError(f"first-choice path of {m.id} ends at {at}, not at target {m.target}")
    return [net.edge[eid].source for eid in path]


def _check_dag(net: Network, m, dag: Sequence[str], on_path: list[str]) -> dict[str, int]:
    edges = [net.edge[eid] for eid in dag]
    if any(e.source == m.target for e in edges):
        raise TTScoreError(f"fallback DAG of {m.id} leaves its sink {m.target}")
    dist = _hop_distances(net, m.target, edges)
    nodes = {e.source for e in edges} | {e.target for e in edges}
    for v in nodes - {m.target}:
        if v not in dist:
            raise TTScoreError(f"fallback DAG of {m.id}: {v} cannot reach the sink {m.target}")
    # Kahn's algorithm for acyclicity
    indeg = defaultdict(int)
    for e in edges:
        indeg[e.target] += 1
    todo = deque(v for v in nodes if indeg[v] == 0)
    seen = 0
    while todo:
        u = todo.popleft()
        seen += 1
        for e in edges:
            if e.source == u:
                indeg[e.target] -= 1
                if indeg[e.target] == 0:
                    todo.append(e.target)
    if seen != len(nodes):
        raise TTScoreError(f"fallback edges of {m.id} contain a cycle")
    for v in on_path:
        if v not in nodes:
            raise TTScoreError(f"fallback DAG of {m.id} omits on-path vertex {v}")
    return dist


def build_hot_potato(
    s: Scenario,
    first_choice: Mapping[str, Sequence[str]],
    fallbacks: Mapping[str, Sequence[str]] | None = None,
    priority_order: Sequence[str] | None = None,
) -> ForwardingScheme:
    """Hot-potato scheme whose edge preferences follow the given routes.

    At each vertex a message ranks its first-choice edge highest, then its
    fallback DAG edges (closest to the target first), then every other edge
    by hop distance to its target.  ``priority_order`` lists messages from
    highest to lowest priority (default: declaration order).
    """
    net = s.network
    edge_pref: dict[str, dict[str, tuple[str, ...]]] = {}
    for m in s.messages:
        path = list(first_choice[m.id])
        on_path = _check_path(net, m, path)
        path_next = {net.edge[eid].source: eid for eid in path}
        dag_ids = list(fallbacks[m.id]) if fallbacks and m.id in fallbacks else None
        dag_dist = _check_dag(net, m, dag_ids, on_path) if dag_ids is not None else {}
        dag_set = set(dag_ids or ())
        graph_dist = _hop_distances(net, m.target)
        inf = float("inf")
        per_v = {}
        for v in net.vertices:
            def key(pos_e, v=v):
                pos, e = pos_e
                if path_next.get(v) == e.id:
                    return (0, 0, pos)
                if e.id in dag_set:
                    return (1, dag_dist.get(e.target, inf), pos)
                return (2, graph_dist.get(e.target, inf), pos)

            ranked = sorted(enumerate(net.out_edges[v]), key=key)
            per_v[v] = tuple(e.id for _, e in reversed(ranked))
        edge_pref[m.id] = per_v
    order = list(priority_order) if priority_order is not None else list(s.message_ids)
    msg_priority = {v: tuple(reversed(order)) for v in net.vertices}
    rules, defs = hot_potato_rules(len(s.messages), net.max_out_degree)
    return ForwardingScheme(rules, defs, msg_priority, edge_pref)


def tt_rules(max_degree: int) -> tuple[tuple[Rule, ...], tuple[SetDef, ...]]:
    """``m ∧ prefers(m, e_i) ∧ e_i ∧ priority(m, S_{e_i}) → Forward(m, e_i)`` for every index."""
    defs, rules = [], []
    for j in range(1, max_degree + 1):
        name = f"S_e{j}"
        defs.append(SetDef(name, "messages", "?x", and_(Present("?x"), prefers("?x", j))))
        guard = and_(Present("?m"), prefers("?m", j), Active(j), priority("?m", name))
        rules.append(Rule(guard, "?m", j))
    return tuple(rules), tuple(defs)


def build_from_tt_schedule(schedule: Mapping[int, Sequence[tuple[str, str]]], s: Scenario) -> ForwardingScheme:
    """Forwarding scheme equivalent to a TT-schedule without redundant waiting.

    ``schedule`` maps slot numbers (1-based) to ``(message, edge id)`` sends.
    Priorities at a vertex follow scheduled departure times there (earlier is
    higher); each message prefers its scheduled path edge.  The derived scheme
    is simulated fault-free and must reproduce the schedule exactly.
    """
    net = s.network
    sends = sorted((slot, m, eid) for slot, pairs in schedule.items() for m, eid in pairs)
    used: set[tuple[int, str]] = set()
    moved: set[tuple[int, str]] = set()
    position = {m.id: m.source for m in s.messages}
    last_slot = {m.id: 0 for m in s.messages}
    path_next: dict[tuple[str, str], str] = {}
    departure: dict[str, dict[str, int]] = defaultdict(dict)
    for slot, m, eid in sends:
        if m not in s.message:
            raise ScheduleError(f"slot {slot}: unknown message {m}")
        e = net.edge.get(eid)
        if e is None:
            raise ScheduleError(f"slot {slot}: unknown edge {eid}")
        if not 1 <= slot <= s.timeout:
            raise ScheduleError(f"condition (3): slot {slot} of {m} lies outside 1..{s.timeout}")
        if (slot, eid) in used:
            raise ScheduleError(f"condition (2): two messages scheduled on {eid} at slot {slot}")
        if (slot, m) in moved:
            raise ScheduleError(f"condition (1): {m} scheduled twice at slot {slot}")
        if e.source != position[m]:
            raise ScheduleError(
                f"condition (1): {m} scheduled on {eid} at slot {slot} but is at {position[m]}"
            )
        if (m, e.source) in path_next:
            raise ScheduleError(f"condition (1): {m} leaves {e.source} twice (not a path)")
        used.add((slot, eid))
        moved.add((slot, m))
        path_next[(m, e.source)] = eid
        departure[e.source][m] = slot
        position[m] = e.target
        last_slot[m] = slot
    for m in s.messages:
        if position[m.id] != m.target:
            raise ScheduleError(f"condition (3): {m.id} does not reach its target {m.target}")

    msg_priority = {}
    for v in net.vertices:
        dep = departure.get(v, {})
        # lowest first: never departing here, then latest departure
        order = sorted(s.message_ids, key=lambda m: (m in dep, -dep.get(m, 0), m))
        msg_priority[v] = tuple(order)
    edge_pref = {}
    for m in s.messages:
        per_v = {}
        for v in net.vertices:
            ids = [e.id for e in net.out_edges[v]]
            best = path_next.get((m.id, v))
            rest = [eid for eid in reversed(ids) if eid != best]
            per_v[v] = tuple(rest + ([best] if best else []))
        edge_pref[m.id] = per_v
    rules, defs = tt_rules(net.max_out_degree)
    scheme = ForwardingScheme(rules, defs, msg_priority, edge_pref)

    from ttscore.simulator.outcomes import FaultSequence, run

    derived = s.replace(scheme=scheme)
    outcome = run(derived, FaultSequence.fault_free(derived))
    for m in s.messages:
        arrival = next((i for i, c in enumerate(outcome.configurations) if c[m.id] == m.target), None)
        if arrival != last_slot[m.id]:
            raise ScheduleError(
                f"schedule has redundant waiting: {m.id} arrives at slot {arrival} "
                f"under the derived scheme but at slot {last_slot[m.id]} in the schedule"
            )
    return scheme
