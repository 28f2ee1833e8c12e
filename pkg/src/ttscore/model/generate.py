"""Seeded random scenarios in the style of the evaluation networks."""

from __future__ import annotations

import random

from ttscore.errors import GenerationError
from ttscore.model.network import Edge, FaultModel, Message, Network, Scenario
from ttscore.scheme.builders import build_hot_potato, shortest_path_routes

MAX_REDRAWS = 64


def generate_random_scenario(
    n_vertices: int,
    seed,
    n_messages: int = 2,
    *,
    n_edges: int | None = None,
    timeout: int | None = None,
    guarantee: int | None = None,
    fault_model: FaultModel = FaultModel.PERMANENT,
    p_crash: float = 0.01,
    p_omit: float = 0.01,
) -> Scenario:
    """Random multigraph with ``floor(2.5 n)`` edges and a hot-potato scheme.

    Each message gets a distinct random (source, target) pair joined by a
    directed path; its first choice is a shortest path and its fallbacks the
    shortest-path DAG.  The default timeout is one slot more than the longest
    first-choice path and the default guarantee is every message.
    """
    if n_vertices < 2:
        raise GenerationError(f"need at least 2 vertices, got {n_vertices}")
    rng = random.Random(seed)
    vertices = tuple(f"v{i}" for i in range(n_vertices))
    count = int(2.5 * n_vertices) if n_edges is None else n_edges
    edges = []
    for i in range(count):
        u, w = rng.sample(vertices, 2)
        edges.append(Edge(f"e{i}", u, w, p_crash, p_omit))
    out_order = {v: tuple(e.id for e in edges if e.source == v) for v in vertices}
    net = Network(vertices, tuple(edges), out_order)

    messages, paths, dags = [], {}, {}
    used = set()
    for j in range(1, n_messages + 1):
        mid = f"m{j}"
        for _ in range(MAX_REDRAWS):
            src, dst = rng.sample(vertices, 2)
            if (src, dst) in used:
                continue
            routes = shortest_path_routes(net, src, dst)
            if routes is not None:
                break
        else:
            raise GenerationError(
                f"message {mid}: no source/target pair joined by a directed path "
                f"after {MAX_REDRAWS} draws (seed {seed!r})"
            )
        used.add((src, dst))
        messages.append(Message(mid, src, dst))
        paths[mid], dags[mid] = routes

    if timeout is None:
        timeout = max(len(p) for p in paths.values()) + 1
    if guarantee is None:
        guarantee = n_messages
    draft = Scenario(net, tuple(messages), None, timeout, guarantee, fault_model)
    return draft.replace(scheme=build_hot_potato(draft, paths, dags))
