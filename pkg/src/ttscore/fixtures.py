"""Small reference scenarios with hand-checkable scores."""

from __future__ import annotations

from ttscore.model.network import Edge, FaultModel, Message, Network, Scenario
from ttscore.scheme.builders import build_hot_potato


def _hot_potato(net: Network, messages, timeout, guarantee, fault_model, paths) -> Scenario:
    draft = Scenario(net, tuple(messages), None, timeout, guarantee, fault_model)
    return draft.replace(scheme=build_hot_potato(draft, paths))


def unit_link(p_crash: float = 0.1, p_omit: float = 0.05,
              fault_model: FaultModel = FaultModel.TEMPORARY) -> Scenario:
    """One edge u -> v, one message, t = 1, l = 1.  Score (1 - p_crash)(1 - p_omit)."""
    net = Network(("u", "v"), (Edge("e", "u", "v", p_crash, p_omit),), {"u": ("e",), "v": ()})
    return _hot_potato(net, [Message("m", "u", "v")], 1, 1, fault_model, {"m": ["e"]})


def parallel_2(p_crash: float = 0.5, p_omit: float = 0.0,
               fault_model: FaultModel = FaultModel.TEMPORARY, timeout: int = 1) -> Scenario:
    """Two parallel edges u -> v, first choice e1.  Score 1 - p_crash**2 at t = 1."""
    net = Network(
        ("u", "v"),
        (Edge("e1", "u", "v", p_crash, p_omit), Edge("e2", "u", "v", p_crash, p_omit)),
        {"u": ("e1", "e2"), "v": ()},
    )
    return _hot_potato(net, [Message("m", "u", "v")], timeout, 1, fault_model, {"m": ["e1"]})
