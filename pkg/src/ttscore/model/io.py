"""JSON persistence for scenarios."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import IO, Any, Union

from ttscore.errors import ScenarioFormatError, ScenarioValidationError
from ttscore.model.network import Edge, FaultModel, Message, Network, Scenario, validate_scenario
from ttscore.scheme.assertions import parse_assertion, to_sexpr
from ttscore.scheme.forwarding import ForwardingScheme, Rule, SetDef

FORMAT_VERSION = 1

_TOP = {"version", "vertices", "edges", "out_order", "messages", "timeout", "guarantee",
        "fault_model", "scheme"}
_EDGE = {"id", "from", "to", "p_crash", "p_omit"}
_MSG = {"id", "source", "target"}
_SCHEME = {"set_defs", "rules", "msg_priority", "edge_pref"}
_RULE = {"guard", "message", "edge_index"}
_SETDEF = {"name", "kind", "var", "body", "op", "operands"}

PathOrFile = Union[str, os.PathLike, IO[str]]


def scheme_to_dict(scheme: ForwardingScheme) -> dict:
    defs = []
    for d in scheme.set_defs:
        if d.is_comprehension:
            defs.append({"name": d.name, "kind": d.kind, "var": d.var, "body": to_sexpr(d.body)})
        else:
            defs.append({"name": d.name, "kind": d.kind, "op": d.op, "operands": list(d.operands)})
    return {
        "set_defs": defs,
        "rules": [
            {"guard": to_sexpr(r.guard), "message": r.message, "edge_index": r.edge_index}
            for r in scheme.rules
        ],
        "msg_priority": {v: list(order) for v, order in scheme.msg_priority.items()},
        "edge_pref": {
            m: {v: list(order) for v, order in per_v.items()} for m, per_v in scheme.edge_pref.items()
        },
    }


def scenario_to_dict(s: Scenario) -> dict:
    net = s.network
    return {
        "version": FORMAT_VERSION,
        "vertices": list(net.vertices),
        "edges": [
            {"id": e.id, "from": e.source, "to": e.target, "p_crash": e.p_crash, "p_omit": e.p_omit}
            for e in net.edges
        ],
        "out_order": {v: list(order) for v, order in net.out_order.items()},
        "messages": [{"id": m.id, "source": m.source, "target": m.target} for m in s.messages],
        "timeout": s.timeout,
        "guarantee": s.guarantee,
        "fault_model": s.fault_model.value,
        "scheme": scheme_to_dict(s.scheme),
    }


def dumps_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


def save_scenario(s: Scenario, destination: PathOrFile) -> None:
    text = dumps_scenario(s)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8")


# -- loading -----------------------------------------------------------------


def _obj(value, where: str, allowed: set[str], required: set[str]) -> dict:
    if not isinstance(value, dict):
        raise ScenarioFormatError(f"{where}: expected an object")
    unknown = sorted(set(value) - allowed)
    if unknown:
        raise ScenarioFormatError(f"{where}: unknown field(s) {unknown}")
    missing = sorted(required - set(value))
    if missing:
        raise ScenarioFormatError(f"{where}: missing required field {missing[0]!r}")
    return value


def _list(value, where: str) -> list:
    if not isinstance(value, list):
        raise ScenarioFormatError(f"{where}: expected a list")
    return value


def _str(value, where: str) -> str:
    if not isinstance(value, str):
        raise ScenarioFormatError(f"{where}: expected a string, got {value!r}")
    return value


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioFormatError(f"{where}: expected an integer, got {value!r}")
    return value


def _prob(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFormatError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _str_map(value, where: str) -> dict[str, tuple[str, ...]]:
    if not isinstance(value, dict):
        raise ScenarioFormatError(f"{where}: expected an object")
    return {
        k: tuple(_str(x, f"{where}[{k}][{i}]") for i, x in enumerate(_list(v, f"{where}[{k}]")))
        for k, v in value.items()
    }


def _assertion(text, where: str):
    try:
        return parse_assertion(_str(text, where))
    except ScenarioFormatError as exc:
        raise ScenarioFormatError(f"{where}: {exc}") from None


def scheme_from_dict(doc: Any, where: str = "scheme") -> ForwardingScheme:
    doc = _obj(doc, where, _SCHEME, {"rules", "msg_priority", "edge_pref"})
    defs = []
    for i, d in enumerate(_list(doc.get("set_defs", []), f"{where}.set_defs")):
        w = f"{where}.set_defs[{i}]"
        d = _obj(d, w, _SETDEF, {"name", "kind"})
        if "body" in d:
            defs.append(SetDef(_str(d["name"], f"{w}.name"), _str(d["kind"], f"{w}.kind"),
                               _str(d.get("var"), f"{w}.var"), _assertion(d["body"], f"{w}.body")))
        else:
            if "op" not in d:
                raise ScenarioFormatError(f"{w}: needs either 'body' or 'op'")
            ops = tuple(_str(x, f"{w}.operands") for x in _list(d.get("operands", []), f"{w}.operands"))
            defs.append(SetDef(_str(d["name"], f"{w}.name"), _str(d["kind"], f"{w}.kind"),
                               op=_str(d["op"], f"{w}.op"), operands=ops))
    rules = []
    for i, r in enumerate(_list(doc["rules"], f"{where}.rules")):
        w = f"{where}.rules[{i}]"
        r = _obj(r, w, _RULE, _RULE)
        idx = r["edge_index"]
        if not isinstance(idx, str):
            idx = _int(idx, f"{w}.edge_index")
        rules.append(Rule(_assertion(r["guard"], f"{w}.guard"), _str(r["message"], f"{w}.message"), idx))
    prefs = doc["edge_pref"]
    if not isinstance(prefs, dict):
        raise ScenarioFormatError(f"{where}.edge_pref: expected an object")
    edge_pref = {m: _str_map(per_v, f"{where}.edge_pref[{m}]") for m, per_v in prefs.items()}
    return ForwardingScheme(tuple(rules), tuple(defs), _str_map(doc["msg_priority"], f"{where}.msg_priority"),
                            edge_pref)


def scenario_from_dict(doc: Any, validate: bool = True) -> Scenario:
    doc = _obj(doc, "scenario", _TOP, _TOP)
    if doc["version"] != FORMAT_VERSION:
        raise ScenarioFormatError(f"version: unsupported format version {doc['version']!r}")
    vertices = tuple(_str(v, f"vertices[{i}]") for i, v in enumerate(_list(doc["vertices"], "vertices")))
    edges = []
    for i, e in enumerate(_list(doc["edges"], "edges")):
        w = f"edges[{i}]"
        e = _obj(e, w, _EDGE, _EDGE)
        edges.append(Edge(_str(e["id"], f"{w}.id"), _str(e["from"], f"{w}.from"), _str(e["to"], f"{w}.to"),
                          _prob(e["p_crash"], f"{w}.p_crash"), _prob(e["p_omit"], f"{w}.p_omit")))
    messages = []
    for i, m in enumerate(_list(doc["messages"], "messages")):
        w = f"messages[{i}]"
        m = _obj(m, w, _MSG, _MSG)
        messages.append(Message(_str(m["id"], f"{w}.id"), _str(m["source"], f"{w}.source"),
                                _str(m["target"], f"{w}.target")))
    try:
        flavor = FaultModel(doc["fault_model"])
    except ValueError:
        raise ScenarioFormatError(
            f"fault_model: expected 'temporary' or 'permanent', got {doc['fault_model']!r}"
        ) from None
    s = Scenario(
        Network(vertices, tuple(edges), _str_map(doc["out_order"], "out_order")),
        tuple(messages),
        scheme_from_dict(doc["scheme"]),
        _int(doc["timeout"], "timeout"),
        _int(doc["guarantee"], "guarantee"),
        flavor,
    )
    if validate:
        problems = validate_scenario(s)
        if problems:
            raise ScenarioValidationError(problems)
    return s


def loads_scenario(text: str, validate: bool = True) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(doc, validate)


def load_scenario(source: PathOrFile, validate: bool = True) -> Scenario:
    if hasattr(source, "read"):
        return loads_scenario(source.read(), validate)
    return loads_scenario(Path(source).read_text(encoding="utf-8"), validate)
