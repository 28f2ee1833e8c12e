"""Assertion AST for forwarding rules, plus the s-expression syntax.

Core grammar::

    (present m) (active i) (msg< m m') (edge< i j m) (or a ...) (not a)

Terms are message ids, 1-based edge indices, or variables (``?name``) bound
by a rule template, a set comprehension or a quantifier.  Extensions used by
the library templates: ``(true)``, ``(false)``, ``(eq x y)``, ``(in x S)``,
``(exists-msg ?x a)``, ``(exists-edge ?x a)``.  ``and``, ``implies`` and
``forall-*`` are accepted by the parser and desugared to ``or``/``not``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ttscore.errors import ScenarioFormatError

Term = Union[str, int]


def is_var(term: Term) -> bool:
    return isinstance(term, str) and term.startswith("?")


@dataclass(frozen=True)
class Present:
    msg: Term


@dataclass(frozen=True)
class Active:
    edge: Term


@dataclass(frozen=True)
class MsgLess:
    """``lo < hi`` in the local message priority: ``hi`` has precedence."""

    lo: Term
    hi: Term


@dataclass(frozen=True)
class EdgeLess:
    """Message ``msg`` prefers edge ``hi`` over edge ``lo`` at this vertex."""

    lo: Term
    hi: Term
    msg: Term


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class In:
    elem: Term
    set_name: str


@dataclass(frozen=True)
class Exists:
    kind: str  # "msg" or "edge"
    var: str
    body: object


Assertion = Union[Present, Active, MsgLess, EdgeLess, Or, Not, Const, Eq, In, Exists]

TRUE = Const(True)
FALSE = Const(False)


def or_(*args) -> Assertion:
    return Or(tuple(args))


def and_(*args) -> Assertion:
    return Not(Or(tuple(Not(a) for a in args)))


def implies(a, b) -> Assertion:
    return Or((Not(a), b))


def forall(kind: str, var: str, body) -> Assertion:
    return Not(Exists(kind, var, Not(body)))


def free_vars(a) -> set[str]:
    if isinstance(a, Present):
        return {a.msg} if is_var(a.msg) else set()
    if isinstance(a, Active):
        return {a.edge} if is_var(a.edge) else set()
    if isinstance(a, MsgLess):
        return {t for t in (a.lo, a.hi) if is_var(t)}
    if isinstance(a, EdgeLess):
        return {t for t in (a.lo, a.hi, a.msg) if is_var(t)}
    if isinstance(a, Eq):
        return {t for t in (a.left, a.right) if is_var(t)}
    if isinstance(a, In):
        return {a.elem} if is_var(a.elem) else set()
    if isinstance(a, Or):
        return set().union(*(free_vars(x) for x in a.args))
    if isinstance(a, Not):
        return free_vars(a.arg)
    if isinstance(a, Exists):
        return free_vars(a.body) - {a.var}
    return set()


def set_refs(a) -> set[str]:
    if isinstance(a, In):
        return {a.set_name}
    if isinstance(a, Or):
        return set().union(*(set_refs(x) for x in a.args))
    if isinstance(a, Not):
        return set_refs(a.arg)
    if isinstance(a, Exists):
        return set_refs(a.body)
    return set()


# -- s-expressions -----------------------------------------------------------


def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _read(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise ScenarioFormatError("unexpected end of assertion")
    tok = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _read(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise ScenarioFormatError("unbalanced parenthesis in assertion")
        return items, pos + 1
    if tok == ")":
        raise ScenarioFormatError("unexpected ')' in assertion")
    return tok, pos + 1


def _edge_term(tok) -> Term:
    if isinstance(tok, list):
        raise ScenarioFormatError(f"expected an edge index, got {tok}")
    if is_var(tok):
        return tok
    try:
        value = int(tok)
    except ValueError:
        raise ScenarioFormatError(f"edge index must be an integer or ?var, got {tok!r}") from None
    if value < 1:
        raise ScenarioFormatError(f"edge index must be >= 1, got {value}")
    return value


def _msg_term(tok) -> Term:
    if isinstance(tok, list):
        raise ScenarioFormatError(f"expected a message id, got {tok}")
    return tok


def _any_term(tok) -> Term:
    if isinstance(tok, list):
        raise ScenarioFormatError(f"expected a term, got {tok}")
    if tok.lstrip("-").isdigit():
        return int(tok)
    return tok


def _build(node) -> Assertion:
    if not isinstance(node, list) or not node:
        raise ScenarioFormatError(f"malformed assertion: {node!r}")
    head, *args = node

    def arity(n):
        if len(args) != n:
            raise ScenarioFormatError(f"({head} ...) takes {n} arguments, got {len(args)}")

    if head == "present":
        arity(1)
        return Present(_msg_term(args[0]))
    if head == "active":
        arity(1)
        return Active(_edge_term(args[0]))
    if head == "msg<":
        arity(2)
        return MsgLess(_msg_term(args[0]), _msg_term(args[1]))
    if head == "edge<":
        arity(3)
        return EdgeLess(_edge_term(args[0]), _edge_term(args[1]), _msg_term(args[2]))
    if head == "or":
        return Or(tuple(_build(a) for a in args))
    if head == "and":
        return and_(*(_build(a) for a in args))
    if head == "not":
        arity(1)
        return Not(_build(args[0]))
    if head == "implies":
        arity(2)
        return implies(_build(args[0]), _build(args[1]))
    if head == "true":
        arity(0)
        return TRUE
    if head == "false":
        arity(0)
        return FALSE
    if head == "eq":
        arity(2)
        return Eq(_any_term(args[0]), _any_term(args[1]))
    if head == "in":
        arity(2)
        if isinstance(args[1], list):
            raise ScenarioFormatError("(in x S) expects a set name")
        return In(_any_term(args[0]), args[1])
    for quant in ("exists", "forall"):
        for kind in ("msg", "edge"):
            if head == f"{quant}-{kind}":
                arity(2)
                var = args[0]
                if isinstance(var, list) or not is_var(var):
                    raise ScenarioFormatError(f"({head} ...) must bind a ?variable")
                body = _build(args[1])
                return Exists(kind, var, body) if quant == "exists" else forall(kind, var, body)
    raise ScenarioFormatError(f"unknown assertion operator {head!r}")


def parse_assertion(text: str) -> Assertion:
    tokens = _tokenize(text)
    node, pos = _read(tokens, 0)
    if pos != len(tokens):
        raise ScenarioFormatError(f"trailing tokens in assertion: {' '.join(tokens[pos:])}")
    return _build(node)


def to_sexpr(a) -> str:
    """Render an assertion; ``and``/``forall`` shapes are re-sugared for readability."""
    if isinstance(a, Present):
        return f"(present {a.msg})"
    if isinstance(a, Active):
        return f"(active {a.edge})"
    if isinstance(a, MsgLess):
        return f"(msg< {a.lo} {a.hi})"
    if isinstance(a, EdgeLess):
        return f"(edge< {a.lo} {a.hi} {a.msg})"
    if isinstance(a, Const):
        return "(true)" if a.value else "(false)"
    if isinstance(a, Eq):
        return f"(eq {a.left} {a.right})"
    if isinstance(a, In):
        return f"(in {a.elem} {a.set_name})"
    if isinstance(a, Or):
        return "(or" + "".join(" " + to_sexpr(x) for x in a.args) + ")"
    if isinstance(a, Exists):
        return f"(exists-{a.kind} {a.var} {to_sexpr(a.body)})"
    if isinstance(a, Not):
        inner = a.arg
        if isinstance(inner, Or) and inner.args and all(isinstance(x, Not) for x in inner.args):
            return "(and" + "".join(" " + to_sexpr(x.arg) for x in inner.args) + ")"
        if isinstance(inner, Exists) and isinstance(inner.body, Not):
            return f"(forall-{inner.kind} {inner.var} {to_sexpr(inner.body.arg)})"
        return f"(not {to_sexpr(inner)})"
    raise TypeError(f"not an assertion: {a!r}")
