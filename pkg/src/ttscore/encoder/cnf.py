"""CNF construction with a role-tagged variable book and hashed, constant-folding gates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Union


class _Const:
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value

    def __neg__(self) -> _Const:
        return BOT if self.value else TOP

    def __repr__(self) -> str:
        return "TOP" if self.value else "BOT"


# Distinct objects rather than True/False: bools compare equal to 1 and 0.
TOP = _Const(True)
BOT = _Const(False)

Lit = Union[int, _Const]


def is_const(x) -> bool:
    return isinstance(x, _Const)


@dataclass(frozen=True)
class Cnf:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]


@dataclass
class VariableBook:
    """Bijection between variable numbers and ``(role, key)`` tags.

    Tags whose value was constant-folded are kept in ``folded`` so callers can
    still ask for them; they own no variable number.
    """

    tags: list[tuple[str, Hashable]] = field(default_factory=list)
    index: dict[tuple[str, Hashable], int] = field(default_factory=dict)
    folded: dict[tuple[str, Hashable], bool] = field(default_factory=dict)

    @property
    def num_vars(self) -> int:
        return len(self.tags)

    def new(self, role: str, key: Hashable) -> int:
        tag = (role, key)
        if tag in self.index or tag in self.folded:
            raise KeyError(f"variable {tag} already booked")
        self.tags.append(tag)
        self.index[tag] = len(self.tags)
        return len(self.tags)

    def rename(self, var: int, role: str, key: Hashable) -> None:
        old = self.tags[var - 1]
        del self.index[old]
        self.tags[var - 1] = (role, key)
        self.index[(role, key)] = var

    def get(self, role: str, key: Hashable) -> Lit | None:
        tag = (role, key)
        if tag in self.index:
            return self.index[tag]
        if tag in self.folded:
            return TOP if self.folded[tag] else BOT
        return None

    def tag(self, var: int) -> tuple[str, Hashable]:
        return self.tags[var - 1]

    def of_role(self, role: str) -> dict[Hashable, int]:
        return {key: self.index[(r, key)] for r, key in self.tags if r == role}


class CnfBuilder:
    def __init__(self, book: VariableBook | None = None):
        self.book = book or VariableBook()
        self.clauses: list[tuple[int, ...]] = []
        self._gates: dict[tuple, Lit] = {}
        self._fresh: set[int] = set()

    def var(self, role: str, key: Hashable) -> int:
        return self.book.new(role, key)

    def add(self, *lits: Lit) -> None:
        out = []
        for x in lits:
            if x is TOP:
                return
            if x is BOT:
                continue
            out.append(x)
        out = tuple(dict.fromkeys(out))
        if any(-x in out for x in out):
            return
        self.clauses.append(out)

    def _gate(self) -> int:
        v = self.book.new("gate", self.book.num_vars + 1)
        self._fresh.add(v)
        return v

    def and_(self, lits: Iterable[Lit]) -> Lit:
        xs = []
        for x in lits:
            if x is BOT:
                return BOT
            if x is not TOP:
                xs.append(x)
        xs = sorted(set(xs))
        if any(-x in xs for x in xs):
            return BOT
        if not xs:
            return TOP
        if len(xs) == 1:
            return xs[0]
        key = ("and", tuple(xs))
        hit = self._gates.get(key)
        if hit is None:
            g = self._gate()
            for x in xs:
                self.add(-g, x)
            self.add(g, *(-x for x in xs))
            hit = self._gates[key] = g
        return hit

    def or_(self, lits: Iterable[Lit]) -> Lit:
        return -self.and_(-x for x in lits)

    def xor(self, a: Lit, b: Lit) -> Lit:
        if is_const(a):
            return -b if a is TOP else b
        if is_const(b):
            return -a if b is TOP else a
        if a == b:
            return BOT
        if a == -b:
            return TOP
        sign = 1
        if a < 0:
            a, sign = -a, -sign
        if b < 0:
            b, sign = -b, -sign
        a, b = min(a, b), max(a, b)
        key = ("xor", a, b)
        g = self._gates.get(key)
        if g is None:
            g = self._gate()
            self.add(-g, a, b)
            self.add(-g, -a, -b)
            self.add(g, -a, b)
            self.add(g, a, -b)
            self._gates[key] = g
        return g if sign > 0 else -g

    def iff(self, a: Lit, b: Lit) -> None:
        """Constrain ``a <-> b``."""
        self.add(-a, b)
        self.add(a, -b)

    def define(self, role: str, key: Hashable, lit: Lit) -> Lit:
        """Give ``lit`` the tag ``(role, key)``.

        A constant is recorded as folded; a gate created by this builder and
        not yet named is renamed in place; anything else gets a new variable
        tied to ``lit`` by an equivalence.
        """
        if is_const(lit):
            self.book.folded[(role, key)] = lit.value
            return lit
        if lit > 0 and lit in self._fresh:
            self._fresh.discard(lit)
            self.book.rename(lit, role, key)
            return lit
        v = self.book.new(role, key)
        self.iff(v, lit)
        return v

    def cnf(self) -> Cnf:
        return Cnf(self.book.num_vars, tuple(self.clauses))
