"""Literal-weighted formulas: independent per-literal weights plus a normalisation factor."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ttscore.encoder.cnf import TOP, Cnf, CnfBuilder, VariableBook, is_const
from ttscore.model.network import Scenario


@dataclass(frozen=True)
class WeightedFormula:
    """CNF with ``weights[lit]`` for weighted literals (both phases listed, summing to 1).

    Unlisted variables weigh 1 in both phases.  The true weight of the
    original formula is ``gamma * WMC(cnf)``; ``log_gamma`` keeps it exact
    when many gadgets multiply up.
    """

    cnf: Cnf
    weights: dict[int, float]
    log_gamma: float = 0.0
    book: VariableBook | None = field(default=None, compare=False, repr=False)

    @property
    def gamma(self) -> float:
        return math.exp(self.log_gamma)


def gadget_weights(p: float) -> tuple[float, float, float]:
    """``(a, b, gamma)`` for a dependent fault of probability ``p < 1``.

    With ``a`` weighting "fault and condition", ``b`` weighting "neither",
    ``gamma * a * (1-b) = p``, ``gamma * (1-a) * (1-b) = 1-p`` and
    ``gamma * (1-a) * b = 1``.
    """
    return p, 1.0 / (2.0 - p), (2.0 - p) / (1.0 - p)


def to_literal_weighted(psi: Cnf, book: VariableBook, s: Scenario) -> WeightedFormula:
    """Attach weights to fault variables of ``psi``.

    Omissions depend on the edge being used, so each gets two gadget
    variables ``a <-> omit & fr`` and ``b <-> -omit & -fr``.  Temporary crashes
    are independent and weighted directly.  A permanent crash chain over slots
    ``i_1 < i_2 < ...`` weights its first variable directly with the chance of
    a crash within ``i_1`` slots; later links use ``c <-> x_j & -x_i`` (a fresh
    crash within the ``j - i`` slots since the previous variable) and
    ``d <-> x_j & x_i`` (an old crash).
    """
    work = VariableBook(list(book.tags), dict(book.index), dict(book.folded))
    b = CnfBuilder(work)
    b.clauses = list(psi.clauses)
    weights: dict[int, float] = {}
    log_gamma = 0.0

    def weigh(lit, w: float):
        nonlocal log_gamma
        if is_const(lit):
            # a gadget literal fixed by the encoding contributes a constant factor
            log_gamma += math.log(w if lit is TOP else 1.0 - w)
            return
        weights[lit] = w
        weights[-lit] = 1.0 - w

    net = s.network
    chains: dict[str, list[int]] = {}
    for role, key in book.tags:
        if role == "crash":
            chains.setdefault(key[0], []).append(key[1])
    for role, key in list(book.tags):
        if role == "crash":
            eid, slot = key
            x = book.index[(role, key)]
            p = net.edge[eid].p_crash
            if not s.permanent:
                weigh(x, p)
                continue
            slots = sorted(chains[eid])
            k = slots.index(slot)
            prev = slots[k - 1] if k else 0
            # crash somewhere in slots prev+1 .. slot
            q = -math.expm1((slot - prev) * math.log1p(-p))
            if not k:
                weigh(x, q)
                continue
            x_prev = book.index[("crash", (eid, prev))]
            c_w, d_w, g = gadget_weights(q)
            weigh(b.define("c", (eid, slot), b.and_([x, -x_prev])), c_w)
            weigh(b.define("d", (eid, slot), b.and_([x, x_prev])), d_w)
            log_gamma += math.log(g)
        elif role == "omit":
            eid, slot = key
            x = book.index[(role, key)]
            fr = book.get("fr", (eid, slot))
            a_w, b_w, g = gadget_weights(net.edge[eid].p_omit)
            weigh(b.define("a", (eid, slot), b.and_([x, fr])), a_w)
            weigh(b.define("b", (eid, slot), b.and_([-x, -fr])), b_w)
            log_gamma += math.log(g)
    return WeightedFormula(b.cnf(), weights, log_gamma, work)
