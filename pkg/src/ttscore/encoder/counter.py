"""Sequential saturating counter: "at least / exactly k of X are true"."""

from __future__ import annotations

from math import ceil, log2
from typing import Sequence

from ttscore.encoder.cnf import BOT, CnfBuilder, Lit
from ttscore.errors import ContractError


def counter_width(cap: int) -> int:
    return max(1, ceil(log2(cap + 1)))


def _increment(b: CnfBuilder, bits: list[Lit], x: Lit, cap: int) -> list[Lit]:
    saturated = b.and_(bit if cap >> k & 1 else -bit for k, bit in enumerate(bits))
    carry = b.and_([x, -saturated])
    out = []
    for bit in bits:
        out.append(b.xor(bit, carry))
        carry = b.and_([bit, carry])
    return out


def encode_counter(b: CnfBuilder, X: Sequence[Lit], cap: int, role: str = "cnt") -> list[Lit]:
    """Book ``|X|`` copies of a ``ceil(log2(cap+1))``-bit count; return the final count bits.

    Copy ``i`` holds the number of true literals among ``X[:i-1]`` saturated
    at ``cap``; copy 1 is forced to zero.  The returned bits add ``X[-1]`` to
    the last copy, so they equal ``min(cap, popcount(X))``.
    """
    if not X:
        raise ContractError("counter needs at least one input")
    if cap < 1:
        raise ContractError(f"counter cap must be >= 1, got {cap}")
    width = counter_width(cap)
    bits: list[Lit] = []
    for k in range(width):
        y = b.var(role, (1, k))
        b.add(-y)
        bits.append(y)
    for i, x in enumerate(X[:-1], start=2):
        bits = [b.define(role, (i, k), bit) for k, bit in enumerate(_increment(b, bits, x, cap))]
    return _increment(b, bits, X[-1], cap)


def equals(b: CnfBuilder, bits: Sequence[Lit], value: int) -> Lit:
    return b.and_(bit if value >> k & 1 else -bit for k, bit in enumerate(bits))


def at_least(b: CnfBuilder, X: Sequence[Lit], ell: int, role: str = "cnt") -> Lit:
    """Literal that is true iff at least ``ell`` of ``X`` hold (``1 <= ell <= |X|``)."""
    if not 1 <= ell <= len(X):
        raise ContractError(f"threshold {ell} outside 1..{len(X)}")
    return equals(b, encode_counter(b, X, ell, role), ell)


def exactly(b: CnfBuilder, X: Sequence[Lit], k: int, role: str = "kcnt") -> Lit:
    """Literal that is true iff exactly ``k`` of ``X`` hold."""
    if k < 0:
        return BOT
    if k > len(X):
        return BOT
    if not X:
        return equals(b, [], 0) if k == 0 else BOT
    return equals(b, encode_counter(b, X, k + 1, role), k)
