"""Monomial orders on exponent vectors.

An order exposes ``key(exponents) -> comparable`` such that the usual tuple
comparison realizes the order.  All orders here are global (1 is minimal),
which the division algorithm relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class MonomialOrder:
    """Total order on monomials of a fixed number of variables."""

    nvars: int

    def key(self, exp: tuple[int, ...]):
        raise NotImplementedError

    def greater(self, a: tuple[int, ...], b: tuple[int, ...]) -> bool:
        return self.key(a) > self.key(b)


@dataclass(frozen=True)
class Lex(MonomialOrder):
    """Lexicographic order; earlier variables dominate."""

    nvars: int

    def key(self, exp):
        return exp


@dataclass(frozen=True)
class GrevLex(MonomialOrder):
    """Graded reverse lexicographic order."""

    nvars: int

    def key(self, exp):
        return (sum(exp), tuple(-e for e in reversed(exp)))


@dataclass(frozen=True)
class Block(MonomialOrder):
    """Block (elimination) order: the first block strictly dominates.

    ``split`` is the number of leading variables forming the first block;
    within each block GrevLex is used.  Any monomial containing a variable
    of the first block is larger than any monomial without one, so a
    Groebner basis under this order computes elimination ideals.
    """

    nvars: int
    split: int

    def key(self, exp):
        head, tail = exp[: self.split], exp[self.split :]
        return (
            sum(head),
            tuple(-e for e in reversed(head)),
            sum(tail),
            tuple(-e for e in reversed(tail)),
        )


def order_by_name(kind: str, nvars: int, split: int | None = None) -> MonomialOrder:
    if kind == "lex":
        return Lex(nvars)
    if kind == "grevlex":
        return GrevLex(nvars)
    if kind == "block":
        if split is None:
            raise ValueError("block order requires a split point")
        return Block(nvars, split)
    raise ValueError(f"unknown order {kind!r}")


def exp_divides(a: Sequence[int], b: Sequence[int]) -> bool:
    """Whether monomial a divides monomial b."""
    return all(x <= y for x, y in zip(a, b))


def exp_lcm(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(max(x, y) for x, y in zip(a, b))


def exp_sub(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(x - y for x, y in zip(a, b))


def exp_add(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def exp_coprime(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x == 0 or y == 0 for x, y in zip(a, b))
