"""Exact multivariate polynomials over QQ or GF(p).

A ring fixes the coefficient field and an ordered tuple of variable names.
Inverted variables are realized by companion variables: a name ``v`` marked
as inverted is accompanied by ``v_inv``, and the unit relation
``v*v_inv - 1`` is added by the scheme layer.  Polynomials themselves only
ever carry nonnegative exponents.

Terms are stored as a dict mapping exponent tuples to nonzero field
elements; the canonical form (zero coefficients dropped, like terms merged)
is maintained by construction.  Exponents are capped well below 2**31 and
exceeding the cap is a hard error rather than silent wraparound.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable, Mapping

from .fields import Field, FieldError

MAX_EXPONENT = 2**31 - 1

INVERSE_SUFFIX = "_inv"


class ExponentOverflow(OverflowError):
    pass


class RingMismatch(ValueError):
    pass


def companion_name(name: str) -> str:
    return name + INVERSE_SUFFIX


@dataclass(frozen=True)
class PolynomialRing:
    """field + ordered variable names; ``inverted`` marks localized names."""

    field: Field
    names: tuple[str, ...]
    inverted: frozenset[str] = dc_field(default_factory=frozenset)

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        for v in self.inverted:
            if v not in self.names:
                raise ValueError(f"inverted name {v!r} is not a ring variable")
            if companion_name(v) not in self.names:
                raise ValueError(f"inverted name {v!r} lacks companion {companion_name(v)!r}")

    @property
    def nvars(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise RingMismatch(f"{name!r} is not a variable of {self.names}") from None

    def zero(self) -> Polynomial:
        return Polynomial(self, {})

    def one(self) -> Polynomial:
        return self.const(1)

    def const(self, c) -> Polynomial:
        cv = self.field.from_int(c) if isinstance(c, int) else c
        if cv == self.field.zero:
            return Polynomial(self, {})
        return Polynomial(self, {(0,) * self.nvars: cv})

    def var(self, name: str) -> Polynomial:
        i = self.index(name)
        exp = tuple(1 if j == i else 0 for j in range(self.nvars))
        return Polynomial(self, {exp: self.field.one})

    def monomial(self, exps: Mapping[str, int], coeff=1) -> Polynomial:
        e = [0] * self.nvars
        for name, k in exps.items():
            if k < 0:
                raise ValueError("negative exponent; use laurent_power for inverted names")
            e[self.index(name)] = k
        cv = self.field.from_int(coeff) if isinstance(coeff, int) else coeff
        if cv == self.field.zero:
            return self.zero()
        return Polynomial(self, {tuple(e): cv})

    def extend(self, names: Iterable[str], inverted: Iterable[str] = ()) -> PolynomialRing:
        """Ring with extra variables appended (names must be fresh)."""
        extra = tuple(names)
        for v in extra:
            if v in self.names:
                raise ValueError(f"variable {v!r} already present")
        return PolynomialRing(self.field, self.names + extra, self.inverted | frozenset(inverted))

    def drop(self, names: Iterable[str]) -> PolynomialRing:
        gone = set(names)
        kept = tuple(v for v in self.names if v not in gone)
        return PolynomialRing(self.field, kept, frozenset(v for v in self.inverted if v not in gone))

    def restrict_inverted(self) -> frozenset[str]:
        return self.inverted


def fresh_name(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    if base not in taken:
        return base
    i = 2
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


class Polynomial:
    """Immutable multivariate polynomial attached to a ring."""

    __slots__ = ("ring", "_terms", "_hash")

    def __init__(self, ring: PolynomialRing, terms: Mapping[tuple[int, ...], object]):
        self.ring = ring
        clean = {}
        zero = ring.field.zero
        for exp, c in terms.items():
            if c == zero:
                continue
            for e in exp:
                if e < 0:
                    raise ValueError(f"negative exponent in {exp}")
                if e > MAX_EXPONENT:
                    raise ExponentOverflow(f"exponent {e} exceeds {MAX_EXPONENT}")
            clean[tuple(exp)] = c
        self._terms = clean
        self._hash = None

    # -- canonical form ------------------------------------------------

    def terms(self) -> dict[tuple[int, ...], object]:
        return dict(self._terms)

    def items_sorted(self):
        """Terms in descending graded-reverse-lex order (canonical)."""
        return sorted(
            self._terms.items(),
            key=lambda kv: (sum(kv[0]), tuple(-e for e in reversed(kv[0]))),
            reverse=True,
        )

    def normalize(self) -> Polynomial:
        """Canonical form; a no-op since it is maintained by construction."""
        return self

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in exp) for exp in self._terms)

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        zero_exp = (0,) * self.ring.nvars
        return self._terms.get(zero_exp, self.ring.field.zero)

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(exp) for exp in self._terms)

    def degree_in(self, name: str) -> int:
        i = self.ring.index(name)
        if not self._terms:
            return -1
        return max(exp[i] for exp in self._terms)

    def variables(self) -> set[str]:
        used = set()
        for exp in self._terms:
            for i, e in enumerate(exp):
                if e:
                    used.add(self.ring.names[i])
        return used

    # -- arithmetic ----------------------------------------------------

    def _check(self, other: Polynomial):
        if self.ring != other.ring:
            raise RingMismatch(f"ring mismatch: {self.ring.names} vs {other.ring.names}")

    def __add__(self, other: Polynomial) -> Polynomial:
        self._check(other)
        f = self.ring.field
        out = dict(self._terms)
        for exp, c in other._terms.items():
            s = f.add(out.get(exp, f.zero), c)
            if s == f.zero:
                out.pop(exp, None)
            else:
                out[exp] = s
        return Polynomial(self.ring, out)

    def __neg__(self) -> Polynomial:
        f = self.ring.field
        return Polynomial(self.ring, {e: f.neg(c) for e, c in self._terms.items()})

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other: Polynomial) -> Polynomial:
        self._check(other)
        f = self.ring.field
        out: dict[tuple[int, ...], object] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                for x in e:
                    if x > MAX_EXPONENT:
                        raise ExponentOverflow(f"exponent {x} exceeds {MAX_EXPONENT}")
                s = f.add(out.get(e, f.zero), f.mul(c1, c2))
                if s == f.zero:
                    out.pop(e, None)
                else:
                    out[e] = s
        return Polynomial(self.ring, out)

    def __pow__(self, k: int) -> Polynomial:
        if k < 0:
            raise ValueError("negative power; use laurent_power for inverted names")
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base_needed = k >> 1
            if base_needed:
                base = base * base
            k = base_needed
        return result

    def scale(self, c) -> Polynomial:
        f = self.ring.field
        cv = f.from_int(c) if isinstance(c, int) else c
        if cv == f.zero:
            return self.ring.zero()
        return Polynomial(self.ring, {e: f.mul(v, cv) for e, v in self._terms.items()})

    def monic(self, order) -> Polynomial:
        """Divide by the leading coefficient under the given order."""
        if self.is_zero():
            return self
        lead = max(self._terms, key=order.key)
        return self.scale(self.ring.field.inv(self._terms[lead]))

    def leading_exponent(self, order) -> tuple[int, ...]:
        if self.is_zero():
            raise ValueError("zero polynomial has no leading term")
        return max(self._terms, key=order.key)

    # -- structure -----------------------------------------------------

    def map_ring(self, target: PolynomialRing, rename: Mapping[str, str] | None = None) -> Polynomial:
        """Reinterpret in ``target``, matching variables by (renamed) name.

        Every variable actually used must exist in the target; unused
        variables may be dropped.  Coefficients are converted through the
        target field only when the fields agree (no characteristic mixing).
        """
        if target.field != self.ring.field:
            raise RingMismatch("cannot move polynomials between different fields")
        rename = rename or {}
        pos = []
        for name in self.ring.names:
            new = rename.get(name, name)
            pos.append(target.names.index(new) if new in target.names else None)
        out: dict[tuple[int, ...], object] = {}
        f = target.field
        for exp, c in self._terms.items():
            e = [0] * target.nvars
            for i, k in enumerate(exp):
                if not k:
                    continue
                if pos[i] is None:
                    raise RingMismatch(
                        f"variable {self.ring.names[i]!r} is used but absent from target ring"
                    )
                e[pos[i]] = k
            key = tuple(e)
            s = f.add(out.get(key, f.zero), c)
            if s == f.zero:
                out.pop(key, None)
            else:
                out[key] = s
        return Polynomial(target, out)

    def substitute(self, images: Mapping[str, Polynomial], target: PolynomialRing) -> Polynomial:
        """Apply the ring map given by ``images``; names without an image
        must exist verbatim in the target ring."""
        f = target.field
        if f != self.ring.field:
            raise RingMismatch("cannot substitute across different fields")
        cache: dict[tuple[int, int], Polynomial] = {}

        def var_power(i: int, k: int) -> Polynomial:
            key = (i, k)
            if key not in cache:
                name = self.ring.names[i]
                base = images.get(name)
                if base is None:
                    base = target.var(name)
                cache[key] = base**k
            return cache[key]

        total = target.zero()
        for exp, c in self._terms.items():
            term = target.const(1).scale(c)
            for i, k in enumerate(exp):
                if k:
                    term = term * var_power(i, k)
            total = total + term
        return total

    # -- comparison ----------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.ring == other.ring
            and self._terms == other._terms
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring, tuple(sorted(self._terms.items()))))
        return self._hash

    def __str__(self) -> str:
        from .polyparse import format_polynomial

        return format_polynomial(self)

    def __repr__(self) -> str:
        return f"<poly {self}>"


def laurent_power(ring: PolynomialRing, name: str, k: int) -> Polynomial:
    """``name**k`` for any integer k, using the companion for k < 0."""
    if k >= 0:
        return ring.var(name) ** k
    if name not in ring.inverted:
        raise ValueError(f"{name!r} is not inverted; negative powers are not defined")
    return ring.var(companion_name(name)) ** (-k)


def laurent_encode(ring: PolynomialRing, terms: Mapping[tuple[tuple[str, int], ...], object]) -> Polynomial:
    """Build a polynomial from Laurent-style data.

    ``terms`` maps tuples of (name, integer exponent) to coefficients;
    negative exponents are routed through companion variables.
    """
    total = ring.zero()
    for powers, coeff in terms.items():
        cv = ring.field.from_int(coeff) if isinstance(coeff, int) else coeff
        term = ring.const(1).scale(cv)
        for name, k in powers:
            term = term * laurent_power(ring, name, k)
        total = total + term
    return total


def laurent_valuation(p: Polynomial, name: str) -> int | None:
    """Minimal (exponent of name) - (exponent of companion) over the terms.

    Well defined on polynomials reduced modulo the unit relation, where no
    term carries both the variable and its companion.  Returns None for 0.
    """
    if p.is_zero():
        return None
    i = p.ring.index(name)
    j = p.ring.index(companion_name(name)) if companion_name(name) in p.ring.names else None
    vals = []
    for exp in p.terms():
        v = exp[i] - (exp[j] if j is not None else 0)
        vals.append(v)
    return min(vals)
