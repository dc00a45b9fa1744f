"""Buchberger engine with product/chain criteria and step budgets.

The reduced Groebner basis of an ideal is unique for a fixed monomial
order, so the engine's output is deterministic and independent of the
S-pair schedule; two schedules ("normal" = minimal lcm first, "fifo" =
oldest first) are provided so that independence can be tested rather than
assumed.

Internally polynomials are plain ``{exponent_tuple: coefficient}`` dicts;
the public entry points speak :class:`~flatspan.poly.Polynomial`.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .budget import Budget, ensure_budget
from .orders import Block, GrevLex, MonomialOrder, exp_add, exp_coprime, exp_divides, exp_lcm, exp_sub
from .poly import Polynomial, PolynomialRing

Terms = dict


def _lead(d: Terms, order: MonomialOrder) -> tuple[int, ...]:
    return max(d, key=order.key)


def _mul_monomial(field, d: Terms, exp: tuple[int, ...], coeff) -> Terms:
    return {exp_add(e, exp): field.mul(c, coeff) for e, c in d.items()}


def _sub_inplace(field, a: Terms, b: Terms):
    for e, c in b.items():
        s = field.sub(a.get(e, field.zero), c)
        if s == field.zero:
            a.pop(e, None)
        else:
            a[e] = s


def _reduce_full(
    field, work: Terms, basis: Sequence[tuple[tuple[int, ...], Terms]], order: MonomialOrder, budget: Budget
) -> Terms:
    """Full (head and tail) reduction; deterministic.

    The largest monomial is reduced against the first basis element whose
    leading monomial divides it; irreducible terms migrate to the result.
    """
    work = dict(work)
    out: Terms = {}
    while work:
        lead = _lead(work, order)
        c = work[lead]
        for lm, g in basis:
            if exp_divides(lm, lead):
                budget.spend(1, "polynomial reduction")
                ratio = field.div(c, g[lm])
                shift = exp_sub(lead, lm)
                _sub_inplace(field, work, _mul_monomial(field, g, shift, ratio))
                break
        else:
            del work[lead]
            out[lead] = c
    return out


def _spoly(field, f: Terms, g: Terms, order: MonomialOrder) -> Terms:
    lf, lg = _lead(f, order), _lead(g, order)
    lcm = exp_lcm(lf, lg)
    a = _mul_monomial(field, f, exp_sub(lcm, lf), field.inv(f[lf]))
    b = _mul_monomial(field, g, exp_sub(lcm, lg), field.inv(g[lg]))
    _sub_inplace(field, a, b)
    return a


def _buchberger_dicts(
    field,
    gens: list[Terms],
    order: MonomialOrder,
    budget: Budget,
    strategy: str,
) -> list[Terms]:
    basis: list[Terms] = []
    lms: list[tuple[int, ...]] = []
    for g in gens:
        if not g:
            continue
        r = _reduce_full(field, g, list(zip(lms, basis)), order, budget)
        if r:
            basis.append(r)
            lms.append(_lead(r, order))

    pairs: list[tuple[int, int]] = [(i, j) for j in range(len(basis)) for i in range(j)]
    done: set[frozenset[int]] = set()

    def pair_key(p: tuple[int, int]):
        i, j = p
        return (order.key(exp_lcm(lms[i], lms[j])), j, i)

    while pairs:
        if strategy == "normal":
            pick = min(range(len(pairs)), key=lambda k: pair_key(pairs[k]))
        elif strategy == "fifo":
            pick = 0
        else:
            raise ValueError(f"unknown S-pair strategy {strategy!r}")
        i, j = pairs.pop(pick)
        done.add(frozenset((i, j)))
        lcm = exp_lcm(lms[i], lms[j])
        if exp_coprime(lms[i], lms[j]):
            continue  # product criterion
        skip = False
        for k in range(len(basis)):
            if k in (i, j):
                continue
            if (
                exp_divides(lms[k], lcm)
                and frozenset((i, k)) in done
                and frozenset((j, k)) in done
            ):
                skip = True  # chain criterion
                break
        if skip:
            continue
        budget.spend(1, "S-pair formation")
        s = _spoly(field, basis[i], basis[j], order)
        r = _reduce_full(field, s, list(zip(lms, basis)), order, budget)
        if r:
            t = len(basis)
            basis.append(r)
            lms.append(_lead(r, order))
            pairs.extend((a, t) for a in range(t))
    return _reduce_basis(field, basis, order, budget)


def _reduce_basis(field, basis: list[Terms], order: MonomialOrder, budget: Budget) -> list[Terms]:
    """Minimal, fully tail-reduced, monic, canonically sorted basis."""
    lms = [_lead(g, order) for g in basis]
    alive = []
    for i in range(len(basis)):
        lm = lms[i]
        redundant = False
        for j in range(len(basis)):
            if i == j:
                continue
            if exp_divides(lms[j], lm) and (lms[j] != lm or j < i):
                redundant = True
                break
        if not redundant:
            alive.append(i)
    reduced: list[Terms] = []
    for i in alive:
        others = [(lms[j], basis[j]) for j in alive if j != i]
        r = _reduce_full(field, basis[i], others, order, budget)
        if r:
            lc = r[_lead(r, order)]
            inv = field.inv(lc)
            reduced.append({e: field.mul(c, inv) for e, c in r.items()})
    reduced.sort(key=lambda g: order.key(_lead(g, order)))
    return reduced


# -- public API --------------------------------------------------------


def default_order(ring: PolynomialRing) -> MonomialOrder:
    return GrevLex(ring.nvars)


def groebner_basis(
    gens: Iterable[Polynomial],
    order: MonomialOrder | None = None,
    budget: Budget | None = None,
    strategy: str = "normal",
) -> list[Polynomial]:
    """Reduced Groebner basis; ``[]`` for the zero ideal, ``[1]`` for the
    unit ideal."""
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        return []
    ring = gens[0].ring
    for g in gens:
        if g.ring != ring:
            raise ValueError("generators live in different rings")
    order = order or default_order(ring)
    if order.nvars != ring.nvars:
        raise ValueError("order arity does not match ring")
    budget = ensure_budget(budget, "groebner basis")
    out = _buchberger_dicts(ring.field, [g.terms() for g in gens], order, budget, strategy)
    return [Polynomial(ring, d) for d in out]


def normal_form(
    p: Polynomial,
    basis: Sequence[Polynomial],
    order: MonomialOrder | None = None,
    budget: Budget | None = None,
) -> Polynomial:
    """Remainder of full division by ``basis`` (unique when basis is a
    Groebner basis for the order)."""
    ring = p.ring
    order = order or default_order(ring)
    budget = ensure_budget(budget, "normal form")
    pairs = []
    for g in basis:
        if g.is_zero():
            continue
        if g.ring != ring:
            raise ValueError("basis element in a different ring")
        d = g.terms()
        pairs.append((_lead(d, order), d))
    return Polynomial(ring, _reduce_full(ring.field, p.terms(), pairs, order, budget))


def spolynomial_pairs_reduce(
    basis: Sequence[Polynomial],
    order: MonomialOrder | None = None,
    budget: Budget | None = None,
) -> bool:
    """Buchberger criterion: does every S-polynomial of ``basis`` reduce to
    zero against it?  Used to recheck a stored basis without rerunning the
    completion."""
    polys = [g for g in basis if not g.is_zero()]
    if not polys:
        return True
    ring = polys[0].ring
    order = order or default_order(ring)
    budget = ensure_budget(budget, "basis recheck")
    dicts = [g.terms() for g in polys]
    lms = [_lead(d, order) for d in dicts]
    table = list(zip(lms, dicts))
    for j in range(len(dicts)):
        for i in range(j):
            if exp_coprime(lms[i], lms[j]):
                continue
            s = _spoly(ring.field, dicts[i], dicts[j], order)
            if _reduce_full(ring.field, s, table, order, budget):
                return False
    return True


def is_unit_ideal(basis: Sequence[Polynomial]) -> bool:
    """Whether a reduced Groebner basis presents the unit ideal."""
    return len(basis) == 1 and basis[0].is_constant() and not basis[0].is_zero()


def in_ideal(
    p: Polynomial,
    basis: Sequence[Polynomial],
    order: MonomialOrder | None = None,
    budget: Budget | None = None,
) -> bool:
    return normal_form(p, basis, order, budget).is_zero()


def _permuted_ring(ring: PolynomialRing, first: Sequence[str]) -> PolynomialRing:
    rest = [v for v in ring.names if v not in set(first)]
    return PolynomialRing(ring.field, tuple(first) + tuple(rest), ring.inverted)


def eliminate(
    gens: Iterable[Polynomial],
    drop: Sequence[str],
    budget: Budget | None = None,
) -> list[Polynomial]:
    """Generators of (ideal) ∩ k[remaining variables].

    Returned polynomials live in the original ring but do not involve the
    dropped variables.  Uses a block order with the dropped block leading.
    """
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        return []
    ring = gens[0].ring
    drop = list(drop)
    for v in drop:
        ring.index(v)  # validate
    if not drop:
        return groebner_basis(gens, budget=budget)
    work = _permuted_ring(ring, drop)
    moved = [g.map_ring(work) for g in gens]
    basis = groebner_basis(moved, Block(work.nvars, len(drop)), budget=budget)
    dropset = set(drop)
    kept = [g for g in basis if not (g.variables() & dropset)]
    return [g.map_ring(ring) for g in kept]


def saturate(
    gens: Iterable[Polynomial],
    g: Polynomial,
    budget: Budget | None = None,
) -> list[Polynomial]:
    """Generators of the saturation (I : g^infinity).

    Realized by adjoining a fresh inverse for ``g`` and eliminating it.
    """
    gens = list(gens)
    if not gens:
        ring = g.ring
        return []
    ring = gens[0].ring
    if g.ring != ring:
        raise ValueError("saturating element lives in a different ring")
    from .poly import fresh_name

    aux = fresh_name("sat", ring.names)
    ext = PolynomialRing(ring.field, (aux,) + ring.names, ring.inverted)
    lifted = [p.map_ring(ext) for p in gens]
    lifted.append(ext.var(aux) * g.map_ring(ext) - ext.one())
    basis = groebner_basis(lifted, Block(ext.nvars, 1), budget=budget)
    kept = [p for p in basis if aux not in p.variables()]
    return [p.map_ring(ring) for p in kept]


def modular_inverse(
    value: Polynomial,
    relations: Iterable[Polynomial],
    budget: Budget | None = None,
) -> Polynomial | None:
    """Explicit inverse of ``value`` modulo an ideal, or ``None`` when the
    residue class is not a unit.

    A fresh reciprocal variable is adjoined with its defining relation and
    placed in the leading block; when the class is invertible the reduced
    basis rewrites the reciprocal as a polynomial in the original
    variables, which is returned (in the original ring).
    """
    ring = value.ring
    from .poly import fresh_name

    aux = fresh_name("rec", ring.names)
    ext = PolynomialRing(ring.field, (aux,) + ring.names, ring.inverted)
    lifted = [p.map_ring(ext) for p in relations if not p.is_zero()]
    lifted.append(value.map_ring(ext) * ext.var(aux) - ext.one())
    order = Block(ext.nvars, 1)
    basis = groebner_basis(lifted, order, budget=budget)
    target = tuple([1] + [0] * ring.nvars)
    for g in basis:
        if g.leading_exponent(order) == target:
            expr = ext.var(aux) - g  # monic leading term, so this is the rewrite
            if aux in expr.variables():
                return None
            return expr.map_ring(ring)
    return None


def ideal_intersection(
    left: Iterable[Polynomial],
    right: Iterable[Polynomial],
    budget: Budget | None = None,
) -> list[Polynomial]:
    """Generators of (left) ∩ (right) via the tag-variable construction."""
    left = [g for g in left if not g.is_zero()]
    right = [g for g in right if not g.is_zero()]
    if not left or not right:
        return []
    ring = left[0].ring
    from .poly import fresh_name

    tag = fresh_name("mix", ring.names)
    ext = PolynomialRing(ring.field, (tag,) + ring.names, ring.inverted)
    t = ext.var(tag)
    one = ext.one()
    gens = [t * g.map_ring(ext) for g in left]
    gens += [(one - t) * g.map_ring(ext) for g in right]
    basis = groebner_basis(gens, Block(ext.nvars, 1), budget=budget)
    kept = [p for p in basis if tag not in p.variables()]
    return [p.map_ring(ring) for p in kept]


def ideals_equal(
    left: Iterable[Polynomial],
    right: Iterable[Polynomial],
    budget: Budget | None = None,
) -> bool:
    lb = groebner_basis(list(left), budget=budget)
    rb = groebner_basis(list(right), budget=budget)
    return lb == rb
