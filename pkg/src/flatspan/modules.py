"""Presenting a quotient algebra as a module over a base ring.

The combined ring carries the fiber variables first and the base variables
after them; its ideal contains the fiber relations, the base relations and
the identifications of base variables with their structure-map images.  A
Groebner basis under the block (fiber > base) order then classifies the
module:

* unit ideal                      -> the zero module (empty scheme);
* a base-only basis element that is nonzero modulo the base relations
                                  -> annihilator torsion, hence not flat
                                     over an integral base;
* a fiber direction without a pure-power leading monomial
                                  -> not module-finite (any integral
                                     dependence would produce one);
* no mixed leading monomials      -> free with the staircase monomials as
                                     basis;
* otherwise                       -> inconclusive (a leading coefficient
                                     in the fiber variables involves base
                                     variables, and we refuse to guess).

The torsion test is only sound over an integral base; every base ring
constructed by this package (points, affine lines, tori and their
products) is a localization of a polynomial ring and therefore integral.
"""

from __future__ import annotations

from dataclasses import dataclass

from .budget import Budget, ensure_budget
from .groebner import groebner_basis, is_unit_ideal, normal_form
from .orders import Block, GrevLex, MonomialOrder, exp_divides
from .poly import Polynomial, PolynomialRing


class PresentationError(Exception):
    pass


class NotFiniteOverBase(PresentationError):
    def __init__(self, direction: str):
        super().__init__(f"no pure power of {direction!r} in the leading-term ideal; not module-finite")
        self.direction = direction


class NotLocallyFreeOverBase(PresentationError):
    def __init__(self, witness: list[Polynomial]):
        text = ", ".join(str(w) for w in witness)
        super().__init__(f"base annihilator detected; torsion witness ideal ({text})")
        self.witness = witness


class InconclusivePresentation(PresentationError):
    pass


@dataclass(frozen=True)
class ModulePresentation:
    """Generators and a relation matrix over the base ring.

    ``relations`` rows are vectors of length ``len(generators)``; the
    module is the cokernel of the matrix acting on the free module.
    """

    base_ring: PolynomialRing
    generators: tuple[str, ...]
    relations: tuple[tuple[Polynomial, ...], ...]


@dataclass(frozen=True)
class ModuleAnalysis:
    """Outcome of the staircase classification.

    ``status`` is one of ``free``, ``zero``, ``torsion``, ``not_finite``,
    ``inconclusive``.  For ``free`` the staircase exponents (over the
    fiber block), multiplication matrices and base data are filled in.
    """

    status: str
    ring: PolynomialRing
    split: int
    groebner: tuple[Polynomial, ...]
    base_ring: PolynomialRing
    base_groebner: tuple[Polynomial, ...]
    staircase: tuple[tuple[int, ...], ...] = ()
    mult: dict | None = None
    torsion_witness: tuple[Polynomial, ...] = ()
    not_finite_direction: str | None = None
    detail: str = ""

    @property
    def rank(self) -> int:
        if self.status == "free":
            return len(self.staircase)
        if self.status == "zero":
            return 0
        raise PresentationError(f"rank undefined for status {self.status!r}")


def _fiber_part(exp: tuple[int, ...], split: int) -> tuple[int, ...]:
    return exp[:split]


def _base_part(exp: tuple[int, ...], split: int) -> tuple[int, ...]:
    return exp[split:]


def _staircase(pure: list[tuple[int, ...]], split: int) -> list[tuple[int, ...]] | str:
    """Monomials not under any pure-fiber leading monomial, or the name of
    an unbounded direction."""
    if split == 0:
        return [()]
    mins = [None] * split
    for alpha in pure:
        support = [i for i, e in enumerate(alpha) if e]
        if len(support) == 1:
            i = support[0]
            if mins[i] is None or alpha[i] < mins[i]:
                mins[i] = alpha[i]
        elif not support:
            return []  # unit ideal handled earlier; defensive
    for i, m in enumerate(mins):
        if m is None:
            return i  # type: ignore[return-value]
    out = []

    def walk(prefix: tuple[int, ...]):
        i = len(prefix)
        if i == split:
            if not any(exp_divides(a, prefix) for a in pure):
                out.append(prefix)
            return
        for e in range(mins[i]):
            walk(prefix + (e,))

    walk(())
    key = GrevLex(split)
    out.sort(key=key.key)
    return out


def analyze_module(
    ring: PolynomialRing,
    split: int,
    relations: list[Polynomial],
    base_ring: PolynomialRing,
    base_relations: list[Polynomial],
    budget: Budget | None = None,
) -> ModuleAnalysis:
    """Classify ``ring/relations`` as a module over ``base_ring``.

    ``ring`` lists the fiber variables first (``split`` of them) followed
    by the base variables, which must coincide with ``base_ring.names`` in
    order.  ``relations`` must already contain the base relations and the
    structure identifications.
    """
    if ring.names[split:] != base_ring.names:
        raise ValueError("combined ring does not extend the base ring by fiber variables")
    budget = ensure_budget(budget, "module analysis")
    order = Block(ring.nvars, split) if split else GrevLex(ring.nvars)
    basis = groebner_basis(relations, order, budget=budget)
    base_basis = groebner_basis(base_relations, budget=budget)

    common = dict(
        ring=ring,
        split=split,
        groebner=tuple(basis),
        base_ring=base_ring,
        base_groebner=tuple(base_basis),
    )

    if is_unit_ideal(basis):
        return ModuleAnalysis(status="zero", **common)
    if not basis:
        basis = []

    fiber_names = ring.names[:split]
    pure, base_only, mixed = [], [], []
    for g in basis:
        lm = g.leading_exponent(order)
        fp, bp = _fiber_part(lm, split), _base_part(lm, split)
        if any(fp) and not any(bp):
            pure.append(g)
        elif any(bp) and not any(fp):
            base_only.append(g)
        elif any(fp):
            mixed.append(g)

    # torsion: a base-only element not already implied by the base relations
    torsion = []
    for g in base_only:
        in_base = g.map_ring(base_ring)
        if not normal_form(in_base, base_basis, budget=budget).is_zero():
            torsion.append(in_base)
    if torsion:
        return ModuleAnalysis(status="torsion", torsion_witness=tuple(torsion), **common)

    stair = _staircase([_fiber_part(g.leading_exponent(order), split) for g in pure], split)
    if isinstance(stair, int):
        return ModuleAnalysis(
            status="not_finite", not_finite_direction=fiber_names[stair], **common
        )

    if mixed:
        return ModuleAnalysis(
            status="inconclusive",
            detail="a fiber leading coefficient involves base variables",
            **common,
        )

    mult = {
        v: multiplication_matrix_from(ring, split, basis, order, base_ring, ring.var(v), stair, budget)
        for v in fiber_names
    }
    return ModuleAnalysis(status="free", staircase=tuple(stair), mult=mult, **common)


def multiplication_matrix_from(
    ring: PolynomialRing,
    split: int,
    basis: list[Polynomial],
    order: MonomialOrder,
    base_ring: PolynomialRing,
    element: Polynomial,
    staircase: list[tuple[int, ...]],
    budget: Budget | None = None,
) -> tuple[tuple[Polynomial, ...], ...]:
    """Matrix of multiplication by ``element`` on the staircase basis;
    entry [i][j] is the coefficient of basis j in element * basis i."""
    budget = ensure_budget(budget, "multiplication matrix")
    index = {exp: j for j, exp in enumerate(staircase)}
    rows = []
    for gamma in staircase:
        mono = Polynomial(ring, {tuple(gamma) + (0,) * (ring.nvars - split): ring.field.one})
        nf = normal_form(element * mono, basis, order, budget=budget)
        row = [dict() for _ in staircase]
        for exp, c in nf.terms().items():
            fp = _fiber_part(exp, split)
            j = index.get(fp)
            if j is None:
                raise PresentationError(
                    f"irreducible fiber monomial {fp} outside the staircase; basis is inconsistent"
                )
            row[j][_base_part(exp, split)] = c
        rows.append(tuple(Polynomial(base_ring, d) for d in row))
    return tuple(rows)


def multiplication_matrix(analysis: ModuleAnalysis, element: Polynomial, budget: Budget | None = None):
    """Matrix of multiplication by an element of the combined ring, over
    the staircase basis of a free analysis."""
    if analysis.status != "free":
        raise PresentationError("multiplication matrices require a free presentation")
    order = Block(analysis.ring.nvars, analysis.split) if analysis.split else GrevLex(analysis.ring.nvars)
    return multiplication_matrix_from(
        analysis.ring,
        analysis.split,
        list(analysis.groebner),
        order,
        analysis.base_ring,
        element,
        list(analysis.staircase),
        budget,
    )


def staircase_labels(analysis: ModuleAnalysis) -> tuple[str, ...]:
    """Readable monomial labels for the staircase basis."""
    names = analysis.ring.names[: analysis.split]
    out = []
    for exp in analysis.staircase:
        mono = "*".join(
            f"{n}^{k}" if k > 1 else n for n, k in zip(names, exp) if k
        )
        out.append(mono or "1")
    return tuple(out)


def module_presentation(analysis: ModuleAnalysis) -> ModulePresentation:
    """Presentation over the base, available for free/zero modules and for
    cyclic torsion quotients (no fiber variables)."""
    if analysis.status in ("free", "zero"):
        return ModulePresentation(
            base_ring=analysis.base_ring,
            generators=staircase_labels(analysis) if analysis.status == "free" else (),
            relations=(),
        )
    if analysis.status == "torsion" and analysis.split == 0:
        return ModulePresentation(
            base_ring=analysis.base_ring,
            generators=("1",),
            relations=tuple((w,) for w in analysis.torsion_witness),
        )
    if analysis.status == "torsion":
        raise NotLocallyFreeOverBase(list(analysis.torsion_witness))
    if analysis.status == "not_finite":
        raise NotFiniteOverBase(analysis.not_finite_direction or "?")
    raise InconclusivePresentation(analysis.detail or "presentation is inconclusive")


def _minors(rows: list[list[Polynomial]], k: int, ring: PolynomialRing, budget: Budget):
    """All k x k minors by Laplace expansion along the first row."""
    m = len(rows)
    n = len(rows[0]) if rows else 0
    out = []

    from itertools import combinations

    def det(r_idx: tuple[int, ...], c_idx: tuple[int, ...]) -> Polynomial:
        budget.spend(1, "minor expansion")
        if len(r_idx) == 1:
            return rows[r_idx[0]][c_idx[0]]
        total = ring.zero()
        r0 = r_idx[0]
        rest = r_idx[1:]
        for pos, c in enumerate(c_idx):
            entry = rows[r0][c]
            if entry.is_zero():
                continue
            sub = det(rest, c_idx[:pos] + c_idx[pos + 1 :])
            term = entry * sub
            total = total + (term if pos % 2 == 0 else -term)
        return total

    for r_idx in combinations(range(m), k):
        for c_idx in combinations(range(n), k):
            d = det(r_idx, c_idx)
            if not d.is_zero():
                out.append(d)
    return out


def fitting_ideal(pres: ModulePresentation, r: int, budget: Budget | None = None) -> list[Polynomial]:
    """Reduced Groebner basis of the r-th Fitting ideal (minors of size
    g - r, where g is the number of generators)."""
    budget = ensure_budget(budget, "fitting ideal")
    g = len(pres.generators)
    k = g - r
    ring = pres.base_ring
    if k <= 0:
        return [ring.one()]
    rows = [list(row) for row in pres.relations]
    if k > len(rows) or k > g:
        return []
    gens = _minors(rows, k, ring, budget)
    return groebner_basis(gens, budget=budget)


def locally_free_of_rank(pres: ModulePresentation, r: int, budget: Budget | None = None) -> bool:
    """Fitting criterion: locally free of constant rank r iff
    Fitt_{r-1} = 0 and Fitt_r = (1)."""
    budget = ensure_budget(budget, "fitting criterion")
    below = fitting_ideal(pres, r - 1, budget)
    at = fitting_ideal(pres, r, budget)
    return below == [] and is_unit_ideal(at)
