"""Torus cut loci, blended one-parameter families, and flatness bounds.

The operations here turn a finite-flat correspondence between
torus-augmented schemes into a family over an affine parameter line,
slice that family at torus cut loci, and certify (or refute) flatness of
the resulting middles.  The headline entry points are
:func:`cancel_family`, :func:`filtration_index`, :func:`verify_compat`
and :func:`verify_cancellation`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .budget import Budget, ensure_budget
from .fields import QQ, field_name
from .groebner import (
    eliminate,
    groebner_basis,
    ideal_intersection,
    ideals_equal,
    is_unit_ideal,
    normal_form,
    saturate,
)
from .modules import multiplication_matrix_from
from .orders import Block, GrevLex
from .poly import (
    Polynomial,
    PolynomialRing,
    companion_name,
    fresh_name,
    laurent_valuation,
)
from .schemes import (
    AffineScheme,
    affine_line,
    detect_torus_coordinate,
    point,
    product,
    strip_coordinates,
    torus,
)
from .spans import (
    CertifyOutcome,
    Correspondence,
    SpanError,
    SpanPiece,
    _fresh_pair,
    _pieces_equal,
    add,
    certify_finite_flat,
    collapse_variables,
    compose,
    degree,
    equals,
    identity_span,
    lift_into_certificate,
    make_piece,
)


class CancellationError(Exception):
    """A family/bound operation received an input it cannot handle."""


# ---------------------------------------------------------------------------
# cut and blend polynomials


def cut_value(n: int, sign: str, main: Polynomial, aux: Polynomial | None = None) -> Polynomial:
    """``main**n + 1`` for sign ``+`` and ``main**n + aux`` for sign ``-``.

    ``main`` and ``aux`` are typically the structure-map images of the
    source and target torus coordinates; the minus cut needs both.
    """
    if n < 1:
        raise ValueError("cut exponent must be at least 1")
    if sign == "+":
        return main**n + main.ring.one()
    if sign == "-":
        if aux is None:
            raise ValueError("the minus cut needs the target coordinate")
        return main**n + aux
    raise ValueError(f"sign must be '+' or '-', not {sign!r}")


def blend_value(
    m: int,
    n: int,
    sign: str,
    blend: Polynomial,
    main: Polynomial,
    aux: Polynomial | None = None,
) -> Polynomial:
    """``blend * cut(n) + (1 - blend) * cut(m)``, interpolating two cuts."""
    one = blend.ring.one()
    return blend * cut_value(n, sign, main, aux) + (one - blend) * cut_value(
        m, sign, main, aux
    )


def blend_factored(
    m: int,
    n: int,
    sign: str,
    blend: Polynomial,
    main: Polynomial,
    aux: Polynomial | None = None,
) -> Polynomial:
    """The blend rewritten as ``main**k * (unit-interpolant) + tail``.

    With ``k = min(m, n)`` the interpolant multiplies the lower cut
    exponent, which exhibits the blend in the shape ``tail - main**k * f``
    used by the valuation bound.  Agrees with :func:`blend_value`.
    """
    one = blend.ring.one()
    if m >= n:
        k = n
        inner = blend + (one - blend) * main ** (m - n)
    else:
        k = m
        inner = (one - blend) + blend * main ** (n - m)
    tail = one if sign == "+" else aux
    if tail is None:
        raise ValueError("the minus cut needs the target coordinate")
    return main**k * inner + tail


def cut_polynomial(
    ring: PolynomialRing, n: int, sign: str, main: str = "t", aux: str | None = None
) -> Polynomial:
    """Ring-level convenience wrapper around :func:`cut_value`."""
    return cut_value(n, sign, ring.var(main), ring.var(aux) if aux else None)


def blend_polynomial(
    ring: PolynomialRing,
    m: int,
    n: int,
    sign: str,
    blend: str = "s",
    main: str = "t",
    aux: str | None = None,
) -> Polynomial:
    """Ring-level convenience wrapper around :func:`blend_value`."""
    return blend_value(
        m, n, sign, ring.var(blend), ring.var(main), ring.var(aux) if aux else None
    )


# ---------------------------------------------------------------------------
# valuation bounds


@dataclass(frozen=True)
class BoundEntry:
    """One nonzero matrix entry together with its torus valuation."""

    label: str
    row: int
    col: int
    valuation: int
    value: Polynomial


@dataclass(frozen=True)
class BoundReport:
    """Effective exponent bound extracted from multiplication matrices.

    ``n_bound`` is the least nonnegative ``N`` such that every slice
    exponent ``n > N`` clears all entry valuations; :meth:`admits` is the
    per-entry criterion itself.
    """

    n_bound: int
    torus_var: str
    matrices: tuple[tuple[str, tuple[tuple[Polynomial, ...], ...]], ...]
    entries: tuple[BoundEntry, ...]

    @property
    def min_valuation(self) -> int | None:
        return min((e.valuation for e in self.entries), default=None)

    def admits(self, n: int) -> bool:
        """Whether the valuation criterion certifies the n-th slice."""
        return all(n + e.valuation >= 1 for e in self.entries)


def _single_piece(alpha: Correspondence, context: str) -> SpanPiece:
    if len(alpha.pieces) != 1:
        raise CancellationError(f"{context} needs a single-piece middle")
    return alpha.pieces[0]


def _certified(alpha: Correspondence, budget: Budget, context: str) -> CertifyOutcome:
    outcome = certify_finite_flat(alpha, budget=budget)
    if not outcome.certified:
        raise CancellationError(
            f"{context} needs the middle certified finite free over the source; "
            f"certification says {outcome.status}: {outcome.detail}"
        )
    return outcome


def _bound_from_values(
    alpha: Correspondence,
    labelled: list[tuple[str, Polynomial]],
    torus_var: str | None,
    budget: Budget,
) -> BoundReport:
    piece = _single_piece(alpha, "valuation bound")
    tvar = torus_var or detect_torus_coordinate(alpha.source)
    outcome = _certified(alpha, budget, "valuation bound")
    cert = outcome.pieces[0]
    combined = cert.ring
    order = Block(combined.nvars, cert.split) if cert.split else GrevLex(combined.nvars)
    matrices = []
    entries = []
    for label, value in labelled:
        lifted = lift_into_certificate(piece, cert, value)
        matrix = multiplication_matrix_from(
            combined,
            cert.split,
            list(cert.groebner),
            order,
            alpha.source.ring,
            lifted,
            list(cert.staircase),
            budget,
        )
        matrices.append((label, tuple(tuple(row) for row in matrix)))
        for i, row in enumerate(matrix):
            for j, entry in enumerate(row):
                v = laurent_valuation(entry, tvar)
                if v is not None:
                    entries.append(BoundEntry(label, i, j, v, entry))
    vals = [e.valuation for e in entries]
    n_bound = max(0, -min(vals)) if vals else 0
    return BoundReport(n_bound, tvar, tuple(matrices), tuple(entries))


def flatness_bound(
    alpha: Correspondence,
    f: Polynomial,
    *,
    torus_var: str | None = None,
    budget: Budget | None = None,
) -> BoundReport:
    """Exponent bound for the slices ``Z(1 - t**n * f)`` of the middle.

    ``alpha`` must certify finite free over its source, which carries the
    inverted coordinate ``torus_var``; ``f`` lives on the middle.  The
    matrix of ``f`` over the certified basis has entries in the source
    ring, and the bound is driven by their worst torus valuation.
    """
    budget = ensure_budget(budget, "flatness bound")
    return _bound_from_values(alpha, [("f", f)], torus_var, budget)


def flatness_bound_ext(
    alpha: Correspondence,
    f1: Polynomial,
    f2: Polynomial,
    *,
    torus_var: str | None = None,
    budget: Budget | None = None,
) -> BoundReport:
    """One bound valid for every combination ``f1 * t**a + f2 * t**b``.

    Shifting by nonnegative powers of the (base) torus coordinate scales
    each matrix by a scalar power of ``t`` and can only raise entry
    valuations, so the minimum over the two unshifted matrices bounds all
    shifted combinations at once.
    """
    budget = ensure_budget(budget, "uniform flatness bound")
    return _bound_from_values(alpha, [("f1", f1), ("f2", f2)], torus_var, budget)


# ---------------------------------------------------------------------------
# slices of the middle


@dataclass(frozen=True)
class SliceReport:
    """Slice of the middle along ``1 - t**n * f``, seen over the source
    with the torus factor forgotten.

    ``verdict`` is one of ``certified-flf`` (finite free, certificate
    attached), ``flat-by-certificate`` (not finite, but the valuation
    bound applies), ``not-flat`` (torsion witness attached) and
    ``inconclusive``.
    """

    verdict: str
    correspondence: Correspondence
    rank: int | None
    certificate: CertifyOutcome
    witness: tuple[Polynomial, ...] = ()
    bound: BoundReport | None = None


def slice_locus(
    alpha: Correspondence,
    f: Polynomial,
    n: int,
    *,
    torus_var: str | None = None,
    budget: Budget | None = None,
) -> SliceReport:
    """Cut the middle along ``1 - t**n * f`` and classify it over the base.

    The verdict never silently upgrades: flatness is reported only with a
    finite-free certificate or with an explicit valuation bound admitting
    the exponent.
    """
    budget = ensure_budget(budget, "slice")
    piece = _single_piece(alpha, "slicing")
    tvar = torus_var or detect_torus_coordinate(alpha.source)
    t_img = piece.src(tvar)
    relation = piece.ring.one() - t_img**n * f
    sliced_source = strip_coordinates(alpha.source, [tvar])
    src_images = {v: piece.src(v) for v in sliced_source.ring.names}
    tgt_images = {v: piece.tgt(v) for v in alpha.target.ring.names}
    new_piece = make_piece(
        piece.ring,
        list(piece.relations) + [relation],
        src_images,
        tgt_images,
        sliced_source,
        alpha.target,
    )
    corr = Correspondence(sliced_source, alpha.target, (new_piece,))
    outcome = certify_finite_flat(corr, budget=budget)
    if outcome.certified:
        return SliceReport("certified-flf", corr, outcome.rank, outcome)
    if outcome.status == "not_locally_free":
        return SliceReport("not-flat", corr, None, outcome, witness=outcome.witness)
    bound = flatness_bound(alpha, f, torus_var=tvar, budget=budget)
    if bound.admits(n):
        return SliceReport("flat-by-certificate", corr, None, outcome, bound=bound)
    return SliceReport("inconclusive", corr, None, outcome, bound=bound)


def shifted_slice(
    alpha: Correspondence,
    f1: Polynomial,
    f2: Polynomial,
    a: int,
    b: int,
    n: int,
    *,
    torus_var: str | None = None,
    budget: Budget | None = None,
) -> SliceReport:
    """Slice along ``1 - t**n * (f1 * t**a + f2 * t**b)``."""
    if a < 0 or b < 0:
        raise ValueError("shift exponents must be nonnegative")
    piece = _single_piece(alpha, "slicing")
    tvar = torus_var or detect_torus_coordinate(alpha.source)
    t_img = piece.src(tvar)
    return slice_locus(
        alpha,
        f1 * t_img**a + f2 * t_img**b,
        n,
        torus_var=tvar,
        budget=budget,
    )


# ---------------------------------------------------------------------------
# blended families


@dataclass(frozen=True)
class FamilyReport:
    """A blended family together with its certification attempt.

    The certification outcome is always carried along, even when it is
    inconclusive or negative.
    """

    correspondence: Correspondence
    certificate: CertifyOutcome
    parameter: str
    indices: tuple[int, int]
    sign: str

    @property
    def certified(self) -> bool:
        return self.certificate.certified

    @property
    def rank(self) -> int | None:
        return self.certificate.rank


def _torus_feet(alpha: Correspondence) -> tuple[str, str]:
    return (
        detect_torus_coordinate(alpha.source),
        detect_torus_coordinate(alpha.target),
    )


def cancel_family(
    alpha: Correspondence,
    m: int,
    n: int,
    sign: str,
    *,
    parameter: str = "s",
    budget: Budget | None = None,
) -> FamilyReport:
    """Blend the m-th and n-th cut loci of the middle into one family.

    ``alpha`` must run between torus-augmented schemes.  The middle gains
    the relation ``blend(m, n)`` in a fresh parameter; the source trades
    its torus factor for the parameter line, and the target forgets its
    torus factor.  Specializing the parameter to 1 recovers the n-th cut,
    0 the m-th (see :func:`restrict_parameter`).
    """
    budget = ensure_budget(budget, "blended family")
    src_t, tgt_t = _torus_feet(alpha)
    field = alpha.source.ring.field
    stripped = strip_coordinates(alpha.source, [src_t])
    s_name = fresh_name(parameter, stripped.ring.names)
    source = product(stripped, affine_line(field, s_name))
    target = strip_coordinates(alpha.target, [tgt_t])
    pieces = []
    for piece in alpha.pieces:
        pvar = fresh_name(parameter, piece.ring.names)
        ring = piece.ring.extend([pvar])
        relations = [r.map_ring(ring) for r in piece.relations]
        relations.append(
            blend_value(
                m,
                n,
                sign,
                ring.var(pvar),
                piece.src(src_t).map_ring(ring),
                piece.tgt(tgt_t).map_ring(ring),
            )
        )
        src = {v: piece.src(v).map_ring(ring) for v in stripped.ring.names}
        src[s_name] = ring.var(pvar)
        tgt = {v: piece.tgt(v).map_ring(ring) for v in target.ring.names}
        pieces.append(make_piece(ring, relations, src, tgt, source, target))
    corr = Correspondence(source, target, tuple(pieces))
    outcome = certify_finite_flat(corr, budget=budget)
    return FamilyReport(corr, outcome, s_name, (m, n), sign)


def cancel_slice(
    alpha: Correspondence, n: int, sign: str, *, budget: Budget | None = None
) -> Correspondence:
    """Cut the middle along the n-th torus cut locus, dropping both torus
    feet."""
    ensure_budget(budget, "cut slice")
    src_t, tgt_t = _torus_feet(alpha)
    source = strip_coordinates(alpha.source, [src_t])
    target = strip_coordinates(alpha.target, [tgt_t])
    pieces = []
    for piece in alpha.pieces:
        relations = list(piece.relations)
        relations.append(cut_value(n, sign, piece.src(src_t), piece.tgt(tgt_t)))
        src = {v: piece.src(v) for v in source.ring.names}
        tgt = {v: piece.tgt(v) for v in target.ring.names}
        pieces.append(make_piece(piece.ring, relations, src, tgt, source, target))
    return Correspondence(source, target, tuple(pieces))


def restrict_parameter(
    corr: Correspondence, name: str, value, *, budget: Budget | None = None
) -> Correspondence:
    """Specialize a free source coordinate to a constant and drop it.

    The coordinate must map to a bare variable of each middle, as the
    families built here arrange.
    """
    source = corr.source
    if name not in source.ring.names:
        raise CancellationError(f"{name!r} is not a source coordinate")
    field = source.ring.field
    c = field.from_int(value) if isinstance(value, int) else value
    new_source = strip_coordinates(source, [name])
    pieces = []
    for piece in corr.pieces:
        image = piece.src(name)
        pvar = None
        for v in piece.ring.names:
            if image == piece.ring.var(v):
                pvar = v
                break
        if pvar is None:
            raise CancellationError(
                f"source coordinate {name!r} does not map to a bare middle variable"
            )
        small = piece.ring.drop([pvar])
        images = {pvar: small.const(c)}

        def down(p: Polynomial) -> Polynomial:
            return p.substitute(images, small)

        relations = [down(r) for r in piece.relations]
        src = {v: down(piece.src(v)) for v in new_source.ring.names}
        tgt = {v: down(piece.tgt(v)) for v in corr.target.ring.names}
        pieces.append(make_piece(small, relations, src, tgt, new_source, corr.target))
    return Correspondence(new_source, corr.target, tuple(pieces))


@dataclass(frozen=True)
class VirtualCorrespondence:
    """Formal difference of two correspondences with common feet.

    Pure bookkeeping: addition is componentwise and nothing is ever
    cancelled between the two halves.
    """

    plus: Correspondence
    minus: Correspondence

    def __post_init__(self):
        if (
            self.plus.source != self.minus.source
            or self.plus.target != self.minus.target
        ):
            raise CancellationError("both halves need the same feet")

    @property
    def source(self) -> AffineScheme:
        return self.plus.source

    @property
    def target(self) -> AffineScheme:
        return self.plus.target

    def __add__(self, other: VirtualCorrespondence) -> VirtualCorrespondence:
        return VirtualCorrespondence(
            add(self.plus, other.plus), add(self.minus, other.minus)
        )

    def negate(self) -> VirtualCorrespondence:
        return VirtualCorrespondence(self.minus, self.plus)


def virtual_family(
    alpha: Correspondence,
    m: int,
    n: int,
    *,
    parameter: str = "s",
    budget: Budget | None = None,
) -> VirtualCorrespondence:
    """The formal difference of the two signed blended families."""
    plus = cancel_family(alpha, m, n, "+", parameter=parameter, budget=budget)
    minus = cancel_family(alpha, m, n, "-", parameter=parameter, budget=budget)
    return VirtualCorrespondence(plus.correspondence, minus.correspondence)


# ---------------------------------------------------------------------------
# filtration search


@dataclass(frozen=True)
class FiltrationEntry:
    m: int
    n: int
    sign: str
    status: str
    rank: int | None


@dataclass(frozen=True)
class FiltrationReport:
    """Result of the box search for a fully certified index.

    ``index`` is the least ``i`` such that every ``(m, n, sign)`` with
    ``i <= m, n <= window`` certifies, or None if no such ``i`` exists;
    ``blocking`` then holds a failing triple (on success, one that rules
    out ``index - 1``).  The two bound reports certify flatness of every
    family in the window uniformly, one per sign.
    """

    index: int | None
    window: int
    entries: tuple[FiltrationEntry, ...]
    blocking: tuple[int, int, str] | None
    bound_plus: BoundReport
    bound_minus: BoundReport

    @property
    def found(self) -> bool:
        return self.index is not None


def _extended_with_parameter(
    alpha: Correspondence, parameter: str
) -> tuple[Correspondence, str]:
    """Adjoin a free parameter line to the source, leaving the middle
    otherwise untouched.  Returns the new span and the middle variable
    holding the parameter (single-piece only)."""
    piece = _single_piece(alpha, "parameter extension")
    field = alpha.source.ring.field
    s_name = fresh_name(parameter, alpha.source.ring.names)
    source = product(alpha.source, affine_line(field, s_name))
    pvar = fresh_name(parameter, piece.ring.names)
    ring = piece.ring.extend([pvar])
    relations = [r.map_ring(ring) for r in piece.relations]
    src = {v: piece.src(v).map_ring(ring) for v in alpha.source.ring.names}
    src[s_name] = ring.var(pvar)
    tgt = {v: piece.tgt(v).map_ring(ring) for v in alpha.target.ring.names}
    new_piece = make_piece(ring, relations, src, tgt, source, alpha.target)
    return Correspondence(source, alpha.target, (new_piece,)), pvar


def filtration_index(
    alpha: Correspondence,
    *,
    window: int = 8,
    parameter: str = "s",
    budget: Budget | None = None,
) -> FiltrationReport:
    """Search for the least index whose upper box certifies entirely.

    Every pair ``(m, n)`` in the window is certified for both signs; the
    index is therefore minimal regardless of search order.  The attached
    uniform bounds witness flatness of all the blended middles: the plus
    families have the shape ``1 - t**k (f1 + f2 t**r)`` with ``f1 = -s``
    and ``f2 = -(1 - s)``, and the minus families divide by the (unit)
    target coordinate to reach the same shape.
    """
    budget = ensure_budget(budget, "filtration search")
    _certified(alpha, budget, "filtration search")
    if window < 1:
        raise ValueError("window must be at least 1")
    entries = []
    certified = {}
    for m in range(1, window + 1):
        for n in range(1, window + 1):
            for sign in ("+", "-"):
                fam = cancel_family(alpha, m, n, sign, parameter=parameter, budget=budget)
                out = fam.certificate
                entries.append(
                    FiltrationEntry(m, n, sign, out.status, out.rank if out.certified else None)
                )
                certified[(m, n, sign)] = out.certified

    def box_ok(i: int) -> bool:
        return all(
            certified[(m, n, sign)]
            for m in range(i, window + 1)
            for n in range(i, window + 1)
            for sign in ("+", "-")
        )

    def first_failing(i: int) -> tuple[int, int, str] | None:
        for m in range(i, window + 1):
            for n in range(i, window + 1):
                for sign in ("+", "-"):
                    if not certified[(m, n, sign)]:
                        return (m, n, sign)
        return None

    index = next((i for i in range(1, window + 1) if box_ok(i)), None)
    blocking = first_failing(index - 1 if index else window)

    extended, pvar = _extended_with_parameter(alpha, parameter)
    piece = extended.pieces[0]
    s = piece.ring.var(pvar)
    one = piece.ring.one()
    _, tgt_t = _torus_feet(alpha)
    t2_inv = alpha.pieces[0].tgt(companion_name(tgt_t)).map_ring(piece.ring)
    src_t = detect_torus_coordinate(alpha.source)
    bound_plus = flatness_bound_ext(
        extended, -s, -(one - s), torus_var=src_t, budget=budget
    )
    bound_minus = flatness_bound_ext(
        extended, -(s * t2_inv), -((one - s) * t2_inv), torus_var=src_t, budget=budget
    )
    return FiltrationReport(index, window, tuple(entries), blocking, bound_plus, bound_minus)


# ---------------------------------------------------------------------------
# naturality


@dataclass(frozen=True)
class CompatReport:
    push_ok: bool
    pull_ok: bool
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.push_ok and self.pull_ok


def torus_extension(
    corr: Correspondence, gm_name: str, *, middle: str = "w"
) -> tuple[Correspondence, tuple[tuple[str, str], ...]]:
    """Cross a correspondence with a common torus factor on both feet.

    The middle gains a fresh unit pair carried identically by both
    structure maps; the pair names are returned piece by piece.
    """
    field = corr.source.ring.field
    source = product(corr.source, torus(field, gm_name))
    target = product(corr.target, torus(field, gm_name))
    pieces = []
    pairs = []
    for piece in corr.pieces:
        stem = _fresh_pair(middle, list(piece.ring.names))
        partner = companion_name(stem)
        ring = piece.ring.extend([stem, partner], inverted=[stem])
        relations = [r.map_ring(ring) for r in piece.relations]
        relations.append(ring.var(stem) * ring.var(partner) - ring.one())
        both = {gm_name: ring.var(stem), companion_name(gm_name): ring.var(partner)}
        src = {v: piece.src(v).map_ring(ring) for v in corr.source.ring.names}
        src.update(both)
        tgt = {v: piece.tgt(v).map_ring(ring) for v in corr.target.ring.names}
        tgt.update(both)
        pieces.append(make_piece(ring, relations, src, tgt, source, target))
        pairs.append((stem, partner))
    return Correspondence(source, target, tuple(pieces)), tuple(pairs)


def line_extension(
    corr: Correspondence, coord: str, *, middle: str = "sb"
) -> tuple[Correspondence, str]:
    """Cross a correspondence with a common affine line on both feet."""
    field = corr.source.ring.field
    source = product(corr.source, affine_line(field, coord))
    target = product(corr.target, affine_line(field, coord))
    pieces = []
    names = []
    for piece in corr.pieces:
        pvar = fresh_name(middle, piece.ring.names)
        ring = piece.ring.extend([pvar])
        relations = [r.map_ring(ring) for r in piece.relations]
        src = {v: piece.src(v).map_ring(ring) for v in corr.source.ring.names}
        src[coord] = ring.var(pvar)
        tgt = {v: piece.tgt(v).map_ring(ring) for v in corr.target.ring.names}
        tgt[coord] = ring.var(pvar)
        pieces.append(make_piece(ring, relations, src, tgt, source, target))
        names.append(pvar)
    return Correspondence(source, target, tuple(pieces)), names[0] if names else middle


def _collapse_piece(
    corr: Correspondence, collapse: dict[str, Polynomial], budget: Budget
) -> SpanPiece:
    """Remove middle variables that the relations identify with the given
    images, shrinking the presentation without changing the quotient."""
    _single_piece(corr, "naturality comparison")
    try:
        return collapse_variables(corr, collapse, budget=budget).pieces[0]
    except SpanError as err:
        raise CancellationError(str(err)) from err


def _collapsed_equal(
    left: Correspondence,
    left_collapse: dict[str, Polynomial],
    right: Correspondence,
    right_collapse: dict[str, Polynomial],
    budget: Budget,
) -> tuple[bool, str]:
    if left.source != right.source or left.target != right.target:
        return False, "the two sides have different feet"
    lp = _collapse_piece(left, left_collapse, budget)
    rp = _collapse_piece(right, right_collapse, budget)
    if _pieces_equal(lp, rp, budget):
        return True, ""
    return False, "canonical presentations differ"


def _require_free_names(parameter: str, *corrs: Correspondence) -> None:
    for corr in corrs:
        for piece in corr.pieces:
            if parameter in piece.ring.names:
                raise CancellationError(
                    f"parameter name {parameter!r} already used by a middle; "
                    "pick another"
                )
        if parameter in corr.source.ring.names or parameter in corr.target.ring.names:
            raise CancellationError(
                f"parameter name {parameter!r} already used by a foot; pick another"
            )


def verify_compat(
    alpha: Correspondence,
    beta: Correspondence,
    gamma: Correspondence,
    m: int,
    n: int,
    sign: str,
    *,
    parameter: str = "s",
    budget: Budget | None = None,
) -> CompatReport:
    """Naturality of the blended family in both feet.

    Checks that blending after postcomposition with ``gamma`` (crossed
    with the torus) matches postcomposing the blended family, and the
    analogous statement for precomposition with ``beta`` (crossed with
    the parameter line).  Both sides are compared after collapsing the
    glue variables the constructions identify, so equality is on the
    nose, not up to unverified isomorphism.
    """
    budget = ensure_budget(budget, "naturality check")
    apiece = _single_piece(alpha, "naturality check")
    _single_piece(beta, "naturality check")
    _single_piece(gamma, "naturality check")
    _require_free_names(parameter, alpha, beta, gamma)
    src_t, tgt_t = _torus_feet(alpha)
    details = []

    gamma_t, gpairs = torus_extension(gamma, tgt_t)
    if not set(gamma_t.pieces[0].ring.names).isdisjoint(apiece.ring.names):
        raise CancellationError(
            "middle variable names collide between the first and third spans; "
            "rename them apart"
        )
    lhs = cancel_family(
        compose(alpha, gamma_t), m, n, sign, parameter=parameter, budget=budget
    ).correspondence
    rhs = compose(
        cancel_family(alpha, m, n, sign, parameter=parameter, budget=budget).correspondence,
        gamma,
    )
    w, w_inv = gpairs[0]
    lring = lhs.pieces[0].ring
    push_collapse = {
        w: apiece.tgt(tgt_t).map_ring(lring),
        w_inv: apiece.tgt(companion_name(tgt_t)).map_ring(lring),
    }
    push_ok, why = _collapsed_equal(lhs, push_collapse, rhs, {}, budget)
    if not push_ok:
        details.append(f"target side: {why}")

    beta_t, bpairs = torus_extension(beta, src_t)
    if not set(beta_t.pieces[0].ring.names).isdisjoint(apiece.ring.names):
        raise CancellationError(
            "middle variable names collide between the second and first spans; "
            "rename them apart"
        )
    composite = compose(beta_t, alpha)
    lhs2 = cancel_family(
        composite, m, n, sign, parameter=parameter, budget=budget
    ).correspondence
    rho_alpha = cancel_family(alpha, m, n, sign, parameter=parameter, budget=budget)
    beta_line, sb = line_extension(beta, rho_alpha.parameter)
    rhs2 = compose(beta_line, rho_alpha.correspondence)
    w2, w2_inv = bpairs[0]
    l2ring = lhs2.pieces[0].ring
    pull_collapse = {
        w2: apiece.src(src_t).map_ring(l2ring),
        w2_inv: apiece.src(companion_name(src_t)).map_ring(l2ring),
    }
    r2ring = rhs2.pieces[0].ring
    # the parameter variable of the blended middle keeps its fresh name
    # through the composition because the name sets are disjoint
    rho_pvar = fresh_name(parameter, apiece.ring.names)
    if rho_pvar not in r2ring.names:
        raise CancellationError(
            "the blended parameter was renamed during composition; "
            "rename the middles apart"
        )
    rhs_collapse = {sb: r2ring.var(rho_pvar)}
    pull_ok, why = _collapsed_equal(lhs2, pull_collapse, rhs2, rhs_collapse, budget)
    if not pull_ok:
        details.append(f"source side: {why}")

    return CompatReport(push_ok, pull_ok, "; ".join(details))


# ---------------------------------------------------------------------------
# the end-to-end verifier


def torus_identity(field, name: str = "t") -> Correspondence:
    """The identity correspondence of the one-dimensional torus."""
    return identity_span(torus(field, name))


def unit_collapse(field, name: str = "t") -> Correspondence:
    """The torus self-correspondence that factors through the unit point."""
    G = torus(field, name)
    partner = companion_name(name)
    ring = PolynomialRing(field, (name, partner), frozenset([name]))
    relations = [ring.var(name) * ring.var(partner) - ring.one()]
    src = {name: ring.var(name), partner: ring.var(partner)}
    one = ring.one()
    tgt = {name: one, partner: one}
    piece = make_piece(ring, relations, src, tgt, G, G)
    return Correspondence(G, G, (piece,))


@dataclass(frozen=True)
class SubCheck:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class CancellationReport:
    """Outcome of the five-part slice-identity verification at one level."""

    n: int
    field_name: str
    checks: tuple[SubCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> tuple[SubCheck, ...]:
        return tuple(c for c in self.checks if not c.ok)


def _ideal_span(field, relations: list[Polynomial], ring: PolynomialRing) -> Correspondence:
    pt = point(field)
    piece = make_piece(ring, relations, {}, {}, pt, pt)
    return Correspondence(pt, pt, (piece,))


def verify_cancellation(
    n: int, field=None, *, budget: Budget | None = None
) -> CancellationReport:
    """Machine check of the slice identities at level ``n``.

    Five independent sub-checks: the two signed cuts of the unit-factor
    correspondence agree; the blended homotopy middle is finite free of
    rank ``n`` over the parameter line; its endpoints are the plus cut
    and the split union of the origin with the minus cut (with ranks
    ``1`` and ``n - 1``); and the plus cut does not meet the origin, so
    restricting it to the torus loses nothing.  Failures are reported,
    never patched over.
    """
    if field is None:
        field = QQ
    budget = ensure_budget(budget, "slice-identity verification")
    checks = []

    # (a) both signed cuts of the unit-factor correspondence coincide
    p_span = unit_collapse(field)
    plus = cancel_slice(p_span, n, "+", budget=budget)
    minus = cancel_slice(p_span, n, "-", budget=budget)
    ok_a = equals(plus, minus, budget=budget)
    checks.append(
        SubCheck(
            "unit-target-cuts-agree",
            ok_a,
            "" if ok_a else "the signed cuts of the unit-factor span differ",
        )
    )

    # (b) the blended homotopy middle is finite free of rank n over the line
    line = affine_line(field, "s")
    hring = PolynomialRing(field, ("t", "s"))
    t, s = hring.var("t"), hring.var("s")
    homotopy_rel = t**n + t * s + hring.one() - s
    hpiece = make_piece(hring, [homotopy_rel], {"s": s}, {}, line, point(field))
    homotopy = Correspondence(line, point(field), (hpiece,))
    hout = certify_finite_flat(homotopy, budget=budget)
    ok_b = hout.certified and hout.rank == n
    checks.append(
        SubCheck(
            "homotopy-middle-free",
            ok_b,
            ""
            if ok_b
            else f"certification says {hout.status} (rank {hout.rank}): {hout.detail}",
        )
    )

    # (c) the parameter-0 endpoint is the plus cut on the affine line
    tring = PolynomialRing(field, ("t",))
    tv = tring.var("t")
    at_zero = restrict_parameter(homotopy, "s", 0, budget=budget)
    plus_cut = _ideal_span(field, [tv**n + tring.one()], tring)
    ok_c = equals(at_zero, plus_cut, budget=budget)
    checks.append(
        SubCheck(
            "endpoint-zero-is-plus-cut",
            ok_c,
            "" if ok_c else "the parameter-0 endpoint is not the plus cut",
        )
    )

    # (d) the parameter-1 endpoint splits off the origin, with ranks (n-1)+1
    minus_poly = tv**n + tv
    origin = groebner_basis([tv], budget=budget)
    away = saturate([minus_poly], tv, budget=budget)
    comaximal = is_unit_ideal(groebner_basis(list(origin) + list(away), budget=budget))
    recombined = ideals_equal(
        ideal_intersection(origin, away, budget=budget), [minus_poly], budget=budget
    )
    at_one = restrict_parameter(homotopy, "s", 1, budget=budget)
    minus_span = _ideal_span(field, [minus_poly], tring)
    endpoint_ok = equals(at_one, minus_span, budget=budget)
    origin_rank = degree(_ideal_span(field, [tv], tring), budget=budget)
    away_rank = degree(_ideal_span(field, list(away), tring), budget=budget)
    torus_rank = degree(cancel_slice(torus_identity(field), n, "-", budget=budget), budget=budget)
    ok_d = (
        endpoint_ok
        and comaximal
        and recombined
        and origin_rank == 1
        and away_rank == (n - 1 if n >= 2 else 0)
        and torus_rank == away_rank
        and away_rank + origin_rank == n
    )
    checks.append(
        SubCheck(
            "endpoint-one-splits-origin",
            ok_d,
            ""
            if ok_d
            else (
                f"split data: endpoint={endpoint_ok} comaximal={comaximal} "
                f"recombined={recombined} ranks={away_rank}+{origin_rank} "
                f"torus side={torus_rank}"
            ),
        )
    )

    # (e) the plus cut misses the origin, so the torus sees all of it
    unchanged = ideals_equal(
        saturate([tv**n + tring.one()], tv, budget=budget),
        [tv**n + tring.one()],
        budget=budget,
    )
    full_rank = degree(plus_cut, budget=budget)
    torus_plus = degree(cancel_slice(torus_identity(field), n, "+", budget=budget), budget=budget)
    ok_e = unchanged and full_rank == n and torus_plus == n
    checks.append(
        SubCheck(
            "plus-cut-misses-origin",
            ok_e,
            ""
            if ok_e
            else f"saturation unchanged={unchanged}, ranks {full_rank} vs {torus_plus}",
        )
    )

    return CancellationReport(n, field_name(field), tuple(checks))
