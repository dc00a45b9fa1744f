"""Finite-flat correspondences between affine schemes.

A correspondence from X to Y is a formal disjoint union of *pieces*; each
piece is a middle algebra presented over the ground field, together with
structure maps to X and Y given by polynomial images of the coordinate
variables.  Addition concatenates pieces, composition takes fiber products
pairwise, and tensoring pairs them.

Certification asks whether the middle is finite locally free over the
source, and answers with an explicit monomial basis and multiplication
matrices when it is.  Equality is checked at the level of canonical
presentations (reduced Groebner bases plus normal forms of the structure
maps); it does not search for ring isomorphisms beyond variable matching
by name or by position.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field as dc_field, replace
from itertools import product as iproduct

from .budget import Budget
from .groebner import eliminate, groebner_basis, normal_form, spolynomial_pairs_reduce
from .modules import (
    ModuleAnalysis,
    PresentationError,
    analyze_module,
    fitting_ideal,
    module_presentation,
    multiplication_matrix_from,
    staircase_labels,
)
from .orders import Block, GrevLex
from .poly import Polynomial, PolynomialRing, companion_name, fresh_name
from .schemes import AffineScheme
from .schemes import product as scheme_product


class SpanError(Exception):
    pass


class IncomparableSpans(SpanError):
    """Raised when two presentations have no canonical variable matching."""


@dataclass(frozen=True)
class SpanPiece:
    """One connected summand of a correspondence middle."""

    ring: PolynomialRing
    relations: tuple[Polynomial, ...]
    src_map: tuple[tuple[str, Polynomial], ...]
    tgt_map: tuple[tuple[str, Polynomial], ...]

    def src(self, name: str) -> Polynomial:
        for key, img in self.src_map:
            if key == name:
                return img
        raise KeyError(name)

    def tgt(self, name: str) -> Polynomial:
        for key, img in self.tgt_map:
            if key == name:
                return img
        raise KeyError(name)


@dataclass(frozen=True)
class Correspondence:
    source: AffineScheme
    target: AffineScheme
    pieces: tuple[SpanPiece, ...]
    label: str = dc_field(default="", compare=False)

    def __post_init__(self):
        for piece in self.pieces:
            src_names = tuple(k for k, _ in piece.src_map)
            tgt_names = tuple(k for k, _ in piece.tgt_map)
            if src_names != self.source.ring.names:
                raise SpanError(
                    f"piece source map covers {src_names}, expected {self.source.ring.names}"
                )
            if tgt_names != self.target.ring.names:
                raise SpanError(
                    f"piece target map covers {tgt_names}, expected {self.target.ring.names}"
                )
            for _, img in piece.src_map + piece.tgt_map:
                if img.ring != piece.ring:
                    raise SpanError("structure map image lives outside the piece ring")


def _map_tuple(ring: PolynomialRing, images: dict[str, Polynomial], order: tuple[str, ...]):
    return tuple((name, images[name]) for name in order)


def _fresh_pair(base: str, taken: list[str]) -> str:
    """A stem such that both it and its companion are unused."""
    stem = base
    k = 1
    while stem in taken or companion_name(stem) in taken:
        k += 1
        stem = f"{base}{k}"
    return stem


def make_piece(
    ring: PolynomialRing,
    relations: list[Polynomial],
    src_images: dict[str, Polynomial],
    tgt_images: dict[str, Polynomial],
    source: AffineScheme,
    target: AffineScheme,
) -> SpanPiece:
    return SpanPiece(
        ring,
        tuple(relations),
        _map_tuple(ring, src_images, source.ring.names),
        _map_tuple(ring, tgt_images, target.ring.names),
    )


def identity_span(scheme: AffineScheme) -> Correspondence:
    ident = {v: scheme.ring.var(v) for v in scheme.ring.names}
    piece = make_piece(scheme.ring, list(scheme.relations), ident, ident, scheme, scheme)
    return Correspondence(scheme, scheme, (piece,), label="id")


def graph_span(
    source: AffineScheme, target: AffineScheme, images: dict[str, Polynomial], label: str = ""
) -> Correspondence:
    """The graph of the morphism sending target coordinates to ``images``."""
    if set(images) != set(target.ring.names):
        raise SpanError("graph images must cover exactly the target coordinates")
    ident = {v: source.ring.var(v) for v in source.ring.names}
    piece = make_piece(source.ring, list(source.relations), ident, images, source, target)
    corr = Correspondence(source, target, (piece,), label=label)
    validate_correspondence(corr)
    return corr


def empty_span(source: AffineScheme, target: AffineScheme) -> Correspondence:
    return Correspondence(source, target, (), label="0")


def transpose(corr: Correspondence) -> Correspondence:
    """The same middles with source and target legs swapped."""
    pieces = tuple(
        SpanPiece(p.ring, p.relations, p.tgt_map, p.src_map) for p in corr.pieces
    )
    return Correspondence(corr.target, corr.source, pieces)


def add(left: Correspondence, right: Correspondence) -> Correspondence:
    if left.source != right.source or left.target != right.target:
        raise SpanError("can only add correspondences with matching source and target")
    return Correspondence(left.source, left.target, left.pieces + right.pieces)


def validate_correspondence(corr: Correspondence, budget: Budget | None = None) -> None:
    """Check that both structure maps kill the defining relations."""
    for index, piece in enumerate(corr.pieces):
        basis = groebner_basis(list(piece.relations), budget=budget)
        for scheme, images in (
            (corr.source, dict(piece.src_map)),
            (corr.target, dict(piece.tgt_map)),
        ):
            for rel in scheme.relations:
                pulled = rel.substitute(
                    {v: images[v] for v in scheme.ring.names}, piece.ring
                )
                if normal_form(pulled, basis, budget=budget) != piece.ring.zero():
                    raise SpanError(
                        f"piece {index}: structure map does not respect relation {rel!r}"
                    )


# ---------------------------------------------------------------------------
# piece-level canonicalization


def _drop_variable(
    ring: PolynomialRing, name: str
) -> PolynomialRing:
    names = tuple(v for v in ring.names if v != name)
    inverted = frozenset(
        v for v in ring.inverted if v != name and companion_name(v) != name
    )
    return PolynomialRing(ring.field, names, inverted)


def _linear_solutions(relations: list[Polynomial]) -> tuple[str, Polynomial] | None:
    """Find a relation of the form c*v - p with p free of v and c a unit."""
    for rel in relations:
        for exp, coeff in rel.terms().items():
            if sum(exp) != 1:
                continue
            v_index = exp.index(1)
            name = rel.ring.names[v_index]
            if any(e[v_index] != 0 for e in rel.terms() if e != exp):
                continue
            rest = rel - Polynomial(rel.ring, {exp: coeff})
            image = rest.scale(rel.ring.field.neg(rel.ring.field.inv(coeff)))
            return name, image
    return None


def simplify_piece(piece: SpanPiece, budget: Budget | None = None) -> SpanPiece:
    """Eliminate linearly-solved variables, then canonicalize.

    Relations are replaced by their reduced Groebner basis and structure
    maps by normal forms, so equal quotients built along different routes
    print and compare identically.
    """
    ring = piece.ring
    relations = list(piece.relations)
    src = dict(piece.src_map)
    tgt = dict(piece.tgt_map)
    while True:
        hit = _linear_solutions(relations)
        if hit is None:
            break
        name, image = hit
        small = _drop_variable(ring, name)
        images = {
            v: (image.map_ring(ring) if v == name else ring.var(v)) for v in ring.names
        }
        # substitute within the full ring first, then reinterpret
        relations = [
            r.substitute(images, ring).map_ring(small)
            for r in relations
            if r.substitute(images, ring) != ring.zero()
        ]
        src = {k: p.substitute(images, ring).map_ring(small) for k, p in src.items()}
        tgt = {k: p.substitute(images, ring).map_ring(small) for k, p in tgt.items()}
        ring = small
    basis = groebner_basis(relations, budget=budget)
    src = {k: normal_form(p, basis, budget=budget) for k, p in src.items()}
    tgt = {k: normal_form(p, basis, budget=budget) for k, p in tgt.items()}
    return SpanPiece(
        ring,
        tuple(basis),
        tuple((k, src[k]) for k, _ in piece.src_map),
        tuple((k, tgt[k]) for k, _ in piece.tgt_map),
    )


def simplify(corr: Correspondence, budget: Budget | None = None) -> Correspondence:
    return replace(
        corr, pieces=tuple(simplify_piece(p, budget=budget) for p in corr.pieces)
    )


# ---------------------------------------------------------------------------
# composition and tensor


def _merge_rings(
    left: PolynomialRing, right: PolynomialRing
) -> tuple[PolynomialRing, dict[str, str]]:
    """Disjointly adjoin ``right``'s variables, renaming clashes.

    Returns the merged ring and the rename applied to right-hand names.
    Companion pairs are renamed together so localization survives.
    """
    rename: dict[str, str] = {}
    taken = list(left.names)
    for name in right.names:
        if name in rename:
            continue
        if name in right.inverted:
            partner = companion_name(name)
            stem = _fresh_pair(name, taken + list(rename.values()))
            rename[name] = stem
            rename[partner] = companion_name(stem)
            taken.extend([stem, companion_name(stem)])
        elif name.endswith("_inv") and name.removesuffix("_inv") in right.inverted:
            continue  # handled with its partner
        else:
            fresh = name if name not in taken else fresh_name(name, taken + list(rename.values()))
            rename[name] = fresh
            taken.append(fresh)
    merged_names = left.names + tuple(rename[n] for n in right.names)
    merged_inverted = left.inverted | frozenset(rename[v] for v in right.inverted)
    return PolynomialRing(left.field, merged_names, merged_inverted), rename


def compose(left: Correspondence, right: Correspondence) -> Correspondence:
    """The correspondence ``X -> W`` obtained by fiber product over the middle.

    ``left`` runs ``X -> Y`` and ``right`` runs ``Y -> W``; each pair of
    pieces glues along the shared copy of Y.  The glued presentation is
    returned as-is — both ways of associating a triple build the same
    relation set, which keeps composition associative on the nose; run
    :func:`simplify` to shrink the middles.
    """
    if left.target != right.source:
        raise SpanError("composition needs left.target == right.source")
    middle = left.target
    pieces = []
    for a, b in iproduct(left.pieces, right.pieces):
        ring, rename = _merge_rings(a.ring, b.ring)
        import_right = {v: ring.var(rename[v]) for v in b.ring.names}

        def move(p: Polynomial) -> Polynomial:
            return p.substitute(import_right, ring)

        relations = [r.map_ring(ring) for r in a.relations]
        relations += [move(r) for r in b.relations]
        for y in middle.ring.names:
            relations.append(a.tgt(y).map_ring(ring) - move(b.src(y)))
        src = {k: a.src(k).map_ring(ring) for k in left.source.ring.names}
        tgt = {k: move(b.tgt(k)) for k in right.target.ring.names}
        pieces.append(make_piece(ring, relations, src, tgt, left.source, right.target))
    return Correspondence(left.source, right.target, tuple(pieces))


def external_tensor(left: Correspondence, right: Correspondence) -> Correspondence:
    """Product correspondence on product schemes (variables must not clash)."""
    source = scheme_product(left.source, right.source)
    target = scheme_product(left.target, right.target)
    pieces = []
    for a, b in iproduct(left.pieces, right.pieces):
        ring, rename = _merge_rings(a.ring, b.ring)
        import_right = {v: ring.var(rename[v]) for v in b.ring.names}

        def move(p: Polynomial) -> Polynomial:
            return p.substitute(import_right, ring)

        relations = [r.map_ring(ring) for r in a.relations] + [move(r) for r in b.relations]
        src = {k: a.src(k).map_ring(ring) for k in left.source.ring.names}
        src.update({k: move(b.src(k)) for k in right.source.ring.names})
        tgt = {k: a.tgt(k).map_ring(ring) for k in left.target.ring.names}
        tgt.update({k: move(b.tgt(k)) for k in right.target.ring.names})
        pieces.append(make_piece(ring, relations, src, tgt, source, target))
    return Correspondence(source, target, tuple(pieces))


# ---------------------------------------------------------------------------
# equality of presentations


def _comparison_ring(field, names: tuple[str, ...]) -> PolynomialRing:
    return PolynomialRing(field, names)


def _piece_payload(piece: SpanPiece, names: tuple[str, ...], rename: dict[str, str], budget):
    """Relations (as a reduced basis) and map images inside a mark-free ring."""
    ring = _comparison_ring(piece.ring.field, names)
    images = {v: ring.var(rename[v]) for v in piece.ring.names}

    def move(p: Polynomial) -> Polynomial:
        return p.substitute(images, ring)

    basis = groebner_basis([move(r) for r in piece.relations], budget=budget)
    src = tuple(normal_form(move(img), basis, budget=budget) for _, img in piece.src_map)
    tgt = tuple(normal_form(move(img), basis, budget=budget) for _, img in piece.tgt_map)
    return basis, src, tgt


def _pieces_equal(a: SpanPiece, b: SpanPiece, budget: Budget | None) -> bool:
    if len(a.ring.names) != len(b.ring.names):
        raise IncomparableSpans(
            f"middles have {len(a.ring.names)} and {len(b.ring.names)} variables; "
            "no canonical matching is declared"
        )
    if sorted(a.ring.names) == sorted(b.ring.names):
        names = a.ring.names
        rename_b = {v: v for v in b.ring.names}
    else:
        names = a.ring.names
        rename_b = {v: names[i] for i, v in enumerate(b.ring.names)}
    rename_a = {v: v for v in a.ring.names}
    basis_a, src_a, tgt_a = _piece_payload(a, names, rename_a, budget)
    basis_b, src_b, tgt_b = _piece_payload(b, names, rename_b, budget)
    return basis_a == basis_b and src_a == src_b and tgt_a == tgt_b


def _piece_sort_key(piece: SpanPiece):
    return (
        len(piece.ring.names),
        len(piece.relations),
        tuple(sorted(str(r.terms()) for r in piece.relations)),
        tuple(str(img.terms()) for _, img in piece.src_map),
        tuple(str(img.terms()) for _, img in piece.tgt_map),
    )


def equals(left: Correspondence, right: Correspondence, budget: Budget | None = None) -> bool:
    """Presentation-level equality after canonical simplification.

    Pieces are matched greedily after sorting; two middles with different
    variable counts and no name overlap raise :class:`IncomparableSpans`.
    A ``False`` here means the canonical presentations differ; hunting for
    exotic isomorphisms is out of scope.
    """
    if left.source != right.source or left.target != right.target:
        return False
    a = [simplify_piece(p, budget=budget) for p in left.pieces]
    b = [simplify_piece(p, budget=budget) for p in right.pieces]
    if len(a) != len(b):
        return False
    a.sort(key=_piece_sort_key)
    remaining = list(b)
    for piece in a:
        for i, other in enumerate(remaining):
            try:
                if _pieces_equal(piece, other, budget):
                    remaining.pop(i)
                    break
            except IncomparableSpans:
                if len(a) == 1:
                    raise
                continue
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# certification


@dataclass(frozen=True)
class PieceCertificate:
    ring: PolynomialRing
    split: int
    groebner: tuple[Polynomial, ...]
    staircase: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...]
    matrices: tuple[tuple[str, tuple[tuple[Polynomial, ...], ...]], ...]
    base_groebner: tuple[Polynomial, ...]
    fitting_below: tuple[Polynomial, ...] = ()
    fitting_at: tuple[Polynomial, ...] = ()

    @property
    def rank(self) -> int:
        return len(self.staircase)


@dataclass(frozen=True)
class CertifyOutcome:
    status: str  # certified | not_finite | not_locally_free | inconclusive
    rank: int | None = None
    pieces: tuple[PieceCertificate, ...] = ()
    detail: str = ""
    witness: tuple[Polynomial, ...] = ()

    @property
    def certified(self) -> bool:
        return self.status == "certified"


def _piece_module(
    piece: SpanPiece, base: AffineScheme, budget: Budget | None
) -> tuple[PolynomialRing, int, list[Polynomial], ModuleAnalysis]:
    """Combined-ring module analysis of a piece over the span's source."""
    base_ring = base.ring
    rename: dict[str, str] = {}
    taken = list(base_ring.names)
    for name in piece.ring.names:
        if name in rename:
            continue
        if name in piece.ring.inverted:
            partner = companion_name(name)
            stem = _fresh_pair(name, taken + list(rename.values()))
            rename[name], rename[partner] = stem, companion_name(stem)
            taken += [stem, companion_name(stem)]
        elif name.endswith("_inv") and name.removesuffix("_inv") in piece.ring.inverted:
            continue
        else:
            fresh = name if name not in taken else fresh_name(name, taken + list(rename.values()))
            rename[name] = fresh
            taken.append(fresh)
    fiber_names = tuple(rename[v] for v in piece.ring.names)
    combined = PolynomialRing(
        base_ring.field,
        fiber_names + base_ring.names,
        frozenset(rename[v] for v in piece.ring.inverted) | base_ring.inverted,
    )
    fiber_images = {v: combined.var(rename[v]) for v in piece.ring.names}

    def lift(p: Polynomial) -> Polynomial:
        return p.substitute(fiber_images, combined)

    relations = [lift(r) for r in piece.relations]
    relations += [r.map_ring(combined) for r in base.relations]
    for v in base_ring.names:
        relations.append(combined.var(v) - lift(piece.src(v)))
    analysis = analyze_module(
        combined,
        len(fiber_names),
        relations,
        base_ring,
        list(base.relations),
        budget=budget,
    )
    return combined, len(fiber_names), relations, analysis


def certify_finite_flat(corr: Correspondence, budget: Budget | None = None) -> CertifyOutcome:
    """Certify the middle finite locally free over the source, piecewise.

    The certificate is a monomial staircase basis per piece plus the
    multiplication matrices of every fiber variable; rank is the total
    staircase size.
    """
    certs = []
    total = 0
    for index, piece in enumerate(corr.pieces):
        combined, split, _, analysis = _piece_module(piece, corr.source, budget)
        if analysis.status in ("zero", "free"):
            pres = module_presentation(analysis)
            rank = analysis.rank
            below = tuple(fitting_ideal(pres, rank - 1, budget))
            at = tuple(fitting_ideal(pres, rank, budget))
            matrices = tuple(sorted((analysis.mult or {}).items()))
            certs.append(
                PieceCertificate(
                    combined,
                    split,
                    tuple(analysis.groebner),
                    tuple(analysis.staircase),
                    staircase_labels(analysis) if analysis.status == "free" else (),
                    tuple((name, tuple(tuple(row) for row in mat)) for name, mat in matrices),
                    tuple(analysis.base_groebner),
                    below,
                    at,
                )
            )
            total += rank
            continue
        if analysis.status == "torsion":
            witness = ", ".join(str(w) for w in analysis.torsion_witness)
            return CertifyOutcome(
                status="not_locally_free",
                detail=(
                    f"piece {index}: base element ({witness}) "
                    "vanishes on the middle but not on the source"
                ),
                witness=tuple(analysis.torsion_witness),
            )
        if analysis.status == "not_finite":
            return CertifyOutcome(
                status="not_finite",
                detail=(
                    f"piece {index}: no monomial bound in direction "
                    f"{analysis.not_finite_direction}"
                ),
            )
        return CertifyOutcome(status="inconclusive", detail=f"piece {index}: {analysis.detail}")
    return CertifyOutcome(status="certified", rank=total, pieces=tuple(certs))


def degree(corr: Correspondence, budget: Budget | None = None) -> int:
    """Total rank of the middle over the source; requires certification."""
    outcome = certify_finite_flat(corr, budget=budget)
    if not outcome.certified:
        raise SpanError(f"degree undefined: {outcome.status} ({outcome.detail})")
    assert outcome.rank is not None
    return outcome.rank


def recheck_certificate(
    corr: Correspondence, outcome: CertifyOutcome, budget: Budget | None = None
) -> bool:
    """Confirm a stored certificate without recomputing its Groebner bases.

    Checks that the claimed basis reduces the defining relations to zero,
    that all S-polynomials of the claimed basis reduce to zero, and that
    the staircase avoids the basis leading terms.
    """
    if not outcome.certified:
        return False
    if len(corr.pieces) != len(outcome.pieces):
        return False
    for piece, cert in zip(corr.pieces, outcome.pieces):
        combined = cert.ring
        if cert.split != len(piece.ring.names):
            return False
        order = (
            Block(combined.nvars, cert.split) if cert.split else GrevLex(combined.nvars)
        )
        basis = list(cert.groebner)
        if not spolynomial_pairs_reduce(basis, order, budget=budget):
            return False
        relations = _combined_relations(piece, corr.source, cert)
        for rel in relations:
            if not normal_form(rel, basis, order, budget=budget).is_zero():
                return False
        leads = [b.leading_exponent(order) for b in basis if not b.is_zero()]
        for exp in cert.staircase:
            padded = tuple(exp) + (0,) * (combined.nvars - cert.split)
            for lead in leads:
                if all(l <= e for l, e in zip(lead, padded)):
                    return False
        for name, recorded in cert.matrices:
            try:
                fresh = multiplication_matrix_from(
                    combined,
                    cert.split,
                    basis,
                    order,
                    corr.source.ring,
                    combined.var(name),
                    list(cert.staircase),
                    budget,
                )
            except PresentationError:
                return False
            if tuple(tuple(row) for row in fresh) != recorded:
                return False
    return True


def collapse_variables(
    corr: Correspondence,
    images: Mapping[str, Polynomial] | Sequence[Mapping[str, Polynomial]],
    budget: Budget | None = None,
) -> Correspondence:
    """Drop middle variables that the relations identify with polynomials
    in the remaining ones.

    ``images`` maps each doomed variable to its claimed replacement (one
    mapping shared by all pieces, or one per piece); the claim is checked
    by normal form before anything is removed, so the quotient is
    untouched.  Raises :class:`SpanError` when a claim fails.
    """
    if isinstance(images, Mapping):
        per_piece = [images] * len(corr.pieces)
    else:
        per_piece = list(images)
        if len(per_piece) != len(corr.pieces):
            raise SpanError("need one collapse mapping per piece")
    pieces = []
    for piece, mapping in zip(corr.pieces, per_piece):
        if not mapping:
            pieces.append(piece)
            continue
        ring = piece.ring
        basis = groebner_basis(list(piece.relations), budget=budget)
        for name, image in mapping.items():
            gap = normal_form(ring.var(name) - image, basis, budget=budget)
            if not gap.is_zero():
                raise SpanError(
                    f"cannot collapse {name!r}: the relations do not identify "
                    "it with the claimed image"
                )
        drop = list(mapping)
        kept = eliminate(list(piece.relations), drop, budget=budget)
        small = ring.drop(drop)
        relations = [p.map_ring(small) for p in kept]

        def down(p: Polynomial) -> Polynomial:
            return p.substitute(mapping, ring).map_ring(small)

        src = {v: down(piece.src(v)) for v in corr.source.ring.names}
        tgt = {v: down(piece.tgt(v)) for v in corr.target.ring.names}
        pieces.append(make_piece(small, relations, src, tgt, corr.source, corr.target))
    return Correspondence(corr.source, corr.target, tuple(pieces), label=corr.label)


def lift_into_certificate(
    piece: SpanPiece, cert: PieceCertificate, value: Polynomial
) -> Polynomial:
    """Rewrite a polynomial on the piece in the certificate's combined ring.

    Piece variables map positionally onto the fiber block of the
    certificate ring, so lifted values can be reduced against the stored
    basis alongside the base coordinates.
    """
    combined = cert.ring
    fiber = combined.names[: cert.split]
    images = {v: combined.var(fiber[i]) for i, v in enumerate(piece.ring.names)}
    return value.substitute(images, combined)


def _combined_relations(
    piece: SpanPiece, base: AffineScheme, cert: PieceCertificate
) -> list[Polynomial]:
    """The defining relations of a piece, rebuilt inside a certificate's ring."""
    combined = cert.ring

    def lift(p: Polynomial) -> Polynomial:
        return lift_into_certificate(piece, cert, p)

    relations = [lift(r) for r in piece.relations]
    relations += [r.map_ring(combined) for r in base.relations]
    for v in base.ring.names:
        relations.append(combined.var(v) - lift(piece.src(v)))
    return relations
