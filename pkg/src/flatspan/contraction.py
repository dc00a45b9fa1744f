"""Contracting a correspondence away from an interpolation locus.

The input is a correspondence ``alpha`` from Y into a product of punctured
lines X, together with interpolation data on X: a weight function w on
X x A^1 that is identically one at parameter zero, and a coordinate map f
that restores the identity at parameter one while sending parameter zero
to a chosen base point.  Pulling the vanishing locus of w back through the
middle of ``alpha`` and pushing it down to Y x A^1 produces a closed locus
that the construction must avoid; its complement carries a restricted
middle which, composed with f, interpolates between ``alpha`` and the
constant correspondence at the base point.

Everything is presented by ideals.  The pushforward along the middle is
computed by variable elimination, which is sound here because a certified
middle is finite over the source, so images of closed sets are closed.
The complement is presented as a cover by standard open charts, one per
generator of the image ideal, and every chart carries its own
finite-local-freeness certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

from .budget import Budget, ensure_budget
from .fields import QQ, Field
from .groebner import (
    eliminate,
    groebner_basis,
    ideal_intersection,
    is_unit_ideal,
    modular_inverse,
    normal_form,
)
from .poly import Polynomial, PolynomialRing, companion_name, fresh_name
from .schemes import AffineScheme, affine_line, localize, product, torus, torus_power
from .spans import (
    CertifyOutcome,
    Correspondence,
    SpanError,
    _fresh_pair,
    certify_finite_flat,
    collapse_variables,
    equals,
    make_piece,
)


class ContractionError(Exception):
    pass


# ---------------------------------------------------------------------------
# interpolation data


@dataclass(frozen=True)
class ContractionDatum:
    """Base scheme, base point, weight function and coordinate flow.

    ``w`` and the entries of ``f_images``/``cofactors`` live in a ring on
    the scheme's coordinates plus the parameter ``u_name``; ``cofactors``
    holds w divided by the matching coordinate image, and
    ``w_one_inverse`` inverts w at parameter one inside the coordinate
    ring of the scheme.  Instances are built through
    :func:`make_contraction_datum`, which checks every hypothesis
    symbolically instead of trusting the caller.
    """

    scheme: AffineScheme
    base_point: tuple[tuple[str, object], ...]
    u_name: str
    w: Polynomial
    f_images: tuple[tuple[str, Polynomial], ...]
    cofactors: tuple[tuple[str, Polynomial], ...]
    w_one_inverse: Polynomial

    @property
    def u_ring(self) -> PolynomialRing:
        return self.w.ring

    @property
    def primary(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.f_images)

    def base_value(self, name: str):
        for key, value in self.base_point:
            if key == name:
                return value
        raise KeyError(name)

    def f_image(self, name: str) -> Polynomial:
        for key, value in self.f_images:
            if key == name:
                return value
        raise KeyError(name)

    def cofactor(self, name: str) -> Polynomial:
        for key, value in self.cofactors:
            if key == name:
                return value
        raise KeyError(name)


def base_point_ideal(datum: ContractionDatum) -> tuple[Polynomial, ...]:
    """Generators of the ideal of the base point inside the coordinate
    ring of the scheme (one per primary coordinate)."""
    ring = datum.scheme.ring
    return tuple(
        ring.var(name) - ring.const(datum.base_value(name)) for name in datum.primary
    )


def _check_datum(datum: ContractionDatum, budget: Budget) -> None:
    scheme = datum.scheme
    ring = scheme.ring
    uring = datum.u_ring
    uname = datum.u_name
    primary = [v for v in ring.names if v in ring.inverted]
    for v in ring.names:
        if v not in ring.inverted and v not in {companion_name(p) for p in primary}:
            raise ContractionError(
                "supported base schemes are products of punctured lines; "
                f"coordinate {v!r} has no inverse"
            )
    expected = set(ring.names) | {uname}
    if set(uring.names) != expected:
        raise ContractionError(
            "the weight function must live on the scheme coordinates plus "
            f"the parameter {uname!r}"
        )
    if tuple(datum.primary) != tuple(primary):
        raise ContractionError(
            "coordinate images must cover the primary coordinates in order"
        )
    point = dict(datum.base_point)
    if set(point) != set(ring.names):
        raise ContractionError("base point must assign a value to every coordinate")
    for name in primary:
        comp = companion_name(name)
        if ring.field.mul(point[name], point[comp]) != ring.field.one:
            raise ContractionError(
                f"base point values for {name!r} and {comp!r} are not inverse"
            )

    base_rels = groebner_basis(
        [r.map_ring(uring) for r in scheme.relations], budget=budget
    )

    def reduces_to_zero(p: Polynomial) -> bool:
        return normal_form(p, base_rels, budget=budget).is_zero()

    at_zero = datum.w.substitute({uname: uring.const(0)}, uring)
    if not reduces_to_zero(at_zero - uring.one()):
        raise ContractionError("weight function is not identically one at parameter 0")

    at_point = datum.w.substitute(
        {v: uring.const(point[v]) for v in ring.names}, uring
    )
    if not at_point.is_constant() or at_point.is_zero():
        raise ContractionError("weight function is not a unit along the base point")

    for name in primary:
        img = datum.f_image(name)
        if img.ring != uring:
            raise ContractionError("coordinate images must live in the weight ring")
        at_one = img.substitute({uname: uring.const(1)}, uring)
        if not reduces_to_zero(at_one - uring.var(name)):
            raise ContractionError(
                f"coordinate flow does not restore {name!r} at parameter 1"
            )
        origin = img.substitute({uname: uring.const(0)}, uring)
        if not reduces_to_zero(origin - uring.const(point[name])):
            raise ContractionError(
                f"coordinate flow does not reach the base point in {name!r} "
                "at parameter 0"
            )
        fixed = img.substitute({v: uring.const(point[v]) for v in ring.names}, uring)
        if fixed != uring.const(point[name]):
            raise ContractionError(
                f"coordinate flow moves the base point in {name!r}"
            )
        if not reduces_to_zero(img * datum.cofactor(name) - datum.w):
            raise ContractionError(
                f"stored cofactor for {name!r} does not multiply back to the "
                "weight function"
            )

    at_one_total = datum.w.substitute({uname: uring.const(1)}, uring)
    inv = datum.w_one_inverse
    if inv.ring != ring:
        raise ContractionError(
            "the inverse of the weight at parameter 1 must live in the "
            "coordinate ring of the scheme"
        )
    if not reduces_to_zero(at_one_total * inv.map_ring(uring) - uring.one()):
        raise ContractionError(
            "stored inverse does not invert the weight function at parameter 1"
        )


def make_contraction_datum(
    scheme: AffineScheme,
    base_point: dict[str, object],
    u_name: str,
    w: Polynomial,
    f_images: dict[str, Polynomial],
    cofactors: dict[str, Polynomial],
    w_one_inverse: Polynomial,
    budget: Budget | None = None,
) -> ContractionDatum:
    """Assemble and symbolically verify interpolation data.

    ``base_point`` may omit companion coordinates; they are filled in with
    field inverses.  Raises :class:`ContractionError` when any hypothesis
    fails.
    """
    budget = ensure_budget(budget, "contraction data check")
    field = scheme.ring.field
    point = dict(base_point)
    for name in list(point):
        if name in scheme.ring.inverted:
            comp = companion_name(name)
            if comp not in point:
                point[comp] = field.inv(point[name])
    primary = [v for v in scheme.ring.names if v in scheme.ring.inverted]
    datum = ContractionDatum(
        scheme,
        tuple((v, point[v]) for v in scheme.ring.names),
        u_name,
        w,
        tuple((v, f_images[v]) for v in primary),
        tuple((v, cofactors[v]) for v in primary),
        w_one_inverse,
    )
    _check_datum(datum, budget)
    return datum


def standard_contraction_data(
    n: int, field: Field = QQ, budget: Budget | None = None
) -> ContractionDatum:
    """Interpolation data on a product of ``n`` punctured lines.

    The weight is the product of the straight-line segments u*t_i + (1-u)
    joining each coordinate to 1, and the coordinate flow rescales along
    the same segments.  All hypotheses are verified symbolically before
    the datum is returned.
    """
    if n < 1:
        raise ContractionError("need at least one coordinate")
    scheme = torus(field, "t") if n == 1 else torus_power(field, n)
    primary = [v for v in scheme.ring.names if v in scheme.ring.inverted]
    uring = PolynomialRing(field, scheme.ring.names + ("u",), scheme.ring.inverted)
    u = uring.var("u")
    segments = {v: u * uring.var(v) + uring.one() - u for v in primary}
    w = uring.one()
    for v in primary:
        w = w * segments[v]
    cofactors = {}
    for v in primary:
        cof = uring.one()
        for other in primary:
            if other != v:
                cof = cof * segments[other]
        cofactors[v] = cof
    inv = scheme.ring.one()
    for v in primary:
        inv = inv * scheme.ring.var(companion_name(v))
    return make_contraction_datum(
        scheme,
        {v: field.one for v in primary},
        "u",
        w,
        segments,
        cofactors,
        inv,
        budget=budget,
    )


# ---------------------------------------------------------------------------
# the contraction itself


@dataclass(frozen=True)
class ContractedChart:
    """One standard open chart of the complement, with its restricted
    middle presented as a correspondence into the original target."""

    generator: Polynomial
    correspondence: Correspondence
    certificate: CertifyOutcome
    source_aux: str
    u_names: tuple[str, ...]
    loc_names: tuple[str, ...]
    winv_names: tuple[str, ...]


@dataclass(frozen=True)
class ContractedCorrespondence:
    """Result of contracting a correspondence along interpolation data.

    ``source_ideal`` cuts out the locus in (source) x A^1 that the
    restricted middle must avoid; ``charts`` cover its complement.  The
    ``chain`` records every ideal along the construction for reporting,
    and the red-flag booleans confirm that the avoided locus misses the
    parameter values 0 and 1.
    """

    alpha: Correspondence
    source_ideal: tuple[Polynomial, ...]
    u_name: str
    charts: tuple[ContractedChart, ...]
    chain: tuple[tuple[str, tuple[Polynomial, ...]], ...]
    avoids_zero: bool
    avoids_one: bool
    rank: int | None

    @property
    def ok(self) -> bool:
        return self.avoids_zero and self.avoids_one and self.rank is not None


def _pull_weight(
    value: Polynomial,
    piece,
    datum: ContractionDatum,
    ring: PolynomialRing,
    u_var: Polynomial,
    move,
) -> Polynomial:
    """Substitute target images for scheme coordinates and the chart's own
    parameter variable for the datum's."""
    images = {v: move(piece.tgt(v)) for v in datum.scheme.ring.names}
    images[datum.u_name] = u_var
    return value.substitute(images, ring)


def _image_on_source(
    alpha: Correspondence,
    datum: ContractionDatum,
    source_u: str,
    target_ring: PolynomialRing,
    budget: Budget,
) -> tuple[list[Polynomial], list[tuple[Polynomial, ...]]]:
    """Eliminate the middle variables from the pulled-back weight locus,
    one piece at a time, and intersect the per-piece images."""
    source = alpha.source
    per_piece: list[list[Polynomial]] = []
    pulled_record: list[tuple[Polynomial, ...]] = []
    for piece in alpha.pieces:
        taken = list(source.ring.names) + [source_u]
        rename: dict[str, str] = {}
        for name in piece.ring.inverted:
            stem = _fresh_pair(name, taken)
            rename[name] = stem
            rename[companion_name(name)] = companion_name(stem)
            taken.extend([stem, companion_name(stem)])
        for name in piece.ring.names:
            if name not in rename:
                fresh = fresh_name(name, taken)
                rename[name] = fresh
                taken.append(fresh)
        fiber = [rename[name] for name in piece.ring.names]
        marks = {rename[name] for name in piece.ring.inverted}
        combined = PolynomialRing(
            source.ring.field,
            tuple(fiber) + tuple(source.ring.names) + (source_u,),
            frozenset(marks) | source.ring.inverted,
        )

        def lift(p: Polynomial) -> Polynomial:
            return p.map_ring(combined, rename)

        relations = [lift(r) for r in piece.relations]
        relations += [r.map_ring(combined) for r in source.relations]
        for v in source.ring.names:
            relations.append(combined.var(v) - lift(piece.src(v)))
        weight = _pull_weight(
            datum.w, piece, datum, combined, combined.var(source_u), lift
        )
        pulled_record.append((weight,))
        image = eliminate(relations + [weight], fiber, budget=budget)
        per_piece.append([p.map_ring(target_ring) for p in image])
    if not per_piece:
        return [target_ring.one()], pulled_record
    merged = reduce(
        lambda a, b: ideal_intersection(a, b, budget=budget), per_piece
    )
    ambient = [r.map_ring(target_ring) for r in source.relations]
    ambient_basis = groebner_basis(ambient, budget=budget)
    full = groebner_basis(merged + ambient, budget=budget)
    candidates = [
        b for b in full if not normal_form(b, ambient_basis, budget=budget).is_zero()
    ]
    # keep a minimal generating set modulo the source, preferring short
    # low-degree representatives so reports stay readable
    candidates.sort(key=lambda p: (len(p.terms()), p.total_degree(), str(p)))
    kept: list[Polynomial] = []
    for candidate in candidates:
        basis = groebner_basis(kept + ambient, budget=budget)
        if not normal_form(candidate, basis, budget=budget).is_zero():
            kept.append(candidate)
    return kept, pulled_record


def _build_chart(
    alpha: Correspondence,
    datum: ContractionDatum,
    generator: Polynomial,
    source_u: str,
    budget: Budget,
) -> ContractedChart:
    source = alpha.source
    line = affine_line(source.ring.field, source_u)
    opened, aux = localize(product(source, line), generator, hint="lg")
    pieces = []
    u_names = []
    loc_names = []
    winv_names = []
    for piece in alpha.pieces:
        taken = list(piece.ring.names)
        u2 = fresh_name(source_u, taken)
        taken.append(u2)
        lg = fresh_name("lg", taken)
        taken.append(lg)
        ring = piece.ring.extend([u2, lg])
        u_var = ring.var(u2)

        def move(p: Polynomial) -> Polynomial:
            return p.map_ring(ring)

        weight = _pull_weight(datum.w, piece, datum, ring, u_var, move)
        on_source = {v: move(piece.src(v)) for v in source.ring.names}
        on_source[source_u] = u_var
        gen_below = generator.substitute(on_source, ring)
        relations = [move(r) for r in piece.relations]
        relations.append(gen_below * ring.var(lg) - ring.one())

        # the pulled weight is invertible here because the chart avoids its
        # image; prefer rewriting its inverse in the existing variables and
        # only fall back to a reciprocal variable when no rewrite is found
        reciprocal = modular_inverse(weight, relations, budget=budget)
        wv = ""
        if reciprocal is None:
            wv = fresh_name("winv", taken)
            bigger = ring.extend([wv])
            relations = [r.map_ring(bigger) for r in relations]
            weight = weight.map_ring(bigger)
            on_source = {k: v.map_ring(bigger) for k, v in on_source.items()}
            u_var = bigger.var(u2)
            ring = bigger

            def move(p: Polynomial) -> Polynomial:
                return p.map_ring(ring)

            relations.append(weight * ring.var(wv) - ring.one())
            reciprocal = ring.var(wv)

        src = dict(on_source)
        src[aux] = ring.var(lg)
        tgt = {}
        for name in datum.primary:
            tgt[name] = _pull_weight(
                datum.f_image(name), piece, datum, ring, u_var, move
            )
            tgt[companion_name(name)] = (
                _pull_weight(datum.cofactor(name), piece, datum, ring, u_var, move)
                * reciprocal
            )
        pieces.append(make_piece(ring, relations, src, tgt, opened, datum.scheme))
        u_names.append(u2)
        loc_names.append(lg)
        winv_names.append(wv)
    corr = Correspondence(opened, datum.scheme, tuple(pieces), label="contracted")
    certificate = certify_finite_flat(corr, budget=budget)
    return ContractedChart(
        generator,
        corr,
        certificate,
        aux,
        tuple(u_names),
        tuple(loc_names),
        tuple(winv_names),
    )


def contract(
    alpha: Correspondence, datum: ContractionDatum, budget: Budget | None = None
) -> ContractedCorrespondence:
    """Restrict the middle of ``alpha`` away from the pulled-back weight
    locus and flow its target leg along the interpolation data.

    The input must target the datum's scheme and carry a finite-local-
    freeness certificate.  The avoided locus is pushed down to the source
    line by elimination; its complement is covered by one chart per ideal
    generator, and each chart's restricted middle is re-certified (the
    rank must agree with the input).  Failure of the parameter values 0
    or 1 to stay inside the complement is reported, never suppressed.
    """
    budget = ensure_budget(budget, "contraction")
    if alpha.target != datum.scheme:
        raise ContractionError(
            "correspondence target does not match the interpolation scheme"
        )
    before = certify_finite_flat(alpha, budget=budget)
    if not before.certified:
        raise ContractionError(
            "contraction needs a certified finite locally free input; got "
            f"status {before.status!r}"
        )
    source = alpha.source
    source_u = fresh_name(datum.u_name, source.ring.names)
    on_line = PolynomialRing(
        source.ring.field,
        source.ring.names + (source_u,),
        source.ring.inverted,
    )
    image, pulled = _image_on_source(alpha, datum, source_u, on_line, budget)

    u = on_line.var(source_u)
    ambient = [r.map_ring(on_line) for r in source.relations]
    avoids_zero = is_unit_ideal(
        groebner_basis(image + ambient + [u], budget=budget)
    )
    avoids_one = is_unit_ideal(
        groebner_basis(image + ambient + [u - on_line.one()], budget=budget)
    )

    charts = tuple(
        _build_chart(alpha, datum, g, source_u, budget) for g in image
    )
    rank: int | None = before.rank
    for chart in charts:
        if not chart.certificate.certified or chart.certificate.rank != before.rank:
            rank = None
    if not charts:
        rank = None

    chain = (
        ("weight-locus", (datum.w,)),
        ("middle-pullback", tuple(p for gens in pulled for p in gens)),
        ("source-image", tuple(image)),
        ("complement-cover", tuple(image)),
        (
            "restricted-middle",
            tuple(
                rel
                for chart in charts
                for piece in chart.correspondence.pieces
                for rel in piece.relations
            ),
        ),
    )
    return ContractedCorrespondence(
        alpha,
        tuple(image),
        source_u,
        charts,
        chain,
        avoids_zero,
        avoids_one,
        rank,
    )


# ---------------------------------------------------------------------------
# endpoint behaviour


@dataclass(frozen=True)
class EndpointSlice:
    value: int
    matches_input: bool
    lands_on_base_point: bool


@dataclass(frozen=True)
class EndpointReport:
    """Dichotomy of the two parameter endpoints of a contraction.

    Exactly one endpoint should reproduce the input correspondence and
    the other should factor through the base point; ``identity_at``
    records which parameter value carried the input (the construction
    fixes no preferred labelling, so it is reported rather than
    normalized).
    """

    slices: tuple[EndpointSlice, ...]
    dichotomy: bool
    identity_at: int | None
    base_point_ideal: tuple[Polynomial, ...]
    detail: str = ""


def _slice_chart(
    chart: ContractedChart,
    value: int,
    alpha: Correspondence,
    datum: ContractionDatum,
    budget: Budget,
) -> Correspondence:
    """Restrict a chart to one endpoint of the parameter.

    The chart's localizing function is evaluated at the endpoint; when it
    stays a nonzero constant the slice lives over the original source,
    otherwise over the source localized at the evaluated function.  The
    auxiliary inverse of the pulled-back weight is collapsed away using
    the datum's invariants (the weight is 1 at parameter 0; its inverse
    at parameter 1 is stored).
    """
    source = alpha.source
    corr = chart.correspondence
    field = source.ring.field
    uname = [v for v in chart.generator.ring.names if v not in source.ring.names][0]
    at_value = chart.generator.substitute(
        {uname: chart.generator.ring.const(value)}, chart.generator.ring
    )
    shrunk = at_value.map_ring(source.ring)
    constant_gen = shrunk.is_constant()
    if constant_gen:
        if shrunk.is_zero():
            raise ContractionError(
                "chart function vanishes identically at an endpoint"
            )
        sliced_source = source
        aux_image_value = field.inv(shrunk.constant_value())
    else:
        sliced_source, aux2 = localize(source, shrunk, hint="lg")

    pieces = []
    collapse_maps = []
    for piece, original, u2, lg, wv in zip(
        corr.pieces, alpha.pieces, chart.u_names, chart.loc_names, chart.winv_names
    ):
        ring = piece.ring
        drop = [u2, lg] if constant_gen else [u2]
        small = ring.drop(drop)
        images = {u2: ring.const(value)}
        if constant_gen:
            images[lg] = ring.const(aux_image_value)

        def down(p: Polynomial) -> Polynomial:
            return p.substitute(images, ring).map_ring(small)

        relations = [q for q in (down(r) for r in piece.relations) if not q.is_zero()]
        src = {}
        for name in source.ring.names:
            src[name] = down(piece.src(name))
        if not constant_gen:
            src[aux2] = small.var(lg)
        tgt = {v: down(piece.tgt(v)) for v in datum.scheme.ring.names}
        pieces.append(make_piece(small, relations, src, tgt, sliced_source, datum.scheme))

        if not wv:
            collapse_maps.append({})
        elif value == 0:
            collapse_maps.append({wv: small.one()})
        else:
            # at parameter 1 the pulled weight is the weight at 1 composed
            # with the original target leg, whose stored inverse pulls back
            # the same way
            inv_total = datum.w_one_inverse.substitute(
                {
                    v: original.tgt(v).map_ring(ring)
                    for v in datum.scheme.ring.names
                },
                ring,
            )
            collapse_maps.append({wv: down(inv_total)})
    sliced = Correspondence(sliced_source, datum.scheme, tuple(pieces))
    return collapse_variables(sliced, collapse_maps, budget=budget)


def _lands_on_base_point(
    sliced: Correspondence, datum: ContractionDatum, budget: Budget
) -> bool:
    for piece in sliced.pieces:
        basis = groebner_basis(list(piece.relations), budget=budget)
        for name in datum.scheme.ring.names:
            gap = piece.tgt(name) - piece.ring.const(datum.base_value(name))
            if not normal_form(gap, basis, budget=budget).is_zero():
                return False
    return True


def _matches_input(
    sliced: Correspondence, alpha: Correspondence, budget: Budget
) -> bool:
    """Compare an endpoint slice with the original correspondence.

    When the slice lives over a genuine localization of the source, the
    original is base-changed there first so the feet agree.
    """
    if sliced.source != alpha.source:
        aux = [v for v in sliced.source.ring.names if v not in alpha.source.ring.names]
        if len(aux) != 1:
            return False
        g = _localized_function(sliced.source, aux[0])
        pieces = []
        for piece in alpha.pieces:
            lg2 = fresh_name(aux[0], piece.ring.names)
            ring = piece.ring.extend([lg2])
            g_up = g.substitute(
                {v: piece.src(v).map_ring(ring) for v in alpha.source.ring.names}, ring
            )
            relations = [r.map_ring(ring) for r in piece.relations]
            relations.append(g_up * ring.var(lg2) - ring.one())
            src = {v: piece.src(v).map_ring(ring) for v in alpha.source.ring.names}
            src[aux[0]] = ring.var(lg2)
            tgt = {v: piece.tgt(v).map_ring(ring) for v in alpha.target.ring.names}
            pieces.append(
                make_piece(ring, relations, src, tgt, sliced.source, alpha.target)
            )
        alpha = Correspondence(sliced.source, alpha.target, tuple(pieces))
    try:
        return equals(sliced, alpha, budget=budget)
    except SpanError:
        return False


def _localized_function(scheme: AffineScheme, aux: str) -> Polynomial:
    """Recover g from the unit relation g * aux - 1 in a localized scheme."""
    small = scheme.ring.drop([aux])
    for rel in scheme.relations:
        if aux not in rel.variables():
            continue
        candidate = (rel + scheme.ring.one()).substitute(
            {aux: scheme.ring.one()}, scheme.ring
        )
        try:
            return candidate.map_ring(small)
        except (KeyError, ValueError):
            continue
    raise ContractionError(f"no unit relation found for {aux!r}")


def verify_contraction_endpoints(
    alpha: Correspondence,
    datum: ContractionDatum,
    contracted: ContractedCorrespondence | None = None,
    budget: Budget | None = None,
) -> EndpointReport:
    """Check the endpoint dichotomy of a contraction.

    Each chart is restricted to parameter values 0 and 1; exactly one of
    the two slices must equal the input correspondence and the other must
    send every target coordinate to the base point.  Which endpoint plays
    which role is reported, not assumed.  All charts must agree.
    """
    budget = ensure_budget(budget, "endpoint check")
    if contracted is None:
        contracted = contract(alpha, datum, budget=budget)
    per_value: dict[int, tuple[bool, bool]] = {}
    consistent = True
    for value in (0, 1):
        matches = None
        lands = None
        for chart in contracted.charts:
            sliced = _slice_chart(chart, value, alpha, datum, budget)
            m = _matches_input(sliced, alpha, budget)
            l = _lands_on_base_point(sliced, datum, budget)
            if matches is None:
                matches, lands = m, l
            elif (m, l) != (matches, lands):
                consistent = False
        per_value[value] = (bool(matches), bool(lands))
    slices = tuple(
        EndpointSlice(value, per_value[value][0], per_value[value][1])
        for value in (0, 1)
    )
    eq0, land0 = per_value[0]
    eq1, land1 = per_value[1]
    if eq1 and not eq0:
        identity_at = 1
        dichotomy = land0
    elif eq0 and not eq1:
        identity_at = 0
        dichotomy = land1
    else:
        identity_at = None
        dichotomy = False
    dichotomy = dichotomy and consistent and bool(contracted.charts)
    detail = ""
    if not consistent:
        detail = "charts disagree about the endpoint behaviour"
    elif not contracted.charts:
        detail = "no chart covers the complement"
    elif not dichotomy:
        detail = (
            f"endpoint 0 (matches={eq0}, base point={land0}); "
            f"endpoint 1 (matches={eq1}, base point={land1})"
        )
    return EndpointReport(
        slices,
        dichotomy,
        identity_at,
        base_point_ideal(datum),
        detail,
    )
