"""Contraction of certified correspondences along interpolation data."""

from __future__ import annotations

from fractions import Fraction

import pytest

from flatspan.contraction import (
    ContractionError,
    base_point_ideal,
    contract,
    make_contraction_datum,
    standard_contraction_data,
    verify_contraction_endpoints,
)
from flatspan.fields import QQ
from flatspan.groebner import ideals_equal
from flatspan.poly import PolynomialRing
from flatspan.schemes import point, torus, torus_power
from flatspan.spans import (
    Correspondence,
    add,
    identity_span,
    make_piece,
    validate_correspondence,
)


def punctured_line():
    return torus(QQ, "t")


def rational_point(a):
    """The correspondence pt <- pt -> (A1 minus 0) hitting the value a."""
    target = punctured_line()
    ring = PolynomialRing(QQ, ())
    value = QQ.from_fraction(a, 1) if isinstance(a, int) else a
    images = {"t": ring.const(value), "t_inv": ring.const(QQ.inv(value))}
    piece = make_piece(ring, [], {}, images, point(QQ), target)
    return Correspondence(point(QQ), target, (piece,))


def sqrt_two_span():
    """Rank-2 span over a point whose middle adjoins a square root of 2."""
    target = punctured_line()
    ring = PolynomialRing(QQ, ("z",))
    z = ring.var("z")
    images = {"t": z, "t_inv": ring.const(Fraction(1, 2)) * z}
    piece = make_piece(ring, [z * z - ring.const(2)], {}, images, point(QQ), target)
    return Correspondence(point(QQ), target, (piece,))


def square_root_cover():
    """Rank-2 span over the punctured line taking square roots."""
    target = punctured_line()
    middle = torus(QQ, "w")
    ring = middle.ring
    w, wi = ring.var("w"), ring.var("w_inv")
    src = {"t": w * w, "t_inv": wi * wi}
    tgt = {"t": w, "t_inv": wi}
    piece = make_piece(ring, list(middle.relations), src, tgt, target, target)
    return Correspondence(target, target, (piece,))


def plane_point(a, b):
    target = torus_power(QQ, 2)
    ring = PolynomialRing(QQ, ())
    va = QQ.from_fraction(a, 1) if isinstance(a, int) else a
    vb = QQ.from_fraction(b, 1) if isinstance(b, int) else b
    images = {
        "t1": ring.const(va),
        "t1_inv": ring.const(QQ.inv(va)),
        "t2": ring.const(vb),
        "t2_inv": ring.const(QQ.inv(vb)),
    }
    piece = make_piece(ring, [], {}, images, point(QQ), target)
    return Correspondence(point(QQ), target, (piece,))


# ---------------------------------------------------------------------------
# interpolation data


def test_standard_data_on_one_coordinate():
    datum = standard_contraction_data(1)
    assert datum.primary == ("t",)
    assert str(datum.w) == "t*u - u + 1"
    assert str(datum.f_image("t")) == "t*u - u + 1"
    assert str(datum.cofactor("t")) == "1"
    assert str(datum.w_one_inverse) == "t_inv"


def test_standard_data_on_two_coordinates():
    datum = standard_contraction_data(2)
    assert datum.primary == ("t1", "t2")
    assert (
        str(datum.w)
        == "t1*t2*u^2 - t1*u^2 - t2*u^2 + t1*u + t2*u + u^2 - 2*u + 1"
    )
    assert str(datum.w_one_inverse) == "t1_inv*t2_inv"


def test_standard_data_builds_for_small_ranks():
    for n in range(1, 5):
        datum = standard_contraction_data(n)
        assert len(datum.primary) == n
        assert datum.u_name == "u"
        assert set(datum.u_ring.names) == set(datum.scheme.ring.names) | {"u"}


def test_standard_data_rejects_zero_coordinates():
    with pytest.raises(ContractionError):
        standard_contraction_data(0)


def test_base_point_sits_at_one():
    datum = standard_contraction_data(1)
    assert [str(g) for g in base_point_ideal(datum)] == ["t - 1"]
    datum2 = standard_contraction_data(2)
    assert [str(g) for g in base_point_ideal(datum2)] == ["t1 - 1", "t2 - 1"]


def test_weight_must_be_one_at_parameter_zero():
    scheme = punctured_line()
    good = standard_contraction_data(1)
    uring = good.u_ring
    u, t = uring.var("u"), uring.var("t")
    with pytest.raises(ContractionError, match="parameter 0"):
        make_contraction_datum(
            scheme,
            {"t": QQ.from_int(1)},
            "u",
            u * t,
            {"t": good.f_image("t")},
            {"t": uring.one()},
            good.w_one_inverse,
        )


def test_flow_must_restore_coordinates_at_parameter_one():
    scheme = punctured_line()
    good = standard_contraction_data(1)
    uring = good.u_ring
    u, t = uring.var("u"), uring.var("t")
    with pytest.raises(ContractionError, match="restore"):
        make_contraction_datum(
            scheme,
            {"t": QQ.from_int(1)},
            "u",
            good.w,
            {"t": u * t * t + uring.one() - u},
            {"t": uring.one()},
            good.w_one_inverse,
        )


def test_base_point_companions_must_be_inverse():
    scheme = punctured_line()
    good = standard_contraction_data(1)
    with pytest.raises(ContractionError, match="not inverse"):
        make_contraction_datum(
            scheme,
            {"t": QQ.from_int(1), "t_inv": QQ.from_int(2)},
            "u",
            good.w,
            dict(good.f_images),
            dict(good.cofactors),
            good.w_one_inverse,
        )


def test_cofactors_must_multiply_back_to_the_weight():
    scheme = punctured_line()
    good = standard_contraction_data(1)
    uring = good.u_ring
    with pytest.raises(ContractionError, match="cofactor"):
        make_contraction_datum(
            scheme,
            {"t": QQ.from_int(1)},
            "u",
            good.w,
            dict(good.f_images),
            {"t": uring.var("u")},
            good.w_one_inverse,
        )


# ---------------------------------------------------------------------------
# the avoided locus


def test_identity_contraction_locus():
    alpha = identity_span(punctured_line())
    datum = standard_contraction_data(1)
    result = contract(alpha, datum)
    assert [str(g) for g in result.source_ideal] == ["t*u - u + 1"]
    assert result.avoids_zero and result.avoids_one
    assert result.rank == 1
    assert len(result.charts) == 1
    assert result.charts[0].certificate.certified


def test_rational_point_two_locus():
    result = contract(rational_point(2), standard_contraction_data(1))
    assert [str(g) for g in result.source_ideal] == ["u + 1"]
    ring = result.source_ideal[0].ring
    u = ring.var("u")
    in_segment_form = QQ_const(ring, 2) * u + ring.one() - u
    assert ideals_equal(list(result.source_ideal), [in_segment_form])


def QQ_const(ring, a):
    return ring.const(QQ.from_fraction(a, 1) if isinstance(a, int) else a)


@pytest.mark.parametrize(
    "value, locus",
    [(3, "u + 1/2"), (Fraction(1, 2), "u - 2"), (-1, "u - 1/2")],
)
def test_other_rational_point_loci(value, locus):
    result = contract(rational_point(value), standard_contraction_data(1))
    assert [str(g) for g in result.source_ideal] == [locus]
    assert result.avoids_zero and result.avoids_one


def test_quadratic_point_locus():
    result = contract(sqrt_two_span(), standard_contraction_data(1))
    assert [str(g) for g in result.source_ideal] == ["u^2 + 2*u - 1"]
    ring = result.source_ideal[0].ring
    u = ring.var("u")
    one = ring.one()
    segment_form = ring.const(2) * u * u - (one - u) * (one - u)
    assert ideals_equal(list(result.source_ideal), [segment_form])
    assert result.rank == 2


def test_quadratic_chart_avoids_a_reciprocal_variable():
    result = contract(sqrt_two_span(), standard_contraction_data(1))
    assert result.charts[0].winv_names == ("",)
    assert result.charts[0].certificate.rank == 2


def test_square_root_cover_locus():
    result = contract(square_root_cover(), standard_contraction_data(1))
    assert [str(g) for g in result.source_ideal] == ["t*u^2 - u^2 + 2*u - 1"]
    assert result.rank == 2
    assert result.avoids_zero and result.avoids_one


def test_sum_of_points_shares_one_chart():
    pair = add(rational_point(2), rational_point(3))
    result = contract(pair, standard_contraction_data(1))
    assert [str(g) for g in result.source_ideal] == ["u^2 + 3/2*u + 1/2"]
    assert len(result.charts) == 1
    assert len(result.charts[0].correspondence.pieces) == 2
    assert result.rank == 2


def test_plane_point_locus():
    result = contract(plane_point(2, 3), standard_contraction_data(2))
    assert [str(g) for g in result.source_ideal] == ["u^2 + 3/2*u + 1/2"]
    assert result.rank == 1


def test_identity_on_the_square_pulls_back_the_weight():
    datum = standard_contraction_data(2)
    alpha = identity_span(datum.scheme)
    result = contract(alpha, datum)
    ring = result.source_ideal[0].ring
    assert ideals_equal(list(result.source_ideal), [datum.w.map_ring(ring)])
    assert result.rank == 1


def test_chain_reports_every_stage():
    result = contract(rational_point(2), standard_contraction_data(1))
    labels = [label for label, _ in result.chain]
    assert labels == [
        "weight-locus",
        "middle-pullback",
        "source-image",
        "complement-cover",
        "restricted-middle",
    ]
    stages = dict(result.chain)
    assert stages["source-image"] == result.source_ideal
    assert [str(g) for g in stages["middle-pullback"]] == ["u + 1"]


def test_contract_requires_a_certificate():
    target = punctured_line()
    ring = PolynomialRing(QQ, ("v",))
    images = {"t": ring.const(2), "t_inv": ring.const(Fraction(1, 2))}
    loose = Correspondence(
        point(QQ), target, (make_piece(ring, [], {}, images, point(QQ), target),)
    )
    with pytest.raises(ContractionError, match="certified"):
        contract(loose, standard_contraction_data(1))


def test_contract_requires_matching_target():
    with pytest.raises(ContractionError, match="target"):
        contract(identity_span(point(QQ)), standard_contraction_data(1))


# ---------------------------------------------------------------------------
# endpoint dichotomy


def pool_member(name):
    if name == "identity":
        return identity_span(punctured_line())
    if name == "point-2":
        return rational_point(2)
    if name == "point-3":
        return rational_point(3)
    if name == "point-half":
        return rational_point(Fraction(1, 2))
    if name == "sqrt-two":
        return sqrt_two_span()
    if name == "cover":
        return square_root_cover()
    raise KeyError(name)


POOL = ["identity", "point-2", "point-3", "point-half", "sqrt-two", "cover"]


@pytest.mark.parametrize("name", POOL)
def test_endpoint_dichotomy_on_the_pool(name):
    alpha = pool_member(name)
    validate_correspondence(alpha)
    datum = standard_contraction_data(1)
    result = contract(alpha, datum)
    assert result.avoids_zero and result.avoids_one
    report = verify_contraction_endpoints(alpha, datum, result)
    assert report.dichotomy, report.detail
    assert report.identity_at == 1
    zero, one = report.slices
    assert zero.value == 0 and one.value == 1
    assert zero.lands_on_base_point and not zero.matches_input
    assert one.matches_input and not one.lands_on_base_point


def test_endpoint_report_names_the_base_point_ideal():
    alpha = rational_point(2)
    datum = standard_contraction_data(1)
    report = verify_contraction_endpoints(alpha, datum)
    assert [str(g) for g in report.base_point_ideal] == ["t - 1"]


def test_endpoints_on_a_sum_of_points():
    pair = add(rational_point(2), rational_point(3))
    datum = standard_contraction_data(1)
    report = verify_contraction_endpoints(pair, datum)
    assert report.dichotomy
    assert report.identity_at == 1


def test_endpoints_on_the_square():
    alpha = plane_point(2, 3)
    datum = standard_contraction_data(2)
    report = verify_contraction_endpoints(alpha, datum)
    assert report.dichotomy
    assert report.identity_at == 1


def test_cover_endpoint_uses_a_localized_comparison():
    # at parameter 1 the chart function specializes to t, which is not a
    # unit constant, so the slice is compared over the localized source
    alpha = square_root_cover()
    datum = standard_contraction_data(1)
    result = contract(alpha, datum)
    chart = result.charts[0]
    at_one = chart.generator.substitute(
        {"u": chart.generator.ring.const(1)}, chart.generator.ring
    )
    assert not at_one.is_constant()
    report = verify_contraction_endpoints(alpha, datum, result)
    assert report.dichotomy
    assert report.identity_at == 1
