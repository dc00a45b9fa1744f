"""End-to-end acceptance gate.

Nine criteria, one test each, ordered roughly bottom-up: Groebner engine
soundness, the effective flatness bound and its two-term extension, the
filtration search, naturality of the blended families, the five-part
slice-identity verifier, the interpolation contraction, the span
algebra, and finally the command-line round trip.  Each test prints a
single ``criterion N (...): PASS`` line and polices its own wall-clock
allowance, so a plain run of this file reads as a scoreboard.

These deliberately re-derive values frozen in the unit suites instead of
importing them: the gate should fail loudly if either side drifts.
"""

from __future__ import annotations

import contextlib
import json
import random
import time
from fractions import Fraction
from pathlib import Path

from flatspan.budget import Budget
from flatspan.cancellation import (
    cancel_family,
    filtration_index,
    flatness_bound,
    flatness_bound_ext,
    shifted_slice,
    slice_locus,
    torus_identity,
    unit_collapse,
    verify_cancellation,
    verify_compat,
)
from flatspan.cli import main
from flatspan.contraction import (
    contract,
    standard_contraction_data,
    verify_contraction_endpoints,
)
from flatspan.fields import GF, QQ
from flatspan.groebner import groebner_basis, ideals_equal, normal_form
from flatspan.orders import GrevLex
from flatspan.poly import Polynomial, PolynomialRing
from flatspan.polyparse import parse_polynomial
from flatspan.reports import load_envelope, recheck_envelope
from flatspan.schemes import affine_line, point, product, torus
from flatspan.spans import (
    Correspondence,
    add,
    certify_finite_flat,
    compose,
    degree,
    equals,
    external_tensor,
    graph_span,
    identity_span,
    make_piece,
    validate_correspondence,
)
from flatspan.workspace import parse_workspace, print_workspace

from oracles import is_groebner_oracle, naive_divide

WORKSPACES = Path(__file__).resolve().parent.parent / "workspaces"

PASS_VERDICTS = {"certified-flf", "flat-by-certificate"}


@contextlib.contextmanager
def criterion(number: int, label: str, limit_s: float):
    """Print one scoreboard line and enforce the wall-clock allowance."""
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"criterion {number} ({label}): FAIL")
        raise
    elapsed = time.perf_counter() - start
    if elapsed >= limit_s:
        print(f"criterion {number} ({label}): FAIL")
        raise AssertionError(
            f"criterion {number} exceeded its {limit_s:.0f}s allowance "
            f"({elapsed:.1f}s)"
        )
    print(f"criterion {number} ({label}): PASS  [{elapsed:.1f}s]")


# ---------------------------------------------------------------------------
# shared constructors (redeclared here on purpose; see the module docstring)


def ring_of(names, field=QQ, inverted=()):
    return PolynomialRing(field, tuple(names), frozenset(inverted))


def laurent_base(field=QQ):
    """Spec k[x][t, 1/t] seen as a span from A^1 x Gm to the point."""
    X = product(affine_line(field, "x"), torus(field, "t"))
    ring = ring_of(["x", "t", "t_inv"], field, inverted=["t"])
    rel = [parse_polynomial("t*t_inv - 1", ring)]
    src = {v: ring.var(v) for v in ring.names}
    piece = make_piece(ring, rel, src, {}, X, point(field))
    return Correspondence(X, point(field), (piece,)), ring


def double_triple_cover(field=QQ):
    """Rank-2 torus self-correspondence: source t -> u^2, target t -> u^3."""
    G = torus(field, "t")
    ring = ring_of(["u", "u_inv"], field, inverted=["u"])
    u, ui = ring.var("u"), ring.var("u_inv")
    piece = make_piece(
        ring,
        [u * ui - ring.one()],
        {"t": u**2, "t_inv": ui**2},
        {"t": u**3, "t_inv": ui**3},
        G,
        G,
    )
    return Correspondence(G, G, (piece,))


def point_span(relation_text, names, field=QQ):
    ring = ring_of(names, field)
    rel = parse_polynomial(relation_text, ring)
    piece = make_piece(ring, [rel], {}, {}, point(field), point(field))
    return Correspondence(point(field), point(field), (piece,))


def torus_graph(k, name="t"):
    gm = torus(QQ, name)
    inv = f"{name}_inv"
    return graph_span(
        gm,
        gm,
        {name: gm.ring.var(name) ** k, inv: gm.ring.var(inv) ** k},
    )


def torus_cover(k, name="t", middle="u"):
    """Transpose of t -> t^k: a degree-k finite flat self-span of Gm."""
    gm = torus(QQ, name)
    ring = ring_of([middle, f"{middle}_inv"], QQ, inverted=[middle])
    u, ui = ring.var(middle), ring.var(f"{middle}_inv")
    inv = f"{name}_inv"
    piece = make_piece(
        ring,
        [u * ui - ring.one()],
        {name: u**k, inv: ui**k},
        {name: u, inv: ui},
        gm,
        gm,
    )
    return Correspondence(gm, gm, (piece,))


# ---------------------------------------------------------------------------
# criterion 1: the Groebner engine itself


def _random_ideal(rng, ring):
    gens = []
    for _ in range(rng.randint(1, 3)):
        terms = {}
        for _ in range(rng.randint(1, 4)):
            exp = tuple(rng.randint(0, 3) for _ in ring.names)
            if sum(exp) > 3:
                exp = tuple(min(e, 1) for e in exp)
            terms[exp] = ring.field.from_int(rng.randint(-4, 4))
        p = Polynomial(ring, terms)
        if not p.is_zero():
            gens.append(p)
    return gens or [ring.var(ring.names[0])]


def test_criterion_1_groebner_soundness():
    """56 random ideals over QQ and GF(5): oracle, idempotence, schedule
    independence, and membership of explicit combinations."""
    rng = random.Random(108)
    with criterion(1, "groebner soundness", 60):
        checked = 0
        for field in (QQ, GF(5)):
            for _ in range(28):
                nvars = rng.randint(1, 3)
                ring = PolynomialRing(field, ("x", "y", "z")[:nvars])
                gens = _random_ideal(rng, ring)
                basis = groebner_basis(gens)
                order = GrevLex(nvars)
                assert is_groebner_oracle(basis, order)
                # reduced bases are fixed points of the algorithm
                assert groebner_basis(basis) == basis
                # a different S-pair schedule lands on the same reduced basis
                assert groebner_basis(gens, strategy="fifo") == basis
                # explicit ideal combinations reduce to zero
                for g in gens:
                    assert normal_form(g, basis).is_zero()
                    assert naive_divide(g, basis, order).is_zero()
                combo = ring.zero()
                for g in gens:
                    cof = Polynomial(
                        ring,
                        {
                            tuple(
                                rng.randint(0, 1) for _ in ring.names
                            ): field.from_int(rng.randint(-3, 3))
                        },
                    )
                    combo = combo + cof * g
                assert normal_form(combo, basis).is_zero()
                checked += 1
        assert checked >= 50


# ---------------------------------------------------------------------------
# criterion 2: the effective flatness bound


def test_criterion_2_effective_bound():
    """Valuation bound on ten (span, function) pairs, flatness of every
    slice just above the bound, and explicit non-flat witnesses at or
    below it."""
    with criterion(2, "effective bound", 120):
        Z, R = laurent_base()
        Z5, R5 = laurent_base(GF(5))
        cov = double_triple_cover()
        cov_ring = cov.pieces[0].ring
        pairs = [
            (Z, parse_polynomial("x*t_inv^2", R), 2),
            (Z, parse_polynomial("3", R), 0),
            (Z, parse_polynomial("x*t_inv", R), 1),
            (Z, parse_polynomial("x^2*t_inv^3", R), 3),
            (Z, parse_polynomial("x*t", R), 0),
            (Z, parse_polynomial("x + t_inv", R), 1),
            (Z, parse_polynomial("t^2 + x*t_inv^2", R), 2),
            (Z, parse_polynomial("5*t_inv", R), 1),
            (Z5, parse_polynomial("x*t_inv^2", R5), 2),
            (cov, parse_polynomial("u_inv", cov_ring), 1),
        ]
        assert len(pairs) >= 8
        for span, f, expected in pairs:
            report = flatness_bound(span, f)
            assert report.n_bound == expected, (str(f), report.n_bound)
            for n in range(expected + 1, expected + 5):
                verdict = slice_locus(span, f, n).verdict
                assert verdict in PASS_VERDICTS, (str(f), n, verdict)
        # at or below the bound flatness genuinely fails, with a witness
        failing = [
            ("x*t_inv^2", 2, "x - 1"),
            ("x*t_inv", 1, "x - 1"),
            ("x^2*t_inv^3", 3, "x^2 - 1"),
        ]
        for text, n, witness_text in failing:
            rep = slice_locus(Z, parse_polynomial(text, R), n)
            assert rep.verdict == "not-flat", (text, n, rep.verdict)
            assert rep.witness, (text, n)
            wring = rep.witness[0].ring
            assert [str(w) for w in rep.witness] == [witness_text]
            assert all(not w.is_zero() for w in rep.witness)
            # the witness generates a proper, nonzero torsion ideal
            assert not ideals_equal(list(rep.witness), [wring.one()])
            assert not ideals_equal(list(rep.witness), [])


# ---------------------------------------------------------------------------
# criterion 3: the two-term extension of the bound


def test_criterion_3_extended_bound():
    """One uniform bound covers every shifted combination f1 t^a + f2 t^b."""
    with criterion(3, "extended bound", 120):
        Z, R = laurent_base()
        pairs = [
            ("x*t_inv", "1", 1),
            ("x*t_inv^2", "t_inv", 2),
            ("x", "x*t_inv", 1),
        ]
        assert len(pairs) >= 3
        for t1, t2, expected in pairs:
            f1, f2 = parse_polynomial(t1, R), parse_polynomial(t2, R)
            report = flatness_bound_ext(Z, f1, f2)
            assert report.n_bound == expected, (t1, t2, report.n_bound)
            for a in range(3):
                for b in range(3):
                    for n in range(expected + 1, expected + 3):
                        rep = shifted_slice(Z, f1, f2, a, b, n)
                        assert rep.verdict in PASS_VERDICTS, (
                            t1,
                            t2,
                            a,
                            b,
                            n,
                            rep.verdict,
                        )


# ---------------------------------------------------------------------------
# criterion 4: the filtration search and the diagonal ranks


def test_criterion_4_filtration():
    """Window-6 search certifies an index for the whole pool, and the
    diagonal blended families of the identity have the expected ranks."""
    with criterion(4, "filtration index", 300):
        pool = [
            unit_collapse(QQ),
            torus_identity(QQ),
            torus_graph(2),
            torus_graph(3),
            double_triple_cover(),
        ]
        for span in pool:
            rep = filtration_index(span, window=6, budget=Budget(10**8))
            assert rep.index is not None
            assert rep.index <= 8
            # a triple just below the index fails, so the index is sharp
            if rep.index > 1:
                assert rep.blocking is not None
                m, n, sign = rep.blocking
                assert min(m, n) == rep.index - 1
            # uniform full-window flatness certificates, one per sign
            assert rep.bound_plus.entries and rep.bound_minus.entries
            assert rep.bound_plus.n_bound >= 0
            assert rep.bound_minus.n_bound >= 0
        gm_id = torus_identity(QQ)
        for n in range(1, 6):
            fam = cancel_family(gm_id, n, n, "+")
            assert fam.certified, (n, fam.certificate.status)
            assert fam.certificate.rank == n


# ---------------------------------------------------------------------------
# criterion 5: naturality of the blended families


def test_criterion_5_naturality():
    """20 random (alpha, beta, gamma, m, n, sign) draws satisfy both
    compatibility identities on the nose."""
    rng = random.Random(205)
    with criterion(5, "naturality", 180):
        alphas = [
            double_triple_cover(),
            unit_collapse(QQ),
            torus_identity(QQ),
        ]

        def random_point(name):
            d = rng.randint(2, 3)
            ring = ring_of([name])
            v = ring.var(name)
            rel = v**d
            for i in range(d):
                rel = rel + ring.const(QQ.from_int(rng.randint(-3, 3))) * v**i
            return point_span(str(rel), [name])

        for draw in range(20):
            alpha = alphas[rng.randrange(len(alphas))]
            beta = random_point("b")
            gamma = random_point("c")
            m, n = rng.randint(1, 3), rng.randint(1, 3)
            sign = rng.choice("+-")
            rep = verify_compat(alpha, beta, gamma, m, n, sign)
            assert rep.ok, (draw, m, n, sign, rep.detail)


# ---------------------------------------------------------------------------
# criterion 6: the five-part slice-identity verifier


def test_criterion_6_slice_identity_verifier():
    """All five sub-checks at levels 1..6 over QQ and 1..4 over GF(5)."""
    with criterion(6, "slice-identity verifier", 120):
        failures = []
        for field, top in ((QQ, 6), (GF(5), 4)):
            for n in range(1, top + 1):
                rep = verify_cancellation(n, field)
                assert len(rep.checks) == 5
                if not rep.ok:
                    failures.append(
                        (rep.field_name, n, [(c.name, c.detail) for c in rep.failures()])
                    )
        assert not failures, f"verifier failures: {failures}"


# ---------------------------------------------------------------------------
# criterion 7: the interpolation contraction


def test_criterion_7_contraction():
    """Standard interpolation data builds cleanly at ranks 1..4, and the
    whole sample pool contracts with the exact endpoint dichotomy."""
    with criterion(7, "contraction", 180):
        for n in range(1, 5):
            datum = standard_contraction_data(n)
            assert len(datum.scheme.ring.names) == 2 * n
            assert len(datum.base_point) == 2 * n
            assert dict(datum.base_point)[datum.scheme.ring.names[0]] is not None

        gm = torus(QQ, "t")

        def rational_point(a):
            ring = ring_of([])
            value = QQ.from_fraction(a, 1) if isinstance(a, int) else a
            images = {"t": ring.const(value), "t_inv": ring.const(QQ.inv(value))}
            piece = make_piece(ring, [], {}, images, point(QQ), gm)
            return Correspondence(point(QQ), gm, (piece,))

        def sqrt_two_span():
            ring = ring_of(["z"])
            z = ring.var("z")
            images = {"t": z, "t_inv": ring.const(Fraction(1, 2)) * z}
            piece = make_piece(ring, [z * z - ring.const(2)], {}, images, point(QQ), gm)
            return Correspondence(point(QQ), gm, (piece,))

        pool = [
            identity_span(gm),
            rational_point(2),
            rational_point(3),
            rational_point(Fraction(1, 2)),
            sqrt_two_span(),
            torus_cover(2, middle="w"),
        ]
        datum = standard_contraction_data(1)
        for alpha in pool:
            validate_correspondence(alpha)
            before = degree(alpha)
            con = contract(alpha, datum)
            # no point of the restricted middle sits above parameter 0 or 1
            assert con.avoids_zero and con.avoids_one
            assert con.ok and con.rank == before
            report = verify_contraction_endpoints(alpha, datum, con)
            assert report.dichotomy, report.detail
            zero, one = report.slices
            assert zero.value == 0 and one.value == 1
            assert zero.lands_on_base_point and not zero.matches_input
            assert one.matches_input and not one.lands_on_base_point


# ---------------------------------------------------------------------------
# criterion 8: the span algebra


def test_criterion_8_span_algebra():
    """Associativity on 10 random certified triples; degree is
    multiplicative under composition and tensor, additive under sums."""
    rng = random.Random(808)
    with criterion(8, "span algebra", 120):
        pool = [
            torus_graph(1),
            torus_graph(2),
            torus_graph(3),
            torus_cover(2),
            torus_cover(3),
        ]
        for span in pool:
            validate_correspondence(span)
            assert certify_finite_flat(span).certified
        for _ in range(10):
            a, b, c = (pool[rng.randrange(len(pool))] for _ in range(3))
            assert equals(compose(compose(a, b), c), compose(a, compose(b, c)))
        for a in pool:
            for b in pool:
                assert degree(compose(a, b)) == degree(a) * degree(b)
                assert degree(add(a, b)) == degree(a) + degree(b)
        upool = [torus_graph(2, name="v"), torus_cover(2, name="v", middle="z")]
        for a in pool:
            for b in upool:
                assert degree(external_tensor(a, b)) == degree(a) * degree(b)


# ---------------------------------------------------------------------------
# criterion 9: the command-line round trip


def test_criterion_9_cli_round_trip(tmp_path, capsys):
    """Golden documents parse back to themselves, every emitted report
    envelope re-validates, and the exit-code contract holds on forced
    failure and forced budget exhaustion."""
    with criterion(9, "cli round trip", 60):
        docs = sorted(WORKSPACES.glob("*.fsw"))
        assert len(docs) >= 5
        for path in docs:
            text = path.read_text(encoding="utf-8")
            assert print_workspace(parse_workspace(text)) == text, path.name
        for path in docs:
            out = tmp_path / (path.stem + ".json")
            code = main(
                ["run", str(path), "--format", "structured", "--out", str(out)]
            )
            capsys.readouterr()
            payload = load_envelope(out.read_text(encoding="utf-8"))
            assert code == payload["exit_code"]
            ok, messages = recheck_envelope(
                payload, path.read_text(encoding="utf-8")
            )
            assert ok, (path.name, messages)
            # the CLI recheck path agrees
            assert main(["run", str(path), "--recheck", str(out)]) == 0
            capsys.readouterr()
        report_codes = {
            json.loads((tmp_path / (p.stem + ".json")).read_text())["exit_code"]
            for p in docs
        }
        assert report_codes == {0, 1}
        # forced failure: the shipped non-finite certification document
        assert main(["run", str(WORKSPACES / "failing-checks.fsw")]) == 1
        capsys.readouterr()
        # forced budget exhaustion maps to the inconclusive exit code
        assert (
            main(
                [
                    "run",
                    str(WORKSPACES / "level3-verifier.fsw"),
                    "--budget",
                    "40",
                ]
            )
            == 3
        )
        capsys.readouterr()
