"""Affine schemes presented by generators and relations.

A scheme is a ring with a list of defining relations; localized variables
follow the companion convention (``v`` invertible means ``v_inv`` is a
ring variable and ``v*v_inv - 1`` a relation).  The constructors cover the
bases this package works over: points, affine lines, punctured lines and
finite products of those.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .fields import Field
from .poly import Polynomial, PolynomialRing, companion_name, fresh_name


@dataclass(frozen=True)
class AffineScheme:
    ring: PolynomialRing
    relations: tuple[Polynomial, ...]
    label: str = dc_field(default="", compare=False)

    def __post_init__(self):
        for rel in self.relations:
            if rel.ring != self.ring:
                raise ValueError("scheme relation lives in a different ring")

    @property
    def field(self) -> Field:
        return self.ring.field


def point(field: Field) -> AffineScheme:
    return AffineScheme(PolynomialRing(field, ()), (), label="pt")


def affine_line(field: Field, name: str = "t") -> AffineScheme:
    return AffineScheme(PolynomialRing(field, (name,)), (), label=f"A1({name})")


def torus(field: Field, name: str = "t") -> AffineScheme:
    """The punctured affine line (invertible coordinate)."""
    inv = companion_name(name)
    ring = PolynomialRing(field, (name, inv), frozenset([name]))
    rel = ring.var(name) * ring.var(inv) - ring.one()
    return AffineScheme(ring, (rel,), label=f"Gm({name})")


def product(left: AffineScheme, right: AffineScheme) -> AffineScheme:
    if left.field != right.field:
        raise ValueError("cannot form a product over different fields")
    clash = set(left.ring.names) & set(right.ring.names)
    if clash:
        raise ValueError(f"product factors share variable names {sorted(clash)}")
    ring = PolynomialRing(
        left.field,
        left.ring.names + right.ring.names,
        left.ring.inverted | right.ring.inverted,
    )
    rels = tuple(r.map_ring(ring) for r in left.relations) + tuple(
        r.map_ring(ring) for r in right.relations
    )
    label = f"{left.label or '?'}x{right.label or '?'}"
    return AffineScheme(ring, rels, label=label)


def torus_power(field: Field, n: int, stem: str = "t") -> AffineScheme:
    """(A1 minus 0)^n with coordinates stem1..stemN."""
    if n < 1:
        raise ValueError("need at least one factor")
    out = torus(field, f"{stem}1")
    for i in range(2, n + 1):
        out = product(out, torus(field, f"{stem}{i}"))
    return AffineScheme(out.ring, out.relations, label=f"Gm^{n}")


def localize(scheme: AffineScheme, g: Polynomial, hint: str = "loc") -> tuple[AffineScheme, str]:
    """Scheme with ``g`` inverted via a fresh inverse variable; returns the
    new scheme and the name of the inverse variable."""
    if g.ring != scheme.ring:
        raise ValueError("localizing element lives in a different ring")
    name = fresh_name(hint, scheme.ring.names)
    ring = scheme.ring.extend([name])
    rel = g.map_ring(ring) * ring.var(name) - ring.one()
    rels = tuple(r.map_ring(ring) for r in scheme.relations) + (rel,)
    return AffineScheme(ring, rels, label=scheme.label and f"{scheme.label}[1/{hint}]"), name


def strip_coordinates(scheme: AffineScheme, names: list[str]) -> AffineScheme:
    """Remove product coordinates (with companions) from a scheme.

    Only relations involving the removed variables must be their unit
    relations; anything else means the scheme was not a product along
    those coordinates.
    """
    gone = set(names)
    for v in list(gone):
        if v in scheme.ring.inverted:
            gone.add(companion_name(v))
    kept_rels = []
    ring = scheme.ring.drop(gone)
    for rel in scheme.relations:
        used = rel.variables()
        if used & gone:
            touched = sorted(used & gone)
            base = touched[0].removesuffix("_inv")
            unit = (
                scheme.ring.var(base) * scheme.ring.var(companion_name(base)) - scheme.ring.one()
                if companion_name(base) in scheme.ring.names
                else None
            )
            if unit is not None and (rel == unit or rel == -unit):
                continue
            raise ValueError(
                f"cannot strip {sorted(gone)}: relation {rel!r} ties them to the rest"
            )
        kept_rels.append(rel.map_ring(ring))
    return AffineScheme(ring, tuple(kept_rels), label=scheme.label)


def detect_torus_coordinate(scheme: AffineScheme) -> str:
    """The unique inverted coordinate of a scheme, when unambiguous."""
    marked = sorted(scheme.ring.inverted)
    if len(marked) != 1:
        raise ValueError(
            f"scheme has {len(marked)} inverted coordinates {marked}; specify one explicitly"
        )
    return marked[0]
