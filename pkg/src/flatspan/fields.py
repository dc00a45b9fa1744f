"""Exact coefficient fields: the rationals and prime fields.

Coefficients are plain Python values (``fractions.Fraction`` for QQ, small
ints for GF(p)); the field object supplies the arithmetic.  This keeps the
polynomial layer free of per-coefficient wrapper objects.
"""

from __future__ import annotations

from fractions import Fraction


class FieldError(ValueError):
    pass


class Field:
    """Common interface for exact coefficient fields."""

    characteristic: int

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def from_int(self, n: int):
        raise NotImplementedError

    def from_fraction(self, num: int, den: int):
        raise NotImplementedError

    def to_str(self, a) -> str:
        raise NotImplementedError

    @property
    def zero(self):
        return self.from_int(0)

    @property
    def one(self):
        return self.from_int(1)


class RationalField(Field):
    """The field of rational numbers with arbitrary-precision arithmetic."""

    characteristic = 0

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise FieldError("division by zero in QQ")
        return 1 / Fraction(a)

    def from_int(self, n: int):
        return Fraction(n)

    def from_fraction(self, num: int, den: int):
        if den == 0:
            raise FieldError("zero denominator")
        return Fraction(num, den)

    def to_str(self, a) -> str:
        a = Fraction(a)
        if a.denominator == 1:
            return str(a.numerator)
        return f"{a.numerator}/{a.denominator}"

    def __repr__(self) -> str:
        return "QQ"

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("QQ")


class PrimeField(Field):
    """GF(p) for a prime p; elements are ints in [0, p)."""

    def __init__(self, p: int):
        if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise FieldError(f"{p} is not prime")
        self.p = p
        self.characteristic = p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        a %= self.p
        if a == 0:
            raise FieldError(f"division by zero in GF({self.p})")
        return pow(a, self.p - 2, self.p)

    def from_int(self, n: int):
        return n % self.p

    def from_fraction(self, num: int, den: int):
        if den % self.p == 0:
            raise FieldError(f"denominator {den} is zero in GF({self.p})")
        return (num * self.inv(den)) % self.p

    def to_str(self, a) -> str:
        return str(a % self.p)

    def __repr__(self) -> str:
        return f"GF({self.p})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("GF", self.p))


QQ = RationalField()


def GF(p: int) -> PrimeField:
    return PrimeField(p)


def field_from_name(name: str) -> Field:
    """Parse a field tag: ``QQ`` or ``Fp:<p>`` (also accepts ``Fp <p>``)."""
    name = name.strip()
    if name == "QQ":
        return QQ
    for sep in (":", " "):
        if name.startswith("Fp" + sep):
            try:
                return GF(int(name[3:]))
            except FieldError:
                raise
            except ValueError:
                break
    raise FieldError(f"unknown field {name!r}; expected QQ or Fp:<p>")


def field_name(field: Field) -> str:
    if isinstance(field, RationalField):
        return "QQ"
    if isinstance(field, PrimeField):
        return f"Fp:{field.p}"
    raise FieldError(f"unknown field object {field!r}")
