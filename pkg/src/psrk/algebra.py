"""Exact arithmetic for tableau coefficients.

Rationals are :class:`fractions.Fraction`. The eight-stage method at the
point ``(c2, c3) = (z1, z2)`` has every coefficient in the cubic field
Q(c2) = {a1 + a2 c2 + a3 c3}, where c2 and c3 are two roots of
z (z - 1/2) (z - 1) = 1/24. :class:`Qc2Element` implements that field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

__all__ = [
    "Fraction",
    "parse_rational",
    "format_rational",
    "Qc2Element",
    "C2",
    "C3",
    "C2_FLOAT",
    "C3_FLOAT",
    "Z1",
    "Z2",
    "Z3",
    "cubic_residual",
    "qc2_mul",
    "qc2_embed",
]

# Roots of z (z - 1/2) (z - 1) = 1/24, from the trigonometric closed form.
Z1 = 0.5 - math.sin(2 * math.pi / 9) / math.sqrt(3)
Z2 = 0.5 - math.sin(2 * math.pi / 9 + 2 * math.pi / 3) / math.sqrt(3)
Z3 = 0.5 - math.sin(2 * math.pi / 9 + 4 * math.pi / 3) / math.sqrt(3)

C2_FLOAT = Z1
C3_FLOAT = 0.5 - math.sin(math.pi / 9) / math.sqrt(3)


def cubic_residual(z: float) -> float:
    """z (z - 1/2) (z - 1) - 1/24."""
    return z * (z - 0.5) * (z - 1.0) - 1.0 / 24.0


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or an integer literal."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# Products of basis elements, as (1, c2, c3) coordinates.
_C2C2 = (Fraction(-1, 12), Fraction(7, 6), Fraction(-1, 6))
_C2C3 = (Fraction(-1, 12), Fraction(1, 6), Fraction(1, 3))
_C3C3 = (Fraction(-1, 3), Fraction(1, 6), Fraction(4, 3))


@dataclass(frozen=True)
class Qc2Element:
    """a1 + a2 c2 + a3 c3 with rational coordinates."""

    a1: Fraction = Fraction(0)
    a2: Fraction = Fraction(0)
    a3: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("a1", "a2", "a3"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    @classmethod
    def coerce(cls, x) -> "Qc2Element":
        if isinstance(x, Qc2Element):
            return x
        if isinstance(x, (int, Rational)):
            return cls(Fraction(x))
        raise TypeError(f"cannot coerce {type(x).__name__} into Q(c2)")

    @property
    def coords(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.a1, self.a2, self.a3)

    def __eq__(self, other) -> bool:
        try:
            o = Qc2Element.coerce(other)
        except TypeError:
            return NotImplemented
        return self.coords == o.coords

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(self.a1)
        return hash(self.coords)

    def is_rational(self) -> bool:
        return self.a2 == 0 and self.a3 == 0

    def __add__(self, other):
        try:
            o = Qc2Element.coerce(other)
        except TypeError:
            return NotImplemented
        return Qc2Element(self.a1 + o.a1, self.a2 + o.a2, self.a3 + o.a3)

    __radd__ = __add__

    def __neg__(self):
        return Qc2Element(-self.a1, -self.a2, -self.a3)

    def __sub__(self, other):
        try:
            o = Qc2Element.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return Qc2Element.coerce(other) - self

    def __mul__(self, other):
        try:
            o = Qc2Element.coerce(other)
        except TypeError:
            return NotImplemented
        return qc2_mul(self, o)

    __rmul__ = __mul__

    def inverse(self) -> "Qc2Element":
        """Multiplicative inverse, by solving the 3x3 multiplication system exactly."""
        if self == ZERO:
            raise ZeroDivisionError("inverse of zero in Q(c2)")
        # Column k of the matrix is self * basis_k.
        cols = [qc2_mul(self, e).coords for e in (ONE, C2, C3)]
        m = [[cols[k][r] for k in range(3)] + [Fraction(int(r == 0))] for r in range(3)]
        for piv in range(3):
            row = next(r for r in range(piv, 3) if m[r][piv] != 0)
            m[piv], m[row] = m[row], m[piv]
            p = m[piv][piv]
            m[piv] = [v / p for v in m[piv]]
            for r in range(3):
                if r != piv and m[r][piv] != 0:
                    f = m[r][piv]
                    m[r] = [v - f * w for v, w in zip(m[r], m[piv])]
        return Qc2Element(m[0][3], m[1][3], m[2][3])

    def __truediv__(self, other):
        try:
            o = Qc2Element.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return Qc2Element.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def __float__(self) -> float:
        return qc2_embed(self)

    def __str__(self) -> str:
        return f"{format_rational(self.a1)} + {format_rational(self.a2)}*c2 + {format_rational(self.a3)}*c3"


def qc2_mul(x: Qc2Element, y: Qc2Element) -> Qc2Element:
    x1, x2, x3 = x.coords
    y1, y2, y3 = y.coords
    r = [x1 * y1, x1 * y2 + x2 * y1, x1 * y3 + x3 * y1]
    for coef, rule in ((x2 * y2, _C2C2), (x2 * y3 + x3 * y2, _C2C3), (x3 * y3, _C3C3)):
        if coef:
            for k in range(3):
                r[k] += coef * rule[k]
    return Qc2Element(*r)


def qc2_embed(x: Qc2Element) -> float:
    """Evaluate in double precision with c2 = z1 and c3 = z2."""
    return float(x.a1) + float(x.a2) * C2_FLOAT + float(x.a3) * C3_FLOAT


ZERO = Qc2Element()
ONE = Qc2Element(Fraction(1))
C2 = Qc2Element(Fraction(0), Fraction(1), Fraction(0))
C3 = Qc2Element(Fraction(0), Fraction(0), Fraction(1))
