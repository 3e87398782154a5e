"""Butcher tableaux: data model, built-in methods, symmetry checks and file I/O."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .algebra import (
    C2 as C2_EXACT,
    C2_FLOAT,
    C3 as C3_EXACT,
    C3_FLOAT,
    Qc2Element,
    format_rational,
    parse_rational,
)

__all__ = [
    "ButcherTableau",
    "TableauFormatError",
    "TableauValidationError",
    "PoleError",
    "ShapeError",
    "GAMMA",
    "catalog",
    "available_methods",
    "register",
    "resolve_method",
    "family_tableau",
    "family_phi",
    "ParityReport",
    "parity_report",
    "ZETA_COEFFS",
    "zeta",
    "zeta_exact",
    "load_tableau",
    "save_tableau",
    "parse_tableau",
    "format_tableau",
]

ROWSUM_TOL = 1e-10


class TableauFormatError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class TableauValidationError(ValueError):
    pass


class PoleError(ValueError):
    pass


class ShapeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ButcherTableau:
    """An s-stage Runge-Kutta method.

    ``A``, ``b`` and ``c`` are float arrays used for integration. When the
    coefficients are known exactly, ``exact`` holds ``(A, b, c)`` as nested
    sequences of :class:`~fractions.Fraction` or
    :class:`~psrk.algebra.Qc2Element`.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    kind: str = "explicit"
    name: str = ""
    exact: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float)
        c = np.array(self.c, dtype=float)
        s = len(b)
        if A.shape != (s, s) or c.shape != (s,):
            raise ShapeError(f"inconsistent tableau shapes A{A.shape}, b({s},), c{c.shape}")
        for arr in (A, b, c):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        if self.kind not in ("explicit", "implicit"):
            raise TableauValidationError(f"kind must be 'explicit' or 'implicit', got {self.kind!r}")
        if self.kind == "explicit" and np.any(np.triu(A) != 0):
            i, j = np.argwhere(np.triu(A) != 0)[0]
            raise TableauValidationError(f"explicit tableau has nonzero a[{i + 1},{j + 1}] on or above the diagonal")
        self._check_row_sums()

    def _check_row_sums(self):
        if self.exact is not None:
            A, _, c = self.exact
            for i, row in enumerate(A):
                total = sum(row, Fraction(0))
                if (total - c[i]) != 0:
                    raise TableauValidationError(f"row {i + 1}: sum of a[{i + 1},j] differs from c[{i + 1}] exactly")
        dev = np.abs(self.A.sum(axis=1) - self.c)
        if np.any(dev > ROWSUM_TOL):
            i = int(np.argmax(dev))
            raise TableauValidationError(
                f"row {i + 1}: sum of a[{i + 1},j] = {self.A[i].sum()!r} differs from c[{i + 1}] = {self.c[i]!r}"
            )

    @property
    def s(self) -> int:
        return len(self.b)

    @property
    def is_explicit(self) -> bool:
        return self.kind == "explicit"

    @classmethod
    def from_exact(cls, A, b, c, name: str = "", kind: Optional[str] = None) -> "ButcherTableau":
        s = len(b)
        A = [[_as_exact(A[i][j]) if j < len(A[i]) else Fraction(0) for j in range(s)] for i in range(s)]
        b = [_as_exact(x) for x in b]
        c = [_as_exact(x) for x in c]
        Af = np.array([[float(x) for x in row] for row in A])
        if kind is None:
            kind = "explicit" if not np.any(np.triu(Af)) else "implicit"
        return cls(Af, [float(x) for x in b], [float(x) for x in c], kind, name,
                   (tuple(tuple(r) for r in A), tuple(b), tuple(c)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ButcherTableau):
            return NotImplemented
        return (
            self.kind == other.kind
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.c, other.c)
            and self.exact == other.exact
        )

    __hash__ = None  # type: ignore[assignment]


def _as_exact(x):
    if isinstance(x, (Qc2Element, Fraction)):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"exact tableau entries must be Fraction or Qc2Element, got {type(x).__name__}")


# --- built-in methods ------------------------------------------------------

GAMMA = (2.0 + 2.0 ** (1.0 / 3.0) + 2.0 ** (-1.0 / 3.0)) / 12.0

F = Fraction


def _rk4() -> ButcherTableau:
    h = F(1, 2)
    A = [[0, 0, 0, 0], [h, 0, 0, 0], [0, h, 0, 0], [0, 0, 1, 0]]
    return ButcherTableau.from_exact(A, [F(1, 6), F(1, 3), F(1, 3), F(1, 6)], [0, h, h, 1], "rk4")


def _gl4() -> ButcherTableau:
    r = math.sqrt(3.0) / 6.0
    A = [[0.25, 0.25 - r], [0.25 + r, 0.25]]
    return ButcherTableau(A, [0.5, 0.5], [0.5 - r, 0.5 + r], "implicit", "gl4")


def _eq2() -> ButcherTableau:
    g = GAMMA
    A = np.zeros((7, 7))
    A[1, 0] = 2 * g
    A[2, 1] = 4 * g
    A[3, 0], A[3, 2] = 2 * g, 0.5 - 2 * g
    A[4, 1], A[4, 3] = 4 * g, 1 - 8 * g
    A[5, 0], A[5, 2], A[5, 4] = 2 * g, 0.5 - 2 * g, 0.5 - 2 * g
    A[6, 1], A[6, 3], A[6, 5] = 4 * g, 1 - 8 * g, 4 * g
    b = [g, 2 * g, 0.25 - g, 0.5 - 4 * g, 0.25 - g, 2 * g, g]
    c = [0.0, 2 * g, 4 * g, 0.5, 1 - 4 * g, 1 - 2 * g, 1.0]
    return ButcherTableau(A, b, c, "explicit", "eq2")


def _eq3() -> ButcherTableau:
    c2, c3 = C2_EXACT, C3_EXACT
    h = F(1, 2)
    a65 = 1 / (2 * c2) - 2
    A = [
        [],
        [c2],
        [0, c3],
        [h - c2, c2 + c3 - 1, 1 - c3],
        [2 * c2 * c3, (1 - 2 * c3) * c3, (1 - 4 * c2) * c3, 4 * c2 * c3],
        [0, c3, 0, 4 * c2 - 2, a65],
        [c2, 0, h - 2 * c2, 2 - 4 * c2, 6 * c2 - 2, h - 2 * c2],
        [0, c3, 0, 4 * c2 - 2, a65, 0, c3],
    ]
    b = [c2 / 2, c3 / 2, F(1, 4) - c2, 0, h + c2 - c3, F(1, 4) - c2, c3 / 2, c2 / 2]
    c = [0, c2, c3, h, h, 1 - c3, 1 - c2, 1]
    return ButcherTableau.from_exact(A, [Qc2Element.coerce(x) for x in b], [Qc2Element.coerce(x) for x in c], "eq3")


def _point_r() -> ButcherTableau:
    A = [
        [],
        [F(1, 6)],
        [F(1, 150), F(9, 25)],
        [F(1, 4), F(-13, 48), F(25, 48)],
        [F(-37, 50), F(59, 25), F(-2), F(22, 25)],
        [F(1, 6), 0, 0, F(4, 11), F(10, 33)],
        [0, F(3, 8), 0, F(4, 11), F(-5, 44), F(3, 8)],
    ]
    b = [F(1, 12), F(3, 16), 0, F(4, 11), F(25, 264), F(3, 16), F(1, 12)]
    c = [0, F(1, 6), F(11, 30), F(1, 2), F(1, 2), F(5, 6), 1]
    return ButcherTableau.from_exact(A, b, c, "pointR")


_BUILTIN = {"rk4": _rk4, "gl4": _gl4, "eq2": _eq2, "eq3": _eq3, "pointR": _point_r}
_REGISTRY: dict[str, ButcherTableau] = {}


def register(tab: ButcherTableau, name: Optional[str] = None) -> None:
    """Make ``tab`` available through :func:`catalog` under ``name``."""
    _REGISTRY[name or tab.name] = tab


def available_methods() -> list[str]:
    return list(_BUILTIN) + [k for k in _REGISTRY if k not in _BUILTIN]


def catalog(name: str) -> ButcherTableau:
    """Look up a built-in or registered method by id."""
    if name in _REGISTRY:
        return _REGISTRY[name]
    if name in _BUILTIN:
        tab = _BUILTIN[name]()
        _REGISTRY[name] = tab
        return tab
    raise KeyError(f"unknown method {name!r}; known: {', '.join(available_methods())}")


def resolve_method(spec: str) -> ButcherTableau:
    """A catalog id, or a path to a tableau file."""
    try:
        return catalog(spec)
    except KeyError:
        path = Path(spec)
        if path.exists():
            return load_tableau(path)
        raise


# --- the psi-indexed family at (c2, c3) = (z1, z2) -------------------------

def family_phi(c2: float = C2_FLOAT) -> float:
    """Pole of the family parameter: 1 / (2 c2) - 1."""
    return 1.0 / (2.0 * c2) - 1.0


def family_tableau(psi: float) -> ButcherTableau:
    """Eight-stage method of order (4, 8) with family parameter ``psi``."""
    c2, c3 = C2_FLOAT, C3_FLOAT
    phi = family_phi(c2)
    if abs(phi - psi) <= 1e-12:
        raise PoleError(f"psi = {psi!r} hits the pole phi = {phi!r}")
    chi = 4.0 * (1.0 - 3.0 * c2) / ((1.0 - 6.0 * c2) * (phi - psi))

    def stage_row(w):
        return [w * c2, (1 - w) * c3, w * (0.5 - 2 * c2), w * c2 + (1 - w) * (0.5 - c3)]

    a64 = 2 * (0.5 - c3) * (1 - chi)
    a65 = 2 * (0.5 - c3) * chi
    a74 = 2 * c2 * (1 + chi)
    a75 = -2 * c2 * chi
    b4 = 0.5 * (a64 + a74)
    b5 = 0.5 * (a65 + a75)

    A = np.zeros((8, 8))
    A[1, 0] = c2
    A[2, 1] = c3
    A[3, :4] = stage_row(phi)
    A[4, :4] = stage_row(psi)
    A[5, 1], A[5, 3], A[5, 4] = c3, a64, a65
    A[6, 0], A[6, 2], A[6, 3], A[6, 4], A[6, 5] = c2, 0.5 - 2 * c2, a74, a75, 0.5 - 2 * c2
    A[7, 1], A[7, 3], A[7, 4], A[7, 6] = c3, a64, a65, c3
    A[3, 3] = 0.0  # vanishes identically at w = phi; drop the rounding residue
    b = [c2 / 2, c3 / 2, 0.25 - c2, b4, b5, 0.25 - c2, c3 / 2, c2 / 2]
    c = [0.0, c2, c3, 0.5, 0.5, 1 - c3, 1 - c2, 1.0]
    return ButcherTableau(A, b, c, "explicit", f"family(psi={psi!r})")


# --- time-reversal parity checks -------------------------------------------

@dataclass
class ParityReport:
    """Residuals of the "even"/"odd" stage-vector patterns.

    ``even`` maps ``"Ap1"`` and ``"q1"`` to the max |x_i - x_i'| over mirrored
    stage pairs; ``odd`` maps ``"Ap2"`` and ``"Aq1"`` to the max of
    |y_i + y_i'| and |y_m| over the central stages. ``applicable`` is False
    when the tableau lacks the mirrored node layout; the maps are then empty.
    """

    applicable: bool
    even: dict = field(default_factory=dict)
    odd: dict = field(default_factory=dict)
    reason: str = ""

    def max_residual(self) -> float:
        vals = list(self.even.values()) + list(self.odd.values())
        return max(vals) if vals else math.nan


def _mirror_layout(s: int):
    if s == 8:
        return [(0, 7), (1, 6), (2, 5)], [3, 4]
    if s == 7:
        return [(0, 6), (1, 5), (2, 4)], [3]
    return None


def parity_report(tab: ButcherTableau, strict: bool = False) -> ParityReport:
    """Check the stage-vector parity patterns of a mirrored 7- or 8-stage method.

    With ``strict=True`` an unsupported stage count raises :class:`ShapeError`
    instead of returning a non-applicable report.
    """
    layout = _mirror_layout(tab.s)
    if layout is None:
        if strict:
            raise ShapeError(f"parity patterns are defined for 7 or 8 stages, got s = {tab.s}")
        return ParityReport(False, reason=f"s = {tab.s}: no mirrored 7/8-stage node layout")
    pairs, middle = layout
    c = tab.c
    if any(abs(c[i] + c[j] - 1) > 1e-12 for i, j in pairs) or any(abs(c[m] - 0.5) > 1e-12 for m in middle):
        if strict:
            raise ShapeError("nodes are not mirrored about 1/2")
        return ParityReport(False, reason="nodes are not mirrored about 1/2")

    A = tab.A
    one = np.ones(tab.s)
    p1 = 2 * c - one
    p2 = 6 * c**2 - 6 * c + one
    q1 = A @ c - c**2 / 2

    def even_res(x):
        return max(abs(x[i] - x[j]) for i, j in pairs)

    def odd_res(y):
        return max([abs(y[i] + y[j]) for i, j in pairs] + [abs(y[m]) for m in middle])

    return ParityReport(
        True,
        even={"Ap1": even_res(A @ p1), "q1": even_res(q1)},
        odd={"Ap2": odd_res(A @ p2), "Aq1": odd_res(A @ q1)},
    )


# --- zeta(c2, c3) -----------------------------------------------------------

# ZETA_COEFFS[n][m] multiplies c2**m * (2 c3)**n.
ZETA_COEFFS = (
    (1, -13, 20),
    (-3, 53, 18, -132),
    (-1, -93, -198, 396, 72),
    (15, 75, 294, -576),
    (-21, -15, -108, 216),
    (9, -9),
)


def zeta(c2: float, c3: float) -> float:
    """Polynomial whose zero set carries the (4, 6) family of eight-stage methods."""
    x = 2.0 * c3
    total = 0.0
    for n, row in enumerate(ZETA_COEFFS):
        inner = 0.0
        for coef in reversed(row):
            inner = inner * c2 + coef
        total += inner * x**n
    return total


def zeta_exact(c2, c3):
    """Same polynomial, evaluated in exact arithmetic (Fraction or Q(c2) inputs)."""
    x = 2 * c3
    total = Fraction(0)
    for n, row in enumerate(ZETA_COEFFS):
        for m, coef in enumerate(row):
            if coef:
                total = total + coef * c2**m * x**n
    return total


# --- text format ------------------------------------------------------------

def _parse_entry(tok: str, line: int, col: int):
    try:
        if any(ch in tok for ch in ".eEnN") and "/" not in tok:
            return float(tok)
        return parse_rational(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise TableauFormatError(f"bad coefficient {tok!r} ({exc})", line, col) from None


def parse_tableau(text: str, name: str = "") -> ButcherTableau:
    """Parse the line-oriented tableau format (see :func:`format_tableau`)."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        toks, col = [], 0
        for piece in body.split():
            col = body.index(piece, col)
            toks.append((piece, col + 1))
            col += len(piece)
        rows.append((lineno, toks))
    if not rows:
        raise TableauFormatError("empty tableau file", 1, 1)

    lineno, head = rows[0]
    if len(head) != 3 or head[0][0] != "s":
        raise TableauFormatError("expected header 's <stages> <explicit|implicit>'", lineno, 1)
    try:
        s = int(head[1][0])
    except ValueError:
        raise TableauFormatError(f"stage count {head[1][0]!r} is not an integer", lineno, head[1][1]) from None
    if s < 1:
        raise TableauFormatError("stage count must be positive", lineno, head[1][1])
    kind = head[2][0]
    if kind not in ("explicit", "implicit"):
        raise TableauFormatError(f"kind must be explicit or implicit, got {kind!r}", lineno, head[2][1])
    expected = ["c"] + ["a"] * s + ["b"]
    if len(rows) - 1 != len(expected):
        last = rows[-1][0]
        raise TableauFormatError(f"expected {len(expected)} data lines after header, found {len(rows) - 1}", last, 1)

    vectors = []
    for (lineno, toks), tag in zip(rows[1:], expected):
        if toks[0][0] != tag:
            raise TableauFormatError(f"expected line tag {tag!r}, got {toks[0][0]!r}", lineno, toks[0][1])
        if len(toks) - 1 != s:
            raise TableauFormatError(f"expected {s} entries, got {len(toks) - 1}", lineno, toks[0][1])
        vectors.append([_parse_entry(t, lineno, col) for t, col in toks[1:]])
    c, A, b = vectors[0], vectors[1:-1], vectors[-1]

    all_exact = all(isinstance(x, Fraction) for x in c + b + [v for r in A for v in r])
    if all_exact:
        return ButcherTableau.from_exact(A, b, c, name, kind)
    return ButcherTableau([[float(v) for v in r] for r in A], [float(v) for v in b],
                          [float(v) for v in c], kind, name)


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return format_rational(x)
    return repr(float(x))


def format_tableau(tab: ButcherTableau) -> str:
    """Render in the text format; exact rationals as ``p/q``, everything else as round-trip decimals."""
    if tab.exact is not None and all(
        isinstance(v, Fraction) or (isinstance(v, Qc2Element) and v.is_rational())
        for v in list(tab.exact[1]) + list(tab.exact[2]) + [x for r in tab.exact[0] for x in r]
    ):
        def conv(v):
            return v.a1 if isinstance(v, Qc2Element) else v
        A = [[conv(v) for v in r] for r in tab.exact[0]]
        b = [conv(v) for v in tab.exact[1]]
        c = [conv(v) for v in tab.exact[2]]
    else:
        A, b, c = tab.A.tolist(), tab.b.tolist(), tab.c.tolist()
    lines = []
    if tab.name:
        lines.append(f"# {tab.name}")
    lines.append(f"s {tab.s} {tab.kind}")
    lines.append("c " + " ".join(_fmt(x) for x in c))
    lines.extend("a " + " ".join(_fmt(x) for x in row) for row in A)
    lines.append("b " + " ".join(_fmt(x) for x in b))
    return "\n".join(lines) + "\n"


def load_tableau(path) -> ButcherTableau:
    path = Path(path)
    return parse_tableau(path.read_text(encoding="utf-8"), name=path.stem)


def save_tableau(tab: ButcherTableau, path) -> None:
    Path(path).write_text(format_tableau(tab), encoding="utf-8")
