"""Monic real cubics ``lambda**3 + B*lambda**2 + C*lambda + E``.

Roots come from the closed form (trigonometric branch for three real roots,
Cardano with a cancellation-free cube root otherwise) and are then polished
with a Newton step on the original polynomial.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .exceptions import HypothesisError

# |Im| below this fraction of (1 + |Re|) is treated as a real double root.
IMAG_COLLAPSE = 1e-10


class RootKind(str, enum.Enum):
    THREE_REAL = "ThreeReal"
    ONE_REAL_PLUS_PAIR = "OneRealPlusConjugatePair"


class PairImplication(str, enum.Enum):
    NONE = "None"
    CONJUGATE_PAIR_EXISTS = "ConjugatePairExists"
    PAIR_HAS_POSITIVE_REAL_PART = "PairHasPositiveRealPart"


@dataclass(frozen=True)
class CubicPoly:
    B: float
    C: float
    E: float

    def __post_init__(self):
        for name in ("B", "C", "E"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"coefficient {name} must be finite, got {v!r}")

    def __call__(self, x):
        return ((x + self.B) * x + self.C) * x + self.E

    def derivative(self, x):
        return (3.0 * x + 2.0 * self.B) * x + self.C

    @property
    def coeffs(self) -> tuple[float, float, float]:
        return (self.B, self.C, self.E)


@dataclass(frozen=True)
class RootSet:
    kind: RootKind
    real_roots: tuple[float, ...]
    pair_real_part: Optional[float] = None
    pair_imag_part: Optional[float] = None

    def roots(self) -> list[complex]:
        """All three roots; the conjugate pair is listed with +Im first."""
        out = [complex(r) for r in self.real_roots]
        if self.kind is RootKind.ONE_REAL_PLUS_PAIR:
            out.append(complex(self.pair_real_part, self.pair_imag_part))
            out.append(complex(self.pair_real_part, -self.pair_imag_part))
        return out

    @property
    def max_real_part(self) -> float:
        return max(z.real for z in self.roots())

    def reassemble(self) -> tuple[float, float, float]:
        """Coefficients (B, C, E) of ``(l - r1)(l - r2)(l - r3)``."""
        r1, r2, r3 = self.roots()
        B = -(r1 + r2 + r3)
        C = r1 * r2 + r1 * r3 + r2 * r3
        E = -(r1 * r2 * r3)
        return (B.real, C.real, E.real)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "real_roots": list(self.real_roots),
            "pair_real_part": self.pair_real_part,
            "pair_imag_part": self.pair_imag_part,
        }


def discriminant(q: CubicPoly) -> float:
    B, C, E = q.B, q.C, q.E
    return B * B * C * C - 4.0 * C**3 - 4.0 * B**3 * E - 27.0 * E * E + 18.0 * B * C * E


def _polish(q: CubicPoly, x):
    """One guarded Newton step: kept only if the residual does not grow."""
    d = q.derivative(x)
    if d == 0:
        return x
    y = x - q(x) / d
    return y if abs(q(y)) <= abs(q(x)) else x


def _real_cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def solve(q: CubicPoly) -> RootSet:
    """Classified roots of a monic cubic.

    A zero discriminant with a repeated real root is reported as
    ``ThreeReal`` with repeated entries.
    """
    B, C, E = q.B, q.C, q.E
    shift = B / 3.0
    # depressed cubic t^3 + p t + r with lambda = t - shift
    p = C - B * shift
    r = 2.0 * shift**3 - shift * C + E

    if p < 0.0 and 27.0 * r * r < -4.0 * p**3:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * r / (p * m)
        phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = [m * math.cos(phi - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]
        roots = sorted(_polish(q, x) for x in roots)
        return RootSet(RootKind.THREE_REAL, tuple(roots))

    disc = max(r * r / 4.0 + p**3 / 27.0, 0.0)
    big = -r / 2.0 - math.copysign(math.sqrt(disc), r)
    u = _real_cbrt(big)
    t = u - p / (3.0 * u) if u != 0.0 else 0.0
    x1 = _polish(q, t - shift)

    # deflate to lambda^2 + b1*lambda + c1
    b1 = B + x1
    c1 = -E / x1 if abs(x1) > 1.0 else C + x1 * b1
    half = -b1 / 2.0
    d2 = half * half - c1
    if d2 < 0.0:
        im = math.sqrt(-d2)
        if im >= IMAG_COLLAPSE * (1.0 + abs(half)):
            z = complex(half, im)
            z = _polish(q, z)
            return RootSet(RootKind.ONE_REAL_PLUS_PAIR, (x1,), z.real, abs(z.imag))
        x2 = x3 = half
    else:
        s = math.sqrt(d2)
        x2 = half + math.copysign(s, half)
        x3 = c1 / x2 if x2 != 0.0 else half - math.copysign(s, half)
    roots = sorted((x1, _polish(q, x2), _polish(q, x3)))
    return RootSet(RootKind.THREE_REAL, tuple(roots))


@dataclass(frozen=True)
class PairPredicates:
    bc_le_3d: bool
    bc_lt_d: bool
    implied: PairImplication
    roots: RootSet
    consistent: bool


def pair_predicates(B: float, C: float, D: float) -> PairPredicates:
    """Root-pattern predicates for ``lambda**3 + B lambda**2 + C lambda + D``.

    With ``B, C, D > 0``: ``B*C <= 3*D`` forces a complex-conjugate pair,
    and ``B*C < D`` additionally forces that pair into the right half-plane.
    ``C > 0`` is needed: ``(1, -3, 1)`` has roots ``-1 - sqrt(2)``,
    ``sqrt(2) - 1`` and ``1`` although ``B*C < D``.  ``consistent`` reports
    whether the computed roots agree with the implication.
    """
    if not (B > 0.0):
        raise HypothesisError(f"B must be > 0, got {B!r}")
    if not (C > 0.0):
        raise HypothesisError(f"C must be > 0, got {C!r}")
    if not (D > 0.0):
        raise HypothesisError(f"D must be > 0, got {D!r}")
    bc = B * C
    le3 = bc <= 3.0 * D
    lt = bc < D
    if lt:
        implied = PairImplication.PAIR_HAS_POSITIVE_REAL_PART
    elif le3:
        implied = PairImplication.CONJUGATE_PAIR_EXISTS
    else:
        implied = PairImplication.NONE
    rs = solve(CubicPoly(B, C, D))
    has_pair = rs.kind is RootKind.ONE_REAL_PLUS_PAIR
    if implied is PairImplication.NONE:
        ok = True
    elif implied is PairImplication.CONJUGATE_PAIR_EXISTS:
        ok = has_pair
    else:
        ok = has_pair and rs.pair_real_part > 0.0
    return PairPredicates(le3, lt, implied, rs, ok)

