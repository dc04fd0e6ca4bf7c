"""Parameter sweeps, Hopf-boundary location and discriminant-sign families."""

from __future__ import annotations

import csv
import enum
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .cubic import discriminant, solve
from .exceptions import BranchConditionUnmet, GridTooLarge, NoRootInInterval
from .model import PARAM_NAMES, FeasibilityReport, Params, feasibility
from .stability import StabilityVerdict, characteristic, classify, hopf_condition

DEFAULT_GRID_CAP = 1_000_000
SWEEPABLE = PARAM_NAMES + ("vartheta",)


@dataclass(frozen=True)
class Axis:
    """``count`` points from ``lo`` to ``hi`` (inclusive), linear or geometric."""

    name: str
    lo: float
    hi: float
    count: int = 1
    log: bool = False

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ValueError(f"unknown parameter {self.name!r}")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.log and not (self.lo > 0 and self.hi > 0):
            raise ValueError("log axis needs positive bounds")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.lo)])
        if self.log:
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """A base parameter set plus the axes that vary.

    Grid order is ``itertools.product`` over ``axes`` in the given order, so
    the last axis varies fastest.  An axis named ``vartheta`` sets
    ``theta = -value``.
    """

    base: Params
    axes: tuple[Axis, ...] = ()
    cap: int = DEFAULT_GRID_CAP

    def __post_init__(self):
        names = [ax.name for ax in self.axes]
        thetas = [n for n in names if n in ("theta", "vartheta")]
        if len(set(names)) != len(names) or len(thetas) > 1:
            raise ValueError("each parameter may be swept at most once")
        if self.size > self.cap:
            raise GridTooLarge(f"grid has {self.size} points, cap is {self.cap}")

    @property
    def size(self) -> int:
        return math.prod(ax.count for ax in self.axes)

    def points(self) -> Iterator[Params]:
        names = [ax.name for ax in self.axes]
        for combo in itertools.product(*(ax.values() for ax in self.axes)):
            yield self.base.with_(**dict(zip(names, (float(v) for v in combo))))


@dataclass(frozen=True)
class SweepRow:
    params: Params
    feasibility: FeasibilityReport
    verdict: StabilityVerdict


def sweep(spec: SweepSpec) -> Iterator[SweepRow]:
    """Classify every grid point, lazily and in grid order."""
    for p in spec.points():
        yield SweepRow(p, feasibility(p), classify(p))


SWEEP_COLUMNS = (
    *PARAM_NAMES,
    "a_le_1",
    "b_ge_0",
    "b_le_a",
    "regime",
    *(f"{part}_lambda{k}" for k in (1, 2, 3) for part in ("re", "im")),
)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def sweep_row_fields(row: SweepRow) -> list[str]:
    fr = row.feasibility
    out = [_fmt(getattr(row.params, n)) for n in PARAM_NAMES]
    out += [str(fr.a_star_le_one).lower(), str(fr.b_star_nonneg).lower(), str(fr.b_star_le_a_star).lower()]
    out.append(row.verdict.regime.value)
    for z in row.verdict.eigenvalues.roots():
        out += [_fmt(z.real), _fmt(z.imag)]
    return out


def write_sweep_csv(rows, target) -> int:
    """Stream ``rows`` to CSV; returns the number of data rows written."""
    own = isinstance(target, (str, Path))
    fh = open(target, "w", newline="") if own else target
    n = 0
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow(sweep_row_fields(row))
            n += 1
    finally:
        if own:
            fh.close()
    return n


# ---------------------------------------------------------------- Hopf boundary


@dataclass(frozen=True)
class HopfPoint:
    """A root of ``B*C = beta*eta*|theta|*f0`` in the free parameter.

    ``params`` is the critical point realised with ``theta > 0``, which is
    where the cubic actually factors as ``(l + B)(l**2 + C)``.
    """

    free: str
    value: float
    params: Params
    pair_real_part: float


def _hopf_gap(p: Params) -> float:
    lhs, rhs = hopf_condition(p)
    return lhs - rhs


def hopf_boundary(
    fixed: Params,
    free: str,
    lo: float = 1e-6,
    hi: float = 1e6,
    scan: int = 400,
    rel_tol: float = 1e-12,
) -> list[HopfPoint]:
    """All sign changes of ``B*C - beta*eta*|theta|*f0`` in ``free`` on ``[lo, hi]``.

    The interval is scanned on a geometric grid, then every bracketed root is
    bisected to ``rel_tol``.  Roots where the gap only touches zero without
    changing sign are not found; with ``f0`` free this actually happens
    (the gap can be a perfect square in ``f0``).  The value of ``theta`` in
    ``fixed`` only matters through ``|theta|``.
    """
    if free not in SWEEPABLE:
        raise ValueError(f"unknown parameter {free!r}")
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    base = fixed.with_(theta=abs(fixed.theta))
    name = "theta" if free in ("theta", "vartheta") else free

    def gap(x):
        return _hopf_gap(base.with_(**{name: x}))

    grid = np.geomspace(lo, hi, scan)
    vals = [gap(float(x)) for x in grid]
    points = []
    for x0, x1, g0, g1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        x0, x1 = float(x0), float(x1)
        if g0 == 0.0:
            root = x0
        elif g0 * g1 < 0.0:
            while x1 - x0 > rel_tol * x1:
                mid = 0.5 * (x0 + x1)
                gm = gap(mid)
                if gm == 0.0:
                    x0 = x1 = mid
                elif (gm > 0) == (g0 > 0):
                    x0, g0 = mid, gm
                else:
                    x1 = mid
            root = 0.5 * (x0 + x1)
        else:
            continue
        p = base.with_(**{name: root})
        rs = solve(characteristic(p))
        pair = rs.pair_real_part if rs.pair_real_part is not None else math.nan
        points.append(HopfPoint(free, root, p, pair))
    if vals[-1] == 0.0:
        p = base.with_(**{name: float(grid[-1])})
        points.append(HopfPoint(free, float(grid[-1]), p, solve(characteristic(p)).pair_real_part or 0.0))
    if not points:
        raise NoRootInInterval(f"no sign change of the Hopf balance in {free} on [{lo}, {hi}]")
    return points


# ---------------------------------------------------------------- constructive families


class Family(str, enum.Enum):
    LARGE_ALPHA = "LargeAlphaPositiveDisc"
    SMALL_C = "SmallCNegativeDisc"
    SMALL_ALPHA = "SmallAlphaNegativeDisc"


class DiscSign(str, enum.Enum):
    POSITIVE = "PositiveDisc"
    NEGATIVE = "NegativeDisc"


_EXPECTED = {
    Family.LARGE_ALPHA: DiscSign.POSITIVE,
    Family.SMALL_C: DiscSign.NEGATIVE,
    Family.SMALL_ALPHA: DiscSign.NEGATIVE,
}

KNOB_DEFAULTS = {Family.LARGE_ALPHA: 100.0, Family.SMALL_C: 0.01, Family.SMALL_ALPHA: 1e-3}


@dataclass(frozen=True)
class FamilyPoint:
    params: Params
    discriminant: float
    branch: DiscSign
    family: Family
    knob: float
    extras: dict = field(default_factory=dict)


def family_params(alpha: float, c: float, beta: float, theta: float) -> Params:
    """``f0 = 1``, ``gamma = eta = c*alpha``, ``zeta = (1 + c)*alpha``.

    This puts ``b*`` exactly on its lower bound ``0`` and ``a* = c/(1+c)``.
    """
    return Params(alpha=alpha, beta=beta, gamma=c * alpha, zeta=(1.0 + c) * alpha, eta=c * alpha, theta=theta, f0=1.0)


def sign_family(
    family: Family | str,
    knob: Optional[float] = None,
    theta: float = 1.0,
    c: Optional[float] = None,
    beta: Optional[float] = None,
) -> FamilyPoint:
    """Pinned witness from one of the three asymptotic families.

    * ``LargeAlphaPositiveDisc``: ``alpha = knob`` large, ``c = 0.1``,
      ``beta = 1``; the discriminant grows like ``alpha**4``.  Either sign of
      ``theta``.
    * ``SmallCNegativeDisc``: ``alpha = 1``, ``beta = 1/|theta|``,
      ``c = knob`` small; the discriminant is ``-4c + O(c**2)`` when
      ``theta > 0`` and ``+4c + O(c**2)`` when ``theta < 0``.
    * ``SmallAlphaNegativeDisc``: ``alpha = knob`` small, ``c = beta = 1``;
      the leading term ``-27*(beta*c*alpha*theta)**2`` is sign-free.

    Raises ``BranchConditionUnmet`` (carrying the computed discriminant) if
    the produced point does not have the family's sign.
    """
    family = Family(family)
    knob = KNOB_DEFAULTS[family] if knob is None else float(knob)
    if not knob > 0:
        raise ValueError("knob must be > 0")
    if family is Family.LARGE_ALPHA:
        c = 0.1 if c is None else c
        beta = 1.0 if beta is None else beta
        p = family_params(knob, c, beta, theta)
    elif family is Family.SMALL_C:
        c = knob
        beta = 1.0 / abs(theta) if beta is None else beta
        p = family_params(1.0, c, beta, theta)
    else:
        c = 1.0 if c is None else c
        beta = 1.0 if beta is None else beta
        p = family_params(knob, c, beta, theta)
    disc = discriminant(characteristic(p))
    want = _EXPECTED[family]
    got = DiscSign.POSITIVE if disc > 0 else DiscSign.NEGATIVE if disc < 0 else None
    if got is not want:
        raise BranchConditionUnmet(
            f"{family.value} at knob={knob}, theta={theta} gives discriminant {disc!r}",
            discriminant=disc,
            params=p,
        )
    return FamilyPoint(p, disc, want, family, knob, {"c": c, "beta": beta})
