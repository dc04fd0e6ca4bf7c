"""Model parameters, state, vector field, equilibrium and feasibility window.

The total land area is normalised to 1, so ``a`` and ``b`` are land fractions
and ``f`` measures fire frequency/intensity.  The dynamics are::

    da/dt = -alpha*f*a - beta*b + gamma*(1 - a)
    df/dt = zeta*a - eta*f
    db/dt = theta*(f - f0)*a

``theta > 0`` is a reactive burning policy (more prescribed burning after
intense fire seasons), ``theta = -vartheta < 0`` a proactive one.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import asdict, dataclass, replace
from typing import NamedTuple

from .exceptions import InvalidParams

PARAM_NAMES = ("alpha", "beta", "gamma", "zeta", "eta", "theta", "f0")
POSITIVE_PARAMS = ("alpha", "beta", "gamma", "zeta", "eta", "f0")


@dataclass(frozen=True)
class Params:
    """The seven structural constants.

    All of them are positive except ``theta``, which only has to be nonzero.
    """

    alpha: float
    beta: float
    gamma: float
    zeta: float
    eta: float
    theta: float
    f0: float

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, numbers.Real):
                raise InvalidParams(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise InvalidParams(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in POSITIVE_PARAMS:
            if getattr(self, name) <= 0.0:
                raise InvalidParams(f"{name} must be > 0, got {getattr(self, name)!r}")
        if self.theta == 0.0:
            raise InvalidParams("theta must be nonzero")

    @property
    def vartheta(self) -> float:
        """Proactive strength ``-theta`` (positive when the policy is proactive)."""
        return -self.theta

    @property
    def policy(self) -> str:
        return "reactive" if self.theta > 0 else "proactive"

    def with_(self, **changes) -> Params:
        """Copy with some fields replaced; ``vartheta=v`` sets ``theta=-v``."""
        if "vartheta" in changes:
            changes["theta"] = -changes.pop("vartheta")
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> Params:
        data = dict(data)
        if "vartheta" in data:
            if "theta" in data:
                raise InvalidParams("give either theta or vartheta, not both")
            data["theta"] = -data.pop("vartheta")
        missing = [k for k in PARAM_NAMES if k not in data]
        if missing:
            raise InvalidParams(f"missing parameter(s): {', '.join(missing)}")
        extra = sorted(set(data) - set(PARAM_NAMES))
        if extra:
            raise InvalidParams(f"unknown parameter(s): {', '.join(extra)}")
        return cls(**{k: data[k] for k in PARAM_NAMES})


class State(NamedTuple):
    a: float
    f: float
    b: float


class Equilibrium(NamedTuple):
    a_star: float
    f_star: float
    b_star: float

    def as_state(self) -> State:
        return State(*self)


@dataclass(frozen=True)
class FeasibilityReport:
    a_star_le_one: bool
    b_star_nonneg: bool
    b_star_le_a_star: bool
    margins: tuple[float, float, float]

    @property
    def feasible(self) -> bool:
        return self.a_star_le_one and self.b_star_nonneg and self.b_star_le_a_star

    def to_dict(self) -> dict:
        return {
            "a_star_le_one": self.a_star_le_one,
            "b_star_nonneg": self.b_star_nonneg,
            "b_star_le_a_star": self.b_star_le_a_star,
            "margins": list(self.margins),
            "feasible": self.feasible,
        }


def vector_field(p: Params, s) -> State:
    """Right-hand side of the model at state ``s = (a, f, b)``.

    Works elementwise, so ``s`` may hold floats, complex numbers or numpy
    arrays of matching shape.
    """
    a, f, b = s[0], s[1], s[2]
    da = -p.alpha * f * a - p.beta * b + p.gamma * (1.0 - a)
    df = p.zeta * a - p.eta * f
    db = p.theta * (f - p.f0) * a
    return State(da, df, db)


def equilibrium(p: Params) -> Equilibrium:
    """The unique equilibrium with positive available land.  Independent of theta."""
    a_star = p.eta * p.f0 / p.zeta
    b_star = (p.gamma * p.zeta - p.eta * p.f0 * (p.gamma + p.alpha * p.f0)) / (p.beta * p.zeta)
    return Equilibrium(a_star, p.f0, b_star)


def feasibility(p: Params) -> FeasibilityReport:
    """Check ``a* <= 1`` and ``0 <= b* <= a*`` in their parameter form.

    Margins are the slacks ``rhs - lhs`` of each inequality, so a margin of
    zero (equality) still counts as feasible.
    """
    ef = p.eta * p.f0
    gz = p.gamma * p.zeta
    m1 = p.zeta - ef
    m2 = gz - (p.gamma + p.alpha * p.f0) * ef
    m3 = (p.beta + p.gamma + p.alpha * p.f0) * ef - gz
    return FeasibilityReport(m1 >= 0.0, m2 >= 0.0, m3 >= 0.0, (m1, m2, m3))
