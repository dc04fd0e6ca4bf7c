"""Jacobian, characteristic cubic and equilibrium classification.

At the equilibrium the Jacobian has characteristic polynomial

    lambda**3 + B*lambda**2 + C*lambda + E,
    B = alpha*f0 + gamma + eta,  C = 2*alpha*f0*eta + gamma*eta,
    E = beta*eta*theta*f0.

Only the sign of ``E`` depends on the policy.  With ``E < 0`` (theta < 0)
``P(0) < 0`` forces a positive real eigenvalue and the other two lie in the
left half-plane (a saddle).  With ``E > 0`` (theta > 0) every real root is
negative and the sign of ``B*C - E`` decides between a stable equilibrium,
a Hopf-critical one (roots ``-B, +-i*sqrt(C)``) and an unstable focus.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .cubic import CubicPoly, RootKind, RootSet, discriminant, solve
from .model import Params, equilibrium

HOPF_TOL = 1e-9


class Regime(str, enum.Enum):
    SADDLE_THREE_REAL = "UnstableSaddle_ThreeReal"
    SADDLE_COMPLEX_PAIR = "UnstableSaddle_ComplexPair"
    STABLE_THREE_REAL = "Stable_ThreeReal"
    STABLE_COMPLEX_PAIR = "Stable_ComplexPair"
    UNSTABLE_FOCUS = "UnstableFocus"
    HOPF_CRITICAL = "HopfCritical"

    @property
    def stable(self) -> bool:
        return self in (Regime.STABLE_THREE_REAL, Regime.STABLE_COMPLEX_PAIR)


def jacobian(p: Params, s) -> np.ndarray:
    a, f, _ = s[0], s[1], s[2]
    return np.array(
        [
            [-p.alpha * f - p.gamma, -p.alpha * a, -p.beta],
            [p.zeta, -p.eta, 0.0],
            [p.theta * (f - p.f0), p.theta * a, 0.0],
        ]
    )


def jacobian_at_equilibrium(p: Params) -> np.ndarray:
    return jacobian(p, equilibrium(p).as_state())


def characteristic(p: Params) -> CubicPoly:
    B = p.alpha * p.f0 + p.gamma + p.eta
    C = 2.0 * p.alpha * p.f0 * p.eta + p.gamma * p.eta
    E = p.beta * p.eta * p.theta * p.f0
    return CubicPoly(B, C, E)


def characteristic_of_matrix(J) -> CubicPoly:
    """Coefficients of det(lambda*I - J) for a real 3x3 matrix (trace/minor expansion)."""
    J = np.asarray(J, dtype=float)
    tr = J[0, 0] + J[1, 1] + J[2, 2]
    minors = (
        J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]
        + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1]
    )
    det = (
        J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
        - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
        + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0])
    )
    return CubicPoly(-tr, minors, -det)


def hopf_condition(p: Params) -> tuple[float, float]:
    """Both sides of the Hopf balance: ``(B*C, beta*eta*|theta|*f0)``."""
    q = characteristic(p)
    return q.B * q.C, p.beta * p.eta * abs(p.theta) * p.f0


def critical_theta(p: Params) -> float:
    """``|theta|`` at which ``B*C == beta*eta*|theta|*f0``.

    The value of ``p.theta`` is ignored.  For the model as written the Hopf
    crossing lives on the ``theta > 0`` side (see module docstring).
    """
    lhs, _ = hopf_condition(p)
    return lhs / (p.beta * p.eta * p.f0)


@dataclass(frozen=True)
class StabilityVerdict:
    regime: Regime
    policy: str
    eigenvalues: RootSet
    condition_lhs: float
    condition_rhs: float
    discriminant: float
    consistent: bool

    @property
    def spectral_abscissa(self) -> float:
        return self.eigenvalues.max_real_part

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "policy": self.policy,
            "linearly_stable": self.regime.stable,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues.roots()],
            "root_set": self.eigenvalues.to_dict(),
            "condition_lhs": self.condition_lhs,
            "condition_rhs": self.condition_rhs,
            "discriminant": self.discriminant,
            "consistent": self.consistent,
        }


def _spectrum_matches(regime: Regime, rs: RootSet, scale: float) -> bool:
    roots = rs.roots()
    re = sorted(z.real for z in roots)
    if regime in (Regime.SADDLE_THREE_REAL, Regime.SADDLE_COMPLEX_PAIR):
        # exactly one eigenvalue in the right half-plane, and it is real
        return re[2] > 0.0 and re[1] < 0.0 and any(z.imag == 0.0 and z.real > 0.0 for z in roots)
    if regime.stable:
        return re[2] < 0.0
    pair = rs.pair_real_part
    if rs.kind is not RootKind.ONE_REAL_PLUS_PAIR:
        return False
    if regime is Regime.UNSTABLE_FOCUS:
        return pair > 0.0 and rs.real_roots[0] < 0.0
    return abs(pair) <= 1e-8 * scale and rs.real_roots[0] < 0.0


def classify(p: Params, hopf_tol: float = HOPF_TOL) -> StabilityVerdict:
    """Classify the equilibrium from the analytic conditions and the spectrum.

    ``|B*C - beta*eta*|theta|*f0| <= hopf_tol*(1 + B*C)`` (theta > 0 only)
    counts as Hopf-critical.  ``consistent`` is False when the computed
    eigenvalues contradict the analytic regime, which would indicate a bug.
    """
    q = characteristic(p)
    rs = solve(q)
    lhs, rhs = hopf_condition(p)
    three_real = rs.kind is RootKind.THREE_REAL
    if p.theta < 0:
        regime = Regime.SADDLE_THREE_REAL if three_real else Regime.SADDLE_COMPLEX_PAIR
    elif abs(lhs - rhs) <= hopf_tol * (1.0 + lhs):
        regime = Regime.HOPF_CRITICAL
    elif lhs > rhs:
        regime = Regime.STABLE_THREE_REAL if three_real else Regime.STABLE_COMPLEX_PAIR
    else:
        regime = Regime.UNSTABLE_FOCUS
    scale = 1.0 + abs(q.B) + abs(q.C) ** 0.5
    return StabilityVerdict(
        regime=regime,
        policy=p.policy,
        eigenvalues=rs,
        condition_lhs=lhs,
        condition_rhs=rhs,
        discriminant=discriminant(q),
        consistent=_spectrum_matches(regime, rs, scale),
    )

