"""Stabilising an equilibrium with one unstable real mode by dynamic extension.

Coordinates follow ``x = Q y`` with ``Q`` unitary and ``Q J Q^H = U`` upper
triangular, ``U[0, 0] = lambda1 > 0``.  The first row of ``Q`` is the real
unit eigenvector of ``J`` for ``lambda1``, so ``x1`` stays real along real
trajectories.  A scalar filter state ``omega`` is appended::

    dx1/dt    = X1(x1 - tau*(omega - x1_star), x2, x3)
    dx2/dt    = X2(x),  dx3/dt = X3(x)
    domega/dt = sigma*(x1 - omega)

where ``X(x) = Q Y(Q^H x)`` and ``Y`` is the model vector field.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .cubic import solve
from .exceptions import DegenerateSpectrum, NotSaddleRegime
from .model import Params, equilibrium, vector_field
from .stability import characteristic_of_matrix, jacobian_at_equilibrium

DEFAULT_MARGIN = 1.0


@dataclass(frozen=True)
class SchurForm:
    Q: np.ndarray
    U: np.ndarray
    eigenvalues: tuple[complex, complex, complex]

    @property
    def lambda1(self) -> float:
        return self.eigenvalues[0].real

    @property
    def schur_vectors(self) -> np.ndarray:
        """``Q^H``; its first column is the unstable eigenvector."""
        return self.Q.conj().T

    def to_x(self, y) -> np.ndarray:
        return self.Q @ np.asarray(y, dtype=complex)

    def to_y(self, x) -> np.ndarray:
        return (self.schur_vectors @ np.asarray(x, dtype=complex)).real


@dataclass(frozen=True)
class FeedbackGains:
    sigma: float
    tau: float


def _order_key(z: complex):
    return (-z.real, -z.imag)


def _real_null_vector(A: np.ndarray) -> np.ndarray:
    rows = A
    crosses = [np.cross(rows[0], rows[1]), np.cross(rows[0], rows[2]), np.cross(rows[1], rows[2])]
    v = max(crosses, key=np.linalg.norm)
    v = v / np.linalg.norm(v)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v


def schur_triangulate(J) -> SchurForm:
    """Unitary triangularisation with the positive real eigenvalue first.

    Built directly for 3x3: real eigenvector for ``lambda1``, a real
    orthonormal complement, then the 2x2 trailing block is triangularised by
    one of its eigenvectors.  Raises ``NotSaddleRegime`` unless the spectrum
    is one positive real eigenvalue plus two in the open left half-plane.
    """
    J = np.asarray(J, dtype=float)
    rs = solve(characteristic_of_matrix(J))
    roots = rs.roots()
    unstable = [i for i, z in enumerate(roots) if z.real >= 0]
    if len(unstable) != 1 or roots[unstable[0]].imag != 0.0 or roots[unstable[0]].real == 0.0:
        raise NotSaddleRegime(f"equilibrium spectrum {roots} is not one positive real + two stable eigenvalues")
    lam1 = roots[unstable[0]]
    rest = sorted((z for i, z in enumerate(roots) if i != unstable[0]), key=_order_key)
    scale = 1.0 + max(abs(z) for z in roots)
    eig = [lam1, *rest]
    for i in range(3):
        for j in range(i + 1, 3):
            if abs(eig[i] - eig[j]) <= 1e-10 * scale:
                raise DegenerateSpectrum(f"eigenvalues {eig[i]} and {eig[j]} coincide")

    v = _real_null_vector(J - lam1.real * np.eye(3))
    k = int(np.argmin(np.abs(v)))
    e = np.zeros(3)
    e[k] = 1.0
    w2 = e - v[k] * v
    w2 /= np.linalg.norm(w2)
    w3 = np.cross(v, w2)
    W = np.column_stack([w2, w3])
    M = W.T @ J @ W

    lam2 = rest[0]
    r0 = np.array([M[0, 0] - lam2, M[0, 1]], dtype=complex)
    r1 = np.array([M[1, 0], M[1, 1] - lam2], dtype=complex)
    if np.linalg.norm(r0) >= np.linalg.norm(r1):
        z = np.array([-r0[1], r0[0]])
    else:
        z = np.array([-r1[1], r1[0]])
    z /= np.linalg.norm(z)
    z_perp = np.array([-np.conj(z[1]), np.conj(z[0])])

    V = np.column_stack([v.astype(complex), W @ z, W @ z_perp])
    Q = V.conj().T
    U = Q @ J @ V
    U[np.tril_indices(3, -1)] = 0.0
    return SchurForm(Q=Q, U=U, eigenvalues=(complex(lam1), complex(rest[0]), complex(rest[1])))


def schur_at_equilibrium(p: Params) -> SchurForm:
    return schur_triangulate(jacobian_at_equilibrium(p))


def design_gains(lambda1: float, margin: float = DEFAULT_MARGIN) -> FeedbackGains:
    """``sigma = lambda1*(1+margin)``, ``tau = (1+margin)*(sigma+lambda1)**2/(4*sigma*lambda1)``."""
    if not lambda1 > 0:
        raise ValueError(f"lambda1 must be > 0, got {lambda1!r}")
    if not margin > 0:
        raise ValueError(f"margin must be > 0, got {margin!r}")
    sigma = lambda1 * (1.0 + margin)
    tau = (1.0 + margin) * (sigma + lambda1) ** 2 / (4.0 * sigma * lambda1)
    return FeedbackGains(sigma, tau)


def feedback_pair(lambda1: float, g: FeedbackGains) -> tuple[complex, complex]:
    """Eigenvalues of the (x1, omega) block ``[[lambda1, -tau*lambda1], [sigma, -sigma]]``."""
    root = cmath.sqrt((g.sigma + lambda1) ** 2 - 4.0 * g.sigma * g.tau * lambda1)
    return ((lambda1 - g.sigma + root) / 2.0, (lambda1 - g.sigma - root) / 2.0)


def closed_loop_spectrum(sf: SchurForm, g: FeedbackGains) -> list[complex]:
    mu_plus, mu_minus = feedback_pair(sf.lambda1, g)
    return [sf.eigenvalues[1], sf.eigenvalues[2], mu_plus, mu_minus]


def augmented_jacobian(sf: SchurForm, g: FeedbackGains) -> np.ndarray:
    """The 4x4 linearisation of the augmented system at its equilibrium."""
    Jaa = np.zeros((4, 4), dtype=complex)
    Jaa[:3, :3] = sf.U
    Jaa[0, 3] = -g.tau * sf.U[0, 0]
    Jaa[3, 0] = g.sigma
    Jaa[3, 3] = -g.sigma
    return Jaa


def augmented_equilibrium(p: Params, sf: SchurForm) -> np.ndarray:
    x_star = sf.to_x(equilibrium(p))
    return np.append(x_star, x_star[0])


def augmented_vector_field(p: Params, sf: SchurForm, g: FeedbackGains, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=complex)
    x, omega = xs[:3], xs[3]
    Qh = sf.schur_vectors
    x1_star = (sf.Q[0] @ np.asarray(equilibrium(p), dtype=float))

    def X(z):
        return sf.Q @ np.array(vector_field(p, Qh @ z), dtype=complex)

    shifted = x.copy()
    shifted[0] = x[0] - g.tau * (omega - x1_star)
    out = np.empty(4, dtype=complex)
    out[0] = X(shifted)[0]
    out[1:3] = X(x)[1:]
    out[3] = g.sigma * (x[0] - omega)
    return out


def initial_augmented_state(sf: SchurForm, y0, omega0=None) -> np.ndarray:
    """Map a real model state into x-coordinates; ``omega`` defaults to ``x1``."""
    x = sf.to_x(y0)
    return np.append(x, x[0] if omega0 is None else omega0)


def feedback_design(p: Params, margin: float = DEFAULT_MARGIN) -> dict:
    sf = schur_at_equilibrium(p)
    g = design_gains(sf.lambda1, margin)
    spec = closed_loop_spectrum(sf, g)
    return {
        "params": p.to_dict(),
        "lambda1": sf.lambda1,
        "sigma": g.sigma,
        "tau": g.tau,
        "margin": margin,
        "closed_loop_eigenvalues": [[z.real, z.imag] for z in spec],
        "max_real_part": max(z.real for z in spec),
        "unstable_direction": [float(c) for c in sf.schur_vectors[:, 0].real],
    }


def meets_design_bounds(lambda1: float, g: FeedbackGains) -> bool:
    """``sigma > lambda1`` and ``tau > (sigma+lambda1)**2/(4*sigma*lambda1)``.

    The second bound makes the feedback pair complex; it is sufficient for
    stability but not necessary (see ``is_stabilising``).
    """
    return g.sigma > lambda1 and g.tau > (g.sigma + lambda1) ** 2 / (4.0 * g.sigma * lambda1)


def is_stabilising(lambda1: float, g: FeedbackGains) -> bool:
    """Exact region: the (x1, omega) block has trace ``lambda1 - sigma`` and
    determinant ``sigma*lambda1*(tau - 1)``, so it is stable iff
    ``sigma > lambda1`` and ``tau > 1``."""
    return g.sigma > lambda1 and g.tau > 1.0
