import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from burnstab.cubic import (
    CubicPoly,
    PairImplication,
    RootKind,
    discriminant,
    pair_predicates,
    solve,
)
from burnstab.exceptions import HypothesisError

coef = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


def oracle_roots(B, C, E):
    comp = np.array([[-B, -C, -E], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    return np.linalg.eigvals(comp)


def paired_error(got, want):
    return min(max(abs(g - w) for g, w in zip(got, perm)) for perm in itertools.permutations(want))


def test_three_distinct_real_roots():
    q = CubicPoly(6.0, 11.0, 6.0)  # (l+1)(l+2)(l+3)
    rs = solve(q)
    assert rs.kind is RootKind.THREE_REAL
    assert np.allclose(rs.real_roots, [-3, -2, -1], atol=1e-14)
    # prod (ri - rj)^2 = (1*2*1)^2
    assert discriminant(q) == pytest.approx(4.0, abs=1e-12)


def test_pure_imaginary_pair():
    rs = solve(CubicPoly(3.0, 3.0, 9.0))  # (l+3)(l^2+3)
    assert rs.kind is RootKind.ONE_REAL_PLUS_PAIR
    assert rs.real_roots[0] == pytest.approx(-3.0, abs=1e-14)
    assert abs(rs.pair_real_part) < 1e-14
    assert rs.pair_imag_part == pytest.approx(math.sqrt(3.0), abs=1e-14)
    assert discriminant(CubicPoly(3.0, 3.0, 9.0)) < 0


def test_triple_root():
    rs = solve(CubicPoly(3.0, 3.0, 1.0))
    assert rs.kind is RootKind.THREE_REAL
    assert np.allclose(rs.real_roots, -1.0, atol=1e-5)
    assert discriminant(CubicPoly(3.0, 3.0, 1.0)) == 0.0


def test_double_root_reported_as_three_real():
    rs = solve(CubicPoly(-5.0, 8.0, -4.0))  # (l-1)(l-2)^2
    assert rs.kind is RootKind.THREE_REAL
    assert np.allclose(rs.real_roots, [1, 2, 2], atol=1e-7)


def test_zero_root():
    rs = solve(CubicPoly(1.0, -2.0, 0.0))  # l (l+2)(l-1)
    assert np.allclose(rs.real_roots, [-2, 0, 1], atol=1e-15)


def test_against_companion_oracle(rng):
    worst = 0.0
    for _ in range(5000):
        B, C, E = rng.uniform(-10, 10, 3)
        q = CubicPoly(B, C, E)
        got = solve(q).roots()
        want = oracle_roots(B, C, E)
        worst = max(worst, paired_error(got, want) / (1 + max(abs(w) for w in want)))
    assert worst < 1e-8


@given(coef, coef, coef)
def test_kind_matches_discriminant_sign(B, C, E):
    q = CubicPoly(B, C, E)
    d = discriminant(q)
    scale = (1 + abs(B) + abs(C) ** 0.5 + abs(E) ** (1 / 3)) ** 6
    assume(abs(d) > 1e-6 * scale)
    rs = solve(q)
    assert (rs.kind is RootKind.THREE_REAL) == (d > 0)


@given(coef, coef, coef)
def test_vieta_reassembly(B, C, E):
    rs = solve(CubicPoly(B, C, E))
    b, c, e = rs.reassemble()
    s = 1 + abs(B) + abs(C) + abs(E)
    assert abs(b - B) <= 1e-8 * s
    assert abs(c - C) <= 1e-8 * s**2
    assert abs(e - E) <= 1e-8 * s**3


@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-20, 20))
def test_discriminant_is_product_of_squared_differences(r1, r2, r3):
    B = -(r1 + r2 + r3)
    C = r1 * r2 + r1 * r3 + r2 * r3
    E = -r1 * r2 * r3
    want = ((r1 - r2) * (r1 - r3) * (r2 - r3)) ** 2
    assert discriminant(CubicPoly(B, C, E)) == pytest.approx(want, rel=1e-9, abs=1e-6 * (1 + abs(B)) ** 6)


def test_roots_listing_convention():
    roots = solve(CubicPoly(1.0, 1.0, 1.0)).roots()  # l = -1, +-i
    assert roots[1].imag > 0 and roots[2] == roots[1].conjugate()


def test_nonfinite_coefficients_rejected():
    with pytest.raises(ValueError):
        CubicPoly(math.nan, 0.0, 0.0)


def test_pair_predicates_examples():
    r = pair_predicates(1.0, 1.0, 2.0)
    assert r.implied is PairImplication.PAIR_HAS_POSITIVE_REAL_PART and r.consistent
    assert r.roots.pair_real_part > 0
    r = pair_predicates(1.0, 1.0, 1.0)  # BC = D: pair on the imaginary axis
    assert r.implied is PairImplication.CONJUGATE_PAIR_EXISTS and r.consistent
    r = pair_predicates(1.0, 0.5, 1.0)  # BC = 0.5 < D
    assert r.implied is PairImplication.PAIR_HAS_POSITIVE_REAL_PART and r.consistent
    r = pair_predicates(1.0, 2.0, 1.0)  # D < BC = 2 <= 3D
    assert r.implied is PairImplication.CONJUGATE_PAIR_EXISTS and r.consistent
    r = pair_predicates(6.0, 11.0, 6.0)  # BC = 66 > 18
    assert r.implied is PairImplication.NONE and r.roots.kind is RootKind.THREE_REAL


def test_pair_predicates_boundary_bc_equals_d():
    # BC = D gives the pure imaginary pair: a pair, but not in the right half-plane
    r = pair_predicates(3.0, 3.0, 9.0)
    assert r.bc_le_3d and not r.bc_lt_d and r.consistent


@pytest.mark.parametrize("B,C,D", [(0.0, 1.0, 1.0), (-1.0, 1.0, 1.0), (1.0, 1.0, 0.0), (1.0, 1.0, -2.0), (1.0, 0.0, 1.0)])
def test_pair_predicates_hypotheses(B, C, D):
    with pytest.raises(HypothesisError):
        pair_predicates(B, C, D)


def test_pair_predicates_needs_positive_c():
    # BC < D, yet three real roots, two of them positive
    rs = solve(CubicPoly(1.0, -3.0, 1.0))
    assert rs.kind is RootKind.THREE_REAL
    assert np.allclose(rs.real_roots, [-1 - 2**0.5, 2**0.5 - 1, 1.0])
    with pytest.raises(HypothesisError):
        pair_predicates(1.0, -3.0, 1.0)


@given(st.floats(1e-3, 100), st.floats(1e-3, 100), st.floats(1e-3, 100))
def test_pair_predicates_never_contradicted(B, C, D):
    r = pair_predicates(B, C, D)
    # stay clear of the boundaries where the implication is only marginal
    assume(abs(B * C - 3 * D) > 1e-9 * (1 + abs(B * C)) and abs(B * C - D) > 1e-9 * (1 + abs(B * C)))
    assert r.consistent
