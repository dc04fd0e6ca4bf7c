import json
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given

from burnstab.exceptions import InvalidParams
from burnstab.model import Params, equilibrium, feasibility, vector_field
from conftest import bench, params_strategy, random_params


def test_bench_equilibrium():
    eq = equilibrium(bench(-0.1))
    assert eq.a_star == pytest.approx(0.4, abs=1e-15)
    assert eq.f_star == 1.0
    assert eq.b_star == pytest.approx(0.2, abs=1e-15)
    assert feasibility(bench(-0.1)).feasible


def test_equilibrium_matches_symbolic_solve():
    a, f, b = sp.symbols("a f b")
    al, be, ga, ze, et, th, f0 = sp.symbols("alpha beta gamma zeta eta theta f0", positive=True)
    rhs = [-al * f * a - be * b + ga * (1 - a), ze * a - et * f, th * (f - f0) * a]
    sols = sp.solve(rhs, [a, f, b], dict=True)
    interior = [s for s in sols if sp.simplify(s[a]) != 0]
    assert len(interior) == 1
    s = interior[0]
    p = Params(1.3, 0.7, 2.1, 4.4, 0.9, -2.0, 1.1)
    subs = {al: p.alpha, be: p.beta, ga: p.gamma, ze: p.zeta, et: p.eta, th: p.theta, f0: p.f0}
    expect = [float(s[v].subs(subs)) for v in (a, f, b)]
    assert np.allclose(equilibrium(p), expect, rtol=1e-14)


def test_the_other_equilibrium_has_no_land():
    # a = 0 forces f = 0 and b = gamma/beta; it is not the interior state
    p = bench(1.0)
    assert np.allclose(vector_field(p, (0.0, 0.0, p.gamma / p.beta)), 0.0)


@given(params_strategy())
def test_equilibrium_is_a_zero_of_the_field(p):
    eq = equilibrium(p)
    res = np.abs(vector_field(p, eq))
    scale = 1.0 + p.gamma + p.beta * abs(eq.b_star) + p.alpha * eq.f_star * eq.a_star + p.zeta * eq.a_star
    assert np.max(res) <= 1e-12 * scale


@given(params_strategy())
def test_equilibrium_independent_of_theta(p):
    assert equilibrium(p) == equilibrium(p.with_(theta=-p.theta))


def test_feasibility_edges():
    # zeta = eta*f0 puts a* exactly at 1
    p = Params(alpha=1, beta=5, gamma=1, zeta=1, eta=1, theta=1, f0=1)
    assert equilibrium(p).a_star == 1.0
    assert feasibility(p).a_star_le_one
    assert not feasibility(p.with_(zeta=0.99)).a_star_le_one
    # zeta = 2 gives b* = 0 for the benchmark constants
    q = bench(1.0).with_(zeta=2.0)
    assert equilibrium(q).b_star == 0.0
    assert feasibility(q).b_star_nonneg
    r = bench(1.0).with_(zeta=1.9)
    assert not feasibility(r).b_star_nonneg


def test_feasibility_agrees_with_equilibrium_bounds(rng):
    for p in random_params(rng, 2000, feasible=False):
        eq = equilibrium(p)
        fr = feasibility(p)
        if abs(fr.margins[1]) > 1e-9 and abs(fr.margins[2]) > 1e-9 and abs(fr.margins[0]) > 1e-9:
            assert fr.a_star_le_one == (eq.a_star <= 1.0)
            assert fr.b_star_nonneg == (eq.b_star >= 0.0)
            assert fr.b_star_le_a_star == (eq.b_star <= eq.a_star)


@pytest.mark.parametrize(
    "bad",
    [
        dict(alpha=0.0),
        dict(beta=-1.0),
        dict(f0=math.inf),
        dict(zeta=math.nan),
        dict(theta=0.0),
        dict(eta="1"),
        dict(gamma=True),
    ],
)
def test_invalid_params(bad):
    base = dict(alpha=1, beta=1, gamma=1, zeta=2.5, eta=1, theta=1, f0=1)
    base.update(bad)
    with pytest.raises(InvalidParams):
        Params(**base)


def test_vartheta_alias():
    p = bench(1.0).with_(vartheta=0.1)
    assert p.theta == -0.1 and p.vartheta == 0.1 and p.policy == "proactive"
    assert Params.from_dict({**p.to_dict(), "theta": 2.0}).policy == "reactive"
    d = {k: v for k, v in p.to_dict().items() if k != "theta"}
    assert Params.from_dict({**d, "vartheta": 3.0}).theta == -3.0


@given(params_strategy())
def test_json_round_trip(p):
    assert Params.from_dict(json.loads(json.dumps(p.to_dict()))) == p


def test_from_dict_rejects_missing_and_extra():
    d = bench(1.0).to_dict()
    with pytest.raises(InvalidParams, match="missing"):
        Params.from_dict({k: v for k, v in d.items() if k != "eta"})
    with pytest.raises(InvalidParams, match="unknown"):
        Params.from_dict({**d, "kappa": 1.0})
    with pytest.raises(InvalidParams):
        Params.from_dict({**d, "vartheta": 1.0})


def test_vector_field_broadcasts():
    p = bench(2.0)
    a = np.linspace(0.1, 0.9, 5)
    out = vector_field(p, (a, np.ones(5), 0.5 * a))
    for i in range(5):
        assert np.allclose([o[i] for o in out], vector_field(p, (a[i], 1.0, 0.5 * a[i])))
