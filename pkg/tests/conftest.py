import numpy as np
import pytest
from hypothesis import strategies as st

from burnstab.model import Params

BENCH = dict(alpha=1.0, beta=1.0, gamma=1.0, zeta=2.5, eta=1.0, f0=1.0)


def bench(theta):
    return Params(theta=theta, **BENCH)


def random_params(rng, n, theta_sign=None, feasible=True, lo=0.1, hi=10.0):
    """``n`` log-uniform parameter sets; with ``feasible`` zeta is drawn
    inside the interval that makes a* <= 1 and 0 <= b* <= a* hold."""
    out = []
    for _ in range(n):
        alpha, beta, gamma, eta, f0, th = np.exp(rng.uniform(np.log(lo), np.log(hi), 6))
        if feasible:
            ef = eta * f0
            zeta = rng.uniform((gamma + alpha * f0) * ef / gamma, (beta + gamma + alpha * f0) * ef / gamma)
        else:
            zeta = np.exp(rng.uniform(np.log(lo), np.log(hi)))
        sign = theta_sign if theta_sign is not None else rng.choice((-1.0, 1.0))
        out.append(Params(alpha, beta, gamma, zeta, eta, sign * th, f0))
    return out


positive = st.floats(min_value=0.05, max_value=20.0, allow_nan=False, allow_infinity=False)
nonzero_theta = st.one_of(st.floats(0.01, 30.0), st.floats(-30.0, -0.01))


@st.composite
def params_strategy(draw, theta=nonzero_theta):
    return Params(
        alpha=draw(positive),
        beta=draw(positive),
        gamma=draw(positive),
        zeta=draw(positive),
        eta=draw(positive),
        theta=draw(theta),
        f0=draw(positive),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)
