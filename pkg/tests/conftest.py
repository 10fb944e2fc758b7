"""Shared fixtures: canonical nonlinearities and weights used across tests."""

import math

import pytest

from blowup.nonlinearity import (
    F_RHO0_TAU,
    F_RHO_ETA,
    PURE_POWER,
    NonlinearityClass,
    make_nonlinearity,
)
from blowup.weights import (
    classify_weight,
    constant_weight,
    expflat_weight,
    power_weight,
)


@pytest.fixture(scope="session")
def f_cubic():
    """f(u) = u^3 (rho = 2, pure power)."""
    return make_nonlinearity(1.0, 2.0, 1.0, lambda u: 0.0, NonlinearityClass(PURE_POWER))


@pytest.fixture(scope="session")
def f_quadratic():
    """f(u) = u^2 (rho = 1, pure power)."""
    return make_nonlinearity(1.0, 1.0, 1.0, lambda u: 0.0, NonlinearityClass(PURE_POWER))


@pytest.fixture(scope="session")
def f_log_mod():
    """f = u^3 * exp(int 1/(t ln t)): eps = 1/ln u, tau = 1, ell_star = 1."""
    return make_nonlinearity(
        1.0,
        2.0,
        math.e,
        lambda u: 1.0 / math.log(u),
        NonlinearityClass(F_RHO0_TAU, tau=1.0, ell_star=1.0),
    )


@pytest.fixture(scope="session")
def f_eta_mod():
    """f = u^3 * exp(int u^-1/u): eps = 1/u, regularly varying with eta = -1."""
    return make_nonlinearity(
        1.0, 2.0, math.e, lambda u: 1.0 / u, NonlinearityClass(F_RHO_ETA, eta=-1.0)
    )


@pytest.fixture(scope="session")
def k_linear():
    """k(t) = t."""
    return power_weight(1.0, 2.0)


@pytest.fixture(scope="session")
def k_const():
    """k identically 1."""
    return constant_weight(1.0)


@pytest.fixture(scope="session")
def k_flat():
    """k(t) = exp(-1/t)."""
    return expflat_weight(1.0)


@pytest.fixture(scope="session")
def rep_linear(k_linear):
    return classify_weight(k_linear, tau=1.0)


@pytest.fixture(scope="session")
def rep_const(k_const):
    return classify_weight(k_const)


@pytest.fixture(scope="session")
def rep_flat(k_flat):
    return classify_weight(k_flat, zeta=1.0)
