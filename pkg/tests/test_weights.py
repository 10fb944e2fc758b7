import math

import pytest

from blowup.errors import InconsistentWeightError, InvalidRepresentationError, PreconditionError
from blowup.weights import (
    K0_ZETA,
    K01_TAU,
    WeightFunction,
    classify_weight,
    constant_weight,
    expflat_weight,
    power_weight,
    tur_check,
    weight_from_E,
    weight_from_W,
    weight_integral,
)


def test_weight_integral_power():
    k = power_weight(1.0, 1.0)  # k = sqrt(t)
    assert abs(weight_integral(k, 0.25) - (2.0 / 3.0) * 0.25 ** 1.5) < 1e-12
    with pytest.raises(PreconditionError):
        weight_integral(k, 2.0)


def test_weight_integral_expflat_oracle():
    # Frozen oracle for int_0^0.1 exp(-1/t) dt (independent quadrature).
    k = expflat_weight(1.0)
    val = weight_integral(k, 0.1)
    assert abs(val - 3.8302404656e-7) < 1e-6 * 3.83e-7


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 3.0])
def test_classify_powers(alpha):
    k = constant_weight(1.0) if alpha == 0.0 else power_weight(1.0, 2.0 * alpha)
    rep = classify_weight(k)
    ell1 = 1.0 / (alpha + 1.0)
    assert abs(rep.ell0.value) < 1e-4
    assert abs(rep.ell1.value - ell1) < 1e-4
    assert abs(rep.alpha - alpha) < 1e-4
    # Exact powers have no refined logarithmic perturbation.
    assert rep.subclass == K01_TAU
    assert abs(rep.Lsharp.value) < 1e-6


def test_classify_expflat():
    rep = classify_weight(expflat_weight(1.0), zeta=1.0)
    assert rep.subclass == K0_ZETA
    assert abs(rep.ell1.value) < 1e-4
    assert abs(rep.Lstar.value - 2.0) < 1e-3  # (1 + zeta)/zeta


def test_classify_expflat_sweep_finds_zeta():
    # Without a hint the default rate sweep must still land on zeta = 1.
    rep = classify_weight(expflat_weight(1.0))
    assert rep.subclass == K0_ZETA
    assert rep.zeta == 1.0
    assert abs(rep.Lstar.value - 2.0) < 1e-3


def test_from_E_roundtrip_log_perturbation():
    # k = t exp(int_t^0.5 E(y)/y dy) with E = 1/(-ln y): ell1 = 1/2, Lsharp = 1/4.
    k = weight_from_E(1.0, 1.0, lambda y: 1.0 / (-math.log(y)), 0.5)
    rep = classify_weight(k, tau=1.0)
    assert rep.subclass == K01_TAU
    assert abs(rep.ell1.value - 0.5) < 1e-4
    assert abs(rep.Lsharp.value - 0.25) < 1e-3


def test_from_E_roundtrip_alpha_zero():
    # alpha = 0, E = -(-ln y)^{-2}, tau = 2: ell1 = 1, Lsharp = -1.
    k = weight_from_E(1.0, 0.0, lambda y: -((-math.log(y)) ** -2.0), 0.5)
    rep = classify_weight(k, tau=2.0)
    assert rep.subclass == K01_TAU
    assert abs(rep.ell1.value - 1.0) < 1e-4
    assert abs(rep.Lsharp.value + 1.0) < 1e-3


def test_from_E_closed_form_when_E_zero():
    k = weight_from_E(2.0, 1.0, lambda y: 0.0, 0.5)
    for t in (0.01, 0.2):
        assert abs(k(t) - 2.0 * t) < 1e-12


def test_from_W_linear_matches_expflat():
    # W(t) = t gives K = d0 exp(-(1/t - 1/d1)): the expflat family, Lstar = 2.
    k = weight_from_W(1.0, 0.5, lambda t: t, W_deriv=lambda t: 1.0)
    rep = classify_weight(k, zeta=1.0)
    assert rep.subclass == K0_ZETA
    assert abs(rep.Lstar.value - 2.0) < 1e-3
    scale = math.exp(1.0 / 0.5)
    for t in (0.05, 0.2):
        assert abs(k(t) - scale * math.exp(-1.0 / t) / t ** 2) < 1e-10 * k(t)


def test_from_W_quadratic():
    k = weight_from_W(1.0, 0.5, lambda t: t ** 2 / 3.0, W_deriv=lambda t: 2.0 * t / 3.0)
    rep = classify_weight(k, zeta=2.0)
    assert rep.subclass == K0_ZETA
    assert abs(rep.Lstar.value - 1.0) < 1e-3


@pytest.mark.parametrize("W,Wd,probes", [
    (lambda t: t, lambda t: 1.0, (0.02, 0.1, 0.3)),
    (lambda t: t ** 2 / 3.0, lambda t: 2.0 * t / 3.0, (0.1, 0.2, 0.3)),
])
def test_from_W_primitive_identity(W, Wd, probes):
    # K = t k W holds exactly by construction: quadrature must agree to 1e-8.
    d0, d1 = 1.0, 0.5
    k = weight_from_W(d0, d1, W, W_deriv=Wd)
    from blowup.quadrature import CumulativeIntegral
    I = CumulativeIntegral(lambda x: 1.0 / (x * W(x)), d1, toward="zero")
    for t in probes:
        K_closed = d0 * math.exp(-I(t))
        assert abs(weight_integral(k, t) - K_closed) < 1e-8 * K_closed
        assert abs(t * k(t) * W(t) - K_closed) < 1e-12 * K_closed


def test_invalid_representations():
    with pytest.raises(InvalidRepresentationError):
        weight_from_E(-1.0, 1.0, lambda y: 0.0, 0.5)
    with pytest.raises(InvalidRepresentationError):
        weight_from_E(1.0, 1.0, lambda y: 0.3, 0.5)  # E(0) != 0
    with pytest.raises(InvalidRepresentationError):
        weight_from_E(1.0, 0.0, lambda y: y, 0.5)  # alpha = 0 needs E <= 0
    with pytest.raises(InvalidRepresentationError):
        weight_from_W(1.0, 0.5, lambda t: 1.0)  # W does not vanish at 0
    with pytest.raises(InvalidRepresentationError):
        weight_from_W(1.0, 0.5, lambda t: -t)
    with pytest.raises(InvalidRepresentationError):
        power_weight(-1.0, 2.0)
    with pytest.raises(InvalidRepresentationError):
        expflat_weight(0.0)


def test_weight_function_invariants():
    with pytest.raises(InconsistentWeightError):
        WeightFunction(func=lambda t: 2.0 - t, deriv=lambda t: -1.0, nu=1.0)
    with pytest.raises(InconsistentWeightError):
        WeightFunction(func=lambda t: t, deriv=lambda t: 2.0, nu=1.0)


def test_tur_check_divergence():
    est = tur_check(expflat_weight(1.0), theta=1.0)
    assert est.converged and est.value == math.inf


def test_tur_check_precondition():
    with pytest.raises(PreconditionError):
        tur_check(constant_weight(1.0), theta=1.0)
    with pytest.raises(PreconditionError):
        tur_check(expflat_weight(1.0), theta=-1.0)
