"""Superlinear nonlinearities in canonical product form.

f(u) = C u^{rho+1} exp(int_B^u eps(t)/t dt) on [B, infinity), extended below B
as the matched pure power C u^{rho+1}.  The modulation eps must vanish at
infinity; its decay class (power-like or logarithmic) decides which two-term
expansion applies downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    A1ViolationError,
    ClassificationError,
    IntegrabilityError,
    PreconditionError,
)
from .limits import TO_INFINITY, LimitEstimate, limit_extrapolate
from .quadrature import CumulativeIntegral, tail_integral
from .regvar import RegVarFunction, rv_index_estimate

PURE_POWER = "pure_power"
F_RHO_ETA = "F_rho_eta"
F_RHO0_TAU = "F_rho0_tau"


@dataclass(frozen=True)
class NonlinearityClass:
    """Decay class of the modulation eps.

    pure_power: eps identically 0.  F_rho_eta: |eps| regularly varying with
    index eta in (-rho-2, 0].  F_rho0_tau: (ln u)^tau eps(u) -> ell_star.
    """

    kind: str
    eta: Optional[float] = None
    tau: Optional[float] = None
    ell_star: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (PURE_POWER, F_RHO_ETA, F_RHO0_TAU):
            raise ClassificationError(f"unknown class kind {self.kind!r}")
        if self.kind == F_RHO_ETA and self.eta is None:
            raise ClassificationError("F_rho_eta needs eta")
        if self.kind == F_RHO0_TAU and (self.tau is None or self.ell_star is None):
            raise ClassificationError("F_rho0_tau needs tau and ell_star")


@dataclass(frozen=True)
class Nonlinearity:
    C: float
    rho: float
    B: float
    epsilon: Callable[[float], float]
    klass: NonlinearityClass
    _exp_integral: CumulativeIntegral

    def __call__(self, u: float) -> float:
        if u < 0:
            raise PreconditionError(f"negative argument {u}")
        if u == 0.0:
            return 0.0
        if u <= self.B or self.klass.kind == PURE_POWER:
            return self.C * u ** (self.rho + 1.0)
        return self.C * u ** (self.rho + 1.0) * math.exp(self._exp_integral(u))

    def deriv(self, u: float) -> float:
        if u <= 0.0:
            return 0.0
        if u <= self.B:
            return self.C * (self.rho + 1.0) * u ** self.rho
        return self(u) * (self.rho + 1.0 + self.epsilon(u)) / u

    def log_modulation(self, u: float) -> float:
        """ln(f(u)) - ln(C u^{rho+1}), usable when f itself overflows."""
        if u <= self.B or self.klass.kind == PURE_POWER:
            return 0.0
        return self._exp_integral(u)

    def over_u(self, u: float) -> float:
        """j(u) = f(u)/u, strictly increasing under (A1)."""
        return self(u) / u


class Antiderivative:
    """F(u) = int_0^u f, cached cumulative quadrature above the matching point.

    Below B the pure-power part integrates in closed form.
    """

    def __init__(self, f: Nonlinearity):
        self.f = f
        self._FB = f.C * f.B ** (f.rho + 2.0) / (f.rho + 2.0)
        self._above = CumulativeIntegral(f, f.B, toward="infinity")

    def __call__(self, u: float) -> float:
        if u < 0:
            raise PreconditionError(f"negative argument {u}")
        if u <= self.f.B:
            return self.f.C * u ** (self.f.rho + 2.0) / (self.f.rho + 2.0)
        return self._FB + self._above(u)


def _sample_grid(B: float, n: int = 22) -> np.ndarray:
    return max(B, 1.0) * 2.0 ** np.arange(1, n + 1)


def make_nonlinearity(
    C: float,
    rho: float,
    B: float,
    epsilon: Callable[[float], float],
    class_tag: NonlinearityClass,
    validate: bool = True,
) -> Nonlinearity:
    """Construct f and check it against its declared decay class.

    Raises A1ViolationError when f(u)/u fails to increase at a sample, and
    ClassificationError when the extrapolated behavior of eps contradicts
    ``class_tag``.
    """
    if C <= 0 or rho <= 0 or B <= 0:
        raise PreconditionError("need C > 0, rho > 0, B > 0")
    exp_integral = CumulativeIntegral(lambda t: epsilon(t) / t, B, toward="infinity")
    f = Nonlinearity(C, rho, B, epsilon, class_tag, exp_integral)
    if not validate:
        return f

    us = _sample_grid(B)
    ev = np.array([epsilon(u) for u in us])
    # (A1): (f/u)' = f (rho + eps)/u^2, so the sign of rho + eps decides.
    bad = np.where(ev <= -rho)[0]
    if bad.size:
        raise A1ViolationError(
            f"f(u)/u not increasing: eps({us[bad[0]]}) = {ev[bad[0]]} <= -rho = {-rho}"
        )

    if class_tag.kind == PURE_POWER:
        if np.any(np.abs(ev) > 1e-12):
            raise ClassificationError("pure_power declared but eps is not identically 0")
        return f

    vanish = limit_extrapolate(list(zip(us, ev)), TO_INFINITY, tol=1e-3)
    if abs(vanish.value) > 5e-3:
        raise ClassificationError(f"eps does not vanish at infinity (limit {vanish.value})")

    if class_tag.kind == F_RHO_ETA:
        eta = class_tag.eta
        if not (-rho - 2.0 < eta <= 0.0):
            raise ClassificationError(f"eta = {eta} outside (-rho-2, 0]")
        absmod = RegVarFunction(lambda u: abs(epsilon(u)) + 1e-300, A=B)
        idx = rv_index_estimate(absmod, [2.0, 4.0], us[:16], tol=1e-3, cross_tol=1e-2)
        if idx.converged and abs(idx.value - eta) > 0.05:
            raise ClassificationError(
                f"declared eta = {eta} but |eps| has variation index {idx.value}"
            )
        return f

    tau, lstar = class_tag.tau, class_tag.ell_star
    seq = [(u, math.log(u) ** tau * e) for u, e in zip(us, ev)]
    est = limit_extrapolate(seq, TO_INFINITY, tol=1e-3)
    if est.converged and abs(est.value - lstar) > 0.02 * max(1.0, abs(lstar)):
        raise ClassificationError(
            f"declared ell_star = {lstar} but (ln u)^tau eps extrapolates to {est.value}"
        )
    return f


def keller_osserman_check(f: Nonlinearity, F: Optional[Antiderivative] = None):
    """Integrability of F^{-1/2} at infinity, the blow-up existence gate.

    Returns (holds, diagnostics).  The integral over [1, T] is accumulated on
    doubling panels; geometric decay of the increments means convergence,
    non-decaying increments mean divergence.
    """
    if F is None:
        F = Antiderivative(f)
    from .quadrature import gauss_panel

    T = max(1.0, f.B)
    increments = []
    total = 0.0
    for _ in range(60):
        inc = gauss_panel(lambda s: F(s) ** -0.5, T, 2.0 * T)
        increments.append(inc)
        total += inc
        T *= 2.0
        if len(increments) >= 6:
            ratios = [b / a for a, b in zip(increments[-5:-1], increments[-4:])]
            if all(r < 0.93 for r in ratios):
                return True, {"total_partial": total, "ratios": ratios, "T": T}
            if all(r > 0.97 for r in ratios):
                return False, {"total_partial": total, "ratios": ratios, "T": T}
        if inc < 1e-14 * total:
            return True, {"total_partial": total, "T": T}
    return False, {"total_partial": total, "T": T, "reason": "budget exhausted"}


def tail_inv_sqrt_F(f: Nonlinearity, F: Antiderivative, u: float) -> float:
    """int_u^infinity F(s)^{-1/2} ds with the power-law tail closed analytically.

    The tail beyond T is (2/rho) T F(T)^{-1/2} to leading order; T doubles
    until that correction stabilizes.
    """
    if f.rho <= 0:
        raise IntegrabilityError("tail diverges for rho <= 0")
    return tail_integral(
        lambda s: F(s) ** -0.5,
        u,
        lambda T: (2.0 / f.rho) * T * F(T) ** -0.5,
    )


def xi_functional(f: Nonlinearity, u: float, F: Optional[Antiderivative] = None) -> float:
    """Xi(u) = sqrt(F(u)) / (f(u) int_u^inf F^{-1/2}); limit rho/(2(rho+2))."""
    if u < f.B:
        raise PreconditionError(f"u = {u} below matching point B = {f.B}")
    if F is None:
        F = Antiderivative(f)
    return math.sqrt(F(u)) / (f(u) * tail_inv_sqrt_F(f, F, u))


def T1_functional(f: Nonlinearity, tau: float, u: float, F: Optional[Antiderivative] = None) -> float:
    """[rho/(2(rho+2)) - Xi(u)] (ln u)^tau; identically 0 for pure powers."""
    if f.klass.kind == PURE_POWER:
        return 0.0
    val = f.rho / (2.0 * (f.rho + 2.0)) - xi_functional(f, u, F)
    return val * math.log(u) ** tau


def T2_functional(f: Nonlinearity, tau: float, xi0: float, u: float) -> float:
    """[f(xi0 u)/(xi0 f(u)) - xi0^rho] (ln u)^tau; identically 0 for pure powers."""
    if xi0 <= 0:
        raise PreconditionError("xi0 must be positive")
    if f.klass.kind == PURE_POWER:
        return 0.0
    val = f(xi0 * u) / (xi0 * f(u)) - xi0 ** f.rho
    return val * math.log(u) ** tau
