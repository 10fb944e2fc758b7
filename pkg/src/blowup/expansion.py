"""Boundary expansion coefficients and case dispatch.

The leading coefficient xi0 depends only on rho and ell1.  The second-order
coefficient is algebraic in d (rate varpi = min(theta, zeta), coefficient chi)
for exponentially flat weights, or logarithmic (rate (-ln d)^{-tau},
coefficient chi_tilde) for power-like weights; which formula applies is
decided by the (weight subclass, nonlinearity class) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CaseMismatchError, PreconditionError
from .limits import TO_ZERO, LimitEstimate, limit_extrapolate
from .nonlinearity import F_RHO0_TAU, F_RHO_ETA, PURE_POWER, Nonlinearity
from .profiles import HProfile, _profile_grid
from .weights import (
    K0_ZETA,
    K01_TAU,
    UNCLASSIFIED,
    WeightClassReport,
    WeightFunction,
)

FIRST_ORDER = "first_order"
ALGEBRAIC_I = "algebraic_i"
ALGEBRAIC_II = "algebraic_ii"
ALGEBRAIC_III = "algebraic_iii"
LOGARITHMIC_I = "logarithmic_i"
LOGARITHMIC_II = "logarithmic_ii"


@dataclass(frozen=True)
class BExpansion:
    """Boundary form of the coefficient b: b = k(d)^2 (1 + c_tilde d^theta + o)."""

    theta: float = 1.0
    c_tilde: float = 0.0
    form: str = "first_order"

    def __post_init__(self):
        if self.form not in ("first_order", "two_term"):
            raise PreconditionError(f"unknown b-expansion form {self.form!r}")
        if self.form == "two_term" and self.theta <= 0:
            raise PreconditionError("two-term b-expansion needs theta > 0")


@dataclass(frozen=True)
class ExpansionPrediction:
    order: int
    leading: float
    phi_leading: float
    rate_kind: Optional[str]
    rate: Optional[float]
    second_coeff: Optional[float]
    case_tag: str
    inputs_echo: dict = field(default_factory=dict)

    def second_term(self, d: float) -> float:
        """The predicted relative correction at distance d."""
        if self.order < 2:
            return 0.0
        if self.rate_kind == "algebraic":
            return self.second_coeff * d ** self.rate
        return self.second_coeff * (-math.log(d)) ** -self.rate


def xi0(rho: float, ell1: float) -> float:
    """Leading blow-up coefficient ((2 + ell1 rho)/(2 + rho))^{1/rho}."""
    if rho <= 0:
        raise PreconditionError("rho must be positive")
    if not -0.02 <= ell1 <= 1.02:
        raise PreconditionError(f"ell1 = {ell1} outside [0, 1]")
    ell1 = min(max(ell1, 0.0), 1.0)
    return ((2.0 + ell1 * rho) / (2.0 + rho)) ** (1.0 / rho)


def phi_leading(rho: float, ell1: float) -> float:
    """Leading coefficient in the phi normalization, [2(2+ell1 rho)/rho^2]^{1/rho}."""
    ell1 = min(max(ell1, 0.0), 1.0)
    return (2.0 * (2.0 + ell1 * rho) / rho ** 2) ** (1.0 / rho)


def predict_first_order(f: Nonlinearity, k_report: WeightClassReport) -> ExpansionPrediction:
    """First-order prediction u ~ xi0 h(d), equivalently phi_leading * phi(d)."""
    if k_report.subclass == UNCLASSIFIED:
        raise PreconditionError("weight is unclassified; no expansion applies")
    rho = f.rho
    l1 = k_report.ell1.value
    lead = xi0(rho, l1)
    plead = phi_leading(rho, l1)
    # Consistency of the two normalizations: plead * lim(phi/h) = lead.
    ratio = (2.0 * (rho + 2.0) / rho ** 2) ** (-1.0 / rho)
    if abs(plead * ratio - lead) > 1e-10 * lead:
        raise PreconditionError("internal inconsistency between h and phi normalizations")
    return ExpansionPrediction(
        order=1,
        leading=lead,
        phi_leading=plead,
        rate_kind=None,
        rate=None,
        second_coeff=None,
        case_tag=FIRST_ORDER,
        inputs_echo={"rho": rho, "ell1": l1},
    )


def _heaviside(x: float) -> float:
    # Convention: both perturbations count when theta == zeta.
    return 1.0 if x >= 0.0 else 0.0


def chi_algebraic(
    rho: float,
    theta: float,
    c_tilde: float,
    zeta: float,
    Lstar: float,
    f_klass,
):
    """(varpi, chi) for the algebraic two-term expansion (flat weights).

    chi1 collects the weight perturbation (rate zeta, coefficient Lstar/2) and
    the b perturbation (rate theta, coefficient -c_tilde/rho); only the
    slower-decaying one survives unless the rates tie.  A logarithmic
    nonlinearity class adds a correction and must have tau = varpi/zeta.
    """
    if rho <= 0 or theta <= 0 or zeta <= 0:
        raise PreconditionError("need rho, theta, zeta > 0")
    varpi = min(theta, zeta)
    chi1 = (Lstar / 2.0) * _heaviside(theta - zeta) - (c_tilde / rho) * _heaviside(zeta - theta)
    if f_klass.kind in (PURE_POWER, F_RHO_ETA):
        if f_klass.kind == F_RHO_ETA and f_klass.eta == 0.0:
            raise CaseMismatchError("eta = 0 is not covered by the algebraic cases")
        return varpi, chi1
    tau1 = varpi / zeta
    if abs(f_klass.tau - tau1) > 1e-12:
        raise CaseMismatchError(
            f"logarithmic class has tau = {f_klass.tau}, but the expansion needs tau = varpi/zeta = {tau1}"
        )
    x0 = xi0(rho, 0.0)
    corr = (f_klass.ell_star / rho) * (rho * zeta * Lstar / (2.0 * (1.0 + zeta))) ** tau1 * (
        1.0 / (rho + 2.0) + math.log(x0)
    )
    return varpi, chi1 - corr


def chi_logarithmic(
    rho: float,
    ell1: float,
    tau: float,
    Lsharp: float,
    ell_star: Optional[float],
    f_klass,
    strict: bool = True,
) -> float:
    """chi_tilde for the logarithmic two-term expansion (power-like weights).

    Base value Lsharp/(2 + rho ell1); a logarithmic nonlinearity class adds a
    correction.  With ``strict`` the degeneracy conditions of the two cases
    are enforced as preconditions.
    """
    if rho <= 0 or tau <= 0:
        raise PreconditionError("need rho > 0 and tau > 0")
    chi2 = Lsharp / (2.0 + rho * ell1)
    if f_klass.kind == PURE_POWER:
        return chi2
    if f_klass.kind == F_RHO_ETA:
        if strict and (f_klass.eta == 0.0 or Lsharp == 0.0):
            raise PreconditionError(
                "degenerate case: eta * Lsharp = 0 leaves no logarithmic second term"
            )
        return chi2
    ls = f_klass.ell_star if ell_star is None else ell_star
    if strict and (ls * (ell1 - 1.0)) ** 2 + Lsharp ** 2 == 0.0:
        raise PreconditionError(
            "degenerate case: ell_star*(ell1-1) and Lsharp both vanish"
        )
    x0 = xi0(rho, ell1)
    corr = (ls / rho) * (rho * ell1 / 2.0) ** tau * (
        2.0 * (1.0 - ell1) / ((rho + 2.0) * (rho * ell1 + 2.0)) + math.log(x0)
    )
    return chi2 - corr


def dispatch_case(k_report: WeightClassReport, f_klass, bexp: BExpansion):
    """Map (weight subclass, nonlinearity class, b form) to the expansion case.

    Returns (case_tag, reason); reason is non-empty only for 'unsupported'.
    Every input pair lands in exactly one case.
    """
    if k_report.subclass == UNCLASSIFIED:
        return "unsupported", "weight subclass could not be identified at any swept rate"
    if bexp.form == "first_order":
        return FIRST_ORDER, ""
    if k_report.subclass == K0_ZETA:
        if f_klass.kind == PURE_POWER:
            return ALGEBRAIC_I, ""
        if f_klass.kind == F_RHO_ETA:
            if f_klass.eta == 0.0:
                return "unsupported", "eta = 0 modulation is outside the algebraic cases"
            return ALGEBRAIC_II, ""
        varpi = min(bexp.theta, k_report.zeta)
        if abs(f_klass.tau - varpi / k_report.zeta) > 1e-12:
            return "unsupported", "logarithmic modulation rate does not match varpi/zeta"
        return ALGEBRAIC_III, ""
    # Power-like weight: logarithmic rate cases.
    l1 = k_report.ell1.value
    Lsharp = k_report.Lsharp.value if k_report.Lsharp is not None else 0.0
    if f_klass.kind == PURE_POWER:
        return LOGARITHMIC_I, ""
    if f_klass.kind == F_RHO_ETA:
        if f_klass.eta == 0.0 or Lsharp == 0.0:
            return "unsupported", "eta * Lsharp = 0: no logarithmic second term survives"
        return LOGARITHMIC_I, ""
    if (f_klass.ell_star * (l1 - 1.0)) ** 2 + Lsharp ** 2 == 0.0:
        return "unsupported", "ell_star*(ell1-1) and Lsharp both vanish"
    return LOGARITHMIC_II, ""


def predict(
    f: Nonlinearity,
    k_report: WeightClassReport,
    bexp: BExpansion,
) -> ExpansionPrediction:
    """Full prediction: leading coefficient plus second-order term when a case applies."""
    first = predict_first_order(f, k_report)
    case, reason = dispatch_case(k_report, f.klass, bexp)
    echo = dict(first.inputs_echo)
    echo.update({"theta": bexp.theta, "c_tilde": bexp.c_tilde})
    if f.klass.kind == F_RHO_ETA:
        echo["eta"] = f.klass.eta
    if f.klass.kind == F_RHO0_TAU:
        echo["tau_f"] = f.klass.tau
        echo["ell_star"] = f.klass.ell_star
    if case == FIRST_ORDER:
        return first
    if case == "unsupported":
        return ExpansionPrediction(
            order=1,
            leading=first.leading,
            phi_leading=first.phi_leading,
            rate_kind=None,
            rate=None,
            second_coeff=None,
            case_tag=f"unsupported: {reason}",
            inputs_echo=echo,
        )
    if case.startswith("algebraic"):
        zeta = k_report.zeta
        Lstar = k_report.Lstar.value
        varpi, chi = chi_algebraic(f.rho, bexp.theta, bexp.c_tilde, zeta, Lstar, f.klass)
        echo.update({"zeta": zeta, "Lstar": Lstar})
        return ExpansionPrediction(
            order=2,
            leading=first.leading,
            phi_leading=first.phi_leading,
            rate_kind="algebraic",
            rate=varpi,
            second_coeff=chi,
            case_tag=case,
            inputs_echo=echo,
        )
    tau = k_report.tau
    Lsharp = k_report.Lsharp.value if k_report.Lsharp is not None else 0.0
    chi_t = chi_logarithmic(
        f.rho, k_report.ell1.value, tau, Lsharp, None, f.klass, strict=False
    )
    echo.update({"tau": tau, "Lsharp": Lsharp})
    return ExpansionPrediction(
        order=2,
        leading=first.leading,
        phi_leading=first.phi_leading,
        rate_kind="logarithmic",
        rate=tau,
        second_coeff=chi_t,
        case_tag=case,
        inputs_echo=echo,
    )


def script_H_check(
    f: Nonlinearity,
    k: WeightFunction,
    tau: float,
    k_report: WeightClassReport,
    builder: Optional[HProfile] = None,
) -> LimitEstimate:
    """Limit of H(t) = (-ln t)^tau (1 - k^2 f(xi0 h)/(xi0 h'')).

    The target is rho * chi_tilde; convergence is logarithmic, so the
    extrapolation works in the 1/|ln t| variable over the profile grid.
    """
    if builder is None:
        builder = HProfile(f, k)
    x0 = xi0(f.rho, k_report.ell1.value)
    # Ratio 1/2 makes the grid uniform in -ln t, which suits the logarithmic
    # convergence rate of H; depth is limited only by the profile's range.
    ts = _profile_grid(builder, ratio=0.5, n_max=42)
    samples = []
    for t in ts:
        h = builder.h(t)
        _, h2 = builder.derivatives(t, h)
        kt = k.func(t)
        val = (-math.log(t)) ** tau * (1.0 - kt * kt * f(x0 * h) / (x0 * h2))
        samples.append((t, val))
    return limit_extrapolate(samples, TO_ZERO, tol=5e-3)
