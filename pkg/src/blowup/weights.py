"""Boundary weight functions on (0, nu).

Admissible weights k are positive, non-decreasing near 0 and C^1; the
classifier measures the limits of K(t)/k(t) and its derivative at 0 (K being
the primitive of k), tags the weight as power-like or exponentially flat and
extracts the rate constants of the refined subclasses.  Constructors build
weights from the two canonical integral representations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    InconsistentWeightError,
    InvalidRepresentationError,
    PreconditionError,
)
from .limits import DEFAULT_TOL, TO_ZERO, LimitEstimate, limit_extrapolate
from .quadrature import CumulativeIntegral, integral_to_zero
from .regvar import RegVarFunction, rv_index_estimate

K01 = "K01"
K01_TAU = "K01_tau"
K0 = "K0"
K0_ZETA = "K0_zeta"
UNCLASSIFIED = "unclassified"

_DEFAULT_SWEEP = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class WeightFunction:
    """Positive non-decreasing C^1 weight on (0, nu), with derivative."""

    func: Callable[[float], float]
    deriv: Callable[[float], float]
    nu: float
    label: str = ""

    def __post_init__(self):
        # Ratio 0.8 keeps exponentially flat samples above the float floor.
        ts = self.nu * 0.75 * (0.8 ** np.arange(6))
        vals = [self.func(t) for t in ts]
        if any(not (v > 0.0) or not math.isfinite(v) for v in vals):
            raise InconsistentWeightError(f"{self.label or 'weight'} not positive on samples")
        # Non-decreasing near 0 (lower part of the sample).
        low = vals[2:]
        if any(a < b * (1 - 1e-9) for a, b in zip(low[:-1], low[1:])):
            raise InconsistentWeightError(f"{self.label or 'weight'} decreasing near 0")
        for t in ts[1:4]:
            h = t * 1e-4
            fd = (self.func(t + h) - self.func(t - h)) / (2 * h)
            dv = self.deriv(t)
            if abs(fd - dv) > 1e-4 * (abs(fd) + abs(dv)) + 1e-12:
                raise InconsistentWeightError(
                    f"derivative mismatch at t={t}: analytic {dv}, finite-difference {fd}"
                )

    def __call__(self, t: float) -> float:
        return self.func(t)


@dataclass(frozen=True)
class WeightClassReport:
    """Classification invariants of a weight."""

    ell0: LimitEstimate
    ell1: LimitEstimate
    subclass: str
    alpha: Optional[float] = None
    zeta: Optional[float] = None
    Lstar: Optional[LimitEstimate] = None
    tau: Optional[float] = None
    Lsharp: Optional[LimitEstimate] = None
    index_check: Optional[LimitEstimate] = None

    @property
    def ell1_value(self) -> float:
        return self.ell1.value


def fd_derivative(func: Callable[[float], float]) -> Callable[[float], float]:
    """4th-order central difference with the step tied to the local argument,
    for weights supplied as bare expressions."""

    def deriv(t: float) -> float:
        h = t * 1e-4
        return (-func(t + 2 * h) + 8 * func(t + h) - 8 * func(t - h) + func(t - 2 * h)) / (12 * h)

    return deriv


def weight_integral(k: WeightFunction, t: float, rel_tol: float = 1e-12) -> float:
    """K(t) = integral of k over (0, t], geometric panels toward 0."""
    if not 0 < t < k.nu:
        raise PreconditionError(f"t={t} outside (0, {k.nu})")
    return integral_to_zero(k.func, t, rel_tol=rel_tol)


def _safe_grid(k: WeightFunction, t_hi=None, ratio=0.7, n_max=26, floor=1e-9):
    """Geometric grid descending toward 0, stopped before k underflows.

    Strongly flat weights underflow within a decade of the start, so the grid
    ratio is relaxed until enough representable points fit."""
    start = min(0.08, k.nu / 4) if t_hi is None else t_hi
    best = []
    for r in (ratio, 0.85, 0.93, 0.97):
        ts = []
        t = start
        while len(ts) < n_max and t > floor:
            v = k.func(t)
            if not math.isfinite(v) or v < 1e-280:
                break
            ts.append(t)
            t *= r
        if len(ts) == n_max:
            return np.array(ts)
        if len(ts) > len(best):
            best = ts
    if len(best) < 4:
        raise InconsistentWeightError("weight evaluable on fewer than 4 grid points")
    return np.array(best)


def _pick_sweep(candidates):
    """Prefer the rate at which the limit exists and is nonzero (past the
    critical rate the sequence diverges, below it the limit degenerates to 0);
    with only zero limits report the smallest converging rate."""
    converged = [c for c in candidates if c[1].converged]
    if not converged:
        return None
    nonzero = [c for c in converged if abs(c[1].value) > max(10.0 * c[1].stderr, 1e-5)]
    if nonzero:
        return max(nonzero, key=lambda c: c[0])
    return min(converged, key=lambda c: c[0])


def classify_weight(
    k: WeightFunction,
    zeta: Optional[float] = None,
    tau: Optional[float] = None,
    grid=None,
    tol: float = DEFAULT_TOL,
    sweep_tol: float = 1e-3,
) -> WeightClassReport:
    """Measure ell0, ell1 and the subclass rate constants of a weight.

    ``zeta``/``tau`` hint the rate of the refined subclass; without a hint a
    default sweep over {1/2, 1, 2} is tried, largest rate first.
    """
    ts = _safe_grid(k) if grid is None else np.asarray(grid, dtype=float)
    Kv = np.array([weight_integral(k, t) for t in ts])
    kv = np.array([k.func(t) for t in ts])
    kd = np.array([k.deriv(t) for t in ts])
    # (K/k)'(t); written as a product of ratios so exponentially small k
    # values do not underflow when squared.
    dkk = 1.0 - (Kv / kv) * (kd / kv)

    ell0 = limit_extrapolate(list(zip(ts, Kv / kv)), TO_ZERO, tol=max(tol, 1e-4))
    ell1 = limit_extrapolate(list(zip(ts, dkk)), TO_ZERO, tol=max(tol, 1e-4))
    if abs(ell0.value) > 0.05:
        raise InconsistentWeightError(f"K/k does not vanish at 0 (got {ell0.value})")
    l1 = ell1.value
    if l1 < -0.02 or l1 > 1.02:
        raise InconsistentWeightError(f"(K/k)' limit {l1} outside [0, 1]")
    # The refined sweep multiplies (K/k)' - ell1 by a diverging rate, so noise
    # in ell1 contaminates it; snap to the exact endpoint when within noise.
    if abs(l1 - 1.0) <= max(5.0 * ell1.stderr, 1e-6):
        l1 = 1.0

    if l1 > 0.01:
        alpha = 1.0 / l1 - 1.0
        rates = [tau] if tau is not None else sorted(_DEFAULT_SWEEP, reverse=True)
        cands = []
        for r in rates:
            seq = (-np.log(ts)) ** r * (dkk - l1)
            cands.append((r, limit_extrapolate(list(zip(ts, seq)), TO_ZERO, tol=sweep_tol)))
        picked = _pick_sweep(cands)
        # Cross-check: the variation index of u -> k(1/u) must be -alpha.
        Z = RegVarFunction(lambda u: k.func(1.0 / u), A=1.0 / ts[0])
        idx = rv_index_estimate(Z, [2.0, 4.0], 1.0 / ts[::-1][3:], tol=1e-3)
        if idx.converged and abs(idx.value + alpha) > 0.05:
            raise InconsistentWeightError(
                f"index cross-check failed: got {idx.value}, expected {-alpha}"
            )
        if picked is None:
            return WeightClassReport(ell0, ell1, UNCLASSIFIED, alpha=alpha, index_check=idx)
        return WeightClassReport(
            ell0, ell1, K01_TAU, alpha=alpha, tau=picked[0], Lsharp=picked[1], index_check=idx
        )

    rates = [zeta] if zeta is not None else sorted(_DEFAULT_SWEEP, reverse=True)
    cands = []
    for r in rates:
        seq = dkk / ts ** r
        cands.append((r, limit_extrapolate(list(zip(ts, seq)), TO_ZERO, tol=sweep_tol)))
    picked = _pick_sweep(cands)
    if picked is None:
        return WeightClassReport(ell0, ell1, UNCLASSIFIED, alpha=None)
    return WeightClassReport(ell0, ell1, K0_ZETA, zeta=picked[0], Lstar=picked[1])


def weight_from_E(
    c0: float,
    alpha: float,
    E: Callable[[float], float],
    c1: float,
    label: str = "",
) -> WeightFunction:
    """Build the power-like weight k(t) = c0 t^alpha exp(int_t^c1 E(y)/y dy).

    Requires E continuous with E(0) = 0, and E <= alpha when alpha = 0.
    The derivative is analytic: k'(t) = k(t) (alpha - E(t)) / t.
    """
    if c0 <= 0 or c1 <= 0:
        raise InvalidRepresentationError("c0 and c1 must be positive")
    if alpha < 0:
        raise InvalidRepresentationError("alpha must be >= 0")
    probe = E(1e-300)
    if not math.isfinite(probe) or abs(probe) > 0.05:
        raise InvalidRepresentationError(f"E(0) != 0 (E near 0 is {probe})")
    if alpha == 0.0:
        for t in 0.9 * c1 * 0.5 ** np.arange(20):
            if E(t) > alpha + 1e-12:
                raise InvalidRepresentationError("alpha = 0 requires E <= alpha")
    I = CumulativeIntegral(lambda y: E(y) / y, c1, toward="zero")

    def func(t: float) -> float:
        return c0 * t ** alpha * math.exp(I(t))

    def deriv(t: float) -> float:
        return func(t) * (alpha - E(t)) / t

    return WeightFunction(func=func, deriv=deriv, nu=c1, label=label or "from_E")


def weight_from_W(
    d0: float,
    d1: float,
    W: Callable[[float], float],
    W_deriv: Optional[Callable[[float], float]] = None,
    label: str = "",
) -> WeightFunction:
    """Build the exponentially flat weight with K(t) = d0 exp(-int_t^d1 dx/(x W(x))).

    Then k(t) = K(t)/(t W(t)), and the primitive identity K = t k W holds by
    construction.  W must be positive, with W(t) -> 0 and t W'(t) -> 0 at 0,
    and 1/(x W) must have a divergent integral at 0.
    """
    if d0 <= 0 or d1 <= 0:
        raise InvalidRepresentationError("d0 and d1 must be positive")
    for t in (d1 * 1e-2, d1 * 1e-4, d1 * 1e-6):
        w = W(t)
        if not (w > 0) or not math.isfinite(w):
            raise InvalidRepresentationError(f"W not positive at {t}")
    if abs(W(d1 * 1e-8)) > 0.2:
        raise InvalidRepresentationError("W does not vanish at 0")
    I = CumulativeIntegral(lambda x: 1.0 / (x * W(x)), d1, toward="zero")
    # Sampled divergence of the inner integral.
    if I(d1 * 2.0 ** -24) - I(d1 * 2.0 ** -8) < 5.0:
        raise InvalidRepresentationError(
            "int dx/(x W) does not diverge at 0; not an exponentially flat weight"
        )
    if W_deriv is None:
        def W_deriv(t, _W=W):
            h = t * 1e-4
            return (-_W(t + 2 * h) + 8 * _W(t + h) - 8 * _W(t - h) + _W(t - 2 * h)) / (12 * h)

    def func(t: float) -> float:
        return d0 * math.exp(-I(t)) / (t * W(t))

    def deriv(t: float) -> float:
        w = W(t)
        return func(t) * (1.0 / (t * w) - 1.0 / t - W_deriv(t) / w)

    return WeightFunction(func=func, deriv=deriv, nu=d1, label=label or "from_W")


def tur_check(
    k: WeightFunction,
    theta: float,
    report: Optional[WeightClassReport] = None,
    grid=None,
) -> LimitEstimate:
    """Check the rapid-derivative-growth limit k'/(k t^{theta-1}) -> infinity.

    Applies to exponentially flat weights, and to power-like ones whose
    refined-rate data (1-ell1)^2 + Lsharp^2 is nonzero.  Divergence detected
    is reported as value=inf, converged=True.
    """
    if theta <= 0:
        raise PreconditionError("theta must be positive")
    if report is None:
        report = classify_weight(k)
    if report.subclass == K0_ZETA or (
        report.subclass == UNCLASSIFIED and report.ell1.value <= 0.01
    ):
        pass
    elif report.subclass == K01_TAU:
        lsharp = report.Lsharp.value if report.Lsharp is not None else 0.0
        if (1.0 - report.ell1.value) ** 2 + lsharp ** 2 <= 1e-10:
            raise PreconditionError(
                "power-like weight with ell1 = 1 and Lsharp = 0: ratio has no divergence"
            )
    else:
        raise PreconditionError(f"weight subclass {report.subclass} not covered")
    ts = _safe_grid(k) if grid is None else np.asarray(grid, dtype=float)
    q = np.array([k.deriv(t) / (k.func(t) * t ** (theta - 1.0)) for t in ts])
    increasing = bool(np.all(np.diff(q) > 0))  # ts descends toward 0
    if increasing and q[-1] > 50.0 and q[-1] / max(q[0], 1e-300) > 10.0:
        return LimitEstimate(math.inf, 0.0, tuple(ts), True)
    return LimitEstimate(float(q[-1]), float(abs(q[-1] - q[-2])), tuple(ts), False)


def power_weight(C0: float, gamma: float, nu: float = 1.0) -> WeightFunction:
    """k(t) = sqrt(C0) t^{gamma/2}."""
    if C0 <= 0 or gamma < 0:
        raise InvalidRepresentationError("need C0 > 0 and gamma >= 0")
    c = math.sqrt(C0)
    half = gamma / 2.0
    return WeightFunction(
        func=lambda t: c * t ** half,
        deriv=lambda t: c * half * t ** (half - 1.0) if half != 0 else 0.0,
        nu=nu,
        label=f"power(C0={C0}, gamma={gamma})",
    )


def constant_weight(c: float, nu: float = 1.0) -> WeightFunction:
    if c <= 0:
        raise InvalidRepresentationError("constant must be positive")
    return WeightFunction(
        func=lambda t: c, deriv=lambda t: 0.0, nu=nu, label=f"constant({c})"
    )


def expflat_weight(zeta: float = 1.0, nu: float = 1.0) -> WeightFunction:
    """k(t) = exp(-t^-zeta): exponentially flat, rate zeta, Lstar=(1+zeta)/zeta."""
    if zeta <= 0:
        raise InvalidRepresentationError("zeta must be positive")
    return WeightFunction(
        func=lambda t: math.exp(-t ** -zeta),
        deriv=lambda t: math.exp(-t ** -zeta) * zeta * t ** (-zeta - 1.0),
        nu=nu,
        label=f"expflat(zeta={zeta})",
    )
