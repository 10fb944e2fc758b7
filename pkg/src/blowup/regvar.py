"""Regular-variation toolkit.

Evaluation and index estimation of regularly varying functions, integral-ratio
limit checks, left-continuous monotone inversion and the rapid-growth
(Gamma-variation) ratio test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    IntegrabilityError,
    MonotonicityError,
    UnbracketableError,
)
from .limits import (
    DEFAULT_TOL,
    TO_INFINITY,
    LimitEstimate,
    limit_extrapolate,
)
from .quadrature import gauss_panel, integral_between


@dataclass(frozen=True)
class RegVarFunction:
    """A positive function on [A, infinity) with optional declared index."""

    func: Callable[[float], float]
    A: float
    declared_index: Optional[float] = None

    def __call__(self, u: float) -> float:
        if u < self.A:
            raise DomainError(f"argument {u} below left endpoint {self.A}")
        val = self.func(u)
        if not (val > 0.0) or not math.isfinite(val):
            raise DomainError(f"function not positive/finite at {u}: {val}")
        return val


@dataclass(frozen=True)
class KaramataRepresentation:
    """Slowly varying function in integral-exponential form.

    L0(u) = Mbar * exp( int_B^u y(t)/t dt ), so the logarithmic derivative
    u L0'(u)/L0(u) equals y(u).
    """

    B: float
    Mbar: float
    y: Callable[[float], float]
    normalised: bool = True

    def slowly_varying(self) -> Callable[[float], float]:
        def L0(u: float) -> float:
            if u < self.B:
                raise DomainError(f"argument {u} below representation base {self.B}")
            return self.Mbar * math.exp(integral_between(lambda t: self.y(t) / t, self.B, u))

        return L0

    def log_derivative(self, u: float) -> float:
        return self.y(u)


def rv_index_estimate(
    Z: RegVarFunction,
    xi_set: Sequence[float],
    u_grid: Sequence[float],
    tol: float = DEFAULT_TOL,
    cross_tol: float = 1e-3,
) -> LimitEstimate:
    """Estimate the variation index from scaling ratios log(Z(xi u)/Z(u))/log xi.

    The per-xi estimates are pooled; disagreement across xi beyond cross_tol
    marks the result unconverged.
    """
    if any(xi <= 0 or xi == 1.0 for xi in xi_set):
        raise ValueError("scale factors must be positive and != 1")
    per_xi = []
    for xi in xi_set:
        samples = []
        for u in u_grid:
            ratio = Z(xi * u) / Z(u)
            samples.append((u, math.log(ratio) / math.log(xi)))
        per_xi.append(limit_extrapolate(samples, TO_INFINITY, tol=tol))
    values = [e.value for e in per_xi]
    pooled = float(np.mean(values))
    spread = max(values) - min(values)
    stderr = max(max(e.stderr for e in per_xi), 0.5 * spread)
    converged = all(e.converged for e in per_xi) and spread <= cross_tol
    return LimitEstimate(pooled, stderr, per_xi[0].grid, converged)


def karamata_direct_check(
    Z: RegVarFunction,
    q: float,
    j: float,
    side: str,
    u_grid: Optional[Sequence[float]] = None,
    tol: float = 1e-4,
) -> LimitEstimate:
    """Extrapolate the ratio u^{j+1} Z(u) / integral of x^j Z(x).

    side='lower' integrates from the left endpoint A (limit j+q+1); side='upper'
    integrates the tail to infinity (limit -(j+q+1)), which requires
    j < -(q+1) or an integrable borderline tail.
    """
    if side not in ("lower", "upper"):
        raise ValueError("side must be 'lower' or 'upper'")
    if u_grid is None:
        u_grid = Z.A * 4.0 * 2.0 ** np.arange(18)
    integrand = lambda x: x ** j * Z(x)

    if side == "lower":
        if j < -(q + 1):
            raise ValueError("lower form needs j >= -(q+1)")
        samples = []
        acc = 0.0
        prev = Z.A
        for u in sorted(u_grid):
            acc += integral_between(integrand, prev, u)
            prev = u
            samples.append((u, u ** (j + 1) * Z(u) / acc))
        return limit_extrapolate(samples, TO_INFINITY, tol=tol)

    if j > -(q + 1):
        raise IntegrabilityError(
            "upper-tail form needs j < -(q+1) "
            "(or an integrable tail in the borderline case j = -(q+1))"
        )
    u_grid = sorted(u_grid)
    u_max = u_grid[-1]
    # Tail integral from u_max outward on doubling panels; must decay.
    tail = 0.0
    T = u_max
    last_panel = math.inf
    for _ in range(400):
        panel = gauss_panel(integrand, T, 2.0 * T)
        if panel > last_panel * 1.0001:
            raise IntegrabilityError(
                "tail integral of x^j Z(x) is not converging; the upper-tail "
                "form needs j < -(q+1) or an integrable borderline tail"
            )
        tail += panel
        T *= 2.0
        last_panel = panel
        if panel <= 1e-13 * tail:
            break
    else:
        raise IntegrabilityError(
            "tail integral of x^j Z(x) did not converge within the panel budget"
        )
    # Accumulate inward so each grid point gets its own tail value.
    samples = []
    acc = tail
    hi = u_max
    for u in reversed(u_grid):
        acc += integral_between(integrand, u, hi) if u < hi else 0.0
        hi = u
        samples.append((u, u ** (j + 1) * Z(u) / acc))
    return limit_extrapolate(samples, TO_INFINITY, tol=tol)


def left_inverse(
    H: Callable[[float], float],
    y: float,
    bracket: tuple,
    tol: float = 1e-13,
    max_doublings: int = 400,
) -> float:
    """Left-continuous inverse: inf{s : H(s) >= y} for non-decreasing H.

    The bracket is doubled automatically until H(lo) <= y <= H(hi).  On a flat
    level set the left endpoint is returned (up to tolerance).  Evaluations are
    logged and any observed order violation raises MonotonicityError.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if hi <= lo:
        raise ValueError("bracket must satisfy lo < hi")
    seen = []

    def ev(s: float) -> float:
        val = H(s)
        if math.isnan(val):
            raise DomainError(f"H returned NaN at {s}")
        for s2, v2 in seen:
            if (s - s2) * (val - v2) < -1e-9 * (abs(val) + abs(v2) + 1e-12):
                raise MonotonicityError(
                    f"H({s})={val} vs H({s2})={v2}: non-monotone samples"
                )
        seen.append((s, val))
        if len(seen) > 8:
            seen.pop(0)
        return val

    width = hi - lo
    n = 0
    while ev(hi) < y:
        if n >= max_doublings:
            raise UnbracketableError(f"H({hi}) < {y} after {n} upward doublings")
        lo = hi
        seen.clear()
        hi += width
        width *= 2.0
        n += 1
    n = 0
    while ev(lo) > y:
        if n >= max_doublings:
            raise UnbracketableError(f"H({lo}) > {y} after {n} downward doublings")
        hi = lo
        seen.clear()
        lo -= width
        width *= 2.0
        n += 1
    # Invariant: H(lo) <= y <= H(hi); bisect on the predicate H(s) >= y.
    for _ in range(200):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if ev(mid) >= y:
            hi = mid
        else:
            lo = mid
    return hi


def gamma_variation_check(
    U: Callable[[float], float],
    g: Callable[[float], float],
    lam: float,
    u_grid: Sequence[float],
    tol: float = 1e-4,
) -> LimitEstimate:
    """Extrapolate U(y + lam*g(y))/U(y); the rapid-growth limit is e^lam."""
    samples = []
    for u in u_grid:
        gu = g(u)
        if not gu > 0:
            raise DomainError(f"auxiliary function not positive at {u}")
        shifted = u + lam * gu
        num = U(shifted)
        den = U(u)
        if not (math.isfinite(num) and math.isfinite(den)) or den <= 0:
            raise DomainError(f"ratio undefined at {u}")
        samples.append((u, num / den))
    return limit_extrapolate(samples, TO_INFINITY, tol=tol)
