"""Quadrature helpers: geometric panels toward singular endpoints and
analytically closed upper tails."""

from __future__ import annotations

import math

import numpy as np

from .errors import QuadratureError

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(32)


def gauss_panel(func, a: float, b: float) -> float:
    """32-point Gauss-Legendre on [a, b]."""
    if b <= a:
        return 0.0
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    total = 0.0
    for xi, wi in zip(_NODES, _WEIGHTS):
        y = func(mid + half * xi)
        if math.isnan(y) or math.isinf(y):
            raise QuadratureError(f"non-finite integrand sample at {mid + half * xi}")
        total += wi * y
    return half * total


def adaptive_panel(func, a: float, b: float, rel_tol: float = 1e-13, depth: int = 36) -> float:
    """Gauss panel with bisection refinement.

    Needed for boundary-layer integrands (e^{-1/x} style) whose variation
    across one geometric panel exceeds what 32 nodes resolve.
    """
    if b <= a:
        return 0.0
    whole = gauss_panel(func, a, b)
    mid = 0.5 * (a + b)
    halves = gauss_panel(func, a, mid) + gauss_panel(func, mid, b)
    if abs(whole - halves) <= rel_tol * max(abs(halves), 1e-300) or depth <= 0:
        return halves
    return adaptive_panel(func, a, mid, rel_tol, depth - 1) + adaptive_panel(
        func, mid, b, rel_tol, depth - 1
    )


def integral_to_zero(
    func,
    t: float,
    rel_tol: float = 1e-12,
    max_panels: int = 200,
    monotone_bound: bool = True,
) -> float:
    """Integrate func over (0, t] with geometric panels (ratio 1/2) toward 0.

    With ``monotone_bound`` the remainder below the last panel is bounded by
    func(t_min) * t_min, valid for non-decreasing integrands; panels are added
    until that bound is below rel_tol of the running total.
    """
    if t <= 0:
        raise QuadratureError("upper endpoint must be positive")
    total = 0.0
    hi = t
    for _ in range(max_panels):
        lo = hi * 0.5
        total += adaptive_panel(func, lo, hi, rel_tol=0.1 * rel_tol)
        hi = lo
        if monotone_bound:
            rem = func(hi) * hi
            if not math.isfinite(rem):
                raise QuadratureError("non-finite remainder bound sample")
            if rem <= rel_tol * max(total, 1e-300):
                return total + 0.5 * rem
        elif hi < t * 2.0 ** -60:
            return total
    if monotone_bound:
        rem = func(hi) * hi
        if rem <= 1e-6 * max(total, 1e-300):
            return total + 0.5 * rem
        raise QuadratureError("geometric subdivision toward 0 did not converge")
    return total


def integral_between(func, a: float, b: float, panels_per_decade: int = 8) -> float:
    """Integrate func over [a, b] (0 < a < b) on geometrically spaced panels.

    Suited to integrands that vary on a logarithmic scale near a.
    """
    if a <= 0 or b <= a:
        if b == a:
            return 0.0
        raise QuadratureError("need 0 < a <= b")
    n = max(4, int(math.ceil(panels_per_decade * math.log10(b / a))))
    edges = np.geomspace(a, b, n + 1)
    return float(sum(gauss_panel(func, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])))


class CumulativeIntegral:
    """Integral of g between a reference point and t, with dyadic anchors.

    toward='zero' computes int_t^ref g for t <= ref; toward='infinity'
    computes int_ref^t g for t >= ref.  Anchor values at ref*2^-j (resp.
    ref*2^j) are cached, so repeated evaluations cost one Gauss panel each.
    """

    def __init__(self, g, ref: float, toward: str):
        if ref <= 0:
            raise QuadratureError("reference point must be positive")
        if toward not in ("zero", "infinity"):
            raise ValueError("toward must be 'zero' or 'infinity'")
        self.g = g
        self.ref = float(ref)
        self.toward = toward
        self._cache = [0.0]

    def _anchor(self, j: int) -> float:
        while len(self._cache) <= j:
            i = len(self._cache)
            if self.toward == "zero":
                a, b = self.ref * 2.0 ** -i, self.ref * 2.0 ** -(i - 1)
            else:
                a, b = self.ref * 2.0 ** (i - 1), self.ref * 2.0 ** i
            self._cache.append(self._cache[-1] + gauss_panel(self.g, a, b))
        return self._cache[j]

    def __call__(self, t: float) -> float:
        if t == self.ref:
            return 0.0
        if self.toward == "zero":
            if t > self.ref:
                raise QuadratureError(f"{t} above reference {self.ref}")
            j = int(math.floor(math.log2(self.ref / t)))
            return self._anchor(j) + gauss_panel(self.g, t, self.ref * 2.0 ** -j)
        if t < self.ref:
            raise QuadratureError(f"{t} below reference {self.ref}")
        j = int(math.floor(math.log2(t / self.ref)))
        return self._anchor(j) + gauss_panel(self.g, self.ref * 2.0 ** j, t)


def tail_integral(
    func,
    u: float,
    analytic_tail,
    rel_change: float = 1e-10,
    max_doublings: int = 120,
) -> float:
    """Compute the convergent upper tail integral of func over [u, infinity).

    Quadrature on doubling panels [T, 2T] plus the closed-form tail estimate
    ``analytic_tail(T)``; doubling stops once the estimate is stable to
    ``rel_change`` relative.
    """
    total = 0.0
    T = u
    prev = total + analytic_tail(T)
    for _ in range(max_doublings):
        total += gauss_panel(func, T, 2.0 * T)
        T *= 2.0
        cur = total + analytic_tail(T)
        if abs(cur - prev) <= rel_change * abs(cur):
            return cur
        prev = cur
    return prev
