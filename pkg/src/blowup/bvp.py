"""Radial boundary blow-up solver.

Solves u'' + (N-1)u'/r + a u = b f(u) on intervals, balls and annuli with the
solution exploding at the boundary.  The blow-up is handled by truncating at a
small offset eps_b from the boundary and imposing one of two closures there:
a large Dirichlet value driven upward until the interior stops moving, or the
predicted boundary asymptotics.  The unknown is v = ln u, which keeps the
iterates positive and compresses the enormous dynamic range of the layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded

from .errors import (
    InconclusiveError,
    NonconvergenceError,
    PreconditionError,
    UnsupportedGeometryError,
)
from .expansion import ExpansionPrediction, xi0
from .limits import TO_ZERO, LimitEstimate, limit_extrapolate
from .nonlinearity import Nonlinearity, keller_osserman_check
from .profiles import HProfile
from .weights import WeightFunction

MESH_RATIO = 1.15


@dataclass(frozen=True)
class Geometry:
    kind: str  # interval | ball | annulus
    N: int
    inner: float
    outer: float

    def distance(self, x: float) -> float:
        if self.kind == "interval":
            return min(x, self.outer - x)
        if self.kind == "ball":
            return self.outer - x
        return min(x - self.inner, self.outer - x)

    @property
    def span(self) -> float:
        return self.outer - self.inner


def interval(L: float) -> Geometry:
    if L <= 0:
        raise PreconditionError("interval length must be positive")
    return Geometry("interval", 1, 0.0, L)


def ball(N: int, R: float) -> Geometry:
    if N < 3:
        raise PreconditionError("ball geometry needs N >= 3")
    if R <= 0:
        raise PreconditionError("radius must be positive")
    return Geometry("ball", N, 0.0, R)


def annulus(N: int, R0: float, R: float) -> Geometry:
    if N < 3:
        raise PreconditionError("annulus geometry needs N >= 3")
    if not 0 < R0 < R:
        raise PreconditionError("need 0 < R0 < R")
    return Geometry("annulus", N, R0, R)


@dataclass
class RadialProblem:
    geometry: Geometry
    a: float
    b: Callable[[float], float]  # function of the position/radius x
    f: Nonlinearity

    def __post_init__(self):
        xs = np.linspace(self.geometry.inner, self.geometry.outer, 13)[1:-1]
        for x in xs:
            bv = self.b(float(x))
            if not (bv >= 0.0) or not math.isfinite(bv):
                raise PreconditionError(f"b({x}) = {bv} is not a finite nonnegative value")


@dataclass
class LargeSolution:
    x: np.ndarray
    d: np.ndarray
    u: np.ndarray
    eps_b: float
    closure: str
    mesh_level: int
    skeleton_idx: np.ndarray  # indices of the geometric skeleton at the reporting end
    diagnostics: dict = field(default_factory=dict)

    @property
    def skeleton_d(self) -> np.ndarray:
        return self.d[self.skeleton_idx]

    @property
    def skeleton_u(self) -> np.ndarray:
        return self.u[self.skeleton_idx]


def eigenvalue_first_dirichlet(geometry: Geometry) -> float:
    """Principal Dirichlet eigenvalue of -Laplacian on the geometry."""
    if geometry.kind == "interval":
        return math.pi ** 2 / geometry.span ** 2
    if geometry.kind == "annulus":
        raise UnsupportedGeometryError("annulus eigenvalue is not provided")
    N, R = geometry.N, geometry.outer

    def endpoint(lam: float) -> float:
        # phi'' + (N-1)phi'/r + lam phi = 0, phi(0)=1, phi'(0)=0; series start.
        r0 = 1e-6 * R

        def rhs(r, y):
            return [y[1], -lam * y[0] - (N - 1) * y[1] / r]

        y0 = [1.0 - lam * r0 ** 2 / (2.0 * N), -lam * r0 / N]
        sol = solve_ivp(rhs, (r0, R), y0, rtol=1e-10, atol=1e-12, dense_output=False)
        return float(sol.y[0, -1])

    lo, hi = 1e-6, math.pi ** 2 / R ** 2 * 0.5
    while endpoint(hi) > 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise NonconvergenceError("eigenvalue bracket search failed")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if endpoint(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _layer_nodes(eps_b: float, d_max: float) -> np.ndarray:
    """Geometric distances eps_b * MESH_RATIO^j up to d_max (inclusive cap)."""
    out = [eps_b]
    while out[-1] * MESH_RATIO < d_max:
        out.append(out[-1] * MESH_RATIO)
    out.append(d_max)
    return np.array(out)


def _subdivide(x: np.ndarray, level: int) -> np.ndarray:
    if level <= 0:
        return x
    n = 2 ** level
    pieces = [x[:1]]
    for a, b in zip(x[:-1], x[1:]):
        pieces.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(pieces)


def build_mesh(geometry: Geometry, eps_b: float, mesh_level: int):
    """Node positions graded toward every blow-up boundary.

    Returns (x, skeleton_positions) where the skeleton is the geometric node
    set of the reporting end (left end for interval/annulus, outer boundary
    for the ball), preserved exactly under subdivision.
    """
    if eps_b <= 0 or eps_b >= geometry.span / 4:
        raise PreconditionError(f"eps_b = {eps_b} outside (0, span/4)")
    g = geometry
    if g.kind == "interval" or g.kind == "annulus":
        half = g.span / 2.0
        dd = _layer_nodes(eps_b, half)
        left = g.inner + dd
        right = g.outer - dd
        skeleton = left.copy()
        x = np.unique(np.concatenate([left, right]))
        x = _subdivide(x, mesh_level)
        return x, skeleton
    # ball: graded from the boundary all the way to the center.
    dd = _layer_nodes(eps_b, g.outer)
    x = np.sort(g.outer - dd)
    skeleton = g.outer - dd  # descending positions = ascending d
    x = _subdivide(x, mesh_level)
    return x, np.sort(skeleton)


def _fd_matrices(x: np.ndarray):
    """Three-point coefficients for v' and v'' at interior nodes of x."""
    hm = x[1:-1] - x[:-2]
    hp = x[2:] - x[1:-1]
    den = hm * hp * (hm + hp)
    d1 = np.stack([-(hp ** 2) / den, (hp ** 2 - hm ** 2) / den, hm ** 2 / den])
    d2 = np.stack([2.0 * hp / den, -2.0 * (hm + hp) / den, 2.0 * hm / den])
    return d1, d2


class _Discretization:
    """Residual and tridiagonal Jacobian of the log-variable operator."""

    def __init__(self, problem: RadialProblem, x: np.ndarray):
        self.p = problem
        self.x = x
        self.N = problem.geometry.N
        self.d1, self.d2 = _fd_matrices(x)
        self.bv = np.array([problem.b(float(xi)) for xi in x])
        self.is_ball = problem.geometry.kind == "ball"
        # radial term (N-1)/r at interior nodes; absent for intervals.
        if self.N > 1:
            self.rad = (self.N - 1) / x[1:-1]
        else:
            self.rad = np.zeros(len(x) - 2)

    def _gf(self, v: np.ndarray):
        """g = b f(u)/u - a and its v-derivative, u = e^v."""
        f = self.p.f
        u = np.exp(v)
        j = np.array([f(ui) / ui for ui in u])
        jp = np.array([f.deriv(ui) - f(ui) / ui for ui in u])  # d/dv of f(u)/u
        g = self.bv * j - self.p.a
        dg = self.bv * jp
        return g, dg

    def residual_jacobian(self, v: np.ndarray):
        """Residual at interior nodes (plus the center node for balls)."""
        vm, v0, vp = v[:-2], v[1:-1], v[2:]
        d1 = self.d1[0] * vm + self.d1[1] * v0 + self.d1[2] * vp
        d2 = self.d2[0] * vm + self.d2[1] * v0 + self.d2[2] * vp
        g, dg = self._gf(v)
        res = d2 + d1 ** 2 + self.rad * d1 - g[1:-1]
        lower = self.d2[0] + (2.0 * d1 + self.rad) * self.d1[0]
        diag = self.d2[1] + (2.0 * d1 + self.rad) * self.d1[1] - dg[1:-1]
        upper = self.d2[2] + (2.0 * d1 + self.rad) * self.d1[2]

        if self.is_ball:
            # Center node r = x[0] = 0: symmetry gives v'(0)=0 and the radial
            # operator reduces to N v''(0) ~ 2N (v1 - v0)/r1^2.
            r1 = self.x[1] - self.x[0]
            c = 2.0 * self.N / r1 ** 2
            res0 = c * (v[1] - v[0]) - g[0]
            return res, (lower, diag, upper), (res0, -c - dg[0], c)
        return res, (lower, diag, upper), None


def _scaled_norm(res: np.ndarray, scale: np.ndarray) -> float:
    return float(np.max(np.abs(res) / scale))


def solve_large_solution(
    problem: RadialProblem,
    mesh_level: int = 2,
    closure: str = "asymptotic",
    eps_b: float = 1e-5,
    boundary_value: Optional[Callable[[float], float]] = None,
    guess: Optional[Callable[[float], float]] = None,
    M0: float = 100.0,
    newton_tol: float = 3e-8,
    M_tol: float = 2e-5,
    check_eps_b: bool = False,
) -> LargeSolution:
    """Damped-Newton solve of the truncated problem in v = ln u.

    closure='asymptotic' imposes boundary_value(d) at the truncation nodes;
    closure='dirichlet-M' solves a doubling sequence of Dirichlet values until
    the interior stops changing.  ``guess`` maps position to an initial u.
    """
    ok, diag = keller_osserman_check(problem.f)
    if not ok:
        raise PreconditionError(f"nonlinearity fails the blow-up integrability gate: {diag}")
    lam = None
    if problem.geometry.kind != "annulus":
        lam = eigenvalue_first_dirichlet(problem.geometry)
        # b > 0 inside, so the admissible range is all real a; lam is recorded
        # for reporting only and the gate below is vacuous unless b vanishes
        # on an interior region, which this solver does not model.
    if closure not in ("asymptotic", "dirichlet-M"):
        raise PreconditionError(f"unknown closure {closure!r}")
    if closure == "asymptotic" and boundary_value is None:
        raise PreconditionError("asymptotic closure needs boundary_value(d)")

    x, skeleton = build_mesh(problem.geometry, eps_b, mesh_level)
    g = problem.geometry
    d = np.array([g.distance(float(xi)) for xi in x])
    disc = _Discretization(problem, x)

    if guess is not None:
        v = np.log(np.array([guess(float(xi)) for xi in x]))
    else:
        # Pure-power layer estimate: u ~ c d^{-2/rho} with the half-line constant.
        rho, C = problem.f.rho, problem.f.C
        bref = max(problem.b(float(x[np.argmax(d)])), 1e-8)
        c = (2.0 * (rho + 2.0) / (rho ** 2 * C * bref)) ** (1.0 / rho)
        v = np.log(c) - (2.0 / rho) * np.log(np.maximum(d, eps_b))

    is_ball = g.kind == "ball"

    def run_newton(v, vb):
        # Dirichlet data below the current iterate means the true solution is
        # capped by it near the boundary; clip the guess to stay compatible.
        v = np.minimum(v, vb + 1.0) if closure == "dirichlet-M" else v.copy()
        if is_ball:
            v[-1] = vb
        else:
            v[0] = vb
            v[-1] = vb
        history = []
        fallback = 0
        for it in range(200):
            res, (lo_, di_, up_), center = disc.residual_jacobian(v)
            if is_ball:
                res0, j00, j01 = center
                res_full = np.concatenate([[res0], res])
                nunk = len(v) - 1
                ab = np.zeros((3, nunk))
                ab[1, 0] = j00
                ab[0, 1] = j01
                ab[1, 1:] = di_
                ab[0, 2:] = up_[:-1]
                ab[2, 0:-1][1:] = lo_[1:]
                ab[2, 0] = lo_[0]
                rhs = -res_full
            else:
                nunk = len(v) - 2
                ab = np.zeros((3, nunk))
                ab[1, :] = di_
                ab[0, 1:] = up_[:-1]
                ab[2, :-1] = lo_[1:]
                rhs = -res
                res_full = res
            scale = np.abs(disc.bv * np.array([problem.f(ui) / ui for ui in np.exp(v)])) + abs(problem.a) + 1.0
            sc = scale[: nunk + 0] if is_ball else scale[1:-1]
            err = _scaled_norm(res_full, sc)
            history.append(err)
            if err < newton_tol:
                return v, history
            # Rounding floor: stop once the merit stagnates at a small value.
            if len(history) > 6 and err < 1e-6 and err > 0.5 * min(history[-6:-1]):
                return v, history
            try:
                step = solve_banded((1, 1), ab, rhs)
            except Exception as exc:
                raise NonconvergenceError(f"linear solve failed: {exc}") from exc
            step = np.clip(step, -4.0, 4.0)
            lam_d = 1.0
            improved = False
            best = None
            for _ in range(10):
                vt = v.copy()
                if is_ball:
                    vt[:-1] += lam_d * step
                else:
                    vt[1:-1] += lam_d * step
                res_t, _, center_t = disc.residual_jacobian(vt)
                res_t_full = np.concatenate([[center_t[0]], res_t]) if is_ball else res_t
                scale_t = np.abs(disc.bv * np.array([problem.f(ui) / ui for ui in np.exp(vt)])) + abs(problem.a) + 1.0
                sct = scale_t[:nunk] if is_ball else scale_t[1:-1]
                err_t = _scaled_norm(res_t_full, sct)
                if best is None or err_t < best[0]:
                    best = (err_t, vt)
                if err_t < err * (1.0 - 1e-4 * lam_d) or err_t < newton_tol:
                    v = vt
                    improved = True
                    break
                lam_d *= 0.5
            if not improved:
                fallback += 1
                if fallback > 3 and best[0] > 0.99 * err:
                    # Under-relaxed sweep: tiny fixed fraction of the Newton
                    # direction pushes through merit plateaus.
                    vt = v.copy()
                    if is_ball:
                        vt[:-1] += 0.05 * step
                    else:
                        vt[1:-1] += 0.05 * step
                    v = vt
                else:
                    v = best[1]  # best damped candidate even if not improving
            else:
                fallback = 0
        raise NonconvergenceError(f"no convergence after 200 iterations; history tail {history[-5:]}")

    if closure == "asymptotic":
        ub = boundary_value(eps_b)
        if not ub > 0:
            raise PreconditionError("boundary_value must be positive")
        v, history = run_newton(v, math.log(ub))
    else:
        M = M0
        prev = None
        for _ in range(80):
            v, history = run_newton(v, math.log(M))
            # The first cells cannot resolve the 1/M-scale layer, and that
            # error pollutes a ~100 eps_b neighborhood; saturate beyond it.
            interior = v[d >= 100.0 * eps_b]
            if prev is not None and len(prev) == len(interior):
                if np.max(np.abs(interior - prev)) < M_tol:
                    break
            prev = interior
            M *= 2.0
        else:
            raise NonconvergenceError("Dirichlet value doubling did not saturate")

    u = np.exp(v)
    if np.any(u <= 0) or not np.all(np.isfinite(u)):
        raise NonconvergenceError("solution lost positivity or finiteness")
    skeleton_idx = np.searchsorted(x, skeleton)
    skeleton_idx = skeleton_idx[np.abs(x[np.minimum(skeleton_idx, len(x) - 1)] - skeleton) < 1e-12 * max(1.0, g.outer)]
    sensitivity = None
    if check_eps_b:
        half = solve_large_solution(
            problem, mesh_level, closure, eps_b / 2.0, boundary_value, guess, M0,
            newton_tol, M_tol, check_eps_b=False,
        )
        mask = d >= 4.0 * eps_b
        vh = np.interp(x[mask], half.x, np.log(half.u))
        sensitivity = float(np.max(np.abs(np.log(u[mask]) - vh)))
    return LargeSolution(
        x=x,
        d=d,
        u=u,
        eps_b=eps_b,
        closure=closure,
        mesh_level=mesh_level,
        skeleton_idx=skeleton_idx,
        diagnostics={
            "residual_history": history,
            "lambda_first": lam,
            "closure_value": float(u[0] if not is_ball else u[-1]),
            "eps_b_sensitivity": sensitivity,
        },
    )


def manufactured_problem(
    u_star: Callable[[float], float],
    d1: Callable[[float], float],
    d2: Callable[[float], float],
    geometry: Geometry,
    a: float,
    f: Nonlinearity,
) -> RadialProblem:
    """Problem whose exact solution is u_star: b = (Lap u* + a u*)/f(u*)."""

    def b(x: float) -> float:
        us = u_star(x)
        if us <= 0:
            raise PreconditionError(f"u_star({x}) = {us} not positive")
        rad = (geometry.N - 1) / x * d1(x) if geometry.N > 1 and x > 0 else 0.0
        val = (d2(x) + rad + a * us) / f(us)
        if val < 0:
            raise PreconditionError(f"manufactured b({x}) = {val} negative")
        return val

    return RadialProblem(geometry=geometry, a=a, b=b, f=f)


def _usable_skeleton(sol: LargeSolution, d_cap: float):
    dd = sol.skeleton_d
    uu = sol.skeleton_u
    m = (dd >= 2.0 * sol.eps_b) & (dd <= d_cap)
    return dd[m], uu[m]


def verify_first_order(
    sol: LargeSolution,
    pred: ExpansionPrediction,
    h_builder: HProfile,
    d_cap: Optional[float] = None,
) -> LimitEstimate:
    """Extrapolated limit of u/(xi0 h(d)) over the boundary-layer skeleton."""
    cap = d_cap if d_cap is not None else min(0.1, 0.9 * h_builder.t_max)
    dd, uu = _usable_skeleton(sol, cap)
    if len(dd) < 8:
        raise InconclusiveError(f"only {len(dd)} usable boundary-layer nodes")
    samples = [(float(t), float(u) / (pred.leading * h_builder.h(float(t)))) for t, u in zip(dd, uu)]
    return limit_extrapolate(samples, TO_ZERO, tol=5e-3)


def verify_second_order(
    sol: LargeSolution,
    pred: ExpansionPrediction,
    h_builder: HProfile,
    d_cap: Optional[float] = None,
):
    """Fitted second-order coefficient from R(d) = (u/(xi0 h) - 1) * rate^{-1}."""
    if pred.order != 2:
        raise PreconditionError("prediction has no second-order term")
    cap = d_cap if d_cap is not None else min(0.1, 0.9 * h_builder.t_max)
    dd, uu = _usable_skeleton(sol, cap)
    if len(dd) < 8:
        raise InconclusiveError(f"only {len(dd)} usable boundary-layer nodes")
    samples = []
    for t, u in zip(dd, uu):
        base = float(u) / (pred.leading * h_builder.h(float(t))) - 1.0
        if pred.rate_kind == "algebraic":
            samples.append((float(t), base * float(t) ** -pred.rate))
        else:
            samples.append((float(t), base * (-math.log(float(t))) ** pred.rate))
    est = limit_extrapolate(samples, TO_ZERO, tol=5e-2)
    return est.value, est


@dataclass(frozen=True)
class SignReport:
    plus: LimitEstimate
    minus: LimitEstimate
    target_plus: float
    target_minus: float
    delta1: float  # largest d below which both signs are correct
    passed: bool


def subsupersolution_check(
    f: Nonlinearity,
    k: WeightFunction,
    a: float,
    eps: float,
    order: int,
    ell1: float,
    tau: Optional[float] = None,
    chi_tilde: Optional[float] = None,
    bexp_theta: float = 1.0,
    bexp_c: float = 0.0,
    builder: Optional[HProfile] = None,
    tol: float = 0.02,
) -> SignReport:
    """Sign verification of the comparison barriers.

    Order 1 evaluates B(d) = 1 + a h/h'' - (1 -/+ eps) k^2 f(xi h)/(xi h'')
    with xi = [(2+ell1 rho)/((1 -/+ 2 eps)(2+rho))]^{1/rho}; the limits are
    -/+ eps/(1 -/+ 2 eps).  Order 2 evaluates the two-term barrier defect
    J(d) scaled by (-ln d)^tau; the limits are -/+ rho eps.
    """
    if not 0 < eps < 0.5:
        raise PreconditionError("eps must lie in (0, 1/2)")
    rho = f.rho
    if builder is None:
        builder = HProfile(f, k)
    ts = []
    t = min(0.25, builder.t_max * 0.9)
    while len(ts) < 26 and t > 1e-10:
        ts.append(t)
        t *= 0.6
    ts = np.array(ts)

    def series(sign: float):
        # sign=+1 for the supersolution branch, -1 for the subsolution branch
        out = []
        if order == 1:
            xi = ((2.0 + ell1 * rho) / ((1.0 - sign * 2.0 * eps) * (2.0 + rho))) ** (1.0 / rho)
            for t in ts:
                h = builder.h(float(t))
                _, h2 = builder.derivatives(float(t), h)
                kt = k.func(float(t))
                val = 1.0 + a * h / h2 - (1.0 - sign * eps) * kt * kt * f(xi * h) / (xi * h2)
                out.append((float(t), val))
            return out
        if tau is None or chi_tilde is None:
            raise PreconditionError("order 2 needs tau and chi_tilde")
        x0 = xi0(rho, ell1)
        c = chi_tilde + sign * eps
        for t in ts:
            t = float(t)
            h = builder.h(t)
            h1, h2 = builder.derivatives(t, h)
            L = -math.log(t)
            w = L ** -tau
            w1 = tau * L ** (-tau - 1.0) / t
            w2 = tau * ((tau + 1.0) * L ** (-tau - 2.0) - L ** (-tau - 1.0)) / t ** 2
            uq = x0 * h * (1.0 + c * w)
            upp = x0 * (h2 * (1.0 + c * w) + 2.0 * h1 * c * w1 + h * c * w2)
            kt = k.func(t)
            bq = kt * kt * (1.0 + (bexp_c - sign * eps) * t ** bexp_theta)
            val = L ** tau * (upp + a * uq - bq * f(uq)) / (x0 * h2)
            out.append((t, val))
        return out

    est_p = limit_extrapolate(series(+1.0), TO_ZERO, tol=5e-3)
    est_m = limit_extrapolate(series(-1.0), TO_ZERO, tol=5e-3)
    if order == 1:
        tp = -eps / (1.0 - 2.0 * eps)
        tm = eps / (1.0 + 2.0 * eps)
    else:
        tp = -rho * eps
        tm = rho * eps

    # Largest d below which the signs hold on the sampled grid (ts descends).
    vp = np.array([v for _, v in series(+1.0)])
    vm = np.array([v for _, v in series(-1.0)])
    good = (vp < 0.0) & (vm > 0.0)
    delta1 = 0.0
    for t, ok_ in zip(ts, good):
        if ok_ and np.all(good[ts <= t]):
            delta1 = float(t)
            break
    passed = (
        est_p.converged
        and est_m.converged
        and abs(est_p.value - tp) <= tol * max(1.0, abs(tp))
        and abs(est_m.value - tm) <= tol * max(1.0, abs(tm))
        and delta1 > 0.0
    )
    return SignReport(est_p, est_m, tp, tm, delta1, passed)
