"""Blow-up profiles h and phi.

h(t) solves int_{h(t)}^infinity ds/sqrt(2F(s)) = K(t) and phi(t) solves
f(phi)/phi = K(t)^{-2}, where K is the primitive of the boundary weight k.
Both are computed by monotone inversion; the derivatives of h come from the
exact formulas h' = -k sqrt(2F(h)) and h'' = k^2 f(h) {1 + 2 Xi(h)[(K/k)'-1]},
never from finite differences of inverted values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, PreconditionError
from .limits import TO_ZERO, LimitEstimate, limit_extrapolate
from .nonlinearity import Antiderivative, Nonlinearity
from .quadrature import gauss_panel
from .regvar import left_inverse
from .weights import (
    K0_ZETA,
    K01_TAU,
    WeightClassReport,
    WeightFunction,
    classify_weight,
    weight_integral,
)


class PsiTransform:
    """psi(u) = int_u^infinity ds/sqrt(2F(s)), evaluated outside-in.

    Octave panels above the matching point B are cached; the sum runs from the
    far tail inward so there is no cancellation, and the analytic power-law
    tail beyond B*2^{j+pad} contributes at relative weight ~2^{-pad*rho/2}.
    """

    def __init__(self, f: Nonlinearity, F: Optional[Antiderivative] = None, pad: int = 48):
        self.f = f
        self.F = F if F is not None else Antiderivative(f)
        self.pad = pad
        self._panels = {}
        # Largest octave whose F stays below the float range; tail truncation
        # there costs a relative 2^{-octaves*rho/2}, negligible at our caps.
        log2_u_cap = (285.0 - math.log10(f.C)) / (f.rho + 2.0) / math.log10(2.0)
        self._j_cap = int(log2_u_cap - math.log2(f.B)) - 2

    def _g(self, s: float) -> float:
        return (2.0 * self.F(s)) ** -0.5

    def _panel(self, j: int) -> float:
        val = self._panels.get(j)
        if val is None:
            a = self.f.B * 2.0 ** j
            val = gauss_panel(self._g, a, 2.0 * a)
            self._panels[j] = val
        return val

    def __call__(self, u: float) -> float:
        if u < self.f.B:
            raise PreconditionError(f"u = {u} below matching point B = {self.f.B}")
        j = int(math.floor(math.log2(u / self.f.B)))
        jmax = min(j + 1 + self.pad, self._j_cap)
        if jmax <= j + 1:
            raise PreconditionError(f"u = {u} too large: antiderivative overflows")
        hi = self.f.B * 2.0 ** (j + 1)
        total = gauss_panel(self._g, u, hi)
        # Sum inward from the analytic tail so small terms accumulate first.
        T = self.f.B * 2.0 ** jmax
        acc = (2.0 / self.f.rho) * T * self._g(T)
        for i in range(jmax - 1, j, -1):
            acc += self._panel(i)
        return acc + total


@dataclass
class Profile:
    """Pointwise-evaluated profile with analytic derivatives and memo table."""

    eval: Callable[[float], float]
    d1: Callable[[float], float]
    d2: Callable[[float], float]
    kind: str
    t_max: float
    f: Nonlinearity
    k: WeightFunction
    _memo: dict = field(default_factory=dict)

    def __call__(self, t: float) -> float:
        v = self._memo.get(t)
        if v is None:
            v = self.eval(t)
            self._memo[t] = v
        return v


def psi_transform(f: Nonlinearity, u: float, psi: Optional[PsiTransform] = None) -> float:
    """psi(u), the decreasing transform whose inverse composed with K gives h."""
    if psi is None:
        psi = PsiTransform(f)
    return psi(u)


def _t_max(f: Nonlinearity, k: WeightFunction, psi: PsiTransform) -> float:
    """Largest usable t: K(t) <= psi(B)/2 solved for t, then halved for safety."""
    target = psi(f.B) / 2.0
    hi = 0.99 * k.nu
    if weight_integral(k, hi) <= target:
        return hi / 2.0
    t_star = left_inverse(lambda t: weight_integral(k, t), target, (hi * 1e-12, hi), tol=1e-10)
    return t_star / 2.0


class HProfile:
    """Builder for h = psi^{-1} o K with exact derivative formulas."""

    def __init__(self, f: Nonlinearity, k: WeightFunction, F: Optional[Antiderivative] = None):
        self.f = f
        self.k = k
        self.F = F if F is not None else Antiderivative(f)
        self.psi = PsiTransform(f, self.F)
        self._K_memo = {}
        self._h_memo = {}
        self.t_max = _t_max(f, k, self.psi)

    def K(self, t: float) -> float:
        v = self._K_memo.get(t)
        if v is None:
            v = weight_integral(self.k, t)
            self._K_memo[t] = v
        return v

    def h(self, t: float) -> float:
        if not 0.0 < t < self.t_max:
            raise DomainError(f"t = {t} outside (0, {self.t_max}); profile leaves the governed regime")
        memo = self._h_memo.get(t)
        if memo is not None:
            return memo
        y = self.K(t)
        # psi decreases, so invert -psi.  The pure-power part gives
        # psi(u) ~ sqrt((rho+2)/(2C)) (2/rho) u^{-rho/2}; seeding the bracket
        # with that inverse keeps the upward doubling short.
        rho = self.f.rho
        c = math.sqrt((rho + 2.0) / (2.0 * self.f.C)) * 2.0 / rho
        guess = (c / y) ** (2.0 / rho)
        # Newton refinement on psi(u) = y in the log variable
        # (d psi/d ln u = -(2F)^{-1/2} u exactly), with the step clamped so a
        # modulation-skewed seed cannot overshoot.  This only narrows the
        # bracket handed to the monotone inversion, which stays authoritative.
        u = max(self.f.B, guess)
        for _ in range(30):
            r = self.psi(u) - y
            step = r * math.sqrt(2.0 * self.F(u)) / u
            step = min(max(step, -1.5), 1.5)
            u = max(self.f.B, u * math.exp(step))
            if abs(step) <= 1e-11:
                break
        lo = max(self.f.B, u * (1.0 - 1e-8))
        hi = max(u * (1.0 + 1e-8), lo * (1.0 + 1e-8))
        # K(t) <= psi(B) by the t_max gate, so B is always a valid left end.
        while lo > self.f.B and self.psi(lo) < y:
            lo = max(self.f.B, lo / 64.0)
        out = left_inverse(lambda s: -self.psi(s), -y, (lo, hi))
        self._h_memo[t] = out
        return out

    def xi(self, u: float) -> float:
        """Xi(u) = sqrt(2F(u)) / (2 f(u) psi(u)), shared with the h'' formula."""
        return math.sqrt(2.0 * self.F(u)) / (2.0 * self.f(u) * self.psi(u))

    def derivatives(self, t: float, h: Optional[float] = None):
        if h is None:
            h = self.h(t)
        kt = self.k.func(t)
        d1 = -kt * math.sqrt(2.0 * self.F(h))
        dkk = 1.0 - (self.K(t) / kt) * (self.k.deriv(t) / kt)
        d2 = kt * kt * self.f(h) * (1.0 + 2.0 * self.xi(h) * (dkk - 1.0))
        return d1, d2


def profile_h(f: Nonlinearity, k: WeightFunction, t: float, builder: Optional[HProfile] = None):
    """(h(t), h'(t), h''(t))."""
    if builder is None:
        builder = HProfile(f, k)
    h = builder.h(t)
    d1, d2 = builder.derivatives(t, h)
    return h, d1, d2


def make_profile_h(f: Nonlinearity, k: WeightFunction, F: Optional[Antiderivative] = None) -> Profile:
    builder = HProfile(f, k, F)

    def d1(t: float) -> float:
        return builder.derivatives(t, prof(t))[0]

    def d2(t: float) -> float:
        return builder.derivatives(t, prof(t))[1]

    prof = Profile(eval=builder.h, d1=d1, d2=d2, kind="h", t_max=builder.t_max, f=f, k=k)
    prof.builder = builder
    return prof


def profile_phi(f: Nonlinearity, k: WeightFunction, t: float, builder: Optional[HProfile] = None) -> float:
    """phi(t) = j^{-1}(K(t)^{-2}) with j(u) = f(u)/u, increasing under (A1)."""
    K = weight_integral(k, t) if builder is None else builder.K(t)
    y = K ** -2.0
    jB = f.over_u(f.B)
    if y < jB:
        raise DomainError(f"t = {t} too large: 1/K^2 = {y} below j(B) = {jB}")
    return left_inverse(f.over_u, y, (f.B, 2.0 * f.B))


def make_profile_phi(f: Nonlinearity, k: WeightFunction, F: Optional[Antiderivative] = None) -> Profile:
    builder = HProfile(f, k, F)

    def ev(t: float) -> float:
        return profile_phi(f, k, t, builder)

    def no_deriv(t: float):
        raise PreconditionError("phi derivatives are not defined by the construction")

    prof = Profile(eval=ev, d1=no_deriv, d2=no_deriv, kind="phi", t_max=builder.t_max, f=f, k=k)
    prof.builder = builder
    return prof


@dataclass(frozen=True)
class LemmaRow:
    name: str
    estimate: LimitEstimate
    target: Optional[float]
    tol: float
    passed: bool


def _profile_grid(builder: HProfile, ratio: float = 0.65, n_max: int = 26, start: float = 0.25):
    """Geometric t-grid below t_max, stopped before F(h) can overflow."""
    ts = []
    # Start below 1/e so products like t ln t are already monotone on the grid.
    t = min(builder.t_max * 0.9, start)
    cap = 280.0 / (builder.f.rho + 2.0)
    while len(ts) < n_max and t > 1e-12:
        try:
            h = builder.h(t)
        except (OverflowError, DomainError, PreconditionError):
            break
        if math.log10(h) > cap:
            break
        ts.append(t)
        t *= ratio
    if len(ts) < 5:
        raise PreconditionError("fewer than 5 usable grid points below t_max")
    return np.array(ts)


def _divergence_row(name: str, ts, vals) -> LemmaRow:
    vals = np.asarray(vals)
    # ts descends toward 0; divergence = strictly growing, large values.
    growing = bool(np.all(np.diff(vals) > 0)) and vals[-1] > 50.0 and vals[-1] > 10.0 * vals[0]
    est = LimitEstimate(math.inf if growing else float(vals[-1]),
                        0.0 if growing else float(abs(vals[-1] - vals[-2])),
                        tuple(ts), growing)
    return LemmaRow(name, est, None, 0.0, growing)


def lemma_aux_report(
    f: Nonlinearity,
    k: WeightFunction,
    report: Optional[WeightClassReport] = None,
    tol: float = 0.01,
) -> list:
    """Limit checks of the structural identities satisfied by h.

    Each row extrapolates a ratio of h, h', h'' (and k) on a geometric grid
    and compares it with its closed-form target in rho and ell1; flat weights
    additionally get the divergence rows and the zeta-rate row.
    """
    if report is None:
        report = classify_weight(k)
    rho = f.rho
    l1 = report.ell1.value
    builder = HProfile(f, k)
    ts = _profile_grid(builder)
    hs = np.array([builder.h(t) for t in ts])
    d = np.array([builder.derivatives(t, h) for t, h in zip(ts, hs)])
    h1, h2 = d[:, 0], d[:, 1]
    kv = np.array([k.func(t) for t in ts])

    rows = []

    def add(name, vals, target, row_tol=tol):
        # Converged means: extrapolation residual below a third of the row's
        # pass tolerance, so the flag cannot carry a failing row.
        conv_tol = max(1e-4, row_tol * max(1.0, abs(target)) / 3.0)
        est = limit_extrapolate(list(zip(ts, vals)), TO_ZERO, tol=conv_tol)
        passed = est.converged and abs(est.value - target) <= row_tol * max(1.0, abs(target))
        rows.append(LemmaRow(name, est, target, row_tol, passed))

    for xi in (0.5, 1.0, 2.0):
        fv = np.array([f(xi * h) for h in hs])
        add(f"h''/(k^2 f({xi}h))", h2 / (kv ** 2 * fv),
            (2.0 + rho * l1) / (xi ** (rho + 1.0) * (2.0 + rho)))
    add("h h''/(h')^2", hs * h2 / h1 ** 2, (2.0 + rho * l1) / 2.0)
    add("ln k/ln h", np.log(kv) / np.log(hs), rho * (l1 - 1.0) / 2.0)
    add("h'/(t h'')", h1 / (ts * h2), -rho * l1 / (2.0 + rho * l1))
    add("h/(t^2 h'')", hs / (ts ** 2 * h2), rho ** 2 * l1 ** 2 / (2.0 * (2.0 + rho * l1)))
    add("h/(t h')", hs / (ts * h1), -rho * l1 / 2.0)
    add("ln t/ln h", np.log(ts) / np.log(hs), -rho * l1 / 2.0)

    if report.subclass == K0_ZETA or (report.subclass != K01_TAU and l1 <= 0.01):
        for j in (0.5, 1.0, 2.0):
            rows.append(_divergence_row(f"t^{j} h", ts, ts ** j * hs))
        if report.subclass == K0_ZETA:
            zeta = report.zeta
            Lstar = report.Lstar.value
            add(f"h'/(t^{zeta + 1} h'')", h1 / (ts ** (zeta + 1.0) * h2),
                -rho * Lstar / (2.0 * (zeta + 1.0)))
    return rows


def profile_table(f: Nonlinearity, k: WeightFunction, ts) -> list:
    """Rows (t, h, h', h'', phi) for export."""
    builder = HProfile(f, k)
    out = []
    for t in ts:
        h = builder.h(t)
        d1, d2 = builder.derivatives(t, h)
        out.append((t, h, d1, d2, profile_phi(f, k, t, builder)))
    return out
