"""Numerical limit estimation on geometric grids.

Every asymptotic statement handled by this package is a one-sided limit
(t -> 0+ or u -> infinity).  They are all estimated the same way: sample the
quantity on a geometric grid and accelerate the sequence.  Two accelerators
are tried -- iterated Aitken (geometric error decay) and Neville polynomial
extrapolation in a small variable (algebraic or logarithmic error decay) --
and the one with the smaller self-reported residual wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NonGeometricGridError

DEFAULT_TOL = 1e-6

TO_INFINITY = "to-infinity"
TO_ZERO = "to-zero"


@dataclass(frozen=True)
class LimitEstimate:
    """Extrapolated limit with a residual-based error estimate."""

    value: float
    stderr: float
    grid: tuple
    converged: bool

    def __float__(self) -> float:
        return float(self.value)

    def agrees(self, target: float, tol: float) -> bool:
        return abs(self.value - target) <= tol


def geometric_grid(start: float, ratio: float, n: int) -> np.ndarray:
    if n < 1 or ratio <= 0 or ratio == 1.0 or start <= 0:
        raise ValueError("need start > 0, ratio > 0, ratio != 1, n >= 1")
    return start * ratio ** np.arange(n)


def _check_geometric(x: np.ndarray) -> None:
    if len(x) < 4:
        raise NonGeometricGridError("need at least 4 samples")
    if np.any(x <= 0):
        raise NonGeometricGridError("abscissae must be positive")
    r = x[1:] / x[:-1]
    if np.any(r <= 0) or np.any(np.abs(r / r[0] - 1.0) > 0.01):
        raise NonGeometricGridError("abscissae are not geometric (ratio drift > 1%)")
    if abs(r[0] - 1.0) < 1e-12:
        raise NonGeometricGridError("grid is not strictly monotone")


def _oscillating(v: np.ndarray) -> bool:
    # Alternating signs with non-decreasing magnitude over the tail of the
    # difference sequence marks a limit that does not exist.
    d = np.diff(v)
    m = min(len(d), 6)
    if m < 4:
        return False
    tail = d[-m:]
    if np.any(tail == 0.0):
        return False
    # Alternation at rounding level is noise on a constant sequence, not a
    # genuine oscillation.
    if np.max(np.abs(tail)) <= 1e-12 * (np.max(np.abs(v)) + 1e-300):
        return False
    signs = np.sign(tail)
    if not np.all(signs[1:] == -signs[:-1]):
        return False
    mags = np.abs(tail)
    return bool(np.all(mags[1:] >= mags[:-1] * 0.999))


def _nonmonotone_tail(v: np.ndarray, tol: float) -> bool:
    # An interior extremum in the tail with differences that are still large
    # means the sequence is wandering, not converging.  Damped alternating
    # sequences (every-step sign flip with decaying magnitude) are exempt.
    tail = np.diff(v)
    if len(tail) < 3:
        return False
    if abs(tail[-1]) <= tol:
        return False
    signs = np.sign(tail)
    if np.all(signs[1:] == signs[:-1]):
        return False
    damped = np.all(signs[1:] == -signs[:-1]) and np.all(
        np.abs(tail[1:]) <= 0.9 * np.abs(tail[:-1])
    )
    return not damped


def _aitken(v: np.ndarray, stages: int = 2):
    seq = np.asarray(v, dtype=float)
    for _ in range(stages):
        if len(seq) < 3:
            break
        d1 = seq[1:-1] - seq[:-2]
        d2 = seq[2:] - seq[1:-1]
        den = d2 - d1
        out = seq[2:].copy()
        ok = np.abs(den) > 1e-300
        out[ok] = seq[2:][ok] - d2[ok] ** 2 / den[ok]
        seq = out
    if len(seq) == 0 or not np.all(np.isfinite(seq)):
        return None
    resid = abs(seq[-1] - seq[-2]) if len(seq) >= 2 else abs(v[-1] - v[-2])
    return float(seq[-1]), float(resid)


def _neville(w: np.ndarray, v: np.ndarray, max_points: int = 7):
    # Polynomial extrapolation to w = 0 using the last points (closest to the
    # limit); estimates of increasing degree give the residual.
    w = np.asarray(w, dtype=float)[-max_points:]
    v = np.asarray(v, dtype=float)[-max_points:]
    m = len(w)
    if m < 3:
        return None
    cur = list(v)
    ests = [v[-1]]
    for k in range(1, m):
        nxt = []
        for i in range(m - k):
            den = w[i] - w[i + k]
            if den == 0.0:
                return None
            nxt.append((-w[i + k] * cur[i] + w[i] * cur[i + 1]) / den)
        cur = nxt
        ests.append(cur[-1])
    if not all(math.isfinite(e) for e in ests):
        return None
    return float(ests[-1]), float(abs(ests[-1] - ests[-2]))


def limit_extrapolate(
    samples: Sequence[tuple],
    direction: str,
    tol: float = DEFAULT_TOL,
) -> LimitEstimate:
    """Estimate the limit of a sampled sequence on a geometric grid.

    ``samples`` are (abscissa, value) pairs; ``direction`` is ``to-infinity``
    or ``to-zero``.  An oscillating tail yields converged=False with the last
    raw sample as value.
    """
    if direction not in (TO_INFINITY, TO_ZERO):
        raise ValueError(f"unknown direction {direction!r}")
    pairs = sorted(samples, key=lambda p: p[0])
    x = np.array([p[0] for p in pairs], dtype=float)
    v = np.array([p[1] for p in pairs], dtype=float)
    _check_geometric(x)
    if direction == TO_ZERO:
        x, v = x[::-1], v[::-1]
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite sample values")
    grid = tuple(x)

    if _oscillating(v):
        d = np.diff(v)
        return LimitEstimate(float(v[-1]), float(abs(d[-1])), grid, False)

    # Small variables for polynomial extrapolation: algebraic rate and
    # logarithmic rate.  Which family applies is read off the decay of the
    # difference sequence: on a geometric grid an algebraic error c*x^p gives
    # geometrically shrinking differences, while a logarithmic error c/|ln x|^q
    # gives differences whose ratios creep up to 1.  In the logarithmic regime
    # the algebraic variables are inert (they barely move the last sample and
    # under-report their residual), so they are excluded there.
    w_alg = 1.0 / x if direction == TO_INFINITY else x
    d = np.diff(v)
    log_regime = False
    if len(d) >= 4 and np.all(d[-3:] != 0.0):
        r = d[-2:] / d[-3:-1]
        # An algebraic error c*x^s makes successive differences shrink by the
        # grid ratio to the power s, while a logarithmic error keeps their
        # ratio near 1 on any geometric grid.  The boundary between the two
        # regimes therefore scales with the grid ratio: demand s < 1/4.
        lg = math.exp(-0.25 * abs(math.log(x[-1] / x[-2])))
        log_regime = bool(np.all(r > lg) and np.all(r < 1.02))
    with np.errstate(divide="ignore"):
        lx = np.abs(np.log(x))
    log_ok = bool(np.all(lx > 0.5))

    candidates = []
    if not (log_regime and log_ok):
        a = _aitken(v)
        if a is not None:
            candidates.append(a)
        nev = _neville(w_alg, v)
        if nev is not None:
            candidates.append(nev)
        if log_ok:
            # Mixed rate x|ln x| (x -> 0) or ln(x)/x (x -> infinity).
            nev_mix = _neville(w_alg * (1.0 + lx), v)
            if nev_mix is not None:
                candidates.append(nev_mix)
    if log_ok:
        nev_log = _neville(1.0 / lx, v, max_points=10 if log_regime else 7)
        if nev_log is not None:
            candidates.append(nev_log)
    if not candidates:
        d = np.diff(v)
        return LimitEstimate(float(v[-1]), float(abs(d[-1])), grid, False)

    value, resid = min(candidates, key=lambda c: c[1])
    resid = max(resid, abs(value) * 1e-15)
    if _nonmonotone_tail(v, tol):
        return LimitEstimate(value, max(resid, abs(v[-1] - v[-2])), grid, False)
    return LimitEstimate(value, resid, grid, bool(resid < tol))
