import math

import numpy as np
import pytest

from blowup.errors import NonGeometricGridError
from blowup.limits import TO_INFINITY, TO_ZERO, geometric_grid, limit_extrapolate


def test_geometric_grid_basic():
    g = geometric_grid(1.0, 0.5, 5)
    assert np.allclose(g, [1.0, 0.5, 0.25, 0.125, 0.0625])
    with pytest.raises(ValueError):
        geometric_grid(0.0, 0.5, 5)
    with pytest.raises(ValueError):
        geometric_grid(1.0, 1.0, 5)


def test_algebraic_decay_to_zero():
    xs = geometric_grid(0.25, 0.6, 16)
    est = limit_extrapolate([(x, 1.0 / (1.0 + x)) for x in xs], TO_ZERO, tol=1e-6)
    assert est.converged
    assert abs(est.value - 1.0) < 1e-8


def test_classic_e_limit():
    us = geometric_grid(8.0, 2.0, 16)
    est = limit_extrapolate([(u, (1.0 + 1.0 / u) ** u) for u in us], TO_INFINITY, tol=1e-4)
    assert est.converged
    assert abs(est.value - math.e) < 1e-4


def test_logarithmic_decay_to_zero():
    # value = L + c/|ln x|: the hard regime for extrapolation.
    xs = geometric_grid(0.1, 0.5, 18)
    est = limit_extrapolate([(x, 3.0 + 0.7 / (-math.log(x))) for x in xs], TO_ZERO, tol=1e-4)
    assert abs(est.value - 3.0) < 1e-4


def test_mixed_algebraic_on_coarse_ratio_grid():
    # Nearly-linear algebraic error on a slowly graded grid must not be
    # mistaken for logarithmic decay.
    xs = geometric_grid(0.1, 1.0 / 1.15, 25)
    est = limit_extrapolate([(x, 2.0 + 0.5 * x ** 0.9) for x in xs], TO_ZERO, tol=1e-5)
    assert abs(est.value - 2.0) < 1e-5


def test_oscillating_sequence_not_converged():
    us = geometric_grid(4.0, 2.0, 14)
    vals = [(u, math.cos(math.pi * i)) for i, u in enumerate(us)]
    est = limit_extrapolate(vals, TO_INFINITY)
    assert not est.converged


def test_slow_oscillation_flagged():
    # exp(cos((ln u)^{1/3}) (ln u)^{1/3}) is slowly varying but has no limit.
    def L(u):
        w = math.log(u) ** (1.0 / 3.0)
        return math.exp(w * math.cos(w))

    us = geometric_grid(16.0, 4.0, 20)
    est = limit_extrapolate([(u, L(2 * u) / L(u)) for u in us], TO_INFINITY, tol=1e-6)
    assert not est.converged


def test_non_geometric_grid_rejected():
    samples = [(0.1, 1.0), (0.2, 1.0), (0.25, 1.0), (0.5, 1.0)]
    with pytest.raises(NonGeometricGridError):
        limit_extrapolate(samples, TO_ZERO)
    with pytest.raises(NonGeometricGridError):
        limit_extrapolate([(0.1, 1.0), (0.2, 1.0), (0.4, 1.0)], TO_ZERO)
