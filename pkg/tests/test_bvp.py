import math

import numpy as np
import pytest

from blowup.bvp import (
    MESH_RATIO,
    Geometry,
    RadialProblem,
    annulus,
    ball,
    build_mesh,
    eigenvalue_first_dirichlet,
    interval,
    manufactured_problem,
    solve_large_solution,
    subsupersolution_check,
    verify_first_order,
    verify_second_order,
)
from blowup.errors import (
    InconclusiveError,
    PreconditionError,
    UnsupportedGeometryError,
)
from blowup.expansion import predict_first_order
from blowup.nonlinearity import NonlinearityClass, PURE_POWER, make_nonlinearity
from blowup.profiles import HProfile


def test_geometry_constructors():
    g = interval(2.0)
    assert g.span == 2.0 and g.distance(0.5) == 0.5 and g.distance(1.8) == pytest.approx(0.2)
    b = ball(3, 1.0)
    assert b.distance(0.25) == 0.75
    a = annulus(3, 0.5, 1.0)
    assert a.distance(0.6) == pytest.approx(0.1)
    with pytest.raises(PreconditionError):
        interval(-1.0)
    with pytest.raises(PreconditionError):
        ball(2, 1.0)
    with pytest.raises(PreconditionError):
        annulus(3, 1.0, 0.5)


def test_eigenvalues():
    assert abs(eigenvalue_first_dirichlet(interval(1.0)) - math.pi ** 2) < 1e-12
    assert abs(eigenvalue_first_dirichlet(interval(2.0)) - math.pi ** 2 / 4.0) < 1e-12
    # principal eigenvalue of the unit ball in 3D is pi^2 (radial shooting)
    assert abs(eigenvalue_first_dirichlet(ball(3, 1.0)) - math.pi ** 2) < 1e-7
    with pytest.raises(UnsupportedGeometryError):
        eigenvalue_first_dirichlet(annulus(3, 0.5, 1.0))


def test_build_mesh_skeleton():
    g = interval(1.0)
    x, skeleton = build_mesh(g, 1e-4, 0)
    assert np.all(np.diff(x) > 0)
    # skeleton nodes are exact mesh nodes and geometric with the mesh ratio
    assert np.all(np.isin(np.round(skeleton, 15), np.round(x, 15)))
    r = skeleton[1:-1] / skeleton[:-2]
    assert np.allclose(r, MESH_RATIO)
    x2, skeleton2 = build_mesh(g, 1e-4, 2)
    assert np.allclose(skeleton2, skeleton)
    assert np.all(np.isin(np.round(skeleton2, 15), np.round(x2, 15)))
    assert len(x2) == 4 * (len(x) - 1) + 1
    with pytest.raises(PreconditionError):
        build_mesh(g, 0.5, 0)


def test_radial_problem_rejects_negative_b(f_cubic):
    with pytest.raises(PreconditionError):
        RadialProblem(geometry=interval(1.0), a=0.0, b=lambda x: x - 0.5, f=f_cubic)


def test_manufactured_b_boundary_values(f_cubic, f_quadratic):
    # u* = c/(x(1-x)) with f = u^3 gives b -> 2/c^2 at the boundary.
    c = math.sqrt(2.0)
    prob = manufactured_problem(
        lambda x: c / (x * (1.0 - x)),
        lambda x: -c * (1.0 - 2.0 * x) / (x * (1.0 - x)) ** 2,
        lambda x: c * (2.0 * (1.0 - 2.0 * x) ** 2 / (x * (1.0 - x)) ** 3 + 2.0 / (x * (1.0 - x)) ** 2),
        interval(1.0),
        0.0,
        f_cubic,
    )
    assert abs(prob.b(1e-5) - 1.0) < 1e-3
    prob1 = manufactured_problem(
        lambda x: 1.0 / (x * (1.0 - x)),
        lambda x: -(1.0 - 2.0 * x) / (x * (1.0 - x)) ** 2,
        lambda x: 2.0 * (1.0 - 2.0 * x) ** 2 / (x * (1.0 - x)) ** 3 + 2.0 / (x * (1.0 - x)) ** 2,
        interval(1.0),
        0.0,
        f_cubic,
    )
    assert abs(prob1.b(1e-5) - 2.0) < 2e-3
    # ball: u* = sqrt(2)/(1-r), b -> 1 at r = 1
    probb = manufactured_problem(
        lambda r: math.sqrt(2.0) / (1.0 - r),
        lambda r: math.sqrt(2.0) / (1.0 - r) ** 2,
        lambda r: 2.0 * math.sqrt(2.0) / (1.0 - r) ** 3,
        ball(3, 1.0),
        0.0,
        f_cubic,
    )
    assert abs(probb.b(0.999) - 1.0) < 0.01


def test_solver_preconditions(f_cubic):
    prob = RadialProblem(geometry=interval(1.0), a=0.0, b=lambda x: 1.0, f=f_cubic)
    with pytest.raises(PreconditionError):
        solve_large_solution(prob, closure="bogus")
    with pytest.raises(PreconditionError):
        solve_large_solution(prob, closure="asymptotic")  # no boundary_value
    near_linear = make_nonlinearity(
        1.0, 1e-6, 1.0, lambda u: 0.0, NonlinearityClass(PURE_POWER), validate=False
    )
    bad = RadialProblem(geometry=interval(1.0), a=0.0, b=lambda x: 1.0, f=near_linear)
    with pytest.raises(PreconditionError):
        solve_large_solution(bad, closure="dirichlet-M")


@pytest.fixture(scope="module")
def half_line_solution(f_cubic):
    # b = 1, f = u^3 on (0,1): exact blow-up profile sqrt(2)/d at each end.
    prob = RadialProblem(geometry=interval(1.0), a=0.0, b=lambda x: 1.0, f=f_cubic)
    return prob, solve_large_solution(
        prob,
        mesh_level=2,
        closure="asymptotic",
        eps_b=1e-5,
        boundary_value=lambda d: math.sqrt(2.0) / d,
        check_eps_b=True,
    )


def test_solution_positive_and_layered(half_line_solution):
    _, sol = half_line_solution
    assert np.all(sol.u > 0)
    layer = sol.x < 0.05  # left boundary layer only
    assert np.all(np.diff(sol.u[layer]) < 0)  # u grows toward the boundary
    assert sol.diagnostics["lambda_first"] == pytest.approx(math.pi ** 2)


def test_exact_profile_value(half_line_solution):
    _, sol = half_line_solution
    i = int(np.argmin(np.abs(sol.x - 0.01)))
    assert abs(sol.u[i] - math.sqrt(2.0) / sol.x[i]) < 0.02 * sol.u[i]


def test_first_order_ratio(half_line_solution, f_cubic, k_const, rep_const):
    _, sol = half_line_solution
    pred = predict_first_order(f_cubic, rep_const)
    builder = HProfile(f_cubic, k_const)
    est = verify_first_order(sol, pred, builder)
    assert est.converged
    assert abs(est.value - 1.0) < 5e-3
    with pytest.raises(PreconditionError):
        verify_second_order(sol, pred, builder)
    with pytest.raises(InconclusiveError):
        verify_first_order(sol, pred, builder, d_cap=5e-5)


def test_eps_b_sensitivity(half_line_solution):
    _, sol = half_line_solution
    assert sol.diagnostics["eps_b_sensitivity"] < 0.01


def test_dirichlet_ordering(f_cubic):
    # Larger boundary data gives a nodewise larger solution.
    prob = RadialProblem(geometry=interval(1.0), a=0.0, b=lambda x: 1.0, f=f_cubic)
    kw = dict(mesh_level=1, closure="asymptotic", eps_b=1e-3)

    def capped_guess(M):
        return lambda x: min(math.sqrt(2.0) / max(min(x, 1.0 - x), 1e-3), M)

    lo = solve_large_solution(prob, boundary_value=lambda d: 50.0, guess=capped_guess(50.0), **kw)
    hi = solve_large_solution(prob, boundary_value=lambda d: 400.0, guess=capped_guess(400.0), **kw)
    assert np.all(lo.u <= hi.u * (1.0 + 1e-12))


def test_subsupersolution_order1(f_cubic, k_const):
    rep = subsupersolution_check(f_cubic, k_const, a=0.0, eps=0.25, order=1, ell1=1.0)
    assert rep.passed
    assert rep.target_plus == pytest.approx(-0.5)
    assert rep.target_minus == pytest.approx(0.25 / 1.5)
    assert rep.delta1 > 0.0
    # the zeroth-order a-term vanishes in the limit: same targets with a = 10
    rep_a = subsupersolution_check(f_cubic, k_const, a=10.0, eps=0.25, order=1, ell1=1.0)
    assert rep_a.passed and abs(rep_a.plus.value - rep.plus.value) < 5e-3


def test_subsupersolution_order2(f_cubic, k_linear):
    rep = subsupersolution_check(
        f_cubic, k_linear, a=0.0, eps=0.1, order=2, ell1=0.5, tau=1.0, chi_tilde=0.0
    )
    assert rep.passed
    assert rep.target_plus == pytest.approx(-0.2)
    assert abs(rep.plus.value + 0.2) < 0.02 * 0.2 + 1e-12
    assert abs(rep.minus.value - 0.2) < 0.02 * 0.2 + 1e-12


def test_subsupersolution_preconditions(f_cubic, k_const):
    with pytest.raises(PreconditionError):
        subsupersolution_check(f_cubic, k_const, 0.0, 0.7, 1, 1.0)
    with pytest.raises(PreconditionError):
        subsupersolution_check(f_cubic, k_const, 0.0, 0.1, 2, 1.0)  # tau missing
