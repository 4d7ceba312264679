import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from mcf_translators.errors import (
    DomainError,
    DomainNotInvariant,
    MarginCollapse,
    NonConvergence,
    NotSpacelike,
)
from mcf_translators.graphical import (
    BoxDomain,
    GridSolution,
    SolverConfig,
    assemble_nondivergence,
    coefficients,
    harmonic_extension,
    horosphere_graph,
    rectangle_problem,
    residual_divergence_form,
    rotational_graph,
    solve_dirichlet,
    symmetry_extension_check,
    verify_uniqueness,
)
from mcf_translators.horosphere import branch_for_family
from mcf_translators.hyperbolic import HalfSpaceIsometry, HalfSpacePoint
from mcf_translators.rotational import bowl

from oracles import symbolic_operator_identity

F1 = branch_for_family("f1", 3)
F3 = branch_for_family("f3", 2)


def smooth(P):
    return 0.2 * np.sin(P[..., 0] + 2 * P[..., 1]) + 0.1 * P[..., 1] ** 2


def order(errors):
    return math.log2(errors[-2] / errors[-1])


# ---------------------------------------------------------------- coefficients


@pytest.mark.parametrize("n", [2, 3])
def test_lower_order_term_matches_symbolic_derivation(n):
    xs, grad, b = symbolic_operator_identity(n)
    rng = np.random.default_rng(n)
    for _ in range(20):
        x1 = rng.uniform(0.2, 3.0)
        p = rng.normal(size=n)
        p *= rng.uniform(0, 0.95) / (x1 * np.linalg.norm(p))
        subs = {g: float(v) for g, v in zip(grad, p)}
        subs[xs[0]] = x1
        expected = float(b.subs(subs))
        assert coefficients(x1, p, n).b == pytest.approx(expected, abs=1e-12)


def test_symbolic_b_has_no_second_derivatives():
    xs, grad, b = symbolic_operator_identity(3)
    assert not any(isinstance(a, sp.Derivative) and len(a.variables) > 1 for a in b.atoms(sp.Derivative))


def test_coefficient_examples():
    c = coefficients(HalfSpacePoint([1.0, 0.0]), [0.0, 0.0], 2)
    assert np.array_equal(c.A, np.eye(2))
    assert c.b == -1.0
    ev = np.linalg.eigvalsh(coefficients(1.0, [math.sqrt(0.5), 0.0], 2).A)
    assert ev[1] / ev[0] == pytest.approx(2.0, abs=1e-14)
    with pytest.raises(NotSpacelike):
        coefficients(2.0, [0.5, 0.0], 2)
    with pytest.raises(DomainError):
        coefficients(1.0, [0.1, 0.1, 0.1], 2)


def test_ellipticity_on_random_states():
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        n = int(rng.integers(2, 5))
        x1 = rng.uniform(0.05, 5.0)
        p = rng.normal(size=n)
        p *= rng.uniform(0.0, 0.999) / (x1 * np.linalg.norm(p))
        ev = np.linalg.eigvalsh(coefficients(x1, p, n).A)
        lam_small = x1**2 * (1 - x1**2 * (p @ p))
        assert ev[0] >= lam_small - 1e-12
        assert abs(ev[-1] - x1**2) <= 1e-12 * max(1.0, x1**2)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 5.0), st.lists(st.floats(-1, 1), min_size=2, max_size=4), st.floats(0.0, 0.999))
def test_coefficients_symmetric_positive(x1, direction, r):
    p = np.array(direction)
    if np.linalg.norm(p) == 0:
        return
    p = p * r / (x1 * np.linalg.norm(p))
    A = coefficients(x1, p, len(p)).A
    assert np.array_equal(A, A.T)
    assert np.linalg.eigvalsh(A)[0] > 0


# ---------------------------------------------------------------- discrete operators


def test_constant_is_not_a_translator():
    d = BoxDomain([(0.5, 1.5), (0.0, 1.0)], (9, 9))
    u = GridSolution(d, np.full(d.shape, 4.0))
    assert np.allclose(residual_divergence_form(u), -1.0, atol=1e-15)
    assert np.allclose(assemble_nondivergence(u), -1.0, atol=1e-15)


@pytest.mark.parametrize("bounds, n", [([(0.5, 1.5), (0.0, 1.0)], 2), ([(0.5, 1.5), (0.0, 1.0)], 3),
                                       ([(0.6, 1.4), (0.0, 1.0), (-0.5, 0.5)], 3)])
def test_divergence_and_nondivergence_forms_agree(bounds, n):
    def u(P):
        out = smooth(P)
        if P.shape[-1] > 2:
            out = out + 0.1 * np.cos(P[..., 2])
        return out

    errs = []
    for N in (9, 17, 33) if len(bounds) == 3 else (17, 33, 65):
        d = BoxDomain(bounds, (N,) * len(bounds), n)
        g = GridSolution.from_function(d, u)
        grads = np.gradient(g.values, *d.axes)
        x1 = d.x1[d.interior]
        W = np.sqrt(1 - x1**2 * sum(gr[d.interior] ** 2 for gr in grads))
        errs.append(np.max(np.abs(assemble_nondivergence(g) - W**3 * residual_divergence_form(g))))
    assert order(errs) >= 1.9


@pytest.mark.parametrize("branch, n, bounds", [(F1, 3, [(1.0, 2.0), (0.0, 1.0)]),
                                               (F3, 2, [(0.5, 1.5), (0.0, 1.0)])])
def test_exact_solutions_have_second_order_residual(branch, n, bounds):
    # F3 is centred so that w = 0 in the middle of the box (P(0) = 1/2)
    u = horosphere_graph(branch, s0=0.5 if branch is F3 else 0.0)
    errs = []
    for N in (17, 33, 65):
        d = BoxDomain(bounds, (N, N), n)
        errs.append(np.max(np.abs(residual_divergence_form(GridSolution.from_function(d, u)))))
    assert order(errs) >= 1.9


def test_wrong_sign_embedding_is_not_a_solution():
    # f(+ln x1) instead of f(-ln x1): the residual stays O(1) under refinement
    errs = []
    for N in (17, 33):
        d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (N, N), 3)
        u = GridSolution.from_function(d, lambda P: 0.5 * np.log(P[..., 0]))
        errs.append(np.max(np.abs(residual_divergence_form(u))))
    assert min(errs) > 0.1


def test_operators_reject_timelike_grids():
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (9, 9))
    u = GridSolution.from_function(d, lambda P: 2.0 * P[..., 1])
    assert u.spacelike_margin < 0
    with pytest.raises(NotSpacelike):
        residual_divergence_form(u)
    with pytest.raises(NotSpacelike):
        assemble_nondivergence(u)


def test_box_domain_validation():
    with pytest.raises(DomainError):
        BoxDomain([(0.0, 1.0), (0.0, 1.0)], (9, 9))
    with pytest.raises(DomainError):
        BoxDomain([(1.0, 2.0), (0.0, 1.0)], (2, 9))
    with pytest.raises(DomainError):
        BoxDomain([(1.0, 2.0), (0.0, 1.0), (0.0, 1.0)], (5, 5, 5), n=2)


# ---------------------------------------------------------------- solver


def test_solver_recovers_linear_profile():
    u1 = horosphere_graph(F1)
    errs = []
    for N in (17, 33, 65):
        d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (N, N), 3)
        sol, rep = solve_dirichlet(d, u1)
        assert rep.converged
        assert rep.final_spacelike_margin > 0
        assert np.all(np.diff(rep.residual_history) < 0)
        errs.append(np.max(np.abs(sol.values - GridSolution.from_function(d, u1).values)))
    assert order(errs) >= 1.9
    assert errs[-1] <= 1e-5


def test_solver_divergence_operator():
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (33, 33), 3)
    u1 = horosphere_graph(F1)
    a, _ = solve_dirichlet(d, u1)
    b, rep = solve_dirichlet(d, u1, cfg=SolverConfig(operator="divergence"))
    assert rep.operator == "divergence" and rep.converged
    exact = GridSolution.from_function(d, u1).values
    assert np.max(np.abs(b.values - exact)) < 1e-4
    assert np.max(np.abs(a.values - b.values)) < 1e-4


def test_solver_boundary_untouched():
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (17, 17), 3)
    data = GridSolution.from_function(d, lambda P: 0.1 * np.sin(3 * P[..., 1]) + 0.2 * P[..., 0])
    sol, _ = solve_dirichlet(d, data)
    mask = d.boundary_mask()
    assert np.array_equal(sol.values[mask], data.values[mask])
    assert np.array_equal(sol.boundary, data.boundary)


def test_solver_recovers_bowl():
    prof = bowl(2, s_max=4.0)
    u = rotational_graph(prof)
    errs = []
    for N in (17, 33):
        d = BoxDomain([(1.2, 1.8), (0.3, 0.9)], (N, N))
        sol, rep = solve_dirichlet(d, u)
        assert rep.converged and sol.spacelike_margin > 0.5
        errs.append(np.max(np.abs(sol.values - GridSolution.from_function(d, u).values)))
    assert order(errs) >= 1.8


def test_margin_collapse_on_steep_data():
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (17, 17))
    with pytest.raises(MarginCollapse):
        solve_dirichlet(d, lambda P: 3.0 * P[..., 1])


def test_nonspacelike_guess_rejected():
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (17, 17), 3)
    guess = GridSolution.from_function(d, lambda P: 5.0 * np.sin(20 * P[..., 1]))
    with pytest.raises(NotSpacelike):
        solve_dirichlet(d, horosphere_graph(F1), guess)


def test_nonconvergence_after_iteration_cap():
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (17, 17), 3)
    with pytest.raises(NonConvergence) as info:
        solve_dirichlet(d, horosphere_graph(F1), cfg=SolverConfig(max_iter=1, tol=1e-14))
    assert info.value.report.iterations == 1


def test_harmonic_extension_is_linear_exact():
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (9, 9))
    lin = lambda P: 0.3 * P[..., 0] - 0.2 * P[..., 1]
    h = harmonic_extension(d, lin)
    assert np.allclose(h.values, GridSolution.from_function(d, lin).values, atol=1e-13)


def test_uniqueness_from_distinct_guesses():
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (33, 33), 3)
    u1 = horosphere_graph(F1)
    exact = GridSolution.from_function(d, u1)
    X1, X2 = d.coords()
    bump = np.sin(np.pi * (X1 - 1.0)) * np.sin(np.pi * X2)
    guesses = [exact] + [GridSolution(d, exact.values + a * bump) for a in (-0.04, -0.02, 0.02, 0.04)]
    rep = verify_uniqueness(d, u1, guesses)
    assert rep.passed
    assert rep.max_pairwise_difference < 1e-8


def test_uniqueness_needs_two_guesses():
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (9, 9), 3)
    with pytest.raises(DomainError):
        verify_uniqueness(d, horosphere_graph(F1), [None])


def test_comparison_of_ordered_data():
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (33, 33), 3)
    u1 = horosphere_graph(F1)
    lift = lambda P: u1(P) + 0.05 * np.sin(np.pi * P[..., 1]) ** 2
    cfg = SolverConfig()
    u, _ = solve_dirichlet(d, u1, cfg=cfg)
    v, _ = solve_dirichlet(d, lift, cfg=cfg)
    assert np.all(u.values <= v.values + 10 * cfg.tol)


# ---------------------------------------------------------------- symmetry


def test_mirror_symmetry():
    d = BoxDomain([(1.0, 2.0), (-0.5, 0.5)], (33, 33))
    data = lambda P: 0.1 * np.cos(np.pi * P[..., 1]) + 0.1 * P[..., 0]
    rep = symmetry_extension_check(d, data, HalfSpaceIsometry.reflection(1, 0.0))
    assert rep.on_grid and rep.passed
    assert rep.max_deviation <= 1e-6


def test_identity_symmetry():
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (9, 9), 3)
    rep = symmetry_extension_check(d, horosphere_graph(F1), HalfSpaceIsometry.identity())
    assert rep.max_deviation == 0.0


def test_translation_invariant_data_give_horosphere_profile():
    # rectangle data are invariant under x2 -> x2 + h modulo the box length
    d = BoxDomain([(math.exp(-1.0), 1.0), (0.0, 1.0)], (33, 33))
    u = horosphere_graph(F3, s0=0.5)
    sigma = HalfSpaceIsometry.translation([d.spacing[1]])
    # the x2 faces carry Dirichlet data, so the shift is matched to truncation order only
    rep = symmetry_extension_check(d, u, sigma, periodic_axes=(1,), tolerance=d.h**2)
    assert rep.passed
    exact = GridSolution.from_function(d, u).values
    assert np.max(np.abs(rep.solution.values - exact)) < 1e-4


def test_symmetry_requires_invariant_box():
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (9, 9))
    with pytest.raises(DomainNotInvariant):
        symmetry_extension_check(d, lambda P: 0 * P[..., 0], HalfSpaceIsometry.reflection(1, 0.0))


# ---------------------------------------------------------------- rectangle problem


def test_rectangle_f3_refinement():
    errs = []
    for N in (17, 33, 65):
        _, rep = rectangle_problem(F3, -0.5, 0.5, 0.0, 1.0, (N, N), s0=0.0)
        assert rep.solver_report.converged
        errs.append(rep.max_error)
    assert order(errs) >= 1.9


def test_rectangle_f1_reduced_grid():
    errs = [rectangle_problem(F1, 0.0, 0.7, 0.0, 1.0, (N, N))[1].max_error for N in (17, 33, 65)]
    assert order(errs) >= 1.9
    assert errs[-1] < 1e-5


def test_rectangle_rejects_bad_box():
    with pytest.raises(DomainError):
        rectangle_problem(F3, 1.0, 0.0, 0.0, 1.0, (9, 9))
