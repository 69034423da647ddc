import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lmflow.multiplier import (
    DegenerateEquation,
    QuarticPoly,
    SolvabilityFailure,
    assemble_g,
    compute_p,
    compute_q,
    eta_bracket,
    eval_g,
    eval_g_prime,
    g_direct,
    gate_metric,
    sn_proxy,
    solve_eta,
)
from lmflow.potential import allen_cahn, cahn_hilliard, potential_F, potential_Fprime
from lmflow.spectral import FourierSymbol, apply_symbol, l2_norm, make_grid

from conftest import smooth_field

PI2 = np.pi**2


def bisect(poly, lo, hi, n=60):
    a, b = lo, hi
    ga = eval_g(poly, a)
    for _ in range(n):
        m = 0.5 * (a + b)
        gm = eval_g(poly, m)
        if (gm > 0) == (ga > 0):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b)


class TestComputeP:
    def test_single_mode(self, grid):
        X, _ = grid.coords()
        p = compute_p(grid, np.cos(X), np.cos(X), cahn_hilliard(1.0), 1.0)
        np.testing.assert_allclose(p, 3 / 7 * np.cos(X), atol=1e-14)

    def test_constant_is_fixed(self, grid, flow):
        c = np.full(grid.shape, 0.37)
        np.testing.assert_array_equal(compute_p(grid, c, c, flow, 0.1), c)

    @pytest.mark.parametrize("dt", [1e-4, 1e-2, 1.0])
    def test_residual(self, dt):
        g = make_grid(16, 16)
        fl = cahn_hilliard(0.06)
        rng = np.random.default_rng(0)
        phi_n, phi_nm1 = rng.uniform(-1, 1, size=(2, *g.shape))
        p = compute_p(g, phi_n, phi_nm1, fl, dt)
        gl = FourierSymbol(g, fl.sigma_GL(g))
        lhs = p + 0.75 * dt * apply_symbol(p, gl) + 0.25 * dt * apply_symbol(phi_nm1, gl)
        assert l2_norm(g, lhs - phi_n) <= 1e-12 * l2_norm(g, phi_n)

    def test_rejects_bad_dt(self, grid, flow):
        with pytest.raises(ValueError):
            compute_p(grid, np.zeros(grid.shape), np.zeros(grid.shape), flow, 0.0)


class TestComputeQ:
    def test_constant_gives_zero(self, grid, flow):
        q = compute_q(grid, np.full(grid.shape, 0.3), flow, 0.01)
        assert np.abs(q).max() == 0.0

    def test_cosine_against_mode_by_mode_formula(self, grid):
        # F'(cos x) = -cos(x)/4 + cos(3x)/4; Lap multiplies mode k by -k^2 and
        # the resolvent divides it by 1 + 3/4 k^4 (eps2 = dt = 1)
        X, _ = grid.coords()
        q = compute_q(grid, np.cos(X), cahn_hilliard(1.0), 1.0)
        expected = (0.25 / 1.75) * np.cos(X) - (9 / 4) / (1 + 0.75 * 81) * np.cos(3 * X)
        np.testing.assert_allclose(q, expected, atol=1e-14)

    def test_zero_mean_for_cahn_hilliard(self, grid, flow):
        phi = np.random.default_rng(1).uniform(-1, 1, size=grid.shape)
        q = compute_q(grid, phi, flow, 1e-3)
        assert abs(q.mean()) <= 1e-14

    def test_allen_cahn_is_local_for_constants(self, grid):
        # G = I: constant F'(c) is only rescaled, not removed
        q = compute_q(grid, np.full(grid.shape, 2.0), allen_cahn(0.06), 0.1)
        np.testing.assert_allclose(q, -6.0, rtol=1e-14)

    def test_dealias_truncates_high_modes(self, grid):
        rng = np.random.default_rng(2)
        phi = rng.uniform(-1, 1, size=grid.shape)
        q = compute_q(grid, phi, cahn_hilliard(0.06, dealias=True), 1e-3)
        Q = np.fft.rfft2(q)
        assert np.abs(Q[~grid.dealias_mask]).max() < 1e-12


class TestAssemble:
    def test_fixed_point_is_zero(self, grid):
        phi = smooth_field(grid, np.random.default_rng(0))
        poly = assemble_g(grid, phi, np.zeros(grid.shape), phi, phi, 0.1)
        assert poly.coeffs == (0.0, 0.0, 0.0, 0.0, 0.0)

    def test_constant_fields(self):
        g = make_grid(16, 16)
        z, one = np.zeros(g.shape), np.ones(g.shape)
        poly = assemble_g(g, z, one, z, z, 1.0)
        np.testing.assert_allclose(poly.coeffs, (0, 0, -2 * PI2, 0, PI2), atol=1e-12)
        assert eval_g(poly, 1.0) == pytest.approx(-PI2)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_direct_quadrature(self, grid, seed):
        rng = np.random.default_rng(seed)
        p, q, phi_n, phi_star = (smooth_field(grid, rng, amp=0.8) for _ in range(4))
        dt = rng.uniform(1e-3, 0.5)
        poly = assemble_g(grid, p, q, phi_n, phi_star, dt)
        for eta in (0.5, 1.0, 1.5):
            ref = g_direct(grid, p, q, phi_n, phi_star, dt, eta)
            assert abs(eval_g(poly, eta) - ref) <= 1e-11 * (1 + abs(ref))

    def test_quartic_coefficient_nonnegative(self, grid):
        rng = np.random.default_rng(3)
        for _ in range(20):
            p, q, a, b = rng.normal(size=(4, *grid.shape))
            assert assemble_g(grid, p, q, a, b, rng.uniform(0, 1)).c4 >= 0


class TestEvaluation:
    def test_known_values(self):
        poly = QuarticPoly(0.0, 0.0, -2 * PI2, 0.0, PI2)
        assert eval_g(poly, 1.0) == pytest.approx(-PI2)
        assert eval_g_prime(poly, 1.0) == pytest.approx(0.0, abs=1e-12)
        assert poly(1.0) == eval_g(poly, 1.0)

    def test_value_at_zero(self):
        assert eval_g(QuarticPoly(3.5, 1, 2, 3, 4), 0.0) == 3.5

    @settings(max_examples=200, deadline=None)
    @given(
        coeffs=st.lists(st.floats(-10, 10), min_size=5, max_size=5),
        eta=st.floats(0.0, 2.0),
    )
    def test_derivative_matches_finite_difference(self, coeffs, eta):
        poly = QuarticPoly(*coeffs)
        h = 1e-6
        fd = (eval_g(poly, eta + h) - eval_g(poly, eta - h)) / (2 * h)
        assert abs(fd - eval_g_prime(poly, eta)) <= 1e-7


def _smooth_step_poly(dt, mean=0.3, amp=0.05):
    g = make_grid(32, 32)
    fl = cahn_hilliard(0.06)
    X, Y = g.coords()
    phi_n = mean + amp * (np.cos(X) + np.cos(2 * Y))
    # previous state from a crude backward Euler guess keeps phi* distinct from phi_n
    phi_nm1 = phi_n - dt * apply_symbol(phi_n, FourierSymbol.laplacian(g)) * 0.1
    phi_star = 1.5 * phi_n - 0.5 * phi_nm1
    p = compute_p(g, phi_n, phi_nm1, fl, dt)
    q = compute_q(g, phi_star, fl, dt)
    return assemble_g(g, p, q, phi_n, phi_star, dt)


class TestSolveEta:
    def test_no_root_in_bracket_is_reported(self):
        poly = QuarticPoly(0.0, 0.0, -2 * PI2, 0.0, PI2)
        lo, hi = eta_bracket(0.01)
        # roots of eta^4 - 2 eta^2 are 0 and sqrt(2), both outside [0.9, 1.1]
        assert eval_g(poly, lo) < 0 and eval_g(poly, hi) < 0 and eval_g(poly, 1.0) < 0
        with pytest.raises(SolvabilityFailure) as info:
            solve_eta(poly, 0.01)
        assert info.value.report is not None
        assert not info.value.report.converged

    def test_zero_polynomial_is_degenerate(self):
        rep = solve_eta(QuarticPoly(0.0, 0.0, 0.0, 0.0, 0.0), 0.01)
        assert rep.degenerate and rep.eta == 1.0

    def test_tiny_polynomial_is_degenerate_relative_to_field_scale(self):
        rep = solve_eta(QuarticPoly(1e-20, -1e-20, 0, 0, 0), 0.01, field_scale=40.0)
        assert rep.degenerate

    def test_smooth_step_matches_bisection(self):
        dt = 1e-4
        poly = _smooth_step_poly(dt)
        rep = solve_eta(poly, dt)
        lo, hi = eta_bracket(dt)
        assert lo <= rep.eta <= hi
        assert rep.residual <= 1e-12 * poly.scale
        assert rep.eta == pytest.approx(bisect(poly, lo, hi), abs=1e-10)
        assert rep.method == "newton" and rep.iterations <= 5

    def test_bisection_fallback_when_newton_stalls(self):
        # g'(1) = 0 but g changes sign across [0.9, 1.1]: root at 1 + 0.05
        d = 0.05
        # g(eta) = (eta - 1 - d)^3 expanded around 0
        a = 1 + d
        poly = QuarticPoly(-(a**3), 3 * a**2, -3 * a, 1.0, 0.0)
        rep = solve_eta(poly, 0.01, tol=1e-14)
        assert abs(rep.eta - a) < 1e-4
        assert rep.residual <= 1e-14 * poly.scale

    def test_widened_bracket(self):
        # root at 1.2 lies outside the default bracket for dt = 0.01
        poly = QuarticPoly(-1.2, 1.0, 0.0, 0.0, 0.0)
        with pytest.raises(SolvabilityFailure):
            solve_eta(poly, 0.01)
        rep = solve_eta(poly, 0.01, widen=3.0)
        assert rep.eta == pytest.approx(1.2)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            solve_eta(QuarticPoly(0, 1, 0, 0, 0), 0.0)
        with pytest.raises(ValueError):
            solve_eta(QuarticPoly(0, 1, 0, 0, 0), 0.1, tol=0.0)

    def test_nonfinite_coefficients(self):
        with pytest.raises(SolvabilityFailure):
            solve_eta(QuarticPoly(math.nan, 1, 0, 0, 0), 0.1)

    @settings(max_examples=200, deadline=None)
    @given(
        coeffs=st.lists(st.floats(-10, 10), min_size=5, max_size=5),
        dt=st.floats(1e-6, 0.25),
    )
    def test_root_certificate(self, coeffs, dt):
        poly = QuarticPoly(*coeffs)
        assume(max(abs(c) for c in coeffs) > 0)
        lo, hi = eta_bracket(dt)
        try:
            rep = solve_eta(poly, dt)
        except SolvabilityFailure:
            # failure is only allowed without a sign change across the bracket
            g_lo, g_hi = eval_g(poly, lo), eval_g(poly, hi)
            assert g_lo != 0 and g_hi != 0 and (g_lo > 0) == (g_hi > 0)
            return
        assert lo <= rep.eta <= hi
        assert abs(eval_g(poly, rep.eta)) <= 1e-12 * poly.scale

    def test_tiny_coefficients_do_not_fake_a_sign_change(self):
        # g(lo) * g(hi) underflows to 0 here although both values are positive
        poly = QuarticPoly(0.0, 0.0, 0.0, 0.0, 1.78e-186)
        with pytest.raises(SolvabilityFailure, match="no sign change"):
            solve_eta(poly, 0.25)

    def test_error_hierarchy(self):
        assert issubclass(DegenerateEquation, RuntimeError)
        assert issubclass(SolvabilityFailure, RuntimeError)


class TestDiagnostics:
    def test_gate_zero_for_identical(self, grid):
        phi = smooth_field(grid, np.random.default_rng(0))
        assert gate_metric(grid, phi, phi, 0.1) == 0.0

    def test_gate_constants(self):
        g = make_grid(16, 16)
        val = gate_metric(g, np.ones(g.shape), np.zeros(g.shape), 1.0)
        assert val == pytest.approx(PI2, rel=1e-14)

    def test_sn_proxy(self):
        g = make_grid(16, 16)
        phi = np.random.default_rng(0).uniform(-1, 1, size=g.shape)
        assert sn_proxy(g, phi, phi, 0.1) == 0.0
        assert sn_proxy(g, np.ones(g.shape), np.zeros(g.shape), 1.0) == pytest.approx(-PI2)

    def test_gate_matches_bulk_energy_difference(self, grid):
        rng = np.random.default_rng(4)
        a, b = rng.uniform(-1, 1, size=(2, *grid.shape))
        bulk = lambda f: potential_F(f).sum() * grid.cell_area
        assert gate_metric(grid, a, b, 0.01) == pytest.approx(abs(bulk(a) - bulk(b)) / 0.01, rel=1e-12)

    def test_bad_dt(self, grid):
        z = np.zeros(grid.shape)
        with pytest.raises(ValueError):
            gate_metric(grid, z, z, 0.0)
        with pytest.raises(ValueError):
            sn_proxy(grid, z, z, -1.0)


def test_definition_closure(grid, flow):
    """g(eta*) = 0 is the discrete energy constraint for phi_next = p + eta* dt q."""
    dt = 1e-4
    X, Y = grid.coords()
    phi_n = 0.3 + 0.05 * (np.cos(X) + np.sin(2 * Y))
    phi_nm1 = phi_n.copy()
    phi_star = 1.5 * phi_n - 0.5 * phi_nm1
    p = compute_p(grid, phi_n, phi_nm1, flow, dt)
    q = compute_q(grid, phi_star, flow, dt)
    poly = assemble_g(grid, p, q, phi_n, phi_star, dt)
    rep = solve_eta(poly, dt)
    nxt = p + rep.eta * dt * q
    h = grid.cell_area
    lhs = (potential_F(nxt) - potential_F(phi_n)).sum() * h
    rhs = rep.eta * (potential_Fprime(phi_star) * (nxt - phi_n)).sum() * h
    assert abs(lhs - rhs) <= 1e-12 * poly.scale + 1e-15
