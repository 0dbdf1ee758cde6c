"""Fourier loops, symmetry action, reduced action and its linearization.

Oracles: exact Fourier identities for the quadratic term, doubled-
resolution quadrature for the action value, central differences for the
gradient and Hessian, and direct complex summation for the coupling
coefficients.
"""

import numpy as np
import pytest

from nvortex import geometry as geo
from nvortex import spectral as sp

RNG_SEED = 52200


def random_loop(rng, m, scale=0.1, decay=0.5):
    w = np.exp(-decay * np.abs(np.arange(-m, m + 1)))
    c = scale * w * (rng.standard_normal(2 * m + 1)
                     + 1j * rng.standard_normal(2 * m + 1))
    return sp.FourierLoop(c)


class TestFourierLoop:
    def test_evaluate_circle(self):
        u = sp.FourierLoop.circle(8)
        t = np.linspace(0, 2 * np.pi, 7)
        assert np.allclose(u.evaluate(t), np.exp(1j * t), atol=1e-14)

    def test_derivative(self):
        u = sp.FourierLoop.from_modes(4, {2: 1.0 + 0.5j, -1: 0.3j})
        t = np.array([0.3, 1.7])
        expect = 2j * (1 + 0.5j) * np.exp(2j * t) + 0.3j * (-1j) * np.exp(-1j * t)
        assert np.allclose(u.derivative().evaluate(t), expect, atol=1e-14)

    def test_h1_norm_modes(self):
        u = sp.FourierLoop.from_modes(4, {0: 2.0, 3: 1j})
        # 2 pi [ (1+0)|2|^2 + (1+9)|1|^2 ]
        assert u.h1_norm() ** 2 == pytest.approx(2 * np.pi * 14.0, rel=1e-14)

    def test_resized_round_trip(self):
        rng = np.random.default_rng(RNG_SEED)
        u = random_loop(rng, 5)
        assert np.allclose(u.resized(9).resized(5).coeffs, u.coeffs)

    def test_constant_addition_shifts_mode_zero(self):
        u = sp.FourierLoop.zeros(3) + (2 - 1j)
        assert u.mode(0) == 2 - 1j


class TestGroupAction:
    def test_identity_and_full_turn(self):
        rng = np.random.default_rng(RNG_SEED + 1)
        u = random_loop(rng, 8)
        same = sp.act(sp.GroupElement(0.0), u)
        assert np.allclose(same.coeffs, u.coeffs)
        turn = sp.act(sp.GroupElement(2 * np.pi), u)
        assert np.allclose(turn.coeffs, u.coeffs, atol=1e-14)

    def test_shift_is_time_translation(self):
        rng = np.random.default_rng(RNG_SEED + 2)
        u = random_loop(rng, 8)
        theta = 0.9
        t = np.linspace(0, 6, 11)
        assert np.allclose(u.shifted(theta).evaluate(t),
                           u.evaluate(t + theta), atol=1e-12)

    def test_isometry(self):
        rng = np.random.default_rng(RNG_SEED + 3)
        for _ in range(5):
            u = random_loop(rng, 10)
            theta = float(rng.uniform(0, 2 * np.pi))
            assert u.shifted(theta).h1_norm() == pytest.approx(
                u.h1_norm(), abs=1e-14)

    def test_hat_lift_constant(self):
        u = sp.FourierLoop.zeros(4) + (0.5 + 0.25j)
        comps = sp.hat_lift(u, 3)
        for c in comps:
            assert np.allclose(c.coeffs, u.coeffs)

    def test_hat_lift_circle(self):
        u = sp.FourierLoop.circle(4)
        comps = sp.hat_lift(u, 3)
        t = np.array([0.0, 1.0])
        for k, c in enumerate(comps):
            assert np.allclose(c.evaluate(t),
                               np.exp(1j * (t + 2 * np.pi * k / 3)), atol=1e-14)

    def test_hat_lift_tau_fixed(self):
        rng = np.random.default_rng(RNG_SEED + 4)
        n = 4
        comps = sp.hat_lift(random_loop(rng, 8), n)
        fixed = sp.act_full(sp.cyclic_tau(n), comps)
        for a, b in zip(comps, fixed):
            assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-14


# frozen by the doubled-resolution quadrature oracle below:
# Psi_0(u_0) for N = 2 on the disk is -2 pi + 4 pi log 2
PSI0_CIRCLE_N2 = 2.4271590540348225


class TestLoopAction:
    def test_circle_value_n2_self_convergence(self):
        dom = geo.disk()
        u0 = sp.FourierLoop.circle(16)
        base = sp.loop_action(dom, 0.0, u0, 2)
        doubled = sp.loop_action(dom, 0.0, u0, 2, q=8 * 16 + 1)
        assert abs(base - doubled) < 1e-12
        assert base == pytest.approx(PSI0_CIRCLE_N2, abs=1e-12)
        assert base == pytest.approx(-2 * np.pi + 4 * np.pi * np.log(2), abs=1e-12)

    def test_translation_invariance_r0(self):
        dom = geo.disk()
        u0 = sp.FourierLoop.circle(12)
        a = sp.loop_action(dom, 0.0, u0, 3)
        b = sp.loop_action(dom, 0.0, u0 + (1 + 1j), 3)
        assert a == pytest.approx(b, abs=1e-12)

    def test_phase_invariance(self):
        dom = geo.disk()
        u = sp.FourierLoop.circle(12) + 0.4
        a = sp.loop_action(dom, 0.05, u, 3)
        b = sp.loop_action(dom, 0.05, u.shifted(1.234), 3)
        assert a == pytest.approx(b, abs=1e-12)

    def test_quadrature_doubling_stability(self):
        rng = np.random.default_rng(RNG_SEED + 5)
        dom = geo.disk()
        u = sp.FourierLoop.circle(16) + random_loop(rng, 16, scale=0.05)
        m = u.m
        a = sp.loop_action(dom, 0.04, u, 3, q=4 * m + 1)
        b = sp.loop_action(dom, 0.04, u, 3, q=8 * m + 1)
        assert abs(a - b) < 1e-10

    def test_symmetry_collision_raises(self):
        dom = geo.disk()
        u = sp.FourierLoop.zeros(8) + 0.3  # constant loop collides with shifts
        with pytest.raises(sp.SymmetryCollisionError):
            sp.loop_action(dom, 0.0, u, 3)

    def test_leaving_domain_raises(self):
        dom = geo.disk()
        u = sp.FourierLoop.circle(8)
        with pytest.raises(geo.OutsideDomainError):
            sp.loop_action(dom, 0.9, u + 0.5, 3)


class TestLoopActionGradient:
    def test_zero_at_circle(self):
        dom = geo.disk()
        for n in (2, 3, 5):
            g = sp.loop_action_gradient(dom, 0.0, sp.FourierLoop.circle(16), n)
            assert g.h1_norm() < 1e-10

    def test_translation_direction_annihilated_r0(self):
        rng = np.random.default_rng(RNG_SEED + 6)
        dom = geo.disk()
        u = sp.FourierLoop.circle(12) + random_loop(rng, 12, scale=0.03)
        g = sp.loop_action_gradient(dom, 0.0, u, 3)
        one = sp.FourierLoop.zeros(12) + 1.0
        assert abs(g.h1_inner(one)) < 1e-10

    @pytest.mark.parametrize("r", [0.0, 0.05])
    def test_directional_derivative(self, r):
        rng = np.random.default_rng(RNG_SEED + 7)
        dom = geo.disk()
        u = sp.FourierLoop.circle(12) + random_loop(rng, 12, scale=0.04)
        g = sp.loop_action_gradient(dom, r, u, 3)
        for _ in range(3):
            phi = random_loop(rng, 12, scale=1.0)
            eps = 1e-6
            fd = (sp.loop_action(dom, r, u + eps * phi, 3)
                  - sp.loop_action(dom, r, u + (-eps) * phi, 3)) / (2 * eps)
            ip = g.h1_inner(phi)
            assert abs(fd - ip) <= 1e-6 * max(1.0, abs(fd))

    def test_equivariance(self):
        # the only equivariance breaking is quadrature aliasing of the
        # spectral tail, so the loop must be well resolved
        rng = np.random.default_rng(RNG_SEED + 8)
        dom = geo.disk()
        u = sp.FourierLoop.circle(16) + random_loop(rng, 16, scale=0.02,
                                                    decay=0.7)
        theta = 0.77
        g1 = sp.loop_action_gradient(dom, 0.03, u.shifted(theta), 4)
        g2 = sp.loop_action_gradient(dom, 0.03, u, 4).shifted(theta)
        assert np.max(np.abs(g1.coeffs - g2.coeffs)) < 1e-12


class TestXiCoefficient:
    def test_xi1_closed_form(self):
        for n in range(2, 9):
            assert sp.xi_coefficient(n, 1) == pytest.approx((n - 1) / 2,
                                                            abs=1e-13)

    def test_xi2_zero(self):
        for n in range(2, 9):
            assert abs(sp.xi_coefficient(n, 2)) < 1e-13

    def test_reflection_symmetry(self):
        for n in (2, 3, 5, 8):
            for mode in range(-5, 8):
                assert sp.xi_coefficient(n, mode) == pytest.approx(
                    sp.xi_coefficient(n, 2 - mode), abs=1e-12)


class TestCircleHessian:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_kernel_dimension_and_gap(self, n):
        rep = sp.circle_kernel_report(n, 64)
        assert rep["kernel_dimension"] == 3
        sv = np.sort(rep["singular_values"])
        assert sv[3] / max(sv[2], 1e-300) > 1e4

    def test_kernel_basis_is_translations_and_phase(self):
        m = 32
        rep = sp.circle_kernel_report(3, m)
        kernel = rep["kernel_basis"]  # (D, 3)
        expected = np.zeros((2 * (2 * m + 1), 3))
        expected[2 * m, 0] = 1.0        # Re a_0
        expected[2 * m + 1, 1] = 1.0    # Im a_0
        expected[2 * (m + 1) + 1, 2] = 1.0  # Im a_1
        # subspaces coincide: projection residual both ways
        q, _ = np.linalg.qr(kernel)
        resid = expected - q @ (q.T @ expected)
        assert np.max(np.abs(resid)) < 1e-8

    def test_block_structure(self):
        n, m = 4, 8
        mat = sp.circle_hessian_matrix(n, m)
        for p in range(-m, m + 1):
            for mm in range(-m, m + 1):
                blk = mat[2 * (p + m):2 * (p + m) + 2,
                          2 * (mm + m):2 * (mm + m) + 2]
                if mm not in (p, 2 - p):
                    assert np.all(blk == 0.0)

    def test_matches_fd_hessian_of_action(self):
        # FD Hessian of the action at the circle equals -2 pi N times
        # the coefficient matrix (the sign and scale come from the
        # inner-product normalization, pinned by this test)
        n, m = 3, 6
        dom = geo.disk()
        mat = sp.circle_hessian_matrix(n, m)
        x0 = sp.real_coordinates(sp.FourierLoop.circle(m))
        d = x0.size
        h = 1e-5

        def psi(x):
            return sp.loop_action(dom, 0.0, sp.loop_from_real(x), n)

        fd = np.zeros((d, d))
        for i in range(d):
            for j in range(i, d):
                xpp = x0.copy(); xpp[i] += h; xpp[j] += h
                xmm = x0.copy(); xmm[i] -= h; xmm[j] -= h
                xpm = x0.copy(); xpm[i] += h; xpm[j] -= h
                xmp = x0.copy(); xmp[i] -= h; xmp[j] += h
                val = (psi(xpp) - psi(xpm) - psi(xmp) + psi(xmm)) / (4 * h * h)
                fd[i, j] = fd[j, i] = val
        scaled = fd / (-2 * np.pi * n)
        # restrict the comparison to modes |p| <= 4
        sl = slice(2 * (m - 4), 2 * (m + 4) + 2)
        err = np.max(np.abs(scaled[sl, sl] - mat[sl, sl]))
        assert err < 1e-5 * max(1.0, np.max(np.abs(mat)))
