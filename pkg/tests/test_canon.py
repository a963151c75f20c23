import math

import numpy as np
import pytest

from cmech import canon, hamexpr
from cmech.canon import Hamiltonian, J, PhaseState, SQRT2
from cmech.errors import ComplexHamiltonianError
from cmech.hamexpr import ParamSet, eval_at
from cmech.verification import random_quadratic

HARMONIC = "p^2/(2*m) + k*q^2/2"
IMAGINARY = "i*alpha0*(p^2/(2*m) + k*q^2/2)"
ATTENUATED = "p^2/(2*m) + k*q^2/2 + i*(beta0/2)*p^2"


def states(rng, n=50):
    return [
        PhaseState(float(q), float(p), float(t))
        for q, p, t in zip(
            rng.uniform(-2, 2, n), rng.uniform(-2, 2, n), rng.uniform(0, 1, n)
        )
    ]


class TestPhaseState:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            PhaseState(float("nan"), 0.0)
        with pytest.raises(ValueError):
            PhaseState(0.0, float("inf"))


class TestEom:
    def test_harmonic_point(self):
        h = Hamiltonian(HARMONIC)
        assert canon.eom(h, PhaseState(1.0, 0.0), ParamSet()) == (0.0, -1.0)

    def test_imaginary_point(self):
        h = Hamiltonian(IMAGINARY)
        qd, pd = canon.eom(h, PhaseState(1.0, 1.0), ParamSet(alpha0=1.0))
        assert (qd, pd) == (-1.0, -1.0)

    def test_attenuated_momentum_equation(self):
        h = Hamiltonian(ATTENUATED)
        ps = ParamSet(beta0=0.7, kappa0=1.3, k=2.0)
        rng = np.random.default_rng(5)
        for s in states(rng, 20):
            qd, pd = canon.eom(h, s, ps)
            assert qd == pytest.approx(s.p / ps["m"], rel=1e-14)
            expected = -ps["k"] * s.q - ps["beta0"] / ps["kappa0"] * s.p
            assert pd == pytest.approx(expected, rel=1e-13, abs=1e-13)

    def test_reduces_to_classical_for_real_hamiltonians(self):
        rng = np.random.default_rng(6)
        ps = ParamSet(kappa0=1.7)
        for _ in range(20):
            h = Hamiltonian(random_quadratic(rng))
            for s in states(rng, 10):
                general = canon.eom(h, s, ps)
                classical = canon.eom_real_hamiltonian(h, s, ps)
                assert general == pytest.approx(classical, rel=1e-14, abs=1e-14)

    def test_cached_partials_are_the_symbolic_derivatives(self):
        h = Hamiltonian(HARMONIC)
        assert h.dq == hamexpr.differentiate(h.expr, "q")
        assert h.dp == hamexpr.differentiate(h.expr, "p")


class TestZMap:
    def test_position_only(self):
        z = canon.to_z(PhaseState(1.0, 0.0), ParamSet())
        assert z == 1j / SQRT2

    def test_scaled_momentum(self):
        z = canon.to_z(PhaseState(0.0, 1.0), ParamSet(kappa0=2.0))
        assert z == pytest.approx(SQRT2)

    def test_round_trip_on_random_states(self):
        rng = np.random.default_rng(7)
        ps = ParamSet(kappa0=0.8)
        for s in states(rng, 1000):
            back = canon.from_z(canon.to_z(s, ps), s.t, ps)
            assert abs(back.q - s.q) <= 1e-15 * max(1, abs(s.q))
            assert abs(back.p - s.p) <= 1e-15 * max(1, abs(s.p))


class TestDualField:
    def test_harmonic_form(self):
        h = Hamiltonian(HARMONIC)
        ps = ParamSet(kappa0=1.4, m=2.0, k=3.0)
        rng = np.random.default_rng(8)
        for s in states(rng, 20):
            z = canon.dual_field(h, s, ps)
            expected = complex(s.p / ps["m"], ps["kappa0"] * ps["k"] * s.q) / SQRT2
            assert z == pytest.approx(expected, rel=1e-14)

    def test_imaginary_form(self):
        h = Hamiltonian(IMAGINARY)
        ps = ParamSet(alpha0=0.9, kappa0=1.2, m=1.5, k=0.7)
        rng = np.random.default_rng(9)
        for s in states(rng, 20):
            z = canon.dual_field(h, s, ps)
            a = ps["alpha0"]
            expected = a / SQRT2 * complex(-ps["kappa0"] * ps["k"] * s.q, s.p / ps["m"])
            assert z == pytest.approx(expected, rel=1e-13, abs=1e-15)

    def test_attenuated_form(self):
        h = Hamiltonian(ATTENUATED)
        ps = ParamSet(beta0=0.6, kappa0=1.1)
        rng = np.random.default_rng(10)
        for s in states(rng, 20):
            z = canon.dual_field(h, s, ps)
            expected = complex(
                s.p / ps["m"], ps["kappa0"] * ps["k"] * s.q + ps["beta0"] * s.p
            ) / SQRT2
            assert z == pytest.approx(expected, rel=1e-13, abs=1e-15)

    def test_phase_velocity_is_i_times_dual_field(self):
        rng = np.random.default_rng(11)
        ps = ParamSet(kappa0=0.9, alpha0=0.5, beta0=0.3)
        for text in (HARMONIC, IMAGINARY, ATTENUATED):
            h = Hamiltonian(text)
            for s in states(rng, 30):
                zd = canon.dual_field(h, s, ps)
                zh = canon.phase_velocity(h, s, ps)
                assert zh == 1j * zd
                qd, pd = canon.eom(h, s, ps)
                from_eom = complex(ps["kappa0"] * pd, qd) / SQRT2
                assert abs(zh - from_eom) <= 1e-12 * max(1.0, abs(zh))

    def test_constant_hamiltonian_is_stationary(self):
        h = Hamiltonian("7 + i*2")
        assert canon.phase_velocity(h, PhaseState(1.0, 2.0), ParamSet()) == 0


class TestMatrixField:
    def test_harmonic_point(self):
        h = Hamiltonian(HARMONIC)
        Z_H, dH = canon.matrix_field(h, PhaseState(0.0, 1.0), ParamSet())
        assert np.allclose(dH, [1.0, 0.0])
        assert np.allclose(Z_H, [0.0, 1.0])

    def test_symplectic_matrix_identities(self):
        assert np.array_equal(J @ J, -np.eye(2))
        assert np.array_equal(J.T, -J)
        assert np.array_equal(np.linalg.inv(J), J.T)

    def test_matrix_duality(self):
        # Omega(Z_H, u) = -(dH, u) for random directions
        from cmech.symplec import omega_vec

        h = Hamiltonian(HARMONIC)
        ps = ParamSet(kappa0=1.3, m=0.7, k=2.1)
        rng = np.random.default_rng(12)
        for s in states(rng, 30):
            Z_H, dH = canon.matrix_field(h, s, ps)
            u = rng.uniform(-1, 1, 2)
            assert omega_vec(Z_H, u) == pytest.approx(-float(dH @ u), rel=1e-13, abs=1e-13)

    def test_agrees_with_eom_layout(self):
        h = Hamiltonian(HARMONIC)
        ps = ParamSet(kappa0=1.6)
        rng = np.random.default_rng(13)
        for s in states(rng, 30):
            Z_H, _ = canon.matrix_field(h, s, ps)
            qd, pd = canon.eom(h, s, ps)
            assert Z_H[0] == pytest.approx(ps["kappa0"] * pd, rel=1e-12, abs=1e-14)
            assert Z_H[1] == pytest.approx(qd, rel=1e-12, abs=1e-14)
            zh = canon.phase_velocity(h, s, ps)
            assert zh.real == pytest.approx(Z_H[0] / SQRT2, rel=1e-12, abs=1e-14)
            assert zh.imag == pytest.approx(Z_H[1] / SQRT2, rel=1e-12, abs=1e-14)

    def test_rejects_complex_hamiltonian(self):
        h = Hamiltonian(ATTENUATED)
        with pytest.raises(ComplexHamiltonianError):
            canon.matrix_field(h, PhaseState(1.0, 1.0), ParamSet(beta0=0.5))


class TestTotalTimeDerivative:
    def test_constant_maps_to_zero(self):
        h = Hamiltonian(HARMONIC)
        d = canon.total_time_derivative(hamexpr.parse("3.5"), h)
        assert d == hamexpr.Const(0.0)

    def test_harmonic_dual_field_derivative(self):
        # d/dt of the dual-field components reproduces -(w^2/sqrt2)(q - kappa0*p*i)
        h = Hamiltonian(HARMONIC)
        re0, im0 = h.dual_field_exprs(0)
        re1 = canon.total_time_derivative(re0, h)
        im1 = canon.total_time_derivative(im0, h)
        ps = ParamSet(kappa0=1.3, m=0.8, k=1.9).snapshot()
        rng = np.random.default_rng(14)
        w2 = ps["k"] / ps["m"]
        for s in states(rng, 25):
            got_re = complex(eval_at(re1, s.q, s.p, s.t, ps)).real
            got_im = complex(eval_at(im1, s.q, s.p, s.t, ps)).real
            assert got_re == pytest.approx(-w2 / SQRT2 * s.q, rel=1e-13, abs=1e-14)
            assert got_im == pytest.approx(w2 / SQRT2 * ps["kappa0"] * s.p, rel=1e-13, abs=1e-14)

    def test_attenuated_first_derivative_components(self):
        # elimination of time derivatives for the damped flow (n = 1)
        h = Hamiltonian(ATTENUATED)
        ps = ParamSet(beta0=0.9, kappa0=1.2, m=1.4, k=2.2).snapshot()
        re1, im1 = h.dual_field_exprs(1)
        lam = ps["beta0"] / ps["kappa0"]
        w2 = ps["k"] / ps["m"]
        rng = np.random.default_rng(15)
        for s in states(rng, 25):
            expect_re = (-w2 * s.q - lam * s.p / ps["m"]) / SQRT2
            expect_im = ps["kappa0"] * ((w2 - lam * lam) * s.p - lam * ps["k"] * s.q) / SQRT2
            assert complex(eval_at(re1, s.q, s.p, s.t, ps)).real == pytest.approx(
                expect_re, rel=1e-12, abs=1e-13
            )
            assert complex(eval_at(im1, s.q, s.p, s.t, ps)).real == pytest.approx(
                expect_im, rel=1e-12, abs=1e-13
            )

    def test_conserves_time_independent_real_hamiltonian(self):
        rng = np.random.default_rng(16)
        ps = ParamSet(kappa0=1.5).snapshot()
        for _ in range(10):
            h = Hamiltonian(random_quadratic(rng))
            dH = canon.total_time_derivative(h.expr, h)
            for s in states(rng, 10):
                v = complex(eval_at(dH, s.q, s.p, s.t, ps))
                assert abs(v) <= 1e-12

    def test_matches_finite_difference_along_flow(self):
        from cmech import odeint

        h = Hamiltonian(HARMONIC)
        ps = ParamSet()
        expr = hamexpr.parse("q*p + sin(q)")
        dexpr = canon.total_time_derivative(expr, h)
        traj = odeint.integrate_rk4(h, PhaseState(1.0, 0.0), 1e-3, 2000, ps)
        d = ps.snapshot()
        vals = [complex(eval_at(expr, q, p, t, d)).real for q, p, t in zip(traj.q, traj.p, traj.t)]
        for i in range(1, len(traj) - 1, 100):
            fd = (vals[i + 1] - vals[i - 1]) / (traj.t[i + 1] - traj.t[i - 1])
            exact = complex(eval_at(dexpr, traj.q[i], traj.p[i], traj.t[i], d)).real
            assert fd == pytest.approx(exact, abs=5e-6)
