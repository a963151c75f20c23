import math

import numpy as np
import pytest

from cmech import odeint, scenarios
from cmech.canon import Hamiltonian, PhaseState
from cmech.errors import NonFiniteStateError
from cmech.hamexpr import ParamSet


class TestRK4:
    def test_harmonic_one_period(self):
        sc = scenarios.harmonic()
        step = 2 * math.pi / 1000
        traj = odeint.integrate_rk4(sc.hamiltonian, sc.initial, step, 1000, sc.params)
        assert abs(traj.q[-1] - 1.0) <= 1e-7
        assert abs(traj.p[-1]) <= 1e-7

    def test_zero_hamiltonian_is_frozen(self):
        h = Hamiltonian("0")
        traj = odeint.integrate_rk4(h, PhaseState(1.2, -0.7), 0.1, 50, ParamSet())
        assert np.all(traj.q == 1.2)
        assert np.all(traj.p == -0.7)

    def test_imaginary_decay(self):
        sc = scenarios.imaginary_ho()  # alpha0*kappa0*k = 1
        traj = odeint.integrate_rk4(sc.hamiltonian, sc.initial, 1e-3, 1000, sc.params)
        assert abs(traj.q[-1] - math.exp(-1.0)) <= 1e-8

    def test_global_error_is_fourth_order(self):
        sc = scenarios.harmonic()
        period = sc.period

        def max_error(nsteps):
            traj = odeint.integrate_rk4(
                sc.hamiltonian, sc.initial, period / nsteps, nsteps, sc.params
            )
            return max(
                abs(qi - sc.closed_form(ti)[0]) for ti, qi in zip(traj.t, traj.q)
            )

        ratio = max_error(100) / max_error(200)
        assert 16 * 0.75 <= ratio <= 16 * 1.25

    def test_validates_arguments(self):
        sc = scenarios.harmonic()
        with pytest.raises(ValueError):
            odeint.integrate_rk4(sc.hamiltonian, sc.initial, -0.1, 10, sc.params)
        with pytest.raises(ValueError):
            odeint.integrate_rk4(sc.hamiltonian, sc.initial, 0.1, 0, sc.params)

    def test_reports_non_finite_step(self):
        h = Hamiltonian("exp(q)*p^2")  # blows up quickly
        with pytest.raises(NonFiniteStateError) as err:
            odeint.integrate_rk4(h, PhaseState(3.0, 3.0), 0.5, 100, ParamSet())
        assert err.value.step_index >= 1


class TestAdaptive:
    def test_energy_conservation(self):
        sc = scenarios.harmonic()
        traj = odeint.integrate_adaptive(
            sc.hamiltonian, sc.initial, 10 * sc.period, 1e-9, 1e-12, sc.params
        )
        energy = 0.5 * (traj.p ** 2 + traj.q ** 2)
        assert np.max(np.abs(energy - energy[0])) / energy[0] <= 1e-7

    def test_oscillatory_damped_matches_closed_form(self):
        sc = scenarios.attenuated(ParamSet(beta0=1.0, k=4.0))
        t_end = sc.initial.t + 10 * sc.period
        traj = odeint.integrate_adaptive(sc.hamiltonian, sc.initial, t_end, 1e-9, 1e-12, sc.params)
        worst = max(abs(qi - sc.closed_form(ti)[0]) for ti, qi in zip(traj.t, traj.q))
        assert worst <= 1e-6

    def test_degenerate_span_gives_single_sample(self):
        sc = scenarios.harmonic()
        traj = odeint.integrate_adaptive(sc.hamiltonian, sc.initial, sc.initial.t, params=sc.params)
        assert len(traj) == 1
        assert traj.q[0] == sc.initial.q

    def test_rejects_bad_tolerances(self):
        sc = scenarios.harmonic()
        with pytest.raises(ValueError):
            odeint.integrate_adaptive(sc.hamiltonian, sc.initial, 1.0, 0.0, 1e-9, sc.params)

    def test_local_error_scales_with_tolerance(self):
        sc = scenarios.harmonic()

        def max_error(rel):
            traj = odeint.integrate_adaptive(
                sc.hamiltonian, sc.initial, 2 * math.pi, rel, 1e-14, sc.params
            )
            return max(abs(qi - sc.closed_form(ti)[0]) for ti, qi in zip(traj.t, traj.q))

        assert max_error(1e-10) < max_error(1e-6) < 1e-4


class TestTrajectory:
    def test_times_strictly_increasing(self):
        sc = scenarios.harmonic()
        with pytest.raises(ValueError):
            odeint.trajectory_from_states(
                sc.hamiltonian, sc.params, [0.0, 0.0], [1, 1], [0, 0], "test"
            )

    def test_derivative_caches_match_flow(self):
        from cmech import canon

        sc = scenarios.attenuated(ParamSet(beta0=0.8))
        traj = odeint.integrate_adaptive(sc.hamiltonian, sc.initial, 3.0, 1e-9, 1e-12, sc.params)
        for i in range(0, len(traj), max(1, len(traj) // 20)):
            qd, pd = canon.eom(sc.hamiltonian, traj.state(i), sc.params)
            assert abs(traj.qdot[i] - qd) <= 1e-12
            assert abs(traj.pdot[i] - pd) <= 1e-12

    def test_second_derivatives_match_finite_differences(self):
        sc = scenarios.harmonic()
        step = 1e-3
        traj = odeint.integrate_rk4(sc.hamiltonian, sc.initial, step, 2000, sc.params)
        for i in range(1, len(traj) - 1, 100):
            fd = (traj.qdot[i + 1] - traj.qdot[i - 1]) / (2 * step)
            assert traj.qddot[i] == pytest.approx(fd, abs=5e-6)
            fd_p = (traj.pdot[i + 1] - traj.pdot[i - 1]) / (2 * step)
            assert traj.pddot[i] == pytest.approx(fd_p, abs=5e-6)


class TestResample:
    def test_identity_at_existing_times(self):
        sc = scenarios.harmonic()
        traj = odeint.integrate_adaptive(sc.hamiltonian, sc.initial, 2.0, 1e-9, 1e-12, sc.params)
        again = odeint.resample(traj, traj.t)
        assert np.array_equal(again.q, traj.q)
        assert np.array_equal(again.p, traj.p)

    def test_linear_flow_is_exact_at_midpoints(self):
        h = Hamiltonian("p")  # qdot = 1, pdot = 0
        traj = odeint.integrate_rk4(h, PhaseState(0.0, 0.0), 0.25, 8, ParamSet())
        mid = odeint.resample(traj, [0.125, 1.625])
        assert mid.q == pytest.approx([0.125, 1.625], abs=1e-14)

    def test_dense_resample_tracks_closed_form(self):
        sc = scenarios.harmonic()
        rel = 1e-9
        traj = odeint.integrate_adaptive(
            sc.hamiltonian, sc.initial, 2 * math.pi, rel, 1e-12, sc.params
        )
        times = np.linspace(0.0, 2 * math.pi, 5000)
        dense = odeint.resample(traj, times)
        worst = max(abs(qi - sc.closed_form(ti)[0]) for ti, qi in zip(dense.t, dense.q))
        assert worst <= rel * 10 + 1e-9

    def test_out_of_range_rejected(self):
        sc = scenarios.harmonic()
        traj = odeint.integrate_adaptive(sc.hamiltonian, sc.initial, 1.0, 1e-9, 1e-12, sc.params)
        with pytest.raises(ValueError):
            odeint.resample(traj, [1.5])
