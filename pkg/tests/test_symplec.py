import math

import numpy as np
import pytest

from cmech import canon, symplec
from cmech.canon import Hamiltonian, PhaseState, SQRT2
from cmech.hamexpr import ParamSet
from cmech.verification import random_quadratic


def random_complex(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


class TestInner:
    def test_orthogonal_units(self):
        assert symplec.inner(1 + 0j, 1j) == 0.0

    def test_norm_squared(self):
        z = 3 - 4j
        assert symplec.inner(z, z) == 25.0

    def test_conjugate_pair(self):
        assert symplec.inner(1 + 1j, 1 - 1j) == 0.0

    def test_symmetric_positive_definite(self):
        rng = np.random.default_rng(21)
        for z, w in zip(random_complex(rng, 200), random_complex(rng, 200)):
            assert symplec.inner(z, w) == symplec.inner(w, z)
            assert symplec.inner(z, z) >= 0.0


class TestOmega:
    def test_unit_pair(self):
        assert symplec.omega_c(1 + 0j, 1j) == 1.0

    def test_self_is_zero(self):
        rng = np.random.default_rng(22)
        for z in random_complex(rng, 200):
            assert symplec.omega_c(z, z) == 0.0

    def test_antisymmetry(self):
        rng = np.random.default_rng(23)
        for z, w in zip(random_complex(rng, 500), random_complex(rng, 500)):
            assert symplec.omega_c(z, w) == -symplec.omega_c(w, z)

    def test_bilinearity(self):
        rng = np.random.default_rng(24)
        for _ in range(500):
            z, zp, w = random_complex(rng, 3)
            a, b = rng.uniform(-2, 2, 2)
            lhs = symplec.omega_c(a * z + b * zp, w)
            rhs = a * symplec.omega_c(z, w) + b * symplec.omega_c(zp, w)
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(rhs))

    def test_matrix_form_units(self):
        assert symplec.omega_vec([1.0, 0.0], [0.0, 1.0]) == 1.0
        assert symplec.omega_vec([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_vector_and_complex_forms_correspond(self):
        # under u -> (u1 + i*u2)/sqrt(2) each argument carries 1/sqrt(2),
        # so the complex product is half the matrix product
        rng = np.random.default_rng(25)
        for _ in range(200):
            u = rng.uniform(-2, 2, 2)
            v = rng.uniform(-2, 2, 2)
            zu = complex(u[0], u[1]) / SQRT2
            zv = complex(v[0], v[1]) / SQRT2
            lhs = symplec.omega_vec(u, v)
            rhs = 2.0 * symplec.omega_c(zu, zv)
            assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-14)


class TestPoisson:
    def test_canonical_pair(self):
        for kappa0 in (0.5, 1.0, 2.0):
            ps = ParamSet(kappa0=kappa0)
            assert symplec.poisson("q", "p", PhaseState(0.1, 0.2), ps) == kappa0

    def test_self_bracket_vanishes(self):
        rng = np.random.default_rng(26)
        ps = ParamSet(kappa0=1.3)
        for _ in range(20):
            H = random_quadratic(rng)
            for q, p in rng.uniform(-2, 2, (10, 2)):
                assert symplec.poisson(H, H, PhaseState(q, p), ps) == 0.0

    def test_antisymmetry(self):
        rng = np.random.default_rng(27)
        ps = ParamSet(kappa0=0.8)
        for _ in range(50):
            F, G = random_quadratic(rng), random_quadratic(rng)
            s = PhaseState(*rng.uniform(-2, 2, 2))
            assert symplec.poisson(F, G, s, ps) == -symplec.poisson(G, F, s, ps)

    def test_dual_route_agreement(self):
        rng = np.random.default_rng(28)
        ps = ParamSet(kappa0=1.9)
        for _ in range(50):
            F, G = random_quadratic(rng), random_quadratic(rng)
            s = PhaseState(*rng.uniform(-2, 2, 2))
            direct = symplec.poisson(F, G, s, ps)
            dual = symplec.poisson_via_symplectic(F, G, s, ps)
            assert abs(direct - dual) <= 1e-12 * max(1.0, abs(direct))


class TestJacobi:
    def test_specific_triple(self):
        assert symplec.jacobi_residual(1 + 0j, 1j, 1 + 1j) == 0.0

    def test_random_triples(self):
        rng = np.random.default_rng(29)
        for _ in range(1000):
            u, z, w = random_complex(rng, 3)
            scale = max(abs(u) * abs(z) * abs(w), 1.0)
            assert abs(symplec.jacobi_residual(u, z, w)) <= 1e-12 * scale

    def test_real_third_argument(self):
        rng = np.random.default_rng(30)
        for _ in range(100):
            u, z = random_complex(rng, 2)
            w = complex(rng.uniform(-3, 3))
            assert abs(symplec.jacobi_residual(u, z, w)) <= 1e-13 * max(
                1.0, abs(u) * abs(z) * abs(w)
            )


class TestClassicalCommutator:
    def test_always_zero(self):
        rng = np.random.default_rng(31)
        assert symplec.classical_commutator_identity(0j, 0j) == 0.0
        for z, w in zip(random_complex(rng, 100), random_complex(rng, 100)):
            assert symplec.classical_commutator_identity(z, w) == 0.0


class TestDuality:
    def test_flow_vs_dual_field_for_scenarios(self):
        from cmech import scenarios

        rng = np.random.default_rng(32)
        cases = [
            scenarios.harmonic(),
            scenarios.imaginary_ho(ParamSet(alpha0=0.6, kappa0=1.4)),
            scenarios.attenuated(ParamSet(beta0=1.1, kappa0=0.7)),
        ]
        for sc in cases:
            for _ in range(200):
                s = PhaseState(*rng.uniform(-2, 2, 2))
                w = complex(*rng.standard_normal(2))
                res = symplec.duality_residual(sc.hamiltonian, s, w, sc.params)
                zd = canon.dual_field(sc.hamiltonian, s, sc.params)
                assert abs(res) <= 1e-12 * max(1.0, abs(zd) * abs(w))
