"""Bilinear algebra of the complexified phase plane.

Complex inner product (z, w) = Re[z conj(w)] and symplectic product
Omega(z, w) = -Im[z conj(w)]; their matrix-form counterpart u^T J v; the
Poisson bracket through both routes; the Jacobi identity.
"""

from __future__ import annotations

import numpy as np

from . import canon, hamexpr
from .canon import Hamiltonian, J, PhaseState, SQRT2
from .hamexpr import Expression


def inner(z: complex, w: complex) -> float:
    """Re[z conj(w)]; symmetric and positive definite."""
    return (z * w.conjugate()).real


def omega_c(z: complex, w: complex) -> float:
    """Symplectic product Re[z i conj(w)] = -Im[z conj(w)]; antisymmetric."""
    return -(z * w.conjugate()).imag


def omega_vec(u, v) -> float:
    """Matrix form u^T J v on two-component phase vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(u[0] * v[1] - u[1] * v[0])


def jacobi_residual(u: complex, z: complex, w: complex, omega=omega_c) -> float:
    """Omega(u, Omega(z,w)) + Omega(z, Omega(w,u)) + Omega(w, Omega(u,z)).

    Inner products are real; they re-enter as complex numbers with zero
    imaginary part, under which reading the identity holds exactly.
    """
    return (
        omega(u, complex(omega(z, w)))
        + omega(z, complex(omega(w, u)))
        + omega(w, complex(omega(u, z)))
    )


def classical_commutator_identity(z: complex, w: complex) -> float:
    """(i/2)([z, conj w] - [conj z, w]) for commuting scalars: identically 0.

    The classical baseline the operator algebra deforms; commutators of
    numbers vanish term by term.
    """
    comm_a = z * w.conjugate() - w.conjugate() * z
    comm_b = z.conjugate() * w - w * z.conjugate()
    return (0.5j * (comm_a - comm_b)).real


def dual_field_of(expr: Expression | str, s: PhaseState, params) -> complex:
    """Dual field of an arbitrary real observable F: (F_p + i*kappa0*F_q)/sqrt(2)."""
    if isinstance(expr, str):
        expr = hamexpr.parse(expr)
    d = params.snapshot() if isinstance(params, hamexpr.ParamSet) else dict(params)
    fq = complex(hamexpr.eval_at(hamexpr.differentiate(expr, "q"), s.q, s.p, s.t, d))
    fp = complex(hamexpr.eval_at(hamexpr.differentiate(expr, "p"), s.q, s.p, s.t, d))
    kappa0 = d["kappa0"]
    return complex(fp.real / SQRT2, kappa0 * fq.real / SQRT2)


def poisson(F: Expression | str, G: Expression | str, s: PhaseState, params) -> float:
    """{F, G} = kappa0 (F_q G_p - F_p G_q) evaluated at s."""
    if isinstance(F, str):
        F = hamexpr.parse(F)
    if isinstance(G, str):
        G = hamexpr.parse(G)
    d = params.snapshot() if isinstance(params, hamexpr.ParamSet) else dict(params)
    fq = complex(hamexpr.eval_at(hamexpr.differentiate(F, "q"), s.q, s.p, s.t, d)).real
    fp = complex(hamexpr.eval_at(hamexpr.differentiate(F, "p"), s.q, s.p, s.t, d)).real
    gq = complex(hamexpr.eval_at(hamexpr.differentiate(G, "q"), s.q, s.p, s.t, d)).real
    gp = complex(hamexpr.eval_at(hamexpr.differentiate(G, "p"), s.q, s.p, s.t, d)).real
    return d["kappa0"] * (fq * gp - fp * gq)


def poisson_via_symplectic(F, G, s: PhaseState, params, omega=omega_c) -> float:
    """{F, G} computed as -2*Omega(z_dF, z_dG).

    The dual fields carry a 1/sqrt(2) normalization each, which contributes
    a factor 1/2 to the bilinear product; the factor 2 restores the
    definitional bracket so both routes agree exactly.
    """
    zf = dual_field_of(F, s, params)
    zg = dual_field_of(G, s, params)
    return -2.0 * omega(zf, zg)


def duality_residual(h: Hamiltonian, s: PhaseState, w: complex, params, omega=omega_c) -> float:
    """Omega(z_H, w) + (z_dH, w); zero by the duality of the two fields."""
    zd = canon.dual_field(h, s, params)
    zh = 1j * zd
    return omega(zh, w) + inner(zd, w)
