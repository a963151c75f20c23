"""Canonical dynamics for complex Hamiltonian functions (one degree of freedom).

A complex Hamiltonian ``HH = H + i K`` over real phase variables generates the
generalized canonical flow

    qdot =  H_p - kappa0 * K_q
    pdot = -H_q - K_p / kappa0

which reduces to the classical equations when K is constant.  The phase plane
is complexified through ``z = (kappa0*p + i*q) / sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from . import hamexpr
from .errors import ComplexHamiltonianError
from .hamexpr import Expression, Param, ParamSet, Var

SQRT2 = math.sqrt(2.0)

#: Two-dimensional symplectic matrix; J @ J = -I, J.T = -J.
J = np.array([[0.0, 1.0], [-1.0, 0.0]])

# deterministic probe states used for realness/linearity checks
_PROBES = [
    (0.731, -0.248, 0.0),
    (-1.173, 0.905, 0.4),
    (0.217, 1.661, -1.1),
    (-0.592, -1.384, 2.3),
    (1.448, 0.333, 0.7),
]


@dataclass(frozen=True)
class PhaseState:
    """A single real phase-space point (q, p) at time t."""

    q: float
    p: float
    t: float = 0.0

    def __post_init__(self):
        for name in ("q", "p", "t"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


class Hamiltonian:
    """A complex Hamiltonian expression with cached symbolic derivatives.

    The partials and the flow expressions are derived once and compiled to
    closures; integration evaluates them millions of times.
    """

    def __init__(self, expr: Expression | str):
        if isinstance(expr, str):
            expr = hamexpr.parse(expr)
        self.expr = expr

    @cached_property
    def dq(self) -> Expression:
        return hamexpr.differentiate(self.expr, "q")

    @cached_property
    def dp(self) -> Expression:
        return hamexpr.differentiate(self.expr, "p")

    @cached_property
    def dt(self) -> Expression:
        return hamexpr.differentiate(self.expr, "t")

    @cached_property
    def qdot_expr(self) -> Expression:
        """H_p - kappa0*K_q, with Re/Im extracted structurally."""
        kappa0 = Param("kappa0")
        return hamexpr.simplify(
            hamexpr.real_part(self.dp) - kappa0 * hamexpr.imag_part(self.dq)
        )

    @cached_property
    def pdot_expr(self) -> Expression:
        """-H_q - K_p/kappa0."""
        kappa0 = Param("kappa0")
        return hamexpr.simplify(
            -hamexpr.real_part(self.dq) - hamexpr.imag_part(self.dp) / kappa0
        )

    @cached_property
    def qddot_expr(self) -> Expression:
        return total_time_derivative(self.qdot_expr, self)

    @cached_property
    def pddot_expr(self) -> Expression:
        return total_time_derivative(self.pdot_expr, self)

    @cached_property
    def real_part_expr(self) -> Expression:
        """H = Re(HH), the classical energy function."""
        return hamexpr.real_part(self.expr)

    def dual_field_exprs(self, order: int = 0) -> tuple[Expression, Expression]:
        """(Re, Im) expressions of the dual field and its flow derivatives.

        Order 0 is the dual field itself, ``(qdot - i*kappa0*pdot)/sqrt(2)``;
        each higher order applies the total time derivative along the flow.
        """
        chain = self.__dict__.setdefault("_dual_chain", [])
        if not chain:
            kappa0 = Param("kappa0")
            inv = hamexpr.Const(1.0 / SQRT2)
            re0 = hamexpr.simplify(inv * self.qdot_expr)
            im0 = hamexpr.simplify(hamexpr.Neg(inv * kappa0 * self.pdot_expr))
            chain.append((re0, im0))
        while len(chain) <= order:
            re_prev, im_prev = chain[-1]
            chain.append(
                (
                    total_time_derivative(re_prev, self),
                    total_time_derivative(im_prev, self),
                )
            )
        return chain[order]

    def dual_field_fns(self, order: int = 0):
        fns = self.__dict__.setdefault("_dual_fns", {})
        if order not in fns:
            re_e, im_e = self.dual_field_exprs(order)
            fns[order] = (
                hamexpr.compile_expression(re_e),
                hamexpr.compile_expression(im_e),
            )
        return fns[order]

    @cached_property
    def _f_qdot(self):
        return hamexpr.compile_expression(self.qdot_expr)

    @cached_property
    def _f_pdot(self):
        return hamexpr.compile_expression(self.pdot_expr)

    @cached_property
    def _f_qddot(self):
        return hamexpr.compile_expression(self.qddot_expr)

    @cached_property
    def _f_pddot(self):
        return hamexpr.compile_expression(self.pddot_expr)

    @cached_property
    def _f_energy(self):
        return hamexpr.compile_expression(self.real_part_expr)

    def is_real(self, params: Mapping[str, float]) -> bool:
        """True when Im(HH) is constant, i.e. K_q = K_p = 0 everywhere probed."""
        kq = hamexpr.compile_expression(hamexpr.imag_part(self.dq))
        kp = hamexpr.compile_expression(hamexpr.imag_part(self.dp))
        d = params.snapshot() if isinstance(params, ParamSet) else dict(params)
        for q, p, t in _PROBES:
            for f in (kq, kp):
                v = f(q, p, t, d)
                if abs(complex(v)) > 1e-12:
                    return False
        return True

    def __repr__(self):
        return f"Hamiltonian({hamexpr.render(self.expr)!r})"


def _snapshot(params) -> dict:
    return params.snapshot() if isinstance(params, ParamSet) else dict(params)


def eom(h: Hamiltonian, s: PhaseState, params) -> tuple[float, float]:
    """(qdot, pdot) of the generalized canonical flow at state ``s``."""
    d = _snapshot(params)
    qd = h._f_qdot(s.q, s.p, s.t, d)
    pd = h._f_pdot(s.q, s.p, s.t, d)
    return complex(qd).real, complex(pd).real


def eom_real_hamiltonian(h: Hamiltonian, s: PhaseState, params) -> tuple[float, float]:
    """Classical equations qdot = H_p, pdot = -H_q; requires a real Hamiltonian."""
    d = _snapshot(params)
    hp = complex(hamexpr.eval_at(h.dp, s.q, s.p, s.t, d))
    hq = complex(hamexpr.eval_at(h.dq, s.q, s.p, s.t, d))
    scale = max(1.0, abs(hp), abs(hq))
    if abs(hp.imag) > 1e-12 * scale or abs(hq.imag) > 1e-12 * scale:
        raise ComplexHamiltonianError("Hamiltonian has a non-constant imaginary part")
    return hp.real, -hq.real


def to_z(s: PhaseState, params) -> complex:
    """Complex phase coordinate z = (kappa0*p + i*q)/sqrt(2)."""
    kappa0 = params["kappa0"]
    return complex(kappa0 * s.p / SQRT2, s.q / SQRT2)


def from_z(z: complex, t: float, params) -> PhaseState:
    """Exact inverse of :func:`to_z`."""
    kappa0 = params["kappa0"]
    return PhaseState(q=z.imag * SQRT2, p=z.real * SQRT2 / kappa0, t=t)


def dual_field(h: Hamiltonian, s: PhaseState, params) -> complex:
    """z_dHH = (H_p - kappa0*K_q + (kappa0*H_q + K_p) i)/sqrt(2).

    Equals (qdot - i*kappa0*pdot)/sqrt(2); this is the object the
    quantization recipe promotes to an operator.
    """
    qd, pd = eom(h, s, params)
    kappa0 = params["kappa0"]
    return complex(qd / SQRT2, -kappa0 * pd / SQRT2)


def phase_velocity(h: Hamiltonian, s: PhaseState, params) -> complex:
    """zdot = i * dual_field; identical to to_z applied to the flow."""
    return 1j * dual_field(h, s, params)


def matrix_field(h: Hamiltonian, s: PhaseState, params) -> tuple[np.ndarray, np.ndarray]:
    """Matrix-form field and differential: Z_H = -J dH for a real Hamiltonian.

    Layouts: dH = (H_p, kappa0*H_q), Z_H = (kappa0*pdot, qdot).
    Raises ComplexHamiltonianError when Im(HH) is not constant.
    """
    if not h.is_real(params):
        raise ComplexHamiltonianError(
            "matrix formulation is defined for real Hamiltonians only"
        )
    d = _snapshot(params)
    kappa0 = d["kappa0"]
    hp = complex(hamexpr.eval_at(h.dp, s.q, s.p, s.t, d)).real
    hq = complex(hamexpr.eval_at(h.dq, s.q, s.p, s.t, d)).real
    dH = np.array([hp, kappa0 * hq])
    Z_H = -J @ dH
    return Z_H, dH


def total_time_derivative(e: Expression, h: Hamiltonian) -> Expression:
    """d e/dt along the flow: e_t + e_q*qdot + e_p*pdot, substituted symbolically."""
    term = hamexpr.differentiate(e, "t")
    term = term + hamexpr.differentiate(e, "q") * h.qdot_expr
    term = term + hamexpr.differentiate(e, "p") * h.pdot_expr
    return hamexpr.simplify(term)


def energy_value(h: Hamiltonian, s: PhaseState, params) -> float:
    """H(q, p, t) = Re(HH), the classical energy function."""
    d = _snapshot(params)
    return complex(h._f_energy(s.q, s.p, s.t, d)).real
