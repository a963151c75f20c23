"""Trajectory construction and numerical integration of the canonical flow.

Two integrators: classical fixed-step RK4 and an embedded Dormand-Prince
5(4) pair with proportional step control.  Trajectories carry analytic
first and second state derivatives evaluated from the flow expressions, so
downstream geometry never differentiates numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .canon import Hamiltonian, PhaseState
from .errors import NonFiniteStateError, StepUnderflowError
from .hamexpr import ParamSet

# Dormand-Prince 5(4) tableau (FSAL: last stage equals next first stage).
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_DP_ERR = tuple(b5 - b4 for b5, b4 in zip(_DP_B5, _DP_B4))


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered phase samples with analytic derivative caches."""

    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    qdot: np.ndarray
    pdot: np.ndarray
    qddot: np.ndarray
    pddot: np.ndarray
    hamiltonian: Hamiltonian
    params: ParamSet
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("sample times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def state(self, i: int) -> PhaseState:
        return PhaseState(float(self.q[i]), float(self.p[i]), float(self.t[i]))

    def states(self):
        return [self.state(i) for i in range(len(self))]


def trajectory_from_states(
    h: Hamiltonian,
    params: ParamSet,
    t: Sequence[float],
    q: Sequence[float],
    p: Sequence[float],
    method: str,
    meta: dict | None = None,
) -> Trajectory:
    """Assemble a trajectory and fill its derivative caches from the flow."""
    t = np.asarray(t, dtype=float)
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    d = params.snapshot()
    f_qd, f_pd = h._f_qdot, h._f_pdot
    f_qdd, f_pdd = h._f_qddot, h._f_pddot
    n = len(t)
    qdot = np.empty(n)
    pdot = np.empty(n)
    qddot = np.empty(n)
    pddot = np.empty(n)
    for i in range(n):
        qi, pi, ti = q[i], p[i], t[i]
        qdot[i] = complex(f_qd(qi, pi, ti, d)).real
        pdot[i] = complex(f_pd(qi, pi, ti, d)).real
        qddot[i] = complex(f_qdd(qi, pi, ti, d)).real
        pddot[i] = complex(f_pdd(qi, pi, ti, d)).real
    return Trajectory(t, q, p, qdot, pdot, qddot, pddot, h, params, method, dict(meta or {}))


def integrate_rk4(
    h: Hamiltonian,
    s0: PhaseState,
    step: float,
    nsteps: int,
    params: ParamSet,
) -> Trajectory:
    """Classical fixed-step fourth-order Runge-Kutta."""
    if step <= 0:
        raise ValueError("step must be positive")
    if nsteps < 1:
        raise ValueError("nsteps must be at least 1")
    d = params.snapshot()
    f_qd, f_pd = h._f_qdot, h._f_pdot

    def rhs(ti, qi, pi):
        return complex(f_qd(qi, pi, ti, d)).real, complex(f_pd(qi, pi, ti, d)).real

    ts = [s0.t]
    qs = [s0.q]
    ps = [s0.p]
    ti, qi, pi = s0.t, s0.q, s0.p
    for i in range(nsteps):
        k1q, k1p = rhs(ti, qi, pi)
        k2q, k2p = rhs(ti + step / 2, qi + step * k1q / 2, pi + step * k1p / 2)
        k3q, k3p = rhs(ti + step / 2, qi + step * k2q / 2, pi + step * k2p / 2)
        k4q, k4p = rhs(ti + step, qi + step * k3q, pi + step * k3p)
        qi = qi + step * (k1q + 2 * k2q + 2 * k3q + k4q) / 6
        pi = pi + step * (k1p + 2 * k2p + 2 * k3p + k4p) / 6
        ti = s0.t + (i + 1) * step
        if not (math.isfinite(qi) and math.isfinite(pi)):
            raise NonFiniteStateError(i + 1, ti)
        ts.append(ti)
        qs.append(qi)
        ps.append(pi)
    meta = {"step": step, "nsteps": nsteps}
    return trajectory_from_states(h, params, ts, qs, ps, "rk4", meta)


def integrate_adaptive(
    h: Hamiltonian,
    s0: PhaseState,
    t_end: float,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    params: ParamSet | None = None,
    max_step: float | None = None,
) -> Trajectory:
    """Embedded Runge-Kutta 5(4) with proportional step-size control.

    Accepted steps keep the weighted local error estimate below 1; dense
    output between accepted samples is cubic Hermite (see :func:`resample`).
    The interpolant is one order lower than the integrator, so callers that
    resample densely can cap ``max_step`` to keep interpolation error
    commensurate with the tolerances.
    """
    if params is None:
        params = ParamSet()
    if t_end < s0.t:
        raise ValueError("t_end must not precede the initial time")
    if rel_tol <= 0 or abs_tol <= 0:
        raise ValueError("tolerances must be positive")
    if max_step is not None and max_step <= 0:
        raise ValueError("max_step must be positive")
    meta = {"rel_tol": rel_tol, "abs_tol": abs_tol}
    if t_end == s0.t:
        return trajectory_from_states(
            h, params, [s0.t], [s0.q], [s0.p], "adaptive", meta
        )
    d = params.snapshot()
    f_qd, f_pd = h._f_qdot, h._f_pdot

    def rhs(ti, y):
        return np.array(
            [
                complex(f_qd(y[0], y[1], ti, d)).real,
                complex(f_pd(y[0], y[1], ti, d)).real,
            ]
        )

    span = t_end - s0.t
    t = s0.t
    y = np.array([s0.q, s0.p])
    ts = [t]
    qs = [y[0]]
    ps = [y[1]]
    k_first = rhs(t, y)
    hstep = min(span, 0.01 * span + 1e-6)
    step_index = 0
    while t < t_end:
        hstep = min(hstep, t_end - t)
        if hstep < 1e-14 * max(abs(t), 1.0):
            raise StepUnderflowError(t)
        k = [k_first]
        for i in range(1, 7):
            yi = y + hstep * sum(a * ki for a, ki in zip(_DP_A[i], k))
            k.append(rhs(t + _DP_C[i] * hstep, yi))
        y5 = y + hstep * sum(b * ki for b, ki in zip(_DP_B5, k) if b != 0.0)
        err = hstep * sum(c * ki for c, ki in zip(_DP_ERR, k) if c != 0.0)
        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y5))
        err_norm = math.sqrt(float(np.mean((err / scale) ** 2)))
        if err_norm <= 1.0:
            t = t + hstep
            y = y5
            step_index += 1
            if not np.all(np.isfinite(y)):
                raise NonFiniteStateError(step_index, t)
            ts.append(t)
            qs.append(y[0])
            ps.append(y[1])
            k_first = k[6]  # FSAL
        factor = 0.9 * (err_norm ** -0.2) if err_norm > 0 else 5.0
        hstep = hstep * min(5.0, max(0.2, factor))
    return trajectory_from_states(h, params, ts, qs, ps, "adaptive", meta)


def _hermite(t, t0, t1, y0, y1, d0, d1):
    dt = t1 - t0
    x = (t - t0) / dt
    x2 = x * x
    x3 = x2 * x
    h00 = 2 * x3 - 3 * x2 + 1
    h10 = x3 - 2 * x2 + x
    h01 = -2 * x3 + 3 * x2
    h11 = x3 - x2
    return h00 * y0 + h10 * dt * d0 + h01 * y1 + h11 * dt * d1


def resample(traj: Trajectory, times: Sequence[float]) -> Trajectory:
    """Cubic-Hermite interpolation at the requested times.

    Derivative caches are recomputed from the flow at the interpolated
    states, not interpolated themselves.
    """
    times = np.asarray(times, dtype=float)
    if len(times) == 0:
        raise ValueError("no resample times given")
    if times.min() < traj.t0 - 1e-12 or times.max() > traj.t_end + 1e-12:
        raise ValueError(
            f"resample times must lie within [{traj.t0}, {traj.t_end}]"
        )
    times = np.clip(times, traj.t0, traj.t_end)
    idx = np.searchsorted(traj.t, times, side="right") - 1
    idx = np.clip(idx, 0, len(traj) - 2 if len(traj) > 1 else 0)
    qs = np.empty(len(times))
    ps = np.empty(len(times))
    for j, (ti, i) in enumerate(zip(times, idx)):
        if len(traj) == 1 or ti == traj.t[i]:
            qs[j] = traj.q[i]
            ps[j] = traj.p[i]
            continue
        i1 = i + 1
        qs[j] = _hermite(ti, traj.t[i], traj.t[i1], traj.q[i], traj.q[i1], traj.qdot[i], traj.qdot[i1])
        ps[j] = _hermite(ti, traj.t[i], traj.t[i1], traj.p[i], traj.p[i1], traj.pdot[i], traj.pdot[i1])
    meta = dict(traj.meta)
    meta["resampled_from"] = traj.method
    return trajectory_from_states(traj.hamiltonian, traj.params, times, qs, ps, traj.method, meta)
