"""Built-in systems with closed-form solutions.

Three flows are provided: the real harmonic oscillator, its pure-imaginary
counterpart (exponential decay/forcing), and the attenuated oscillator whose
imaginary momentum-power term produces velocity-dependent damping.  Each
scenario carries a closed form fitted to the initial state; closed forms are
derived from the characteristic equation at runtime, so they always satisfy
the equations of motion regardless of sign conventions elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .canon import Hamiltonian, PhaseState
from .hamexpr import ParamSet
from .odeint import Trajectory, trajectory_from_states

HARMONIC = "harmonic"
IMAGINARY = "imaginary"
ATTENUATED = "attenuated"

SCENARIO_NAMES = (HARMONIC, IMAGINARY, ATTENUATED)


@dataclass(frozen=True)
class Scenario:
    """A named Hamiltonian with parameters, initial state, and closed form."""

    name: str
    hamiltonian: Hamiltonian
    params: ParamSet
    initial: PhaseState
    closed_form: Callable[[float], tuple[float, float]] | None
    regime: str | None = None
    period: float | None = None
    extras: dict = field(default_factory=dict)

    def sample(self, t_end: float, n: int = 1001) -> Trajectory:
        """Trajectory built directly from the closed form at n uniform times."""
        if self.closed_form is None:
            raise ValueError(f"scenario {self.name!r} has no closed form")
        times = np.linspace(self.initial.t, t_end, n)
        qs = np.empty(n)
        ps = np.empty(n)
        for i, ti in enumerate(times):
            qs[i], ps[i] = self.closed_form(ti)
        return trajectory_from_states(
            self.hamiltonian, self.params, times, qs, ps, "closed_form",
            {"scenario": self.name},
        )


def harmonic(params: ParamSet | None = None, q0: float = 1.0, p0: float = 0.0,
             t0: float = 0.0) -> Scenario:
    """Harmonic oscillator p^2/(2m) + k q^2/2 with q = R cos(w t + phi)."""
    params = params or ParamSet()
    m, k = params["m"], params["k"]
    if m <= 0 or k <= 0:
        raise ValueError("harmonic scenario requires m > 0 and k > 0")
    w = math.sqrt(k / m)
    amp = math.hypot(q0, p0 / (m * w))
    phi = math.atan2(-p0 / (m * w), q0)

    def closed_form(t: float) -> tuple[float, float]:
        phase = w * (t - t0) + phi
        return amp * math.cos(phase), -m * amp * w * math.sin(phase)

    return Scenario(
        name=HARMONIC,
        hamiltonian=Hamiltonian("p^2/(2*m) + k*q^2/2"),
        params=params,
        initial=PhaseState(q0, p0, t0),
        closed_form=closed_form,
        regime="oscillatory",
        period=2.0 * math.pi / w,
        extras={"amplitude": amp, "phase": phi, "omega": w,
                "energy": 0.5 * amp * amp * m * w * w},
    )


def imaginary_ho(params: ParamSet | None = None, q0: float = 1.0, p0: float = 0.0,
                 t0: float = 0.0) -> Scenario:
    """Pure-imaginary oscillator i*alpha0*(p^2/(2m) + k q^2/2).

    The flow decouples into independent exponentials
    q = q0*exp(-alpha0*kappa0*k*t), p = p0*exp(-alpha0*t/(m*kappa0)).
    When k*m = 1/kappa0^2 both rates coincide and the phase curve is the ray
    through the initial point: zero curvature everywhere.
    """
    params = params or ParamSet(alpha0=1.0)
    if "alpha0" not in params:
        params = params.with_values(alpha0=1.0)
    m, k, kappa0, alpha0 = params["m"], params["k"], params["kappa0"], params["alpha0"]
    if m <= 0 or k <= 0:
        raise ValueError("imaginary scenario requires m > 0 and k > 0")
    rate_q = alpha0 * kappa0 * k
    rate_p = alpha0 / (m * kappa0)

    def closed_form(t: float) -> tuple[float, float]:
        dt = t - t0
        return q0 * math.exp(-rate_q * dt), p0 * math.exp(-rate_p * dt)

    if alpha0 > 0:
        regime = "decaying"
    elif alpha0 < 0:
        regime = "forcing"
    else:
        regime = "frozen"
    straight = abs(k * m * kappa0 * kappa0 - 1.0) <= 1e-12
    return Scenario(
        name=IMAGINARY,
        hamiltonian=Hamiltonian("i*alpha0*(p^2/(2*m) + k*q^2/2)"),
        params=params,
        initial=PhaseState(q0, p0, t0),
        closed_form=closed_form,
        regime=regime,
        period=None,
        extras={"rate_q": rate_q, "rate_p": rate_p, "straight_line": straight},
    )


def attenuated(params: ParamSet | None = None, n: int = 1, q0: float = 1.0,
               p0: float = 0.0, t0: float = 0.0) -> Scenario:
    """Oscillator with an imaginary self-interaction i*beta0/(n+1)*p^(n+1).

    The equations of motion are p = m*qdot, pdot = -k*q - (beta0/kappa0)*p^n.
    For n = 1 the position satisfies qddot + (beta0/kappa0)*qdot + w^2 q = 0,
    solved per regime of Lambda^2 = (beta0/(2*kappa0))^2 - w^2 using the
    roots of the characteristic polynomial; n >= 2 is numeric only.
    """
    params = params or ParamSet(beta0=1.0)
    if "beta0" not in params:
        params = params.with_values(beta0=1.0)
    if n != int(n) or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    params = params.with_values(n=n)
    m, k, kappa0, beta0 = params["m"], params["k"], params["kappa0"], params["beta0"]
    if m <= 0 or k <= 0:
        raise ValueError("attenuated scenario requires m > 0 and k > 0")
    text = f"p^2/(2*m) + k*q^2/2 + i*(beta0/{n + 1})*p^{n + 1}"
    h = Hamiltonian(text)

    if n != 1:
        return Scenario(
            name=ATTENUATED, hamiltonian=h, params=params,
            initial=PhaseState(q0, p0, t0), closed_form=None,
            regime="numeric", period=None, extras={"n": n},
        )

    w2 = k / m
    half_rate = beta0 / (2.0 * kappa0)
    lam2 = half_rate * half_rate - w2
    qdot0 = p0 / m
    scale = half_rate * half_rate + w2
    extras: dict = {"n": 1, "lambda2": lam2, "beta0": beta0}
    if beta0 > 0:
        extras["envelope"] = "decay"
    elif beta0 < 0:
        extras["envelope"] = "growth"
    else:
        extras["envelope"] = "none"
    period = None

    if abs(lam2) <= 1e-12 * scale:
        # repeated root r = -beta0/(2*kappa0)
        regime = "critically-damped"
        r = -half_rate
        c0 = q0
        c1 = qdot0 - r * q0
        extras["roots"] = (r, r)

        def q_and_qdot(dt):
            e = math.exp(r * dt)
            qv = (c0 + c1 * dt) * e
            qd = (c1 + r * (c0 + c1 * dt)) * e
            return qv, qd

    elif lam2 > 0:
        regime = "overdamped"
        lam = math.sqrt(lam2)
        r_plus = -half_rate + lam
        r_minus = -half_rate - lam
        # fit q0 = A + B, qdot0 = A r+ + B r-
        a_amp = (qdot0 - r_minus * q0) / (r_plus - r_minus)
        b_amp = q0 - a_amp
        extras["roots"] = (r_plus, r_minus)

        def q_and_qdot(dt):
            ea = math.exp(r_plus * dt)
            eb = math.exp(r_minus * dt)
            return a_amp * ea + b_amp * eb, a_amp * r_plus * ea + b_amp * r_minus * eb

    else:
        regime = "oscillatory"
        lam = math.sqrt(-lam2)
        r = -half_rate
        c_cos = q0
        c_sin = (qdot0 - r * q0) / lam
        period = 2.0 * math.pi / lam
        extras["roots"] = (complex(r, lam), complex(r, -lam))
        extras["lambda"] = lam

        def q_and_qdot(dt):
            e = math.exp(r * dt)
            s, c = math.sin(lam * dt), math.cos(lam * dt)
            qv = (c_sin * s + c_cos * c) * e
            qd = e * (r * (c_sin * s + c_cos * c) + lam * (c_sin * c - c_cos * s))
            return qv, qd

    def closed_form(t: float) -> tuple[float, float]:
        qv, qd = q_and_qdot(t - t0)
        return qv, m * qd

    return Scenario(
        name=ATTENUATED, hamiltonian=h, params=params,
        initial=PhaseState(q0, p0, t0), closed_form=closed_form,
        regime=regime, period=period, extras=extras,
    )


_FACTORIES = {HARMONIC: harmonic, IMAGINARY: imaginary_ho, ATTENUATED: attenuated}


def by_name(name: str, params: ParamSet | None = None, **kwargs) -> Scenario:
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ValueError(
            f"unknown scenario {name!r}; choose from {SCENARIO_NAMES}"
        ) from None
    return factory(params, **kwargs)
