"""Differential geometry of phase-space curves.

Works on either the phase curve z(t) = (kappa0*p + i*q)/sqrt(2) or the
dual-field curve (caller selects).  Provides the Frenet frame T = zdot/|zdot|,
N = iT, the curvature through three routes (component formula, generic
plane-curve formula, finite differences of the tangent), arc length and
enclosed area by Simpson quadrature, the convex-curve length/area bounds,
the curvature-energy relation, and a second-order Taylor predictor.

Stationary points (|zdot| = 0) yield ``None`` curvature samples, excluded
from aggregates and counted in the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from . import canon
from .canon import Hamiltonian, PhaseState, SQRT2
from .errors import EvaluationError, NonConvexCurveError, OpenCurveError
from .odeint import Trajectory

Z_CURVE = "z"
DUAL_CURVE = "z_dh"

#: closed-curve gap tolerance, relative to max(1, curve diameter)
CLOSURE_RTOL = 1e-9


@dataclass(frozen=True)
class CurveSample:
    """Geometric data of one point of a plane curve."""

    t: float
    z: complex
    zdot: complex
    zddot: complex
    speed: float
    tangent: complex | None
    normal: complex | None
    kappa: float | None
    arclen: float
    singular: bool


def curvature(qdot: float, pdot: float, qddot: float, pddot: float, params) -> float | None:
    """Curvature of the phase curve from state derivatives.

    kappa = kappa0 (qddot*pdot - pddot*qdot) / (2 |zdot|^3) with
    |zdot| = sqrt(((kappa0*pdot)^2 + qdot^2)/2).  Returns None at a
    stationary point, where curvature is undefined.
    """
    kappa0 = params["kappa0"]
    speed_sq = ((kappa0 * pdot) ** 2 + qdot ** 2) / 2.0
    if speed_sq == 0.0:
        return None
    return kappa0 * (qddot * pdot - pddot * qdot) / (2.0 * speed_sq ** 1.5)


def curvature_oracle(zdot: complex, zddot: complex) -> float | None:
    """Generic plane-curve curvature Im[conj(zdot) zddot]/|zdot|^3."""
    speed = abs(zdot)
    if speed == 0.0:
        return None
    return (zdot.conjugate() * zddot).imag / speed ** 3


def _sample(t, z, zdot, zddot) -> tuple:
    speed = abs(zdot)
    if speed == 0.0:
        return speed, None, None, None, True
    tangent = zdot / speed
    normal = 1j * tangent
    kappa = (zdot.conjugate() * zddot).imag / speed ** 3
    return speed, tangent, normal, kappa, False


def curve_samples(traj: Trajectory, curve: str = Z_CURVE) -> list[CurveSample]:
    """Per-sample geometry of the selected curve along a trajectory."""
    n = len(traj)
    if curve == Z_CURVE:
        kappa0 = traj.params["kappa0"]
        z = (kappa0 * traj.p + 1j * traj.q) / SQRT2
        zdot = (kappa0 * traj.pdot + 1j * traj.qdot) / SQRT2
        zddot = (kappa0 * traj.pddot + 1j * traj.qddot) / SQRT2
    elif curve == DUAL_CURVE:
        h = traj.hamiltonian
        d = traj.params.snapshot()
        fns = [h.dual_field_fns(order) for order in (0, 1, 2)]
        z = np.empty(n, dtype=complex)
        zdot = np.empty(n, dtype=complex)
        zddot = np.empty(n, dtype=complex)
        for i in range(n):
            qi, pi, ti = traj.q[i], traj.p[i], traj.t[i]
            vals = []
            for f_re, f_im in fns:
                vals.append(
                    complex(
                        complex(f_re(qi, pi, ti, d)).real,
                        complex(f_im(qi, pi, ti, d)).real,
                    )
                )
            z[i], zdot[i], zddot[i] = vals
    else:
        raise ValueError(f"unknown curve selector {curve!r}; use 'z' or 'z_dh'")

    speeds = np.abs(zdot)
    arclen = np.zeros(n)
    if n > 1:
        increments = 0.5 * (speeds[1:] + speeds[:-1]) * np.diff(traj.t)
        arclen[1:] = np.cumsum(increments)
    samples = []
    for i in range(n):
        speed, tangent, normal, kappa, singular = _sample(
            traj.t[i], complex(z[i]), complex(zdot[i]), complex(zddot[i])
        )
        samples.append(
            CurveSample(
                t=float(traj.t[i]), z=complex(z[i]), zdot=complex(zdot[i]),
                zddot=complex(zddot[i]), speed=speed, tangent=tangent,
                normal=normal, kappa=kappa, arclen=float(arclen[i]),
                singular=singular,
            )
        )
    return samples


def speed_derivative(sample: CurveSample) -> float:
    """d|zdot|/dt = Re[conj(zdot) zddot]/|zdot|."""
    if sample.singular:
        raise EvaluationError("stationary point: speed derivative undefined")
    return (sample.zdot.conjugate() * sample.zddot).real / sample.speed


def tangent_derivative(sample: CurveSample) -> complex:
    """dT/dt = zddot/|zdot| - zdot * (d|zdot|/dt)/|zdot|^2, all analytic."""
    if sample.singular:
        raise EvaluationError("stationary point: tangent undefined")
    ds = speed_derivative(sample)
    return sample.zddot / sample.speed - sample.zdot * ds / sample.speed ** 2


def frenet_residual(sample: CurveSample) -> float:
    """|d/dt(zdot/|zdot|) - i*kappa*zdot|, zero when the Frenet equation holds."""
    dT = tangent_derivative(sample)
    return abs(dT - 1j * sample.kappa * sample.zdot)


def frame_residuals(sample: CurveSample) -> tuple[float, float]:
    """Residuals of T_t = |zdot| kappa N and N_t = -|zdot| kappa T."""
    dT = tangent_derivative(sample)
    dN = 1j * dT
    res_t = abs(dT - sample.speed * sample.kappa * sample.normal)
    res_n = abs(dN + sample.speed * sample.kappa * sample.tangent)
    return res_t, res_n


def arc_length(samples: list[CurveSample]) -> float:
    """Composite Simpson of |zdot| dt over the sample times."""
    t = np.array([s.t for s in samples])
    speed = np.array([s.speed for s in samples])
    if len(samples) < 2:
        return 0.0
    return float(simpson(speed, x=t))


def curve_diameter(samples: list[CurveSample]) -> float:
    zs = np.array([s.z for s in samples])
    return float(
        math.hypot(
            zs.real.max() - zs.real.min(),
            zs.imag.max() - zs.imag.min(),
        )
    )


def is_closed(samples: list[CurveSample], rtol: float = CLOSURE_RTOL) -> bool:
    gap = abs(samples[-1].z - samples[0].z)
    return gap <= rtol * max(1.0, curve_diameter(samples))


def enclosed_area(samples: list[CurveSample], rtol: float = CLOSURE_RTOL) -> float:
    """|1/2 closed-integral Im[conj(z) dz]|, Simpson over Im[conj(z) zdot] dt."""
    if len(samples) < 3:
        raise OpenCurveError("need at least three samples of a closed curve")
    if not is_closed(samples, rtol):
        gap = abs(samples[-1].z - samples[0].z)
        raise OpenCurveError(f"curve is not closed (endpoint gap {gap:.3e})")
    t = np.array([s.t for s in samples])
    integrand = np.array([(s.z.conjugate() * s.zdot).imag for s in samples])
    return abs(float(simpson(integrand, x=t))) / 2.0


def phase_plane_area(traj: Trajectory) -> float:
    """Area swept in the (q, p) plane: |1/2 integral (q pdot - p qdot) dt|."""
    integrand = traj.q * traj.pdot - traj.p * traj.qdot
    return abs(float(simpson(integrand, x=traj.t))) / 2.0


def kappa_extrema(samples: list[CurveSample]) -> tuple[float, float]:
    """(kappa_min, kappa_max) over non-singular samples.

    Extremal samples are refined by a local quadratic fit in t, which is
    exact for the parabolic top of a smooth extremum.
    """
    ts = [s.t for s in samples if not s.singular]
    ks = [s.kappa for s in samples if not s.singular]
    if not ks:
        raise EvaluationError("no non-singular samples")
    ks = np.array(ks)
    ts = np.array(ts)

    def refine(idx: int) -> float:
        if idx == 0 or idx == len(ks) - 1:
            return float(ks[idx])
        t0, t1, t2 = ts[idx - 1], ts[idx], ts[idx + 1]
        k0, k1, k2 = ks[idx - 1], ks[idx], ks[idx + 1]
        denom = (t1 - t0) * (t2 - t1) * (t2 - t0)
        if denom == 0:
            return float(k1)
        a = (k2 * (t1 - t0) - k1 * (t2 - t0) + k0 * (t2 - t1)) / denom
        b = (
            k1 * (t2 - t0) * (t2 + t0)
            - k2 * (t1 - t0) * (t1 + t0)
            - k0 * (t2 - t1) * (t2 + t1)
        ) / denom
        if a == 0:
            return float(k1)
        t_star = -b / (2 * a)
        if not (min(t0, t2) <= t_star <= max(t0, t2)):
            return float(k1)
        c = k1 - a * t1 * t1 - b * t1
        return float(a * t_star * t_star + b * t_star + c)

    return refine(int(np.argmin(ks))), refine(int(np.argmax(ks)))


@dataclass(frozen=True)
class BoundsCheck:
    """Outcome of the convex closed-curve length/area bounds."""

    length_ok: bool
    area_ok: bool
    printed_length_ok: bool
    printed_area_ok: bool
    tight: bool
    length: float
    area: float
    kappa_min: float
    kappa_max: float

    @property
    def passed(self) -> bool:
        return self.length_ok and self.area_ok


def bounds_check(ell: float, area: float, kappa_min: float, kappa_max: float,
                 tight_rtol: float = 1e-6) -> BoundsCheck:
    """Check 2*pi/kappa_max <= ell <= 2*pi/kappa_min and the area analogue.

    The bound ordering used here is the one circles and ellipses actually
    satisfy; the transposed ordering (minimum curvature on the left) is
    evaluated alongside for the record, since it fails on eccentric
    ellipses.  Curvature extrema are taken in magnitude: a convex curve has
    single-signed curvature and orientation only flips that sign.
    """
    k_lo, k_hi = abs(kappa_min), abs(kappa_max)
    if k_lo > k_hi:
        k_lo, k_hi = k_hi, k_lo
    if k_lo <= 0.0:
        raise NonConvexCurveError("curve has vanishing curvature; bounds undefined")
    two_pi = 2.0 * math.pi
    slack = 1e-12 * max(1.0, ell)
    length_ok = (two_pi / k_hi - slack) <= ell <= (two_pi / k_lo + slack)
    area_slack = 1e-12 * max(1.0, area)
    area_ok = (math.pi / k_hi ** 2 - area_slack) <= area <= (math.pi / k_lo ** 2 + area_slack)
    printed_length_ok = (two_pi / k_lo - slack) <= ell <= (two_pi / k_hi + slack)
    printed_area_ok = (math.pi / k_lo ** 2 - area_slack) <= area <= (math.pi / k_hi ** 2 + area_slack)
    tight = (
        abs(ell - two_pi / k_hi) <= tight_rtol * ell
        and abs(ell - two_pi / k_lo) <= tight_rtol * ell
        and abs(area - math.pi / k_hi ** 2) <= tight_rtol * area
    )
    return BoundsCheck(
        length_ok=length_ok, area_ok=area_ok,
        printed_length_ok=printed_length_ok, printed_area_ok=printed_area_ok,
        tight=tight, length=ell, area=area, kappa_min=k_lo, kappa_max=k_hi,
    )


def convexity_sign(samples: list[CurveSample]) -> int:
    """+1/-1 when curvature is single-signed, else raises."""
    ks = [s.kappa for s in samples if not s.singular and s.kappa is not None]
    if not ks:
        raise NonConvexCurveError("no usable curvature samples")
    k_scale = max(abs(k) for k in ks)
    if k_scale == 0.0:
        raise NonConvexCurveError("curvature vanishes identically")
    signs = {1 if k > 0 else -1 for k in ks if abs(k) > 1e-12 * k_scale}
    if len(signs) != 1:
        raise NonConvexCurveError("curvature changes sign; curve is not convex")
    return signs.pop()


def energy_symplectic(h: Hamiltonian, s: PhaseState, params) -> float:
    """Energy from the symplectic product of dual-field flow derivatives.

    E = Omega(d/dt z_dHH, d^2/dt^2 z_dHH) / (kappa0 * omega^2), with the
    derivatives taken symbolically along the flow.
    """
    w = params["omega"]
    if w == 0.0:
        raise EvaluationError("omega = 0: symplectic energy recipe undefined")
    d = params.snapshot()
    f1_re, f1_im = h.dual_field_fns(1)
    f2_re, f2_im = h.dual_field_fns(2)
    z1 = complex(complex(f1_re(s.q, s.p, s.t, d)).real,
                 complex(f1_im(s.q, s.p, s.t, d)).real)
    z2 = complex(complex(f2_re(s.q, s.p, s.t, d)).real,
                 complex(f2_im(s.q, s.p, s.t, d)).real)
    omega_val = -(z1 * z2.conjugate()).imag
    return omega_val / (d["kappa0"] * w * w)


def curvature_energy_residual(sample: CurveSample, energy: float, params) -> float:
    """Relative residual of kappa = kappa0 * E / |zdot|^3 on a dual-field sample."""
    if sample.singular:
        raise EvaluationError("stationary point: curvature undefined")
    predicted = params["kappa0"] * energy / sample.speed ** 3
    scale = max(abs(sample.kappa), abs(predicted), 1e-300)
    return abs(sample.kappa - predicted) / scale


def taylor_predict(sample: CurveSample, delta: float) -> complex:
    """Second-order position prediction along the curve.

    z(t0) + d*|zdot|T + (d^2/2)[(d|zdot|/dt) T + |zdot|^2 kappa N]; the
    quadratic normal component is the curve's acceleration decomposition,
    so the error is O(delta^3).
    """
    if delta == 0.0:
        return sample.z
    if sample.singular:
        raise EvaluationError("stationary point: tangent frame undefined")
    ds = speed_derivative(sample)
    quad = ds * sample.tangent + sample.speed ** 2 * sample.kappa * sample.normal
    return sample.z + delta * sample.speed * sample.tangent + 0.5 * delta * delta * quad


@dataclass(frozen=True)
class GeometryReport:
    """Aggregate geometry of one trajectory curve."""

    curve: str
    n_samples: int
    singular_count: int
    closed: bool
    length: float
    area: float | None
    area_phase_plane: float
    period: float | None
    kappa_min: float | None
    kappa_max: float | None
    energy_classical: float
    energy_symplectic: float | None
    bounds: BoundsCheck | None
    bounds_skip_reason: str | None
    kappa_length_product: float | None
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def energy_area_ratio(self) -> float | None:
        if self.period and self.area_phase_plane is not None:
            return self.area_phase_plane / self.period
        return None


def geometry_report(traj: Trajectory, curve: str = Z_CURVE,
                    period: float | None = None) -> GeometryReport:
    """Build the aggregate report for a trajectory curve.

    Open curves get a documented non-value for the area and skip the
    bounds; the report never raises for geometric degeneracy.
    """
    samples = curve_samples(traj, curve)
    singular = sum(1 for s in samples if s.singular)
    closed = len(samples) >= 3 and is_closed(samples)
    ell = arc_length(samples)
    notes = []
    area = None
    if closed:
        area = enclosed_area(samples)
    else:
        notes.append("open curve: enclosed area skipped")
    area_qp = phase_plane_area(traj)
    usable = [s for s in samples if not s.singular]
    kappa_min = kappa_max = None
    if usable:
        kappa_min, kappa_max = kappa_extrema(samples)
    bounds = None
    skip = None
    if closed and kappa_min is not None and area is not None:
        try:
            convexity_sign(samples)
            bounds = bounds_check(ell, area, kappa_min, kappa_max)
        except NonConvexCurveError as exc:
            skip = str(exc)
    else:
        skip = "not a closed curve" if not closed else "no curvature data"
    kappa_ell = None
    if kappa_min is not None and kappa_max is not None and kappa_max != 0:
        if abs(kappa_max - kappa_min) <= 1e-6 * max(abs(kappa_max), abs(kappa_min)):
            kappa_ell = abs(kappa_max + kappa_min) / 2.0 * ell
    s0 = traj.state(0)
    energy_classical = canon.energy_value(traj.hamiltonian, s0, traj.params)
    try:
        e_symp = energy_symplectic(traj.hamiltonian, s0, traj.params)
    except EvaluationError:
        e_symp = None
    if period is None:
        period = traj.t_end - traj.t0 if closed else None
    return GeometryReport(
        curve=curve, n_samples=len(samples), singular_count=singular,
        closed=closed, length=ell, area=area, area_phase_plane=area_qp,
        period=period, kappa_min=kappa_min, kappa_max=kappa_max,
        energy_classical=energy_classical, energy_symplectic=e_symp,
        bounds=bounds, bounds_skip_reason=skip,
        kappa_length_product=kappa_ell, notes=tuple(notes),
    )
