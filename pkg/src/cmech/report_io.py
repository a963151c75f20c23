"""Deterministic CSV and key-value report emission.

Reports are flat ``key: value`` lines with dotted nesting and a leading
``schema: 1``; floats carry 17 significant digits so reruns diff cleanly.
"""

from __future__ import annotations

import io
from typing import Mapping

from . import canon, curvegeo
from .odeint import Trajectory

SCHEMA_VERSION = 1

CSV_COLUMNS = ("t", "q", "p", "re_z", "im_z", "qdot", "pdot", "kappa", "arclen", "energy")


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, complex):
        return f"{format_float(v.real)}{'+' if v.imag >= 0 else '-'}{format_float(abs(v.imag))}j"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def render_report(entries: Mapping[str, object]) -> str:
    out = io.StringIO()
    out.write(f"schema: {SCHEMA_VERSION}\n")
    for key, value in entries.items():
        out.write(f"{key}: {format_value(value)}\n")
    return out.getvalue()


def parse_report(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition(":")
        entries[key.strip()] = value.strip()
    return entries


def trajectory_csv(traj: Trajectory, curve: str = curvegeo.Z_CURVE) -> str:
    """Render the trajectory as CSV with per-sample geometric columns."""
    samples = curvegeo.curve_samples(traj, curve)
    d = traj.params.snapshot()
    f_energy = traj.hamiltonian._f_energy
    lines = [",".join(CSV_COLUMNS)]
    for i, s in enumerate(samples):
        energy = complex(f_energy(traj.q[i], traj.p[i], traj.t[i], d)).real
        kappa = s.kappa if s.kappa is not None else float("nan")
        row = (
            traj.t[i], traj.q[i], traj.p[i], s.z.real, s.z.imag,
            traj.qdot[i], traj.pdot[i], kappa, s.arclen, energy,
        )
        lines.append(",".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"
