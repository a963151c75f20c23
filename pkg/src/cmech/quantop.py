"""Affine operator algebra over the canonical pair with [q, p] = i*hbar.

Quantization here is commutator bookkeeping: the dual field of an at most
quadratic Hamiltonian is affine in (q, p), so promoting it yields operators
c_q*q + c_p*p + c_1 whose commutators are scalars.  Flow derivatives of
operators are transported by the linearized dynamics.  An independent
term-rewriting oracle (the single rule q p = p q + i*hbar) cross-checks
every commutator the closed-form engine produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hamexpr
from .canon import Hamiltonian, PhaseState
from .errors import EvaluationError, NonlinearityError
from .hamexpr import Const, Expression, Param, ParamSet, Var
from .scenarios import ATTENUATED, HARMONIC, IMAGINARY, Scenario

_PROBES = [(0.613, -1.097), (-0.884, 0.352), (1.258, 0.741), (-0.301, -1.532)]


@dataclass(frozen=True)
class LinOp:
    """Affine operator c_q*q + c_p*p + c_1."""

    cq: complex
    cp: complex
    c1: complex = 0j

    def dagger(self) -> "LinOp":
        """Hermitian conjugate: q and p are hermitian, so conjugate coefficients."""
        return LinOp(
            complex(self.cq).conjugate(),
            complex(self.cp).conjugate(),
            complex(self.c1).conjugate(),
        )

    def __add__(self, other: "LinOp") -> "LinOp":
        return LinOp(self.cq + other.cq, self.cp + other.cp, self.c1 + other.c1)

    def __sub__(self, other: "LinOp") -> "LinOp":
        return LinOp(self.cq - other.cq, self.cp - other.cp, self.c1 - other.c1)

    def scale(self, factor: complex) -> "LinOp":
        return LinOp(factor * self.cq, factor * self.cp, factor * self.c1)

    def symbol(self) -> Expression:
        """The classical observable this operator was promoted from."""
        return (
            Const(complex(self.cq)) * Var("q")
            + Const(complex(self.cp)) * Var("p")
            + Const(complex(self.c1))
        )


ZERO_OP = LinOp(0j, 0j, 0j)


def commutator(a: LinOp, b: LinOp, hbar: float) -> complex:
    """[A, B]: a scalar multiple of the identity, returned as that scalar."""
    return (a.cq * b.cp - a.cp * b.cq) * 1j * hbar


# ---------------------------------------------------------------------------
# Independent oracle: formal words in q, p reduced by q p -> p q + i*hbar
# ---------------------------------------------------------------------------

def _word_multiply(wa: dict, wb: dict) -> dict:
    out: dict = {}
    for word_a, ca in wa.items():
        for word_b, cb in wb.items():
            word = word_a + word_b
            out[word] = out.get(word, 0j) + ca * cb
    return out


def _normal_order(words: dict, hbar: float) -> dict:
    """Rewrite until every word has all p letters before q letters."""
    pending = dict(words)
    done: dict = {}
    while pending:
        word, coeff = pending.popitem()
        if coeff == 0:
            continue
        swap = None
        for i in range(len(word) - 1):
            if word[i] == "q" and word[i + 1] == "p":
                swap = i
                break
        if swap is None:
            done[word] = done.get(word, 0j) + coeff
            continue
        swapped = word[:swap] + ("p", "q") + word[swap + 2:]
        reduced = word[:swap] + word[swap + 2:]
        pending[swapped] = pending.get(swapped, 0j) + coeff
        pending[reduced] = pending.get(reduced, 0j) + coeff * 1j * hbar
    return done


def _linop_words(a: LinOp) -> dict:
    words: dict = {}
    if a.cq != 0:
        words[("q",)] = a.cq
    if a.cp != 0:
        words[("p",)] = words.get(("p",), 0j) + a.cp
    if a.c1 != 0:
        words[()] = a.c1
    return words


def commutator_oracle(a: LinOp, b: LinOp, hbar: float) -> complex:
    """[A, B] by brute-force word expansion and term-by-term rewriting."""
    wa, wb = _linop_words(a), _linop_words(b)
    ab = _normal_order(_word_multiply(wa, wb), hbar)
    ba = _normal_order(_word_multiply(wb, wa), hbar)
    diff: dict = dict(ab)
    for word, coeff in ba.items():
        diff[word] = diff.get(word, 0j) - coeff
    scalar = 0j
    for word, coeff in diff.items():
        if word == ():
            scalar += coeff
        elif abs(coeff) > 1e-13 * (1.0 + abs(scalar)):
            raise EvaluationError(
                f"commutator of affine operators left a non-scalar word {word}"
            )
    return scalar


# ---------------------------------------------------------------------------
# Linearized dynamics and operator transport
# ---------------------------------------------------------------------------

def _constancy_check(expr: Expression, d: dict, what: str):
    """The expression must be (q,p,t)-independent: a genuine constant field."""
    for name in ("q", "p", "t"):
        partial = hamexpr.simplify(hamexpr.differentiate(expr, name))
        for q, p in _PROBES:
            v = complex(hamexpr.eval_at(partial, q, p, 0.17, d))
            if abs(v) > 1e-12:
                raise NonlinearityError(
                    f"{what} is not affine: nonlinear in {name}"
                    if name != "t"
                    else f"{what} is time dependent"
                )


@dataclass(frozen=True)
class LinearDynamics:
    """d/dt (q, p) = M (q, p) + b for an at most quadratic Hamiltonian."""

    matrix: np.ndarray
    shift: np.ndarray

    @classmethod
    def from_hamiltonian(cls, h: Hamiltonian, params) -> "LinearDynamics":
        d = params.snapshot() if isinstance(params, ParamSet) else dict(params)
        rows = []
        shift = []
        for expr, label in ((h.qdot_expr, "qdot"), (h.pdot_expr, "pdot")):
            _constancy_check(
                hamexpr.differentiate(expr, "q"), d, f"{label} gradient"
            )
            _constancy_check(
                hamexpr.differentiate(expr, "p"), d, f"{label} gradient"
            )
            dq = complex(hamexpr.eval_at(hamexpr.differentiate(expr, "q"), 0, 0, 0, d))
            dp = complex(hamexpr.eval_at(hamexpr.differentiate(expr, "p"), 0, 0, 0, d))
            c0 = complex(hamexpr.eval_at(expr, 0, 0, 0, d))
            rows.append([dq.real, dp.real])
            shift.append(c0.real)
        return cls(matrix=np.array(rows), shift=np.array(shift))

    def apply(self, q: float, p: float) -> tuple[float, float]:
        v = self.matrix @ np.array([q, p]) + self.shift
        return float(v[0]), float(v[1])


def flow_derivative(a: LinOp, dyn: LinearDynamics) -> LinOp:
    """Transport of coefficients along the linear flow: c -> M^T c.

    The constant picks up c . b from the affine shift.
    """
    m = dyn.matrix
    cq = m[0, 0] * a.cq + m[1, 0] * a.cp
    cp = m[0, 1] * a.cq + m[1, 1] * a.cp
    c1 = a.cq * dyn.shift[0] + a.cp * dyn.shift[1]
    return LinOp(cq, cp, c1)


def dual_field_operator(h: Hamiltonian, params) -> LinOp:
    """Promote the dual field to an operator; requires it affine in (q, p)."""
    d = params.snapshot() if isinstance(params, ParamSet) else dict(params)
    re_e, im_e = h.dual_field_exprs(0)
    expr_parts = (re_e, im_e)
    for part, label in zip(expr_parts, ("real part", "imaginary part")):
        for name in ("q", "p"):
            second = hamexpr.simplify(
                hamexpr.differentiate(hamexpr.differentiate(part, name), name)
            )
            cross = hamexpr.simplify(
                hamexpr.differentiate(hamexpr.differentiate(part, name), "p" if name == "q" else "q")
            )
            for probe_q, probe_p in _PROBES:
                if abs(complex(hamexpr.eval_at(second, probe_q, probe_p, 0.0, d))) > 1e-12:
                    raise NonlinearityError(
                        f"dual field {label} is not affine: nonlinear in {name}"
                    )
                if abs(complex(hamexpr.eval_at(cross, probe_q, probe_p, 0.0, d))) > 1e-12:
                    raise NonlinearityError(
                        f"dual field {label} is not affine: nonlinear in q*p"
                    )

    def coeff(var: str) -> complex:
        re_c = complex(hamexpr.eval_at(hamexpr.differentiate(re_e, var), 0, 0, 0, d))
        im_c = complex(hamexpr.eval_at(hamexpr.differentiate(im_e, var), 0, 0, 0, d))
        return complex(re_c.real, im_c.real)

    c1 = complex(
        complex(hamexpr.eval_at(re_e, 0, 0, 0, d)).real,
        complex(hamexpr.eval_at(im_e, 0, 0, 0, d)).real,
    )
    return LinOp(coeff("q"), coeff("p"), c1)


def constrain_to_line(a: LinOp, slope: float) -> LinOp:
    """Substitute p = slope*q, the on-shell relation of a straight phase ray."""
    return LinOp(a.cq + slope * a.cp, 0j, a.c1)


# ---------------------------------------------------------------------------
# Scenario commutator tables and energy recipes
# ---------------------------------------------------------------------------

COMMUTATOR_NAMES = ("zdag_z", "z_zdotdag", "zdotdag_zddot", "zdot_zddotdag")

COMMUTATOR_LEGEND = {
    "zdag_z": "[conj(a), a] for the dual-field operator a",
    "z_zdotdag": "[a, conj(da/dt)]",
    "zdotdag_zddot": "[conj(da/dt), d2a/dt2]",
    "zdot_zddotdag": "[da/dt, conj(d2a/dt2)]",
}


def _reference_commutator(name: str, entry: str, params) -> complex | None:
    """Closed forms stated for the worked scenarios, for delta reporting."""
    m, k, kappa0, hbar = params["m"], params["k"], params["kappa0"], params["hbar"]
    w2 = k / m
    bracket = 1.0 / m + kappa0 * kappa0 * k
    if name == HARMONIC:
        if entry == "zdag_z":
            return complex(kappa0 * hbar * w2)
        if entry == "z_zdotdag":
            return 1j * hbar * w2 / 2.0 * bracket
    elif name == IMAGINARY:
        alpha0 = params["alpha0"]
        if entry == "zdag_z":
            return complex(alpha0 ** 2 * kappa0 * hbar * w2)
        if entry == "zdotdag_zddot":
            return complex(alpha0 ** 5 * hbar * w2 * w2 / 2.0 * bracket)
    elif name == ATTENUATED:
        beta0 = params["beta0"]
        if entry == "zdag_z":
            return complex(kappa0 * hbar * w2)
        if entry == "zdot_zddotdag":
            real = -beta0 * hbar * w2 * (w2 / 2.0 + beta0 ** 2 / kappa0 ** 2)
            imag = hbar * (w2 * w2 / 2.0 * bracket + k * beta0 ** 4 / kappa0 ** 2)
            return complex(real, imag)
    return None


def reference_energy(name: str, params) -> float | None:
    m, k, kappa0, hbar = params["m"], params["k"], params["kappa0"], params["hbar"]
    w2 = k / m
    bracket = 1.0 / m + kappa0 * kappa0 * k
    base = hbar * w2 / (2.0 * kappa0) * bracket
    if name == HARMONIC:
        return base
    if name == IMAGINARY:
        return params["alpha0"] ** 5 * base
    if name == ATTENUATED:
        return base + hbar * k * params["beta0"] ** 4 / (w2 * kappa0 ** 3)
    return None


@dataclass(frozen=True)
class CommutatorEntry:
    name: str
    engine: complex
    oracle: complex
    reference: complex | None

    @property
    def reference_delta(self) -> complex | None:
        if self.reference is None:
            return None
        return self.engine - self.reference

    @property
    def oracle_delta(self) -> complex:
        return self.engine - self.oracle


def operator_chain(h: Hamiltonian, params) -> tuple[LinOp, LinOp, LinOp]:
    """(a, da/dt, d2a/dt2) for the dual-field operator under the linear flow."""
    base = dual_field_operator(h, params)
    dyn = LinearDynamics.from_hamiltonian(h, params)
    first = flow_derivative(base, dyn)
    second = flow_derivative(first, dyn)
    return base, first, second


def commutator_table(scenario: Scenario) -> list[CommutatorEntry]:
    """Engine, oracle, and stated closed-form values for the named commutators."""
    params = scenario.params
    hbar = params["hbar"]
    a0, a1, a2 = operator_chain(scenario.hamiltonian, params)
    pairs = {
        "zdag_z": (a0.dagger(), a0),
        "z_zdotdag": (a0, a1.dagger()),
        "zdotdag_zddot": (a1.dagger(), a2),
        "zdot_zddotdag": (a1, a2.dagger()),
    }
    entries = []
    for name in COMMUTATOR_NAMES:
        x, y = pairs[name]
        entries.append(
            CommutatorEntry(
                name=name,
                engine=commutator(x, y, hbar),
                oracle=commutator_oracle(x, y, hbar),
                reference=_reference_commutator(scenario.name, name, params),
            )
        )
    return entries


RECIPES = {
    HARMONIC: "first-derivative-magnitude",
    IMAGINARY: "second-derivative-real",
    ATTENUATED: "second-derivative-imaginary",
}


@dataclass(frozen=True)
class QuantumEnergy:
    value: float
    recipe: str
    reference: float | None

    @property
    def reference_delta(self) -> float | None:
        if self.reference is None:
            return None
        return self.value - self.reference


def quantum_energy(scenario: Scenario) -> QuantumEnergy:
    """Scenario-specific quantum of energy from derivative commutators.

    harmonic:   |[a, conj(da/dt)]| / kappa0
    imaginary:  [conj(da/dt), d2a/dt2] / (kappa0*omega^2)   (a real scalar)
    attenuated: Im[da/dt, conj(d2a/dt2)] / (kappa0*omega^2)
    """
    params = scenario.params
    kappa0 = params["kappa0"]
    hbar = params["hbar"]
    a0, a1, a2 = operator_chain(scenario.hamiltonian, params)
    if scenario.name == HARMONIC:
        value = abs(commutator(a0, a1.dagger(), hbar)) / kappa0
    elif scenario.name == IMAGINARY:
        w = params["omega"]
        if w == 0:
            raise EvaluationError("omega = 0: energy recipe undefined")
        c = commutator(a1.dagger(), a2, hbar)
        value = c.real / (kappa0 * w * w)
    elif scenario.name == ATTENUATED:
        w = params["omega"]
        if w == 0:
            raise EvaluationError("omega = 0: energy recipe undefined")
        c = commutator(a1, a2.dagger(), hbar)
        value = c.imag / (kappa0 * w * w)
    else:
        raise ValueError(f"no quantization recipe for scenario {scenario.name!r}")
    return QuantumEnergy(
        value=value,
        recipe=RECIPES[scenario.name],
        reference=reference_energy(scenario.name, params),
    )
