"""Forgeable messages and forgery attacks.

A message M0 is forgeable under attack Q when every key maps Q onto the same
state up to phase, R_j^dag W^dag sigma_k^dag Q sigma_k W R_j M0 ~ U M0, so the
receiver can swap (M0, S) for (U M0, Q S) without failing verification.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .aqs import KeyPair, RotationFamily, SchemeConfig
from .qcore import (
    ANALYTIC_TOL,
    adjoint,
    as_unitary,
    basis,
    eig_unitary,
    identity,
    normalize,
    orthogonal,
    pauli,
    states_equal_up_to_phase,
    to_pauli_coeffs,
    unitaries_equal_up_to_phase,
)

BETA_THRESHOLD = 1e-8
TABLE1_TOL = 1e-9


class AbcTriple(NamedTuple):
    alpha: float
    beta: float
    gamma: float


@dataclass
class ForgeryWitness:
    message: np.ndarray
    attack: np.ndarray
    replacement: np.ndarray
    phases: dict[KeyPair, float] = field(default_factory=dict)
    residual: float = 0.0
    alternate: np.ndarray | None = None


@dataclass
class UniformForgeryResult:
    exists: bool
    replacement: np.ndarray | None = None
    residual: float = math.inf


@dataclass
class Table1Classification:
    forging_paulis: list[int]
    satisfied_conditions: list[tuple[int, int]]
    residuals: dict[tuple[int, int], tuple[float, float]]


def abc(assistant) -> AbcTriple:
    w0, w1, w2, w3 = to_pauli_coeffs(assistant)
    return AbcTriple(
        alpha=w0 * w0 + w1 * w1 - 0.5,
        beta=w0 * w2 + w1 * w3,
        gamma=w0 * w3 - w1 * w2,
    )


def conjugated_attack(scheme: SchemeConfig, attack, key) -> np.ndarray:
    """R_j^dag W^dag sigma_k^dag Q sigma_k W R_j for one key."""
    op = scheme.signing_operator(key)
    return adjoint(op) @ attack @ op


def _complete_unitary(m: np.ndarray, image: np.ndarray) -> np.ndarray:
    # |image><m| + |image_perp><m_perp|, zero relative phase on the complement
    return np.outer(image, m.conj()) + np.outer(orthogonal(image), orthogonal(m).conj())


def _key_phases(scheme, attack, m, target, tol):
    phases = {}
    worst = 0.0
    for key in scheme.keys():
        match = states_equal_up_to_phase(conjugated_attack(scheme, attack, key) @ m, target, tol)
        worst = max(worst, match.residual)
        if not match:
            return None, worst
        phases[key] = match.theta
    return phases, worst


def check_forgeable(scheme: SchemeConfig, m, attack, tol: float = ANALYTIC_TOL) -> ForgeryWitness | None:
    """Witness if ``attack`` forges message ``m`` under every key, else None.

    The replacement U maps m onto the key (first rotation, k=0) image and the
    orthogonal complement of m onto that of the image.
    """
    m = normalize(m)
    attack = as_unitary(attack)
    if unitaries_equal_up_to_phase(attack, identity(), tol):
        return None
    first = next(scheme.keys())
    target = conjugated_attack(scheme, attack, first) @ m
    phases, worst = _key_phases(scheme, attack, m, target, tol)
    if phases is None:
        return None
    return ForgeryWitness(
        message=m,
        attack=attack,
        replacement=_complete_unitary(m, target),
        phases=phases,
        residual=worst,
    )


def certify(scheme: SchemeConfig, witness: ForgeryWitness, tol: float = ANALYTIC_TOL) -> ForgeryWitness | None:
    """Recompute the per-key phases of a witness against its own U.

    Returns the witness with refreshed phases, or None if any key fails or
    the attack is phase-equivalent to the identity.
    """
    if unitaries_equal_up_to_phase(witness.attack, identity(), tol):
        return None
    target = witness.replacement @ witness.message
    phases, worst = _key_phases(scheme, witness.attack, witness.message, target, tol)
    if phases is None:
        return None
    witness.phases, witness.residual = phases, worst
    return witness


def key_residuals(scheme: SchemeConfig, witness: ForgeryWitness) -> dict[KeyPair, float]:
    """Per-key distance between the attacked state and exp(i*theta) U M0."""
    target = witness.replacement @ witness.message
    out = {}
    for key in scheme.keys():
        got = conjugated_attack(scheme, witness.attack, key) @ witness.message
        theta = witness.phases.get(key)
        if theta is None:
            theta = float(np.angle(np.vdot(target, got)))
        out[key] = float(np.max(np.abs(got - np.exp(1j * theta) * target)))
    return out


def _mu(a: AbcTriple) -> float:
    s = math.hypot(a.alpha, a.beta)
    # (alpha + s)/beta == beta/(s - alpha); pick the form without cancellation
    if a.alpha >= 0:
        return (a.alpha + s) / a.beta
    return a.beta / (s - a.alpha)


def construct_witness(assistant, tol: float = ANALYTIC_TOL) -> ForgeryWitness:
    """Closed-form forgeable message for the biased {X, Z} rotation scheme.

    Near beta = 0 the |0> branch is tried first and the general branch is used
    if it fails certification.
    """
    w = as_unitary(assistant)
    scheme = SchemeConfig(RotationFamily.BIASED_Z2, w)
    x = pauli(1)
    a = abc(w)
    if abs(a.beta) < BETA_THRESHOLD:
        u = x @ adjoint(w) @ x @ w @ x
        # |0> is only approximately forgeable for beta != 0; demand a margin
        strict = tol if a.beta == 0 else tol * 1e-3
        witness = certify(scheme, ForgeryWitness(basis(0), x, u), strict)
        if witness is not None:
            return witness
        if a.beta == 0:
            raise ArithmeticError("beta = 0 witness failed certification")
    mu = _mu(a)
    m0 = np.array([mu, 1.0], dtype=complex) / math.sqrt(mu * mu + 1)
    alpha, beta, gamma = a
    u = 2 * np.array([[-beta, alpha + 1j * gamma], [alpha - 1j * gamma, beta]])
    alt = 2 * np.array([[beta, -alpha + 1j * gamma], [-alpha - 1j * gamma, -beta]])
    witness = certify(scheme, ForgeryWitness(m0, x, u, alternate=alt), tol)
    if witness is None:
        raise ArithmeticError(f"witness failed certification for abc={tuple(a)}")
    return witness


def witness_via_eigenstate(assistant, l: int = 1, which: int = 0, tol: float = ANALYTIC_TOL) -> ForgeryWitness:
    """Forgeable message as an eigenvector of (Z A Z)^dag (X A X), A = W^dag sigma_l W."""
    if l not in (1, 2, 3):
        raise ValueError("attack Pauli index must be 1, 2 or 3")
    w = as_unitary(assistant)
    scheme = SchemeConfig(RotationFamily.BIASED_Z2, w)
    x, z, q = pauli(1), pauli(3), pauli(l)
    inner = adjoint(w) @ q @ w
    via_x = x @ inner @ x
    via_z = z @ inner @ z
    _, m0 = eig_unitary(adjoint(via_z) @ via_x)[which]
    witness = certify(scheme, ForgeryWitness(m0, q, via_x), tol)
    if witness is None:
        raise ArithmeticError("eigenstate witness failed certification")
    return witness


def uniform_forgery(scheme: SchemeConfig, attack, tol: float = ANALYTIC_TOL) -> UniformForgeryResult:
    """Does one U satisfy R_j^dag W^dag sigma_k Q sigma_k W R_j ~ U for every key?"""
    attack = as_unitary(attack)
    ops = [conjugated_attack(scheme, attack, key) for key in scheme.keys()]
    worst = 0.0
    for op in ops[1:]:
        match = unitaries_equal_up_to_phase(op, ops[0], tol)
        worst = max(worst, match.residual)
        if not match:
            return UniformForgeryResult(False, None, worst)
    return UniformForgeryResult(True, ops[0], worst)


def table1_conditions(assistant) -> dict[int, tuple[float, float, float]]:
    """The three scalar expressions per Pauli attack whose pairwise vanishing
    makes every message forgeable under the unbiased rotation family."""
    w0, w1, w2, w3 = to_pauli_coeffs(assistant)
    return {
        1: (w0 * w0 + w1 * w1 - 0.5, w0 * w3 - w1 * w2, w0 * w2 + w1 * w3),
        2: (w0 * w0 + w2 * w2 - 0.5, w0 * w1 - w2 * w3, w0 * w3 + w1 * w2),
        3: (w0 * w0 + w3 * w3 - 0.5, w0 * w2 - w1 * w3, w0 * w1 + w2 * w3),
    }


# condition-pair id -> indices into the three expressions, in table row order
TABLE1_PAIRS = {1: (0, 1), 2: (0, 2), 3: (1, 2)}


def classify_table1(assistant, tol: float = TABLE1_TOL) -> Table1Classification:
    exprs = table1_conditions(assistant)
    satisfied, residuals, forging = [], {}, []
    for l, e in exprs.items():
        for pid, (a, b) in TABLE1_PAIRS.items():
            residuals[(l, pid)] = (abs(e[a]), abs(e[b]))
            if abs(e[a]) <= tol and abs(e[b]) <= tol:
                satisfied.append((l, pid))
        if any(s[0] == l for s in satisfied):
            forging.append(l)
    return Table1Classification(forging, satisfied, residuals)


def _c(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _from_c(pair) -> complex:
    return complex(pair[0], pair[1])


def witness_to_dict(w: ForgeryWitness) -> dict:
    doc = {
        "message": [_c(a) for a in w.message],
        "attack": [[_c(x) for x in row] for row in w.attack],
        "replacement": [[_c(x) for x in row] for row in w.replacement],
        "phases": {KeyPair(*k).label(): float(v) for k, v in w.phases.items()},
        "residual": float(w.residual),
    }
    if w.alternate is not None:
        doc["alternate"] = [[_c(x) for x in row] for row in w.alternate]
    return doc


def witness_from_dict(doc: dict) -> ForgeryWitness:
    def mat(rows):
        return np.array([[_from_c(x) for x in row] for row in rows])

    phases = {}
    for label, theta in doc["phases"].items():
        j, k = (int(t) for t in label.split(","))
        phases[KeyPair(j, k)] = float(theta)
    return ForgeryWitness(
        message=np.array([_from_c(a) for a in doc["message"]]),
        attack=mat(doc["attack"]),
        replacement=mat(doc["replacement"]),
        phases=phases,
        residual=float(doc.get("residual", 0.0)),
        alternate=mat(doc["alternate"]) if "alternate" in doc else None,
    )
