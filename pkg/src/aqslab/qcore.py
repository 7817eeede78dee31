"""Single-qubit linear algebra.

States are length-2 complex numpy arrays, operators are 2x2 complex arrays.
Every operator can be written, up to global phase, as

    w0*I + i*w1*X - i*w2*Y + i*w3*Z

with a real unit vector ``w``; :func:`to_pauli_coeffs` returns that vector in a
canonical sign (w0 >= 0, and if w0 == 0 the first nonzero of w1..w3 positive).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

ANALYTIC_TOL = 1e-9
OPTIMIZER_TOL = 1e-6
UNITARY_TOL = 1e-10
ZERO_COEFF_TOL = 1e-10
DEGENERATE_GAP = 1e-10

_PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
_PAULI.setflags(write=False)

# Signs of the i*w_l terms in the coefficient form: +X, -Y, +Z.
_FORM_SIGNS = np.array([1.0, 1.0, -1.0, 1.0])


class QubitError(ValueError):
    """Invalid state, operator, or coefficient vector."""


class PauliCoeffs(NamedTuple):
    w0: float
    w1: float
    w2: float
    w3: float


class BlochPoint(NamedTuple):
    theta: float
    phi: float


@dataclass(frozen=True)
class PhaseMatch:
    """Outcome of an equality-up-to-global-phase test.

    ``theta`` is the phase with ``x = exp(i*theta) * y``; it is ``None``
    when the inputs do not match.
    """

    matched: bool
    theta: float | None = None
    residual: float = math.inf

    def __bool__(self) -> bool:
        return self.matched


def pauli(k: int) -> np.ndarray:
    if k not in (0, 1, 2, 3):
        raise QubitError(f"Pauli index must be in 0..3, got {k!r}")
    return _PAULI[k].copy()


def identity() -> np.ndarray:
    return pauli(0)


def state(a0, a1) -> np.ndarray:
    """Normalized qubit state from two amplitudes."""
    v = np.array([a0, a1], dtype=complex)
    return normalize(v)


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (2,) or not np.all(np.isfinite(v)):
        raise QubitError(f"qubit state must be 2 finite amplitudes, got {v!r}")
    n = np.linalg.norm(v)
    if n == 0:
        raise QubitError("zero vector is not a state")
    return v / n


def basis(c: int) -> np.ndarray:
    v = np.zeros(2, dtype=complex)
    v[c] = 1.0
    return v


def bloch_state(theta: float, phi: float) -> np.ndarray:
    """cos(theta/2)|0> + exp(i*phi) sin(theta/2)|1>."""
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


def to_bloch(v) -> BlochPoint:
    v = normalize(v)
    theta = 2 * math.atan2(abs(v[1]), abs(v[0]))
    if abs(v[0]) < 1e-15 or abs(v[1]) < 1e-15:
        return BlochPoint(theta, 0.0)
    phi = float(np.angle(v[1] / v[0])) % (2 * math.pi)
    return BlochPoint(theta, phi)


def orthogonal(v) -> np.ndarray:
    """The state orthogonal to ``v`` with the fixed convention (-v1*, v0*)."""
    v = np.asarray(v, dtype=complex)
    return np.array([-np.conj(v[1]), np.conj(v[0])])


def as_unitary(m, tol: float = UNITARY_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2) or not np.all(np.isfinite(m)):
        raise QubitError(f"expected a finite 2x2 matrix, got shape {m.shape}")
    err = np.max(np.abs(m.conj().T @ m - np.eye(2)))
    if err > tol:
        raise QubitError(f"matrix is not unitary (max |U^dag U - I| = {err:.3g})")
    return m


def compose(*ops) -> np.ndarray:
    """Matrix product, left to right as written."""
    out = np.eye(2, dtype=complex)
    for op in ops:
        out = out @ op
    return out


def adjoint(a) -> np.ndarray:
    return np.asarray(a).conj().T


def apply(a, s) -> np.ndarray:
    return np.asarray(a) @ np.asarray(s)


def _wrap(theta: float) -> float:
    # angle() gives [-pi, pi]; fold -pi onto pi
    return math.pi if theta <= -math.pi else theta


def _phase_match(x: np.ndarray, y: np.ndarray, tol: float) -> PhaseMatch:
    if tol <= 0:
        raise ValueError("tol must be positive")
    i = int(np.argmax(np.abs(y)))
    if abs(y.flat[i]) == 0:
        same = float(np.max(np.abs(x)))
        return PhaseMatch(same <= tol, 0.0 if same <= tol else None, same)
    theta = _wrap(float(np.angle(x.flat[i] * np.conj(y.flat[i]))))
    residual = float(np.max(np.abs(x - np.exp(1j * theta) * y)))
    if residual <= tol:
        return PhaseMatch(True, theta, residual)
    return PhaseMatch(False, None, residual)


def states_equal_up_to_phase(x, y, tol: float = ANALYTIC_TOL) -> PhaseMatch:
    return _phase_match(np.asarray(x, complex), np.asarray(y, complex), tol)


def unitaries_equal_up_to_phase(a, b, tol: float = ANALYTIC_TOL) -> PhaseMatch:
    return _phase_match(np.asarray(a, complex), np.asarray(b, complex), tol)


def canonical_sign(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    lead = w[0] if abs(w[0]) > ZERO_COEFF_TOL else next(
        (c for c in w[1:] if abs(c) > ZERO_COEFF_TOL), 1.0
    )
    w = -w if lead < 0 else w.copy()
    # a sub-threshold w0 may still carry the wrong sign
    w[0] = max(w[0], 0.0)
    return w


def to_pauli_coeffs(u) -> PauliCoeffs:
    """Canonical real coefficients of ``u`` up to global phase."""
    u = as_unitary(u)
    # complex Pauli components c_l = tr(sigma_l u)/2, then undo the i and sign
    c = np.einsum("lij,ji->l", _PAULI, u) / 2
    v = c * np.array([1, -1j, -1j, -1j]) * _FORM_SIGNS
    ref = v[int(np.argmax(np.abs(v)))]
    w = (v * np.conj(ref) / abs(ref)).real
    w = w / np.linalg.norm(w)
    return PauliCoeffs(*(float(x) for x in canonical_sign(w)))


def from_pauli_coeffs(c) -> np.ndarray:
    """w0*I + i*w1*X - i*w2*Y + i*w3*Z."""
    w = np.asarray(c, dtype=float)
    if w.shape != (4,) or not np.all(np.isfinite(w)):
        raise QubitError(f"expected 4 finite coefficients, got {c!r}")
    if abs(float(w @ w) - 1.0) > 1e-8:
        raise QubitError(f"coefficients not normalized: |w|^2 = {float(w @ w):.12g}")
    return (
        w[0] * _PAULI[0]
        + 1j * w[1] * _PAULI[1]
        - 1j * w[2] * _PAULI[2]
        + 1j * w[3] * _PAULI[3]
    )


def eig_unitary(u) -> list[tuple[complex, np.ndarray]]:
    """Closed-form eigenpairs of a 2x2 unitary.

    Eigenvalues come from the characteristic polynomial. The first
    eigenvector is read off a row of ``u - lambda*I``; the second is its
    orthogonal complement, which is exact for normal matrices.
    """
    u = as_unitary(u)
    half_tr = (u[0, 0] + u[1, 1]) / 2
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    disc = np.sqrt(half_tr * half_tr - det)
    lam1, lam2 = half_tr + disc, half_tr - disc
    if abs(lam1 - lam2) < DEGENERATE_GAP:
        lam = complex(half_tr / abs(half_tr)) if half_tr != 0 else complex(lam1)
        return [(lam, basis(0)), (lam, basis(1))]
    cand_a = np.array([u[0, 1], lam1 - u[0, 0]])
    cand_b = np.array([lam1 - u[1, 1], u[1, 0]])
    v1 = cand_a if np.linalg.norm(cand_a) >= np.linalg.norm(cand_b) else cand_b
    v1 = v1 / np.linalg.norm(v1)
    v2 = orthogonal(v1)
    # Rayleigh quotients are the best eigenvalue estimates for these vectors
    pairs = []
    for v in (v1, v2):
        lam = complex(np.vdot(v, u @ v))
        pairs.append((lam / abs(lam), v))
    return pairs


def coeff_distance(a, b) -> float:
    """Sum of absolute differences of canonical Pauli coefficients."""
    wa = np.array(to_pauli_coeffs(a))
    wb = np.array(to_pauli_coeffs(b))
    return float(np.sum(np.abs(wa - wb)))


def distance_from_identity(c) -> float:
    w = np.asarray(c, dtype=float)
    return float(abs(1.0 - w[0]) + np.sum(np.abs(w[1:])))


def haar_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary (QR of a Ginibre matrix with phase fix)."""
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_state(rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return z / np.linalg.norm(z)
