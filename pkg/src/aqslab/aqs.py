"""Arbitrated quantum signature schemes on a single qubit.

A scheme is a rotation family {R_j} together with an assistant unitary W.
The shared key (j, k) signs a message as S = sigma_k W R_j M, and a pair
(M', S') is valid under that key when M' equals R_j^dag W^dag sigma_k S'
up to global phase.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .qcore import (
    ANALYTIC_TOL,
    PhaseMatch,
    QubitError,
    adjoint,
    as_unitary,
    from_pauli_coeffs,
    haar_state,
    pauli,
    states_equal_up_to_phase,
)

__all__ = [
    "RotationFamily",
    "SchemeConfig",
    "KeyPair",
    "InvalidKeyError",
    "preset",
    "PRESETS",
    "sign",
    "recover",
    "verify_exact",
    "swap_test",
    "swap_pass_probability",
    "verify_sampled",
    "density_matrix",
    "random_density",
    "encryption_completeness",
    "rotation_completeness",
]


class InvalidKeyError(ValueError):
    pass


class RotationFamily(enum.Enum):
    BIASED_Z2 = "z2"
    UNBIASED_Z4 = "z4"

    @property
    def indices(self) -> tuple[int, ...]:
        return (0, 1) if self is RotationFamily.BIASED_Z2 else (0, 1, 2, 3)

    def rotation(self, j: int) -> np.ndarray:
        if j not in self.indices:
            raise InvalidKeyError(f"rotation index {j} not valid for {self.value}")
        if self is RotationFamily.BIASED_Z2:
            return pauli(1) if j == 0 else pauli(3)
        return pauli(j)


class KeyPair(NamedTuple):
    j: int
    k: int

    def label(self) -> str:
        return f"{self.j},{self.k}"


@dataclass(frozen=True, eq=False)
class SchemeConfig:
    rotations: RotationFamily
    assistant: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = as_unitary(self.assistant)
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "assistant", a)

    def keys(self) -> Iterator[KeyPair]:
        for j in self.rotations.indices:
            for k in range(4):
                yield KeyPair(j, k)

    def check_key(self, key) -> KeyPair:
        j, k = key
        if j not in self.rotations.indices or k not in (0, 1, 2, 3):
            raise InvalidKeyError(f"key ({j},{k}) invalid for {self.rotations.value} scheme")
        return KeyPair(j, k)

    def encryption(self, k: int) -> np.ndarray:
        return pauli(k) @ self.assistant

    def signing_operator(self, key) -> np.ndarray:
        j, k = self.check_key(key)
        return self.encryption(k) @ self.rotations.rotation(j)


_WA = np.array(
    [[1, np.exp(1j * math.pi / 4)], [np.exp(-1j * math.pi / 4), -1]], dtype=complex
) / math.sqrt(2)
_T = from_pauli_coeffs([0.0, *(3 * [1 / math.sqrt(3)])])

PRESETS = {
    "wa": _WA,
    "t": _T,
    "identity": np.eye(2, dtype=complex),
}


def preset(name: str) -> np.ndarray:
    try:
        return PRESETS[name.lower()].copy()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def sign(scheme: SchemeConfig, key, m) -> np.ndarray:
    return scheme.signing_operator(key) @ np.asarray(m, dtype=complex)


def recover(scheme: SchemeConfig, key, s) -> np.ndarray:
    """R_j^dag W^dag sigma_k^dag applied to a signature."""
    return adjoint(scheme.signing_operator(key)) @ np.asarray(s, dtype=complex)


def verify_exact(scheme: SchemeConfig, key, m, s, tol: float = ANALYTIC_TOL) -> PhaseMatch:
    return states_equal_up_to_phase(m, recover(scheme, key, s), tol)


def swap_pass_probability(x, y) -> float:
    return 0.5 * (1.0 + abs(np.vdot(x, y)) ** 2)


def swap_test(x, y, rng: np.random.Generator) -> bool:
    """One Bernoulli draw of the swap test; passes w.p. (1 + |<x|y>|^2)/2."""
    return bool(rng.random() < swap_pass_probability(x, y))


def verify_sampled(scheme: SchemeConfig, key, m, s, n_copies: int, rng: np.random.Generator) -> bool:
    """Accept iff all ``n_copies`` swap tests between m and the recovered state pass."""
    if n_copies < 1:
        raise ValueError("n_copies must be >= 1")
    p_pass = swap_pass_probability(m, recover(scheme, key, s))
    return bool(np.all(rng.random(n_copies) < p_pass))


def density_matrix(rho, tol: float = 1e-10) -> np.ndarray:
    """Validate a 2x2 density matrix, or a stack of them with shape (n, 2, 2)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim not in (2, 3) or rho.shape[-2:] != (2, 2) or not np.all(np.isfinite(rho)):
        raise QubitError("density matrix must be a finite 2x2 array")
    if np.max(np.abs(rho - np.swapaxes(rho, -1, -2).conj())) > tol:
        raise QubitError("density matrix is not Hermitian")
    if np.max(np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1)) > tol:
        raise QubitError("density matrix trace is not 1")
    if np.min(np.linalg.eigvalsh(rho)) < -tol:
        raise QubitError("density matrix is not positive semidefinite")
    return rho


def random_density(rng: np.random.Generator, kind: str = "pure") -> np.ndarray:
    """Pure Haar state, maximally mixed state, or a uniform-weight mixture of two pure states."""
    if kind == "pure":
        v = haar_state(rng)
        return np.outer(v, v.conj())
    if kind == "maximally_mixed":
        return np.eye(2, dtype=complex) / 2
    if kind == "mixed":
        a, b = haar_state(rng), haar_state(rng)
        p = rng.random()
        return p * np.outer(a, a.conj()) + (1 - p) * np.outer(b, b.conj())
    raise ValueError(f"unknown density kind {kind!r}")


def _twirl_residual(ops, rho) -> float:
    ops = np.asarray(ops)
    avg = np.einsum("kab,...bc,kdc->...ad", ops, rho, ops.conj()) / len(ops)
    return float(np.max(np.abs(avg - np.eye(2) / 2)))


def encryption_completeness(assistant, rho) -> float:
    """Max-entry deviation of the key-averaged encrypted state from I/2.

    ``rho`` may be a stack of density matrices; the worst residual is returned.
    """
    w = as_unitary(assistant)
    rho = density_matrix(rho)
    return _twirl_residual([pauli(k) @ w for k in range(4)], rho)


def rotation_completeness(family: RotationFamily, rho) -> float:
    rho = density_matrix(rho)
    return _twirl_residual([family.rotation(j) for j in family.indices], rho)
