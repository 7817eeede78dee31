"""Swap-test detection of forgery attacks on the unbiased-rotation scheme.

For an attack Q write A_jk = sigma_j W^dag sigma_k Q sigma_k W sigma_j. A single
swap test between two copies decrypted under independent keys detects the
attack on message M with probability

    P(Q, M) = 1 - 2^-9 * sum_{a,b} (1 + |<M| A_a^dag A_b |M>|^2)

over all 16 x 16 key pairs. Minimizing over M on the Bloch sphere gives P_Q;
a Monte-Carlo sweep over random Q gives the (d_Q, P_Q) scatter and its
lower envelope.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .aqs import RotationFamily, SchemeConfig
from .qcore import (
    BlochPoint,
    PauliCoeffs,
    adjoint,
    as_unitary,
    canonical_sign,
    coeff_distance,
    from_pauli_coeffs,
    identity,
    pauli,
    to_pauli_coeffs,
)

D_MAX = 1 + math.sqrt(3)
DEFAULT_GRID = (64, 128)
DEFAULT_REFINE_TOL = 1e-8
DEFAULT_BINS = 100

SWEEP_HEADER = ["index", "q0", "q1", "q2", "q3", "d_q", "p_q", "theta_min", "phi_min"]
ENVELOPE_HEADER = ["d_lo", "d_hi", "p_min", "count"]

_PAULIS = np.array([pauli(k) for k in range(4)])


@dataclass(frozen=True)
class SweepRecord:
    attack_coeffs: PauliCoeffs
    d_q: float
    p_q: float
    argmin: BlochPoint
    seed_index: int


@dataclass(frozen=True)
class EnvelopeBin:
    d_lo: float
    d_hi: float
    p_min: float
    support_count: int


def _require_z4(scheme: SchemeConfig):
    if scheme.rotations is not RotationFamily.UNBIASED_Z4:
        raise ValueError("detection probabilities are defined for the unbiased Z4 rotation family")


def conjugated_encryptions(scheme: SchemeConfig, attack) -> np.ndarray:
    """The 16 operators A_jk, indexed 4*j + k."""
    _require_z4(scheme)
    q = as_unitary(attack)
    w = scheme.assistant
    out = np.empty((16, 2, 2), dtype=complex)
    for j in range(4):
        for k in range(4):
            enc = _PAULIS[k] @ w @ _PAULIS[j]
            out[4 * j + k] = adjoint(enc) @ q @ enc
    return out


def delta(scheme: SchemeConfig, attack, j: int, k: int, j2: int, k2: int) -> np.ndarray:
    _require_z4(scheme)
    for idx in (j, k, j2, k2):
        if idx not in (0, 1, 2, 3):
            raise ValueError(f"key index {idx} out of range 0..3")
    q = as_unitary(attack)
    w = scheme.assistant
    s = _PAULIS
    first = s[j] @ adjoint(w) @ s[k] @ adjoint(q) @ s[k] @ w @ s[j]
    second = s[j2] @ adjoint(w) @ s[k2] @ q @ s[k2] @ w @ s[j2]
    return first @ second


def detection_prob(scheme: SchemeConfig, attack, m) -> float:
    """Single swap-test detection probability, summed term by term over all 256 Deltas."""
    a = conjugated_encryptions(scheme, attack)
    deltas = np.einsum("aji,bjk->abik", a.conj(), a)
    m = np.asarray(m, dtype=complex)
    expect = np.einsum("i,abij,j->ab", m.conj(), deltas, m)
    return float(1.0 - np.sum(1.0 + np.abs(expect) ** 2) / 2**9)


class DetectionLandscape:
    """P(Q, M) as a quadratic function of the Bloch vector of M.

    With rho = (I + r.sigma)/2, <M|Delta|M> = d0 + r.d where d are the Pauli
    components of Delta, so the 256-term sum collapses to c + 2 b.r + r.M.r.
    """

    def __init__(self, scheme: SchemeConfig, attack):
        a = conjugated_encryptions(scheme, attack)
        deltas = np.einsum("aji,bjk->abik", a.conj(), a)
        d = np.einsum("mij,abji->abm", _PAULIS, deltas).reshape(-1, 4) / 2
        d0, dv = d[:, 0], d[:, 1:]
        self.c = float(np.sum(np.abs(d0) ** 2))
        self.b = np.real(d0.conj() @ dv)
        quad = np.real(dv.conj().T @ dv)
        self.quad = (quad + quad.T) / 2

    def __call__(self, theta, phi):
        theta, phi = np.asarray(theta, float), np.asarray(phi, float)
        st = np.sin(theta)
        r = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)
        s = self.c + 2 * r @ self.b + np.einsum("...i,ij,...j->...", r, self.quad, r)
        return 0.5 - s / 2**9


def bloch_grid(n_theta: int, n_phi: int) -> tuple[np.ndarray, np.ndarray]:
    theta = np.linspace(0.0, math.pi, n_theta)
    phi = np.arange(n_phi) * (2 * math.pi / n_phi)
    return np.meshgrid(theta, phi, indexing="ij")


def _fold(theta: float, phi: float) -> BlochPoint:
    theta = theta % (2 * math.pi)
    if theta > math.pi:
        theta, phi = 2 * math.pi - theta, phi + math.pi
    return BlochPoint(float(theta), float(phi % (2 * math.pi)))


def min_detection_prob(
    scheme: SchemeConfig,
    attack,
    grid: tuple[int, int] = DEFAULT_GRID,
    refine_tol: float = DEFAULT_REFINE_TOL,
) -> tuple[float, BlochPoint]:
    """Grid scan of the Bloch sphere followed by Nelder-Mead from the best cell."""
    n_theta, n_phi = grid
    if n_theta < 16 or n_phi < 32:
        raise ValueError("grid must be at least 16 x 32")
    f = DetectionLandscape(scheme, attack)
    th, ph = bloch_grid(n_theta, n_phi)
    vals = f(th, ph)
    i = np.unravel_index(int(np.argmin(vals)), vals.shape)
    best_p, best_x = float(vals[i]), (float(th[i]), float(ph[i]))

    step_t, step_p = math.pi / (n_theta - 1), 2 * math.pi / n_phi
    x0 = np.array(best_x)
    simplex = np.array([x0, x0 + [step_t, 0.0], x0 + [0.0, step_p]])
    res = minimize(
        lambda x: float(f(x[0], x[1])),
        x0,
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": refine_tol, "fatol": refine_tol * 1e-3, "maxiter": 2000},
    )
    if res.fun < best_p:
        best_p, best_x = float(res.fun), (float(res.x[0]), float(res.x[1]))
    return max(best_p, 0.0), _fold(*best_x)


def dense_grid_min(scheme: SchemeConfig, attack, grid=(512, 1024), chunk: int = 8192) -> float:
    """Brute-force minimum of P(Q, M) over a Bloch grid via the 16 decrypted states.

    Shares no code path with :class:`DetectionLandscape`; used as an oracle.
    """
    a = conjugated_encryptions(scheme, attack)
    th, ph = bloch_grid(*grid)
    th, ph = th.ravel(), ph.ravel()
    best = math.inf
    for s in range(0, th.size, chunk):
        t, p = th[s : s + chunk], ph[s : s + chunk]
        msgs = np.stack([np.cos(t / 2), np.exp(1j * p) * np.sin(t / 2)], axis=-1)
        states = np.einsum("aij,nj->nai", a, msgs)
        gram = np.einsum("nai,nbi->nab", states.conj(), states)
        vals = 1.0 - np.sum(1.0 + np.abs(gram) ** 2, axis=(1, 2)) / 2**9
        best = min(best, float(vals.min()))
    return best


def sample_attack(rng: np.random.Generator) -> np.ndarray:
    """Uniform point on the unit 3-sphere of coefficients, folded to q0 >= 0."""
    q = rng.standard_normal(4)
    q = canonical_sign(q / np.linalg.norm(q))
    return from_pauli_coeffs(q)


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based per-sample generator; independent of how samples are partitioned."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def evaluate_attack(scheme, attack, index, grid=DEFAULT_GRID, refine_tol=DEFAULT_REFINE_TOL) -> SweepRecord:
    p, where = min_detection_prob(scheme, attack, grid, refine_tol)
    return SweepRecord(
        attack_coeffs=to_pauli_coeffs(attack),
        d_q=coeff_distance(identity(), attack),
        p_q=p,
        argmin=where,
        seed_index=index,
    )


def _sweep_chunk(args):
    scheme, seed, indices, grid, refine_tol, sampler = args
    return [
        evaluate_attack(scheme, sampler(sample_rng(seed, i)), i, grid, refine_tol)
        for i in indices
    ]


def sweep(
    scheme: SchemeConfig,
    n_samples: int,
    seed: int,
    grid: tuple[int, int] = DEFAULT_GRID,
    refine_tol: float = DEFAULT_REFINE_TOL,
    workers: int = 1,
    extra_attacks: Sequence = (),
    sampler: Callable[[np.random.Generator], np.ndarray] = sample_attack,
    chunk_size: int = 250,
) -> list[SweepRecord]:
    """(d_Q, P_Q) records for ``n_samples`` random attacks, in index order.

    ``extra_attacks`` are appended with indices n_samples, n_samples + 1, ...
    ``sampler`` must be a module-level function when ``workers > 1``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    _require_z4(scheme)
    chunks = [
        range(s, min(s + chunk_size, n_samples)) for s in range(0, n_samples, chunk_size)
    ]
    jobs = [(scheme, seed, c, grid, refine_tol, sampler) for c in chunks]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_sweep_chunk, jobs))
    else:
        parts = [_sweep_chunk(job) for job in jobs]
    records = [r for part in parts for r in part]
    for offset, attack in enumerate(extra_attacks):
        records.append(evaluate_attack(scheme, attack, n_samples + offset, grid, refine_tol))
    return records


def envelope(records: Sequence[SweepRecord], n_bins: int = DEFAULT_BINS, d_max: float = D_MAX) -> list[EnvelopeBin]:
    """Per-bin minimum of P_Q over uniform distance bins on [0, d_max]."""
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    if not records:
        raise ValueError("no records to bin")
    width = d_max / n_bins
    mins = [math.inf] * n_bins
    counts = [0] * n_bins
    for r in records:
        b = bin_index(r.d_q, n_bins, d_max)
        counts[b] += 1
        mins[b] = min(mins[b], r.p_q)
    return [
        EnvelopeBin(b * width, (b + 1) * width, mins[b] if counts[b] else math.nan, counts[b])
        for b in range(n_bins)
    ]


def bin_index(d: float, n_bins: int = DEFAULT_BINS, d_max: float = D_MAX) -> int:
    return min(max(int(d // (d_max / n_bins)), 0), n_bins - 1)


def escape_probability(p: float, n: int) -> float:
    """Probability an attack with single-test detection ``p`` survives ``n`` swap tests."""
    return (1.0 - p) ** n


def copies_needed(p: float, target: float) -> int:
    """Smallest n with (1 - p)^n <= target."""
    if not 0 < p <= 1:
        raise ValueError("p must be in (0, 1]")
    if p == 1:
        return 1
    return max(1, math.ceil(math.log(target) / math.log1p(-p)))


def _g(x: float) -> str:
    return format(x, ".17g")


def write_sweep_csv(records: Iterable[SweepRecord], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(SWEEP_HEADER)
        for r in records:
            out.writerow(
                [r.seed_index, *(_g(q) for q in r.attack_coeffs), _g(r.d_q), _g(r.p_q), _g(r.argmin.theta), _g(r.argmin.phi)]
            )


def read_sweep_csv(path: str | os.PathLike) -> list[SweepRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        SweepRecord(
            attack_coeffs=PauliCoeffs(*(float(row[f"q{i}"]) for i in range(4))),
            d_q=float(row["d_q"]),
            p_q=float(row["p_q"]),
            argmin=BlochPoint(float(row["theta_min"]), float(row["phi_min"])),
            seed_index=int(row["index"]),
        )
        for row in rows
    ]


def write_envelope_csv(bins: Iterable[EnvelopeBin], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(ENVELOPE_HEADER)
        for b in bins:
            out.writerow([_g(b.d_lo), _g(b.d_hi), _g(b.p_min), b.support_count])
