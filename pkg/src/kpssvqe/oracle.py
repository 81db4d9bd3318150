"""Classical reference results: a self-contained Hermitian eigensolver and
direct transition amplitudes."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .circuit import AnsatzParams, apply_ansatz

log = logging.getLogger(__name__)

DEGENERACY_GAP = 1e-9


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns


def _jacobi_symmetric(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100):
    """Cyclic Jacobi diagonalisation of a real symmetric matrix."""
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.linalg.norm(a), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1 / np.hypot(1.0, t)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.diag(a).copy(), v


def eigh(h: np.ndarray, hermitian_tol: float = 1e-10) -> EigenDecomposition:
    """Ascending eigenpairs of a complex Hermitian matrix.

    The matrix A + iB is embedded as the real symmetric [[A, -B], [B, A]],
    whose spectrum is that of ``h`` with every eigenvalue doubled. Complex
    eigenvectors are recovered from the real ones and orthonormalised
    within each eigenvalue cluster.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix")
    if np.abs(h - h.conj().T).max() > hermitian_tol * max(1.0, np.abs(h).max()):
        raise ValueError("matrix is not Hermitian")
    n = h.shape[0]
    if n > 64:
        raise ValueError("eigh is meant for matrices up to 64x64")
    h = (h + h.conj().T) / 2
    a, b = h.real, h.imag
    big = np.block([[a, -b], [b, a]])
    vals, vecs = _jacobi_symmetric(big)
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]

    chosen: list[np.ndarray] = []
    for j in range(2 * n):
        if len(chosen) == n:
            break
        cand = vecs[:n, j] + 1j * vecs[n:, j]
        for u in chosen:
            cand = cand - np.vdot(u, cand) * u
        norm = np.linalg.norm(cand)
        # the partner (-y, x) of an accepted vector is i times it and vanishes here
        if norm > 0.5:
            chosen.append(cand / norm)
    if len(chosen) != n:
        raise RuntimeError("failed to recover a complete eigenbasis")
    vectors = np.stack(chosen, axis=1)
    eigenvalues = np.real(np.einsum("ij,ik,kj->j", vectors.conj(), h, vectors))
    order = np.argsort(eigenvalues, kind="stable")
    return EigenDecomposition(eigenvalues[order], vectors[:, order])


def eigvalsh(h: np.ndarray) -> np.ndarray:
    return eigh(h).eigenvalues


def track_bands(eigs: list[EigenDecomposition]) -> list[int]:
    """Indices of path points where overlap matching disagrees with sorted order.

    Each such index marks a band crossing between points i-1 and i; these
    are logged rather than treated as errors.
    """
    crossings = []
    for i in range(1, len(eigs)):
        prev, cur = eigs[i - 1], eigs[i]
        overlap = np.abs(prev.eigenvectors.conj().T @ cur.eigenvectors) ** 2
        match = np.argmax(overlap, axis=1)
        for r, c in enumerate(match):
            # swaps inside a degenerate pair carry no ordering information
            if c == r or abs(cur.eigenvalues[c] - cur.eigenvalues[r]) < DEGENERACY_GAP:
                continue
            if abs(prev.eigenvalues[c] - prev.eigenvalues[r]) < DEGENERACY_GAP:
                continue
            crossings.append(i)
            log.info("band crossing between path points %d and %d", i - 1, i)
            break
    return crossings


def direct_amplitude(theta_opt: AnsatzParams, v_index: int, c_index: int, t: np.ndarray) -> complex:
    """<phi_v| U^dagger T U |phi_c> from statevectors and a dense inner product."""
    t = np.asarray(t, dtype=complex)
    dim = 2**theta_opt.n_qubits
    if t.shape != (dim, dim):
        raise ValueError(f"observable shape {t.shape} does not match {dim}x{dim}")
    psi_v = apply_ansatz(theta_opt, v_index)
    psi_c = apply_ansatz(theta_opt, c_index)
    return complex(np.vdot(psi_v, t @ psi_c))
