"""Strongly entangling ansatz simulated as a statevector, by shot sampling,
or as a density matrix under depolarizing noise.

Wire 0 is the most significant bit of a basis index, so for two qubits
``|q0 q1>`` has index ``2*q0 + q1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Optional, Sequence, Union

import numpy as np

from .pauli import PAULI_MATRICES, PauliHamiltonian, QWCGroup, check_partition, qwc_partition

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
S_GATE = np.array([[1, 0], [0, 1j]], dtype=complex)
S_DAG = S_GATE.conj().T
# maps the X (Y) eigenbasis onto the computational basis
BASIS_CHANGE = {"Z": np.eye(2, dtype=complex), "X": HADAMARD, "Y": HADAMARD @ S_DAG}


def rz(angle: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]])


def ry(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rot(a: float, b: float, c: float) -> np.ndarray:
    """RZ(a) @ RY(b) @ RZ(c); RZ(c) acts first."""
    return rz(a) @ ry(b) @ rz(c)


@dataclass
class AnsatzParams:
    n_qubits: int
    n_layers: int
    angles: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_layers < 1:
            raise ValueError("need at least one qubit and one layer")
        angles = np.asarray(self.angles, dtype=float)
        expected = 3 * self.n_qubits * self.n_layers
        if angles.size != expected:
            raise ValueError(f"expected {expected} angles, got {angles.size}")
        if not np.all(np.isfinite(angles)):
            raise ValueError("angles must be finite")
        self.angles = angles.reshape(self.n_layers, self.n_qubits, 3)

    @property
    def flat(self) -> np.ndarray:
        return self.angles.reshape(-1).copy()

    @property
    def size(self) -> int:
        return self.angles.size

    def with_flat(self, flat: np.ndarray) -> "AnsatzParams":
        return AnsatzParams(self.n_qubits, self.n_layers, np.asarray(flat, dtype=float).copy())

    @classmethod
    def zeros(cls, n_qubits: int, n_layers: int) -> "AnsatzParams":
        return cls(n_qubits, n_layers, np.zeros(3 * n_qubits * n_layers))

    @classmethod
    def random(cls, n_qubits: int, n_layers: int, rng: np.random.Generator) -> "AnsatzParams":
        return cls(n_qubits, n_layers, rng.uniform(-np.pi, np.pi, 3 * n_qubits * n_layers))


@dataclass(frozen=True)
class NoiseConfig:
    p_depol_1q: float = 0.0
    p_depol_2q: float = 0.0
    p_readout_flip: float = 0.0

    def __post_init__(self):
        for name in ("p_depol_1q", "p_depol_2q", "p_readout_flip"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class Exact:
    pass


@dataclass(frozen=True)
class Sampled:
    shots: int
    seed: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be at least 1")


@dataclass(frozen=True)
class Noisy:
    noise: NoiseConfig
    shots: Optional[int] = None  # None evaluates Tr(rho H) without sampling
    seed: int = 0

    def __post_init__(self):
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be at least 1")


EvalMode = Union[Exact, Sampled, Noisy]


def entangler_pairs(n_qubits: int) -> list[tuple[int, int]]:
    """(control, target) pairs of one entangling block.

    Ring order with control q+1 and target q; for two qubits this is
    CNOT(1 -> 0) followed by CNOT(0 -> 1).
    """
    if n_qubits == 1:
        return []
    return [((q + 1) % n_qubits, q) for q in range(n_qubits)]


def ansatz_gates(params: AnsatzParams) -> list[tuple]:
    gates: list[tuple] = []
    for layer in range(params.n_layers):
        for q in range(params.n_qubits):
            gates.append(("rot", (q,), rot(*params.angles[layer, q])))
        for control, target in entangler_pairs(params.n_qubits):
            gates.append(("cnot", (control, target), None))
    return gates


def basis_state(index: int, n_qubits: int) -> np.ndarray:
    dim = 2**n_qubits
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi


def apply_single(state: np.ndarray, gate: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    psi = state.reshape((2,) * n_qubits)
    psi = np.moveaxis(np.tensordot(gate, psi, axes=([1], [qubit])), 0, qubit)
    return psi.reshape(-1)


def apply_cnot(state: np.ndarray, control: int, target: int, n_qubits: int) -> np.ndarray:
    psi = state.reshape((2,) * n_qubits).copy()
    sel = [slice(None)] * n_qubits
    sel[control] = 1
    sub = psi[tuple(sel)]
    t_axis = target if target < control else target - 1
    psi[tuple(sel)] = np.flip(sub, axis=t_axis)
    return psi.reshape(-1)


def _initial_state(initial: Union[int, np.ndarray], n_qubits: int) -> np.ndarray:
    if isinstance(initial, (int, np.integer)):
        return basis_state(int(initial), n_qubits)
    psi = np.asarray(initial, dtype=complex).reshape(-1)
    if psi.size != 2**n_qubits:
        raise ValueError("initial state has the wrong dimension")
    return psi


def apply_gates(state: np.ndarray, gates: Sequence[tuple], n_qubits: int) -> np.ndarray:
    for kind, wires, matrix in gates:
        if kind == "cnot":
            state = apply_cnot(state, wires[0], wires[1], n_qubits)
        else:
            state = apply_single(state, matrix, wires[0], n_qubits)
    return state


def apply_ansatz(params: AnsatzParams, basis_index: Union[int, np.ndarray] = 0) -> np.ndarray:
    """Run U(theta) on ``|basis_index>`` (or on a given initial statevector)."""
    psi = _initial_state(basis_index, params.n_qubits)
    return apply_gates(psi, ansatz_gates(params), params.n_qubits)


def _cnot_ring_matrix(n_qubits: int) -> np.ndarray:
    dim = 2**n_qubits
    m = np.eye(dim, dtype=complex)
    for control, target in entangler_pairs(n_qubits):
        cols = [apply_cnot(m[:, j], control, target, n_qubits) for j in range(dim)]
        m = np.stack(cols, axis=1)
    return m


def _batched_rot(angles: np.ndarray) -> np.ndarray:
    """Rot matrices for angles of shape (..., 3) -> (..., 2, 2)."""
    a, b, c = angles[..., 0], angles[..., 1], angles[..., 2]
    cb, sb = np.cos(b / 2), np.sin(b / 2)
    plus = np.exp(-0.5j * (a + c))
    minus = np.exp(-0.5j * (a - c))
    out = np.empty(angles.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = plus * cb
    out[..., 0, 1] = -minus * sb
    out[..., 1, 0] = np.conj(minus) * sb
    out[..., 1, 1] = np.conj(plus) * cb
    return out


def ansatz_unitaries(flat_batch: np.ndarray, n_qubits: int, n_layers: int) -> np.ndarray:
    """U(theta) for a batch of flat angle vectors, shape (B, 2^n, 2^n)."""
    flat_batch = np.atleast_2d(flat_batch)
    batch = flat_batch.shape[0]
    rots = _batched_rot(flat_batch.reshape(batch, n_layers, n_qubits, 3))
    ent = _cnot_ring_matrix(n_qubits)
    dim = 2**n_qubits
    u = np.broadcast_to(np.eye(dim, dtype=complex), (batch, dim, dim))
    for layer in range(n_layers):
        local = rots[:, layer, 0]
        for q in range(1, n_qubits):
            r = rots[:, layer, q]
            local = np.einsum("bij,bkl->bikjl", local, r).reshape(batch, local.shape[1] * 2, -1)
        u = ent @ (local @ u)
    return u


def ansatz_unitary(params: AnsatzParams) -> np.ndarray:
    return ansatz_unitaries(params.flat, params.n_qubits, params.n_layers)[0]


# --- density matrices -------------------------------------------------------


def _embed(op: np.ndarray, wires: Sequence[int], n_qubits: int) -> np.ndarray:
    """Full-space matrix of ``op`` acting on ``wires`` (listed in op's own order)."""
    dim = 2**n_qubits
    k = len(wires)
    full = np.zeros((dim, dim), dtype=complex)
    op_t = op.reshape((2,) * (2 * k))
    for col in range(dim):
        psi = np.zeros((2,) * n_qubits, dtype=complex)
        psi.reshape(-1)[col] = 1.0
        out = np.tensordot(op_t, psi, axes=(list(range(k, 2 * k)), list(wires)))
        out = np.moveaxis(out, list(range(k)), list(wires))
        full[:, col] = out.reshape(-1)
    return full


def _gate_matrix(kind: str, wires: tuple, matrix, n_qubits: int) -> np.ndarray:
    if kind == "cnot":
        cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
        return _embed(cnot, wires, n_qubits)
    return _embed(matrix, wires, n_qubits)


def depolarize(rho: np.ndarray, wires: Sequence[int], p: float, n_qubits: int) -> np.ndarray:
    """rho -> (1-p) rho + p * (I/2^k on ``wires``) (x) Tr_wires(rho)."""
    if p == 0.0:
        return rho
    k = len(wires)
    twirl = np.zeros_like(rho)
    for letters in np.ndindex(*(4,) * k):
        op = reduce(np.kron, (PAULI_MATRICES["IXYZ"[i]] for i in letters))
        full = _embed(op, wires, n_qubits)
        twirl += full @ rho @ full.conj().T
    return (1 - p) * rho + p * twirl / 4**k


def evolve_noisy(
    params: AnsatzParams,
    basis_index: Union[int, np.ndarray] = 0,
    noise: NoiseConfig = NoiseConfig(),
) -> np.ndarray:
    """Density matrix after U(theta) with a depolarizing channel after each gate.

    Rotations are followed by single-qubit depolarization with
    ``p_depol_1q``; each CNOT by two-qubit depolarization with ``p_depol_2q``.
    State preparation is ideal.
    """
    n = params.n_qubits
    psi = _initial_state(basis_index, n)
    rho = np.outer(psi, psi.conj())
    for kind, wires, matrix in ansatz_gates(params):
        g = _gate_matrix(kind, wires, matrix, n)
        rho = g @ rho @ g.conj().T
        p = noise.p_depol_2q if kind == "cnot" else noise.p_depol_1q
        rho = depolarize(rho, wires, p, n)
    return rho


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


# --- expectation values -----------------------------------------------------


def apply_pauli(state: np.ndarray, string: str) -> np.ndarray:
    n = len(string)
    for q, letter in enumerate(string):
        if letter != "I":
            state = apply_single(state, PAULI_MATRICES[letter], q, n)
    return state


def exact_expectation(psi: np.ndarray, h: PauliHamiltonian) -> float:
    """<psi|H|psi> by acting with each Pauli string on the statevector."""
    total = 0.0
    for string, coeff in h.terms:
        total += coeff * float(np.real(np.vdot(psi, apply_pauli(psi, string))))
    return total


def rotation_to_basis(basis: str) -> np.ndarray:
    return reduce(np.kron, (BASIS_CHANGE[c] for c in basis))


def _parity_signs(string: str, n_qubits: int) -> np.ndarray:
    idx = np.arange(2**n_qubits)
    parity = np.zeros_like(idx)
    for q, letter in enumerate(string):
        if letter != "I":
            parity ^= (idx >> (n_qubits - 1 - q)) & 1
    return 1 - 2 * parity


def group_observables(h: PauliHamiltonian, groups: list[QWCGroup]) -> list[Optional[np.ndarray]]:
    """Per group, the diagonal of its non-identity members in the rotated basis.

    A sampled outcome ``b`` contributes ``diag[b]``; groups holding only the
    identity map to None and are never measured.
    """
    out = []
    for group in groups:
        diag = np.zeros(2**h.n_qubits)
        measured = False
        for i in group.members:
            string, coeff = h.terms[i]
            if set(string) != {"I"}:
                diag += coeff * _parity_signs(string, h.n_qubits)
                measured = True
        out.append(diag if measured else None)
    return out


def readout_flip(probs: np.ndarray, p_flip: float, n_qubits: int) -> np.ndarray:
    """Distribution after flipping each measured bit independently with ``p_flip``."""
    if p_flip == 0.0:
        return probs
    t = probs.reshape(probs.shape[:-1] + (2,) * n_qubits)
    lead = probs.ndim - 1
    for q in range(n_qubits):
        t = (1 - p_flip) * t + p_flip * np.flip(t, axis=lead + q)
    return t.reshape(probs.shape)


def group_rng(seed: int, stream: int, group_index: int) -> np.random.Generator:
    """Independent generator per (evaluation stream, QWC group)."""
    return np.random.default_rng(np.random.SeedSequence([seed, stream, group_index]))


def estimate_from_probabilities(
    group_probs: Sequence[Optional[np.ndarray]],
    observables: Sequence[Optional[np.ndarray]],
    identity: float,
    shots: Optional[int],
    seed: int,
    stream: int,
) -> float:
    """Combine per-group outcome distributions into an energy estimate.

    With ``shots=None`` the distributions are used as exact frequencies.
    """
    total = identity
    for gi, (probs, diag) in enumerate(zip(group_probs, observables)):
        if diag is None:
            continue
        probs = np.clip(probs, 0.0, None)
        probs = probs / probs.sum()
        if shots is None:
            total += float(probs @ diag)
        else:
            counts = group_rng(seed, stream, gi).multinomial(shots, probs)
            total += float(counts @ diag) / shots
    return total


def expectation(
    state_or_params: Union[np.ndarray, AnsatzParams],
    h: PauliHamiltonian,
    groups: Optional[list[QWCGroup]] = None,
    mode: EvalMode = Exact(),
    basis_index: Union[int, np.ndarray] = 0,
    stream: int = 0,
) -> float:
    """Estimate <H> in the requested evaluation mode.

    ``state_or_params`` is either a statevector or ansatz parameters, in
    which case the ansatz is run from ``basis_index``. ``stream`` selects an
    independent family of random draws for stochastic modes, so repeated
    evaluations with the same master seed stay reproducible.
    """
    if groups is None:
        groups = h.groups or qwc_partition(h)
    check_partition(h, groups)
    n = h.n_qubits

    if isinstance(state_or_params, AnsatzParams):
        if state_or_params.n_qubits != n:
            raise ValueError("ansatz and Hamiltonian act on different qubit counts")
        params = state_or_params
        psi = None if isinstance(mode, Noisy) else apply_ansatz(params, basis_index)
    else:
        params = None
        psi = np.asarray(state_or_params, dtype=complex).reshape(-1)
        if psi.size != 2**n:
            raise ValueError("statevector dimension does not match the Hamiltonian")

    if isinstance(mode, Exact):
        return exact_expectation(psi, h)

    ident = h.identity_coefficient()
    observables = group_observables(h, groups)
    rotations = [rotation_to_basis(g.basis) for g in groups]
    if isinstance(mode, Sampled):
        probs = [np.abs(v @ psi) ** 2 for v in rotations]
        return estimate_from_probabilities(probs, observables, ident, mode.shots, mode.seed, stream)

    if isinstance(mode, Noisy):
        if params is not None:
            rho = evolve_noisy(params, basis_index, mode.noise)
        else:
            rho = np.outer(psi, psi.conj())
        if mode.shots is None and mode.noise.p_readout_flip == 0.0:
            return float(np.real(np.trace(rho @ h.to_matrix())))
        probs = [
            readout_flip(np.real(np.einsum("ij,jk,ik->i", v, rho, v.conj())), mode.noise.p_readout_flip, n)
            for v in rotations
        ]
        return estimate_from_probabilities(probs, observables, ident, mode.shots, mode.seed, stream)

    raise TypeError(f"unknown evaluation mode {mode!r}")
