"""Pauli-basis expansion of Hermitian matrices and qubit-wise commuting groups."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_LETTER_ORDER = {"I": 0, "X": 1, "Y": 2, "Z": 3}


def pauli_matrix(string: str) -> np.ndarray:
    """Dense matrix of a Pauli string; letter 0 acts on the most significant qubit."""
    return reduce(np.kron, (PAULI_MATRICES[c] for c in string))


def all_pauli_strings(n_qubits: int) -> list[str]:
    return ["".join(p) for p in itertools.product("IXYZ", repeat=n_qubits)]


def _check_string(s: str, n_qubits: int | None = None) -> None:
    if not s or any(c not in _LETTER_ORDER for c in s):
        raise ValueError(f"invalid Pauli string {s!r}")
    if n_qubits is not None and len(s) != n_qubits:
        raise ValueError(f"Pauli string {s!r} does not act on {n_qubits} qubits")


@dataclass
class QWCGroup:
    members: list[int]
    basis: str

    def member_strings(self, h: "PauliHamiltonian") -> list[str]:
        return [h.terms[i][0] for i in self.members]


@dataclass
class PauliHamiltonian:
    n_qubits: int
    terms: list[tuple[str, float]]
    groups: list[QWCGroup] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for string, coeff in self.terms:
            _check_string(string, self.n_qubits)
            if string in seen:
                raise ValueError(f"duplicate Pauli string {string!r}")
            seen.add(string)
            if not np.isfinite(coeff):
                raise ValueError(f"coefficient of {string} is not finite")

    @property
    def strings(self) -> list[str]:
        return [s for s, _ in self.terms]

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms], dtype=float)

    def identity_coefficient(self) -> float:
        ident = "I" * self.n_qubits
        return sum(c for s, c in self.terms if s == ident)

    def to_matrix(self) -> np.ndarray:
        dim = 2**self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for string, coeff in self.terms:
            out += coeff * pauli_matrix(string)
        return out

    def with_groups(self) -> "PauliHamiltonian":
        """Return self with the QWC partition filled in."""
        if not self.groups and self.terms:
            self.groups = qwc_partition(self)
        return self


def decompose(h: np.ndarray, prune_tol: float = 1e-12) -> PauliHamiltonian:
    """Expand ``h`` as sum_j c_j P_j with c_j = Tr(P_j h) / 2^n.

    Terms with ``|c_j| < prune_tol`` are dropped. The returned Hamiltonian
    carries its QWC partition.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix")
    dim = h.shape[0]
    n_qubits = dim.bit_length() - 1
    if dim < 2 or 2**n_qubits != dim:
        raise ValueError(f"matrix dimension {dim} is not a power of two")

    terms = []
    for string in all_pauli_strings(n_qubits):
        # Tr(P h) without forming the product
        value = np.sum(pauli_matrix(string).T * h) / dim
        if abs(value.imag) > 1e-9 * max(1.0, np.abs(h).max()):
            raise ValueError("matrix is not Hermitian")
        if abs(value.real) >= prune_tol:
            terms.append((string, float(value.real)))
    if not terms:
        terms.append(("I" * n_qubits, 0.0))
    return PauliHamiltonian(n_qubits, terms).with_groups()


def reconstruct(h: PauliHamiltonian) -> np.ndarray:
    return h.to_matrix()


def qwc_compatible(a: str, b: str) -> bool:
    """True when the strings agree letter-wise wherever neither is identity."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {a!r} vs {b!r}")
    return all(x == y or x == "I" or y == "I" for x, y in zip(a, b))


def _sort_key(s: str) -> tuple[int, ...]:
    return tuple(_LETTER_ORDER[c] for c in s)


def qwc_partition(h: PauliHamiltonian) -> list[QWCGroup]:
    """Greedy largest-degree-first colouring of the QWC conflict graph.

    Terms are ordered lexicographically (I < X < Y < Z) before colouring,
    and ties in degree keep that order, so the result is deterministic.
    """
    if not h.terms:
        raise ValueError("cannot partition an empty Hamiltonian")
    strings = h.strings
    order = sorted(range(len(strings)), key=lambda i: _sort_key(strings[i]))
    degree = {
        i: sum(1 for j in order if j != i and not qwc_compatible(strings[i], strings[j]))
        for i in order
    }
    # sorted() is stable, so equal degrees keep lexicographic order
    order = sorted(order, key=lambda i: -degree[i])

    colour_members: list[list[int]] = []
    for i in order:
        for members in colour_members:
            if all(qwc_compatible(strings[i], strings[j]) for j in members):
                members.append(i)
                break
        else:
            colour_members.append([i])

    groups = []
    for members in colour_members:
        basis = ["Z"] * h.n_qubits
        for j in members:
            for q, c in enumerate(strings[j]):
                if c != "I":
                    basis[q] = c
        groups.append(QWCGroup(members=sorted(members), basis="".join(basis)))
    return groups


def check_partition(h: PauliHamiltonian, groups: list[QWCGroup]) -> None:
    """Raise ValueError unless ``groups`` is a valid QWC cover of ``h``."""
    seen = sorted(i for g in groups for i in g.members)
    if seen != list(range(len(h.terms))):
        raise ValueError("groups do not cover every term exactly once")
    for g in groups:
        if len(g.basis) != h.n_qubits or any(c not in "XYZ" for c in g.basis):
            raise ValueError(f"invalid measurement basis {g.basis!r}")
        for i in g.members:
            s = h.terms[i][0]
            if any(c != "I" and c != b for c, b in zip(s, g.basis)):
                raise ValueError(f"{s} is not measurable in basis {g.basis}")
