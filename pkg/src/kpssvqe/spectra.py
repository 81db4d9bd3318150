"""Interband transition amplitudes from circuit expectation values, and
step-function absorption spectra built from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .circuit import (
    HADAMARD,
    S_DAG,
    S_GATE,
    AnsatzParams,
    EvalMode,
    Exact,
    apply_gates,
    basis_state,
    expectation,
)
from .oracle import direct_amplitude
from .pauli import PauliHamiltonian, decompose, qwc_partition

X_GATE = np.array([[0, 1], [1, 0]], dtype=complex)


def _bits(index: int, n_qubits: int) -> list[int]:
    return [(index >> (n_qubits - 1 - q)) & 1 for q in range(n_qubits)]


def superposition_circuit(v: int, c: int, n_qubits: int, kind: str) -> list[tuple]:
    """Gates preparing (|v> + |c>)/sqrt2 (kind "x") or (|v> + i|c>)/sqrt2 (kind "y")
    from |0...0>, up to a global phase.

    The first wire where v and c differ is put into superposition with a
    Hadamard (plus S or S^dagger for the "y" kind) and CNOTs copy it onto
    the remaining differing wires.
    """
    if v == c:
        raise ValueError("valence and conduction indices must differ")
    if kind not in ("x", "y"):
        raise ValueError("kind must be 'x' or 'y'")
    bv, bc = _bits(v, n_qubits), _bits(c, n_qubits)
    differing = [q for q in range(n_qubits) if bv[q] != bc[q]]
    pivot = differing[0]
    base = bv if bv[pivot] == 0 else bc
    gates = [("single", (q,), X_GATE) for q in range(n_qubits) if base[q]]
    gates.append(("single", (pivot,), HADAMARD))
    if kind == "y":
        # starting from |c> the relative phase must be -i to give |v> + i|c> up to a phase
        gates.append(("single", (pivot,), S_GATE if base is bv else S_DAG))
    for q in differing[1:]:
        gates.append(("cnot", (pivot, q), None))
    return gates


def superposition_states(v: int, c: int, n_qubits: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Statevectors produced by the "x" and "y" preparation circuits."""
    zero = basis_state(0, n_qubits)
    return tuple(
        apply_gates(zero, superposition_circuit(v, c, n_qubits, kind), n_qubits) for kind in ("x", "y")
    )


@dataclass
class TransitionRequest:
    thetas: Sequence[Optional[AnsatzParams]]
    valence: Sequence[int]
    conduction: int
    observable: PauliHamiltonian
    mode: EvalMode = field(default_factory=Exact)

    def __post_init__(self):
        if self.conduction in self.valence:
            raise ValueError("conduction index listed among valence indices")
        if not self.observable.groups:
            self.observable.groups = qwc_partition(self.observable)
        # the identity component cancels in both parts of the amplitude
        terms = [(s, c) for s, c in self.observable.terms if set(s) != {"I"}]
        n = self.observable.n_qubits
        self.traceless = PauliHamiltonian(n, terms).with_groups() if terms else None


def transition_amplitude(req: TransitionRequest, k_index: int, v_index: Optional[int] = None) -> complex:
    """<phi_v| U^dagger T U |phi_c> from four expectation values.

    Re = <+x|T~|+x> - (T~_vv + T~_cc)/2 and Im = (T~_vv + T~_cc)/2 - <+y|T~|+y>,
    each term measured through the circuit simulator in ``req.mode``.
    """
    theta = req.thetas[k_index] if 0 <= k_index < len(req.thetas) else None
    if theta is None:
        raise ValueError(f"no optimized parameters for k-point {k_index}")
    v = req.valence[0] if v_index is None else v_index
    c = req.conduction
    h = req.traceless
    if h is None:
        return 0j
    n = theta.n_qubits
    plus_x, plus_y = superposition_states(v, c, n)
    base = 1000 * k_index + 10 * v

    def measure(initial, offset):
        return expectation(theta, h, h.groups, req.mode, initial, base + offset)

    t_vv = measure(v, 0)
    t_cc = measure(c, 1)
    t_x = measure(plus_x, 2)
    t_y = measure(plus_y, 3)
    mean = 0.5 * (t_vv + t_cc)
    return complex(t_x - mean, mean - t_y)


def call_budget(n_pairs: int, shared_conduction: bool = True) -> int:
    """Distinct circuit expectations needed for ``n_pairs`` (v, c) amplitudes at one k-point.

    Each pair needs its two superposition states; diagonal terms are
    counted once per distinct state.
    """
    if n_pairs < 0:
        raise ValueError("n_pairs must be non-negative")
    if n_pairs == 0:
        return 0
    diagonal = n_pairs + 1 if shared_conduction else 2 * n_pairs
    return diagonal + 2 * n_pairs


@dataclass
class AbsorptionSpectrum:
    photon_energies: np.ndarray
    alpha: np.ndarray
    transitions: list[tuple[float, float]]  # (transition energy, |amplitude|^2)
    calls_per_kpoint: int = 0


def default_omega_grid(eps_gamma: float, step: float = 0.005) -> np.ndarray:
    # the grid starts one step above zero because of the 1/(hbar omega) factor
    n = int(round((eps_gamma + 1.0) / step))
    return step * np.arange(1, n + 1)


def assemble_spectrum(
    transitions: Sequence[tuple[float, float]],
    omega_grid: np.ndarray,
    printed_step: bool = False,
) -> np.ndarray:
    """alpha(w) = (1/w) sum |A|^2 step(w - e_vc), scaled to unit maximum.

    ``printed_step`` flips the step argument to step(e_vc - w). An all-zero
    sum is returned unscaled.
    """
    omega = np.asarray(omega_grid, dtype=float)
    if omega.ndim != 1 or omega.size == 0 or np.any(omega <= 0) or np.any(np.diff(omega) <= 0):
        raise ValueError("photon energy grid must be positive and strictly increasing")
    total = np.zeros_like(omega)
    for e_vc, weight in transitions:
        step = omega >= e_vc if not printed_step else omega <= e_vc
        total += weight * step
    alpha = total / omega
    peak = alpha.max()
    return alpha / peak if peak > 0 else alpha


def _band_transitions(band, amplitude_fn) -> list[tuple[float, float]]:
    entries = []
    for i, point in enumerate(band.points):
        if point.diverged or point.theta is None:
            continue
        order = point.basis_order
        e_c = point.energies[-1]
        for rank, v in enumerate(order[:-1]):
            amp = amplitude_fn(i, point, v, order[-1])
            entries.append((float(e_c - point.energies[rank]), float(abs(amp) ** 2)))
    return entries


def absorption(
    band,
    observable: PauliHamiltonian,
    omega_grid: Optional[np.ndarray] = None,
    mode: EvalMode = Exact(),
    printed_step: bool = False,
) -> AbsorptionSpectrum:
    """Absorption over a band-structure result.

    The conduction state is the highest SSVQE level at each k-point and the
    sum runs over the remaining (valence) levels.
    """
    if not band.points:
        raise ValueError("band result is empty")
    thetas = [p.theta for p in band.points]
    if omega_grid is None:
        omega_grid = default_omega_grid(min(p.energies[-1] - p.energies[-2] for p in band.points if not p.diverged))

    def amp(i, point, v, c):
        req = TransitionRequest(thetas, [x for x in point.basis_order[:-1]], c, observable, mode)
        return transition_amplitude(req, i, v)

    entries = _band_transitions(band, amp)
    n_valence = max((len(p.basis_order) - 1 for p in band.points), default=0)
    return AbsorptionSpectrum(
        np.asarray(omega_grid, dtype=float),
        assemble_spectrum(entries, omega_grid, printed_step),
        entries,
        call_budget(n_valence),
    )


def classical_absorption(
    band,
    observable: np.ndarray,
    omega_grid: np.ndarray,
    printed_step: bool = False,
) -> AbsorptionSpectrum:
    """Same spectrum with amplitudes from dense statevector inner products."""
    t = observable.to_matrix() if isinstance(observable, PauliHamiltonian) else np.asarray(observable, dtype=complex)
    # <v|c> = 0, so the trace part of T contributes nothing but rounding
    t = t - np.trace(t) / len(t) * np.eye(len(t))
    entries = _band_transitions(band, lambda i, point, v, c: direct_amplitude(point.theta, v, c, t))
    return AbsorptionSpectrum(np.asarray(omega_grid, dtype=float), assemble_spectrum(entries, omega_grid, printed_step), entries)


def identity_observable(n_qubits: int = 2) -> PauliHamiltonian:
    return decompose(np.eye(2**n_qubits))


def momentum_observable(material, axis: str = "z") -> PauliHamiltonian:
    """Interband coupling part of dH/dk along ``axis`` (the Kane P terms).

    Only the k-linear entries coupling valence and conduction states are
    kept, which makes the operator independent of k.
    """
    from .kp_model import KPoint, build_hamiltonian

    unit = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}[axis]
    h_plus = build_hamiltonian(material, KPoint(*unit))
    h_minus = build_hamiltonian(material, KPoint(*(-u for u in unit)))
    linear = 0.5 * (h_plus - h_minus)
    mask = np.zeros((4, 4), dtype=bool)
    mask[:3, 3] = mask[3, :3] = True
    return decompose(np.where(mask, linear, 0.0))
