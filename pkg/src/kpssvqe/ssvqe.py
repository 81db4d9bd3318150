"""Subspace-search VQE: one weighted optimisation for several eigenstates,
and warm-started sweeps along a k-path."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .circuit import (
    AnsatzParams,
    EvalMode,
    Exact,
    Sampled,
    ansatz_unitaries,
    estimate_from_probabilities,
    expectation,
    group_observables,
    rotation_to_basis,
)
from .kp_model import KPoint, MaterialParams, SignConvention, build_hamiltonian
from .optimizers import ConjugateGradient, OptimizerConfig, make_optimizer
from .oracle import eigh
from .pauli import PauliHamiltonian, decompose, qwc_partition

log = logging.getLogger(__name__)

DEFAULT_WEIGHTS = (4.0, 3.0, 2.0, 1.0)
STOCHASTIC_STREAK = 3


class DivergenceError(RuntimeError):
    pass


@dataclass
class SSVQEProblem:
    hamiltonian: PauliHamiltonian
    weights: Sequence[float] = DEFAULT_WEIGHTS
    initial_basis_indices: Sequence[int] = (0, 1, 2, 3)
    n_layers: int = 5
    mode: EvalMode = field(default_factory=Exact)

    def __post_init__(self):
        self.weights = tuple(float(w) for w in self.weights)
        self.initial_basis_indices = tuple(int(i) for i in self.initial_basis_indices)
        if len(self.weights) != len(self.initial_basis_indices):
            raise ValueError("need one weight per initial state")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if any(a <= b for a, b in zip(self.weights, self.weights[1:])):
            raise ValueError("weights must be strictly descending")
        if len(set(self.initial_basis_indices)) != len(self.initial_basis_indices):
            raise ValueError("initial basis indices must be distinct")
        dim = 2**self.hamiltonian.n_qubits
        if any(not 0 <= i < dim for i in self.initial_basis_indices):
            raise ValueError("initial basis index out of range")
        if self.n_layers < 1:
            raise ValueError("n_layers must be at least 1")
        if not self.hamiltonian.groups:
            self.hamiltonian.groups = qwc_partition(self.hamiltonian)

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits

    @property
    def n_params(self) -> int:
        return 3 * self.n_qubits * self.n_layers

    @property
    def stochastic(self) -> bool:
        return not isinstance(self.mode, Exact)


@dataclass
class SSVQEResult:
    energies: np.ndarray  # ascending
    basis_order: list[int]  # initial basis index behind each sorted energy
    theta_opt: AnsatzParams
    cycles: int
    wall_time: float
    converged: bool
    cost_history: list[float]
    evaluations: int = 0


class SSVQEObjective:
    """Weighted cost and parameter-shift gradient for one problem.

    Batches of shifted angles are pushed through U(theta) together. In
    stochastic modes every circuit evaluation (one angle vector, one
    initial state) draws from its own random stream.
    """

    def __init__(self, problem: SSVQEProblem):
        self.problem = problem
        self.weights = np.array(problem.weights)
        self.indices = np.array(problem.initial_basis_indices)
        h = problem.hamiltonian
        self.identity = h.identity_coefficient()
        # the identity part is added back as a constant so it never feeds rounding into gradients
        self.h_dense = h.to_matrix() - self.identity * np.eye(2**h.n_qubits)
        if isinstance(problem.mode, Sampled):
            self.rotations = np.stack([rotation_to_basis(g.basis) for g in h.groups])
            self.observables = group_observables(h, h.groups)
        self.stream = 0
        self.evaluations = 0

    def _check(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.problem.n_params:
            raise ValueError(f"expected {self.problem.n_params} angles, got {theta.size}")
        return theta

    def energies(self, batch: np.ndarray) -> np.ndarray:
        """<H> per angle vector and initial state, shape (B, p)."""
        p = self.problem
        batch = np.atleast_2d(batch)
        self.evaluations += batch.shape[0]
        if isinstance(p.mode, Exact):
            u = ansatz_unitaries(batch, p.n_qubits, p.n_layers)[:, :, self.indices]
            return self.identity + np.einsum("bil,ij,bjl->bl", u.conj(), self.h_dense, u).real

        out = np.empty((batch.shape[0], len(self.indices)))
        if isinstance(p.mode, Sampled):
            u = ansatz_unitaries(batch, p.n_qubits, p.n_layers)[:, :, self.indices]
            probs = np.abs(np.einsum("gij,bjl->blgi", self.rotations, u)) ** 2
            for b in range(batch.shape[0]):
                for l in range(len(self.indices)):
                    self.stream += 1
                    out[b, l] = estimate_from_probabilities(
                        probs[b, l], self.observables, self.identity, p.mode.shots, p.mode.seed, self.stream
                    )
            return out

        for b, theta in enumerate(batch):
            params = AnsatzParams(p.n_qubits, p.n_layers, theta)
            for l, idx in enumerate(self.indices):
                self.stream += 1
                out[b, l] = expectation(params, p.hamiltonian, p.hamiltonian.groups, p.mode, int(idx), self.stream)
        return out

    def state_energies(self, theta: np.ndarray) -> np.ndarray:
        """Unweighted <H> for each initial state, in initial-state order."""
        return self.energies(self._check(theta)[None, :])[0]

    def cost(self, theta: np.ndarray) -> float:
        return float(self.state_energies(theta) @ self.weights)

    def grad(self, theta: np.ndarray) -> np.ndarray:
        theta = self._check(theta)
        n = theta.size
        shifts = np.eye(n) * (math.pi / 2)
        costs = self.energies(np.concatenate([theta + shifts, theta - shifts])) @ self.weights
        return 0.5 * (costs[:n] - costs[n:])


def cost(theta: AnsatzParams | np.ndarray, problem: SSVQEProblem) -> float:
    """Weighted sum of expectation values over the initial states."""
    flat = theta.flat if isinstance(theta, AnsatzParams) else theta
    return SSVQEObjective(problem).cost(flat)


def gradient(theta: AnsatzParams | np.ndarray, problem: SSVQEProblem) -> np.ndarray:
    """Parameter-shift gradient: g_i = [C(theta + pi/2 e_i) - C(theta - pi/2 e_i)] / 2."""
    flat = theta.flat if isinstance(theta, AnsatzParams) else theta
    return SSVQEObjective(problem).grad(flat)


def minimize(
    problem: SSVQEProblem,
    opt: OptimizerConfig,
    theta_init: AnsatzParams | np.ndarray,
) -> SSVQEResult:
    """Run optimizer cycles until consecutive costs differ by less than ``opt.tol``.

    Stochastic modes require the criterion on ``STOCHASTIC_STREAK``
    consecutive cycles. The returned angles are those with the lowest cost
    seen; energies are re-evaluated there and sorted ascending.
    """
    start = time.perf_counter()
    objective = SSVQEObjective(problem)
    optimizer = make_optimizer(opt)
    theta = objective._check(theta_init.flat if isinstance(theta_init, AnsatzParams) else theta_init)

    c_prev = objective.cost(theta)
    if not math.isfinite(c_prev):
        raise DivergenceError("initial cost is not finite")
    history = [c_prev]
    best_cost, best_theta = c_prev, theta.copy()
    needed = STOCHASTIC_STREAK if problem.stochastic else 1
    streak = 0
    converged = False
    cycles = 0
    while cycles < opt.max_cycles:
        theta = optimizer.step(theta, objective)
        cycles += 1
        c = objective.cost(theta)
        if not (math.isfinite(c) and np.all(np.isfinite(theta))):
            raise DivergenceError(f"cost became non-finite after {cycles} cycles")
        history.append(c)
        if c < best_cost:
            best_cost, best_theta = c, theta.copy()
        streak = streak + 1 if abs(c - c_prev) < opt.tol else 0
        c_prev = c
        if streak >= needed:
            converged = True
            break

    energies = objective.state_energies(best_theta)
    order = np.argsort(energies, kind="stable")
    evaluations = objective.evaluations
    if isinstance(optimizer, ConjugateGradient):
        log.debug("CG line-search probes: %d", optimizer.probes)
    return SSVQEResult(
        energies=energies[order],
        basis_order=[problem.initial_basis_indices[i] for i in order],
        theta_opt=AnsatzParams(problem.n_qubits, problem.n_layers, best_theta),
        cycles=cycles,
        wall_time=time.perf_counter() - start,
        converged=converged,
        cost_history=history,
        evaluations=evaluations,
    )


@dataclass
class BandPoint:
    k: KPoint
    energies: np.ndarray  # SSVQE, ascending
    exact: np.ndarray
    errors: np.ndarray
    cycles: int
    wall_time: float
    converged: bool
    diverged: bool
    theta: Optional[AnsatzParams]
    basis_order: list[int]


@dataclass
class BandStructureResult:
    material: str
    n_layers: int
    optimizer: str
    mode: str
    points: list[BandPoint]

    @property
    def errors(self) -> np.ndarray:
        return np.array([p.errors for p in self.points])

    @property
    def any_diverged(self) -> bool:
        return any(p.diverged for p in self.points)

    @property
    def total_cycles(self) -> int:
        return sum(p.cycles for p in self.points)


def mode_label(mode: EvalMode) -> str:
    if isinstance(mode, Exact):
        return "statevector"
    if isinstance(mode, Sampled):
        return "sampled"
    return "noisy"


def hamiltonian_at(material: MaterialParams, k: KPoint, convention=SignConvention.FIGURE, kane_sqrt3=False) -> PauliHamiltonian:
    return decompose(build_hamiltonian(material, k, convention, kane_sqrt3))


def _with_seed(mode: EvalMode, offset: int) -> EvalMode:
    """Shift the master seed of a stochastic mode so k-points draw distinct streams."""
    if isinstance(mode, Exact):
        return mode
    return type(mode)(**{**mode.__dict__, "seed": mode.seed + offset})


def _sweep_chunk(
    material: MaterialParams,
    path: Sequence[KPoint],
    n_layers: int,
    opt: OptimizerConfig,
    mode: EvalMode,
    seed: int,
    warm_start: bool,
    convention,
    kane_sqrt3: bool,
    point_offset: int = 0,
    weights: Sequence[float] = DEFAULT_WEIGHTS,
) -> list[BandPoint]:
    rng = np.random.default_rng(seed)
    n_qubits = 2
    theta = AnsatzParams.random(n_qubits, n_layers, rng)
    points = []
    for i, k in enumerate(path):
        if not warm_start and i > 0:
            theta = AnsatzParams.random(n_qubits, n_layers, rng)
        h_matrix = build_hamiltonian(material, k, convention, kane_sqrt3)
        exact = eigh(h_matrix).eigenvalues
        problem = SSVQEProblem(
            decompose(h_matrix),
            weights=weights,
            initial_basis_indices=tuple(range(len(weights))),
            n_layers=n_layers,
            mode=_with_seed(mode, 1000 * (point_offset + i)),
        )
        try:
            res = minimize(problem, opt, theta)
        except DivergenceError as exc:
            log.warning("k-point %d diverged: %s", point_offset + i, exc)
            nan = np.full(len(weights), np.nan)
            points.append(BandPoint(k, nan, exact, nan, opt.max_cycles, 0.0, False, True, None, []))
            continue
        errors = np.abs(res.energies - exact[: len(res.energies)])
        points.append(
            BandPoint(k, res.energies, exact, errors, res.cycles, res.wall_time, res.converged, False, res.theta_opt, res.basis_order)
        )
        theta = res.theta_opt
    return points


def band_sweep(
    material: MaterialParams,
    path: Sequence[KPoint],
    n_layers: int = 5,
    opt: Optional[OptimizerConfig] = None,
    mode: EvalMode = Exact(),
    seed: int = 1234,
    warm_start: bool = True,
    chunks: int = 1,
    convention=SignConvention.FIGURE,
    kane_sqrt3: bool = False,
) -> BandStructureResult:
    """SSVQE at every k-point, each warm-started from its predecessor.

    With ``chunks > 1`` the path is cut into contiguous pieces solved in
    separate processes; each piece cold-starts at its head.
    """
    if not path:
        raise ValueError("path is empty")
    opt = opt or OptimizerConfig()
    chunks = max(1, min(chunks, len(path)))
    bounds = np.linspace(0, len(path), chunks + 1).astype(int)
    pieces = [(bounds[c], bounds[c + 1]) for c in range(chunks)]
    args = [
        (material, list(path[a:b]), n_layers, opt, mode, seed + c, warm_start, convention, kane_sqrt3, int(a))
        for c, (a, b) in enumerate(pieces)
    ]
    if chunks == 1:
        points = _sweep_chunk(*args[0])
    else:
        with ProcessPoolExecutor(max_workers=chunks) as pool:
            points = [p for part in pool.map(_sweep_chunk, *zip(*args)) for p in part]
    return BandStructureResult(material.name, n_layers, opt.kind.value, mode_label(mode), points)
