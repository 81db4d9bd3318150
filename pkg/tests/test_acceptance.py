"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are gathered in the
pytest terminal summary. Running this file directly prints them too.
"""

import time

import numpy as np
import pytest

from kpssvqe.circuit import AnsatzParams, Noisy, NoiseConfig, Sampled, evolve_noisy, expectation, purity
from kpssvqe.kp_model import BUNDLED_MATERIALS, KPoint, build_hamiltonian, bundled_material, make_kpath
from kpssvqe.optimizers import OptimizerConfig
from kpssvqe.oracle import direct_amplitude
from kpssvqe.pauli import PauliHamiltonian, all_pauli_strings, check_partition, decompose, qwc_partition, reconstruct
from kpssvqe.reports import run_benchmark
from kpssvqe.spectra import (
    TransitionRequest,
    absorption,
    call_budget,
    classical_absorption,
    default_omega_grid,
    momentum_observable,
    transition_amplitude,
)
from kpssvqe.ssvqe import SSVQEObjective, SSVQEProblem, band_sweep

from conftest import random_hermitian, report

PROTOCOL = OptimizerConfig(step_rate=0.01, tol=1e-7)
SEED = 1234


def band_bounds(result):
    e = result.errors
    ok = not result.any_diverged and e.max() <= 0.05 and np.median(e) <= 0.005
    return ok, f"max {e.max() * 1000:.3f} meV, median {np.median(e) * 1000:.4f} meV"


@pytest.fixture(scope="module")
def gaas_bands():
    m = bundled_material("GaAs")
    return band_sweep(m, make_kpath(m.a, 21, 0.1), n_layers=5, opt=PROTOCOL, seed=SEED)


def test_01_pauli_round_trip():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = max(np.abs(reconstruct(decompose(m)) - m).max() for m in (random_hermitian(rng, 4) for _ in range(1000)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 5
    report(1, "Pauli round trip", ok, f"max error {worst:.2e} in {elapsed:.2f} s")
    assert ok


def test_02_qwc_sixteen_to_nine():
    start = time.perf_counter()
    h = PauliHamiltonian(2, [(s, 1.0) for s in all_pauli_strings(2)])
    groups = qwc_partition(h)
    check_partition(h, groups)
    elapsed = time.perf_counter() - start
    ok = len(groups) == 9 and elapsed < 1
    report(2, "QWC 16 -> 9", ok, f"{len(h.terms)} strings in {len(groups)} groups, {elapsed * 1000:.1f} ms")
    assert ok


def test_03_gaas_exact(gaas_bands):
    ok, detail = band_bounds(gaas_bands)
    ok = ok and len(gaas_bands.points) == 41
    report(3, "GaAs bands, statevector", ok, f"{len(gaas_bands.points)} points, {detail}")
    assert ok


@pytest.mark.parametrize("name", [n for n in BUNDLED_MATERIALS if n != "GaAs"])
def test_04_all_compounds(name):
    m = bundled_material(name)
    res = band_sweep(m, make_kpath(m.a, 21, 0.1), n_layers=5, opt=PROTOCOL, seed=SEED)
    ok, detail = band_bounds(res)
    report(4, f"{name} bands, statevector", ok, detail)
    assert ok


def test_05_parameter_shift():
    rng = np.random.default_rng(5)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        layers = int(rng.integers(1, 6))
        obj = SSVQEObjective(SSVQEProblem(decompose(random_hermitian(rng, 4)), n_layers=layers))
        theta = rng.uniform(-np.pi, np.pi, 6 * layers)
        ps = obj.grad(theta)
        h = 1e-5
        fd = np.array([(obj.cost(theta + h * e) - obj.cost(theta - h * e)) / (2 * h) for e in np.eye(theta.size)])
        worst = max(worst, np.abs(ps - fd).max() / np.abs(fd).max())
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 30
    report(5, "parameter-shift gradient", ok, f"max relative deviation {worst:.2e} in {elapsed:.1f} s")
    assert ok


def test_06_estimator_statistics():
    rng = np.random.default_rng(6)
    m = bundled_material("GaAs")
    h = decompose(build_hamiltonian(m, KPoint(0.05, 0.02, 0.03)))
    theta = AnsatzParams.random(2, 5, rng)
    start = time.perf_counter()
    exact = expectation(theta, h, basis_index=1)
    low = np.array([expectation(theta, h, mode=Sampled(100, s), basis_index=1) for s in range(200)])
    high = np.array([expectation(theta, h, mode=Sampled(10000, s), basis_index=1) for s in range(200)])
    elapsed = time.perf_counter() - start
    se = high.std(ddof=1) / np.sqrt(len(high))
    bias = abs(high.mean() - exact)
    ratio = low.std(ddof=1) / high.std(ddof=1)
    ok = bias <= 3 * se and 5 <= ratio <= 20 and elapsed < 120
    report(6, "sampled estimator", ok, f"bias {bias / se:.2f} SE, std ratio {ratio:.2f}, {elapsed:.1f} s")
    assert ok


def test_07_sampled_bands():
    m = bundled_material("GaAs")
    path = make_kpath(m.a, 3, 0.1)
    opt = OptimizerConfig(step_rate=0.01, tol=1e-4)
    res = band_sweep(m, path, n_layers=5, opt=opt, mode=Sampled(10000, SEED), seed=SEED)
    per_band = np.nanmax(res.errors, axis=0)
    ok = len(path) == 5 and not res.any_diverged and per_band.max() <= 0.4
    detail = "per-band max " + ", ".join(f"{e * 1000:.1f}" for e in per_band) + " meV"
    report(7, "GaAs bands, 10^4 shots", ok, f"{detail}; {res.total_cycles} cycles")
    assert ok


def test_08_noise_limits():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(50):
        theta = AnsatzParams.random(2, int(rng.integers(1, 6)), rng)
        h = decompose(random_hermitian(rng, 4))
        idx = int(rng.integers(0, 4))
        a = expectation(theta, h, mode=Noisy(NoiseConfig()), basis_index=idx)
        worst = max(worst, abs(a - expectation(theta, h, basis_index=idx)))
    mixed = max(abs(purity(evolve_noisy(AnsatzParams.random(2, 3, rng), i, NoiseConfig(1.0, 1.0))) - 0.25) for i in range(4))
    ok = worst <= 1e-10 and mixed <= 1e-10
    report(8, "noise reduction limits", ok, f"zero-noise deviation {worst:.1e}, purity offset {mixed:.1e}")
    assert ok


def test_09_transition_oracle():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        theta = AnsatzParams.random(2, int(rng.integers(1, 6)), rng)
        t = random_hermitian(rng, 4)
        v, c = rng.choice(4, size=2, replace=False)
        req = TransitionRequest([theta], [int(v)], int(c), decompose(t))
        worst = max(worst, abs(transition_amplitude(req, 0) - direct_amplitude(theta, int(v), int(c), t)))
    budget = call_budget(3)
    ok = worst <= 1e-10 and budget == 10
    report(9, "transition amplitudes", ok, f"max deviation {worst:.1e}, call budget {budget}")
    assert ok


def test_10_absorption_pipeline(gaas_bands):
    m = bundled_material("GaAs")
    observable = momentum_observable(m, "z")
    gap = min(p.energies[-1] - p.energies[-2] for p in gaas_bands.points)
    grid = default_omega_grid(gap)
    quantum = absorption(gaas_bands, observable, grid)
    classical = classical_absorption(gaas_bands, observable, grid)
    deviation = np.abs(quantum.alpha - classical.alpha).max()
    below = np.abs(quantum.alpha[grid < gap]).max()
    monotone = np.diff(quantum.alpha * grid).min()
    ok = deviation <= 1e-6 and below == 0 and monotone >= -1e-12 and quantum.alpha.max() == 1.0
    report(10, "absorption pipeline", ok, f"max deviation {deviation:.1e}, alpha below gap {below}, min increment of alpha*w {monotone:.1e}")
    assert ok


def test_11_benchmark_shape():
    m = bundled_material("GaAs")
    rows = run_benchmark(m, make_kpath(m.a, 21, 0.1), range(2, 8), [PROTOCOL], seed=SEED)
    means = [r.mean_cycles for r in rows]
    best = rows[int(np.argmin(means))].layers
    ok = len(rows) == 6 and 2 < best < 7
    table = ", ".join(f"L{r.layers}={r.mean_cycles:.1f}" for r in rows)
    report(11, "benchmark shape", ok, f"mean cycles {table}; minimum at {best} layers")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
