import numpy as np
import pytest

from kpssvqe.circuit import AnsatzParams, Sampled
from kpssvqe.kp_model import make_kpath
from kpssvqe.oracle import direct_amplitude
from kpssvqe.pauli import decompose
from kpssvqe.spectra import (
    TransitionRequest,
    absorption,
    assemble_spectrum,
    call_budget,
    classical_absorption,
    default_omega_grid,
    identity_observable,
    momentum_observable,
    superposition_states,
    transition_amplitude,
)
from kpssvqe.ssvqe import band_sweep

from conftest import random_hermitian

PAIRS = [(v, c) for v in range(4) for c in range(4) if v != c]


def same_up_to_phase(a, b):
    return abs(abs(np.vdot(a, b)) - 1) < 1e-12


@pytest.mark.parametrize("v, c", PAIRS)
def test_superposition_states(v, c):
    plus_x, plus_y = superposition_states(v, c)
    ev, ec = np.eye(4)[v], np.eye(4)[c]
    assert same_up_to_phase(plus_x, (ev + ec) / np.sqrt(2))
    assert same_up_to_phase(plus_y, (ev + 1j * ec) / np.sqrt(2))


def test_superposition_rejects_equal_indices():
    with pytest.raises(ValueError):
        superposition_states(1, 1)


@pytest.mark.parametrize("v, c", PAIRS)
def test_amplitude_matches_direct(rng, v, c):
    theta = AnsatzParams.random(2, 3, rng)
    t = random_hermitian(rng, 4)
    req = TransitionRequest([theta], [v], c, decompose(t))
    assert abs(transition_amplitude(req, 0) - direct_amplitude(theta, v, c, t)) < 1e-12


def test_identity_observable_gives_zero_amplitude(rng):
    theta = AnsatzParams.random(2, 2, rng)
    req = TransitionRequest([theta], [0, 1, 2], 3, identity_observable())
    assert all(abs(transition_amplitude(req, 0, v)) < 1e-12 for v in (0, 1, 2))


def test_missing_theta():
    req = TransitionRequest([None], [0], 3, identity_observable())
    with pytest.raises(ValueError):
        transition_amplitude(req, 0)
    with pytest.raises(ValueError):
        TransitionRequest([None], [0, 3], 3, identity_observable())


def test_sampled_amplitude_close(rng):
    theta = AnsatzParams.random(2, 2, rng)
    t = random_hermitian(rng, 4)
    req = TransitionRequest([theta], [0], 3, decompose(t), Sampled(100000, 4))
    assert abs(transition_amplitude(req, 0) - direct_amplitude(theta, 0, 3, t)) < 0.05


@pytest.mark.parametrize("n, budget", [(0, 0), (1, 4), (2, 7), (3, 10)])
def test_call_budget(n, budget):
    assert call_budget(n) == budget


def test_call_budget_unshared():
    assert call_budget(3, shared_conduction=False) == 12
    with pytest.raises(ValueError):
        call_budget(-1)


def test_step_spectrum_shape():
    grid = np.linspace(0.1, 3.0, 30)
    alpha = assemble_spectrum([(1.0, 2.0), (2.0, 1.0)], grid)
    assert alpha.max() == pytest.approx(1.0)
    assert np.all(alpha[grid < 1.0] == 0)
    assert np.all(np.diff(alpha * grid) >= -1e-12)


def test_printed_step_is_mirror():
    grid = np.linspace(0.1, 3.0, 30)
    alpha = assemble_spectrum([(1.0, 1.0)], grid, printed_step=True)
    assert np.all(alpha[grid > 1.0] == 0)


def test_all_zero_spectrum_unscaled():
    grid = default_omega_grid(1.5)
    assert np.array_equal(assemble_spectrum([(1.0, 0.0)], grid), np.zeros_like(grid))


@pytest.mark.parametrize("grid", [np.array([0.0, 1.0]), np.array([1.0, 0.5]), np.array([])])
def test_grid_validation(grid):
    with pytest.raises(ValueError):
        assemble_spectrum([], grid)


def test_default_grid():
    grid = default_omega_grid(1.519)
    assert grid[0] == pytest.approx(0.005)
    assert grid[-1] == pytest.approx(2.52, abs=0.005)


def test_momentum_observable_is_interband_only(gaas):
    t = momentum_observable(gaas, "z").to_matrix()
    assert np.allclose(t[:3, :3], 0) and t[3, 3] == 0
    assert np.allclose(t, t.conj().T)
    assert np.abs(t[:3, 3]).max() > 0


@pytest.fixture(scope="module")
def short_band(gaas):
    return band_sweep(gaas, make_kpath(gaas.a, 4, 0.1), n_layers=5, seed=2)


def test_quantum_and_classical_spectra_agree(short_band, gaas):
    obs = momentum_observable(gaas, "z")
    grid = default_omega_grid(gaas.eps_gamma)
    q = absorption(short_band, obs, grid)
    c = classical_absorption(short_band, obs, grid)
    assert np.abs(q.alpha - c.alpha).max() < 1e-6
    assert q.calls_per_kpoint == 10
    gap = min(p.energies[-1] - p.energies[-2] for p in short_band.points)
    assert np.all(q.alpha[grid < gap] == 0)
    assert np.all(np.diff(q.alpha * grid) >= -1e-12)


def test_diverged_points_skipped(short_band, gaas):
    import copy

    band = copy.deepcopy(short_band)
    band.points[0].diverged = True
    band.points[0].theta = None
    spec = absorption(band, momentum_observable(gaas, "x"))
    assert len(spec.transitions) == 3 * (len(band.points) - 1)


def test_identity_spectra_are_exactly_zero(short_band):
    grid = default_omega_grid(1.5)
    assert np.array_equal(absorption(short_band, identity_observable(), grid).alpha, np.zeros_like(grid))
    assert np.array_equal(classical_absorption(short_band, np.eye(4), grid).alpha, np.zeros_like(grid))
