"""k.p band structures of zinc-blende semiconductors solved with SSVQE on a
simulated two-qubit circuit."""

from .circuit import AnsatzParams, Exact, Noisy, NoiseConfig, Sampled, expectation
from .kp_model import (
    KPoint,
    MaterialError,
    MaterialParams,
    SignConvention,
    build_hamiltonian,
    bundled_material,
    load_material,
    load_material_file,
    make_kpath,
)
from .optimizers import OptimizerConfig, OptimizerKind
from .oracle import direct_amplitude, eigh, eigvalsh
from .pauli import PauliHamiltonian, decompose, qwc_partition, reconstruct
from .spectra import TransitionRequest, absorption, call_budget, transition_amplitude
from .ssvqe import BandStructureResult, SSVQEProblem, SSVQEResult, band_sweep, cost, gradient, minimize

__version__ = "0.1.0"

__all__ = [
    "AnsatzParams",
    "Exact",
    "Noisy",
    "NoiseConfig",
    "Sampled",
    "expectation",
    "KPoint",
    "MaterialError",
    "MaterialParams",
    "SignConvention",
    "build_hamiltonian",
    "bundled_material",
    "load_material",
    "load_material_file",
    "make_kpath",
    "OptimizerConfig",
    "OptimizerKind",
    "direct_amplitude",
    "eigh",
    "eigvalsh",
    "PauliHamiltonian",
    "decompose",
    "qwc_partition",
    "reconstruct",
    "TransitionRequest",
    "absorption",
    "call_budget",
    "transition_amplitude",
    "BandStructureResult",
    "SSVQEProblem",
    "SSVQEResult",
    "band_sweep",
    "cost",
    "gradient",
    "minimize",
]
