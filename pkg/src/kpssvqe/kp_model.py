"""Four-band k.p Hamiltonian for zinc-blende III-V compounds.

Basis ordering is (heavy hole, light hole, split-off, conduction). All
energies are in eV, lengths in Angstrom and wave vectors in 1/Angstrom.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

# hbar^2 / (2 m0) in eV * Angstrom^2 (CODATA 2018)
HBAR2_2M0 = 3.80998

MATERIAL_FIELDS = ("gamma1", "gamma2", "gamma3", "delta", "eps_gamma", "ep", "m_eff", "a")
BUNDLED_MATERIALS = ("GaAs", "InP", "InAs", "InSb", "AlP", "GaP", "GaSb")


class MaterialError(ValueError):
    """Invalid or incomplete material parameter file."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class SignConvention(str, Enum):
    # T and Q share the -hbar^2/2m0 prefactor, split-off sits at -delta
    FIGURE = "figure-consistent"
    # signs exactly as typeset: T negative, Q positive, split-off at +delta, m* in prefactors
    AS_PRINTED = "as-printed"


@dataclass(frozen=True)
class MaterialParams:
    name: str
    gamma1: float
    gamma2: float
    gamma3: float
    delta: float
    eps_gamma: float
    ep: float
    m_eff: float
    a: float

    def __post_init__(self):
        positive = {
            "eps_gamma": self.eps_gamma,
            "ep": self.ep,
            "m_eff": self.m_eff,
            "a": self.a,
            "gamma1": self.gamma1,
        }
        for key, value in positive.items():
            if not math.isfinite(value):
                raise MaterialError(key, f"{key} must be finite")
            if value <= 0:
                raise MaterialError(key, f"{key} must be positive")
        for key in ("gamma2", "gamma3", "delta"):
            if not math.isfinite(getattr(self, key)):
                raise MaterialError(key, f"{key} must be finite")
        if self.delta < 0:
            raise MaterialError("delta", "delta must be non-negative")
        if self.gamma1 <= 2 * abs(self.gamma2):
            raise MaterialError("gamma2", "gamma1 must exceed 2*|gamma2|")

    @property
    def kane_p(self) -> float:
        """Interband momentum matrix element P in eV*Angstrom."""
        return math.sqrt(self.ep * HBAR2_2M0)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class KPoint:
    kx: float
    ky: float
    kz: float
    path_coord: float = 0.0

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.kx, self.ky, self.kz])


def load_material(config_text: str) -> MaterialParams:
    """Parse a JSON material document into validated parameters.

    Every field of :class:`MaterialParams` must be present, numeric fields
    must be numbers, and unknown keys are rejected.
    """
    try:
        doc = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise MaterialError("<document>", f"not valid JSON ({exc.msg})") from None
    if not isinstance(doc, dict):
        raise MaterialError("<document>", "expected a JSON object")

    known = {"name", *MATERIAL_FIELDS}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise MaterialError(unknown[0], f"unknown key {unknown[0]!r}")
    for key in ("name", *MATERIAL_FIELDS):
        if key not in doc:
            raise MaterialError(key, f"missing field {key!r}")
    if not isinstance(doc["name"], str):
        raise MaterialError("name", "name must be a string")

    values = {}
    for key in MATERIAL_FIELDS:
        value = doc[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise MaterialError(key, f"{key} must be numeric, got {value!r}")
        values[key] = float(value)
    return MaterialParams(name=doc["name"], **values)


def load_material_file(path: Union[str, Path]) -> MaterialParams:
    return load_material(Path(path).read_text())


def bundled_material(name: str) -> MaterialParams:
    """Load one of the parameter files shipped with the package."""
    if name not in BUNDLED_MATERIALS:
        raise KeyError(f"no bundled material {name!r}; choose from {', '.join(BUNDLED_MATERIALS)}")
    text = resources.files("kpssvqe.materials").joinpath(f"{name}.json").read_text()
    return load_material(text)


def bundled_material_dir() -> Path:
    return Path(str(resources.files("kpssvqe.materials")))


def build_hamiltonian(
    params: MaterialParams,
    k: KPoint,
    convention: SignConvention = SignConvention.FIGURE,
    kane_sqrt3: bool = False,
) -> np.ndarray:
    """Return the 4x4 Hermitian k.p matrix at wave vector ``k``.

    ``kane_sqrt3`` replaces the -P_z/3 coupling between split-off and
    conduction states with the -P_z/sqrt(3) form.
    """
    convention = SignConvention(convention)
    kx, ky, kz = k.kx, k.ky, k.kz
    kpar2 = kx * kx + ky * ky
    k2 = kpar2 + kz * kz
    k_minus = (kx - 1j * ky) / math.sqrt(2)
    k_plus = (kx + 1j * ky) / math.sqrt(2)
    g1, g2, g3 = params.gamma1, params.gamma2, params.gamma3

    if convention is SignConvention.FIGURE:
        pref = HBAR2_2M0
        t = -pref * ((g1 - g2) * kpar2 + (g1 + 2 * g2) * kz * kz)
        q = -pref * ((g1 + g2) * kpar2 + (g1 - 2 * g2) * kz * kz)
        so_shift = -params.delta
    else:
        pref = HBAR2_2M0 / params.m_eff
        t = -pref * ((g1 - g2) * kpar2 + (g1 + 2 * g2) * kz * kz)
        q = pref * ((g1 + g2) * kpar2 + (g1 - 2 * g2) * kz * kz)
        so_shift = params.delta
    s = 1j * pref * 2 * math.sqrt(3) * g3 * kz * k_minus

    p = params.kane_p
    pz = p * kz
    p_plus = p * k_plus
    eg, d = params.eps_gamma, params.delta
    remote = 1.0 / params.m_eff - (params.ep / 3.0) * (2.0 / eg + 1.0 / (eg + d))
    e_gamma = eg + HBAR2_2M0 * k2 * remote

    h = np.zeros((4, 4), dtype=complex)
    h[0, 0] = t
    h[1, 1] = q
    h[2, 2] = (q + t) / 2 + so_shift
    h[3, 3] = e_gamma
    h[0, 1] = -s
    h[0, 2] = 1j * (t - q) / math.sqrt(2)
    h[0, 3] = -1j * math.sqrt(2.0 / 3.0) * pz
    h[1, 2] = -1j * np.conj(s) / math.sqrt(2)
    h[1, 3] = -p_plus
    h[2, 3] = -pz / math.sqrt(3) if kane_sqrt3 else -pz / 3
    lower = np.tril_indices(4, -1)
    h[lower] = h.T.conj()[lower]
    return h


def high_symmetry_points(a: float) -> dict[str, np.ndarray]:
    g = 2 * math.pi / a
    return {
        "X": np.array([g, 0.0, 0.0]),
        "G": np.zeros(3),
        "L": np.array([g / 2, g / 2, g / 2]),
    }


def make_kpath(a: float, n_per_segment: int = 21, extent: float = 0.1) -> list[KPoint]:
    """Sample X*extent -> Gamma -> L*extent uniformly.

    Each segment holds ``n_per_segment`` points including its ends; the
    shared Gamma point is emitted once, so the path has
    ``2 * n_per_segment - 1`` points.
    """
    if n_per_segment < 2:
        raise ValueError("n_per_segment must be at least 2")
    if not 0 < extent <= 1:
        raise ValueError("extent must lie in (0, 1]")
    if a <= 0:
        raise ValueError("lattice constant must be positive")
    pts = high_symmetry_points(a)
    start = pts["X"] * extent
    end = pts["L"] * extent
    s = np.linspace(0.0, 1.0, n_per_segment)
    first = [(1 - t) * start for t in s]
    second = [t * end for t in s[1:]]
    vectors = first + second

    path = []
    coord = 0.0
    prev = vectors[0]
    for vec in vectors:
        coord += float(np.linalg.norm(vec - prev))
        prev = vec
        path.append(KPoint(float(vec[0]), float(vec[1]), float(vec[2]), coord))
    return path
