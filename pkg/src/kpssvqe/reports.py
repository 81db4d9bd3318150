"""CSV/JSON output for band sweeps, spectra and benchmarks."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .circuit import AnsatzParams, EvalMode, Exact
from .kp_model import KPoint, MaterialParams
from .optimizers import OptimizerConfig
from .ssvqe import BandPoint, BandStructureResult, band_sweep

BAND_COLUMNS = (
    ["index", "path_coord", "kx", "ky", "kz"]
    + [f"e{i}" for i in range(4)]
    + [f"x{i}" for i in range(4)]
    + [f"err{i}" for i in range(4)]
    + ["cycles", "seconds"]
)
SPECTRUM_COLUMNS = ["photon_energy_eV", "alpha_normalized"]
BENCHMARK_COLUMNS = [
    "layers",
    "optimizer",
    "mean_cycles",
    "min_cycles",
    "max_cycles",
    "mean_seconds",
    "mean_seconds_per_cycle",
    "converged_fraction",
]


def _fmt(x: float) -> str:
    return repr(float(x))


def band_csv(result: BandStructureResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BAND_COLUMNS)
    for i, p in enumerate(result.points):
        row = [i, _fmt(p.k.path_coord), _fmt(p.k.kx), _fmt(p.k.ky), _fmt(p.k.kz)]
        row += [_fmt(e) for e in p.energies] + [_fmt(e) for e in p.exact] + [_fmt(e) for e in p.errors]
        row += [p.cycles, f"{p.wall_time:.6f}"]
        writer.writerow(row)
    return buf.getvalue()


def deterministic_band_csv(text: str) -> str:
    """Drop the wall-clock column so two runs can be compared byte for byte."""
    rows = list(csv.reader(io.StringIO(text)))
    return "\n".join(",".join(r[:-1]) for r in rows) + "\n"


def band_to_dict(result: BandStructureResult, material: MaterialParams | None = None, extra: dict | None = None) -> dict:
    errors = result.errors
    finite = errors[np.isfinite(errors).all(axis=1)] if errors.size else errors
    return {
        "material": result.material,
        "material_params": material.to_dict() if material else None,
        "layers": result.n_layers,
        "optimizer": result.optimizer,
        "mode": result.mode,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "summary": {
            "max_error": float(finite.max()) if finite.size else None,
            "median_error": float(np.median(finite)) if finite.size else None,
            "total_cycles": result.total_cycles,
            "diverged_points": [i for i, p in enumerate(result.points) if p.diverged],
        },
        "points": [
            {
                "k": [p.k.kx, p.k.ky, p.k.kz],
                "path_coord": p.k.path_coord,
                "energies": list(map(float, p.energies)),
                "exact": list(map(float, p.exact)),
                "errors": list(map(float, p.errors)),
                "cycles": p.cycles,
                "seconds": p.wall_time,
                "converged": p.converged,
                "diverged": p.diverged,
                "basis_order": list(p.basis_order),
                "theta": p.theta.flat.tolist() if p.theta is not None else None,
            }
            for p in result.points
        ],
        **(extra or {}),
    }


def band_from_dict(doc: dict) -> BandStructureResult:
    points = []
    for d in doc["points"]:
        theta = None
        if d.get("theta") is not None:
            theta = AnsatzParams(2, doc["layers"], np.array(d["theta"]))
        points.append(
            BandPoint(
                k=KPoint(*d["k"], d["path_coord"]),
                energies=np.array(d["energies"], dtype=float),
                exact=np.array(d["exact"], dtype=float),
                errors=np.array(d["errors"], dtype=float),
                cycles=d["cycles"],
                wall_time=d["seconds"],
                converged=d["converged"],
                diverged=d["diverged"],
                theta=theta,
                basis_order=list(d["basis_order"]),
            )
        )
    return BandStructureResult(doc["material"], doc["layers"], doc["optimizer"], doc["mode"], points)


def write_band_result(result: BandStructureResult, out_dir: Path, material: MaterialParams | None = None, extra=None) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"bands_{result.material}"
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    csv_path.write_text(band_csv(result))
    json_path.write_text(json.dumps(band_to_dict(result, material, extra), indent=2))
    return csv_path, json_path


def spectrum_csv(photon_energies: np.ndarray, alpha: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SPECTRUM_COLUMNS)
    for w, a in zip(photon_energies, alpha):
        writer.writerow([f"{w:.6f}", _fmt(a)])
    return buf.getvalue()


@dataclass
class BenchmarkRow:
    layers: int
    optimizer: str
    mean_cycles: float
    min_cycles: int
    max_cycles: int
    mean_seconds: float
    mean_seconds_per_cycle: float
    converged_fraction: float

    def as_list(self) -> list:
        return [getattr(self, c) for c in BENCHMARK_COLUMNS]


def run_benchmark(
    material: MaterialParams,
    path: Sequence[KPoint],
    layers_range: Sequence[int],
    optimizers: Sequence[OptimizerConfig],
    seed: int = 1234,
    mode: EvalMode = Exact(),
) -> list[BenchmarkRow]:
    """Cycle and timing statistics over the path for each (layers, optimizer)."""
    if not optimizers:
        raise ValueError("no optimizers given")
    if not layers_range:
        raise ValueError("no layer counts given")
    if not isinstance(mode, Exact):
        raise ValueError("benchmarks run in statevector mode only")
    rows = []
    for layers in layers_range:
        for opt in optimizers:
            res = band_sweep(material, path, layers, opt, mode, seed=seed)
            cycles = np.array([p.cycles for p in res.points])
            seconds = np.array([p.wall_time for p in res.points])
            rows.append(
                BenchmarkRow(
                    layers=int(layers),
                    optimizer=opt.kind.value,
                    mean_cycles=float(cycles.mean()),
                    min_cycles=int(cycles.min()),
                    max_cycles=int(cycles.max()),
                    mean_seconds=float(seconds.mean()),
                    mean_seconds_per_cycle=float(seconds.sum() / max(cycles.sum(), 1)),
                    converged_fraction=float(np.mean([p.converged for p in res.points])),
                )
            )
    return rows


def benchmark_csv(rows: Sequence[BenchmarkRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCHMARK_COLUMNS)
    for r in rows:
        writer.writerow(r.as_list())
    return buf.getvalue()


def error_table(result: BandStructureResult) -> str:
    """Plain-text per-point error table in meV."""
    lines = [f"{'idx':>4} {'path':>8} " + " ".join(f"{'err' + str(i) + ' meV':>11}" for i in range(4)) + f" {'cycles':>7}"]
    for i, p in enumerate(result.points):
        errs = " ".join(f"{1000 * e:11.4f}" for e in p.errors)
        lines.append(f"{i:4d} {p.k.path_coord:8.4f} {errs} {p.cycles:7d}")
    e = result.errors
    lines.append(f"max {1000 * np.nanmax(e):.4f} meV, median {1000 * np.nanmedian(e):.4f} meV")
    return "\n".join(lines)
