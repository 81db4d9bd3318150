"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 partial failure (or
accuracy bounds missed in ``validate``), 3 divergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .circuit import Exact, EvalMode, Noisy, NoiseConfig, Sampled
from .kp_model import (
    BUNDLED_MATERIALS,
    KPoint,
    MaterialError,
    MaterialParams,
    SignConvention,
    build_hamiltonian,
    bundled_material,
    load_material_file,
    make_kpath,
)
from .optimizers import OptimizerConfig, OptimizerKind
from .pauli import PauliHamiltonian, decompose
from .reports import (
    band_from_dict,
    benchmark_csv,
    error_table,
    run_benchmark,
    spectrum_csv,
    write_band_result,
)
from .spectra import absorption, classical_absorption, default_omega_grid, identity_observable, momentum_observable
from .ssvqe import BandStructureResult, band_sweep

log = logging.getLogger("kpssvqe")

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL, EXIT_DIVERGED = 0, 1, 2, 3
DEFAULT_SEED = 1234
MODE_DEFAULTS = {
    "statevector": {"tol": 1e-7, "shots": None},
    "sampled": {"tol": 1e-4, "shots": 10000},
    "noisy": {"tol": 1e-3, "shots": 10000},
}
MAX_ERROR_BOUND = 0.05
MEDIAN_ERROR_BOUND = 0.005


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    material: MaterialParams
    n_layers: int = 5
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    mode: str = "statevector"
    shots: Optional[int] = None
    seed: int = DEFAULT_SEED
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    n_per_segment: int = 21
    extent: float = 0.1
    out_dir: Path = Path("results")
    workers: int = 1
    plot: bool = True
    convention: SignConvention = SignConvention.FIGURE
    kane_sqrt3: bool = False

    def __post_init__(self):
        if self.mode not in MODE_DEFAULTS:
            raise ConfigError(f"mode: unknown mode {self.mode!r}")
        if self.n_layers < 1:
            raise ConfigError("layers: must be at least 1")
        if self.n_per_segment < 2:
            raise ConfigError("kpoints: need at least 2 points per segment")
        if not 0 < self.extent <= 1:
            raise ConfigError("extent: must lie in (0, 1]")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots: must be positive")

    def eval_mode(self) -> EvalMode:
        shots = self.shots if self.shots is not None else MODE_DEFAULTS[self.mode]["shots"]
        if self.mode == "statevector":
            return Exact()
        if self.mode == "sampled":
            return Sampled(shots, self.seed)
        return Noisy(self.noise, shots, self.seed)

    def path(self) -> list[KPoint]:
        return make_kpath(self.material.a, self.n_per_segment, self.extent)

    def metadata(self) -> dict:
        return {
            "config": {
                "mode": self.mode,
                "shots": self.shots if self.shots is not None else MODE_DEFAULTS[self.mode]["shots"],
                "seed": self.seed,
                "optimizer": self.optimizer.kind.value,
                "step_rate": self.optimizer.step_rate,
                "tol": self.optimizer.tol,
                "max_cycles": self.optimizer.max_cycles,
                "noise": vars(self.noise),
                "n_per_segment": self.n_per_segment,
                "extent": self.extent,
                "convention": self.convention.value,
                "kane_sqrt3": self.kane_sqrt3,
            }
        }


def resolve_material(spec: str) -> MaterialParams:
    """A bundled compound name or a path to a material JSON file."""
    path = Path(spec)
    if path.exists():
        try:
            return load_material_file(path)
        except MaterialError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if spec in BUNDLED_MATERIALS:
        return bundled_material(spec)
    raise ConfigError(f"{spec}: no such material file or bundled compound")


def run_bands(cfg: RunConfig) -> tuple[BandStructureResult, list[Path]]:
    """Sweep the k-path and write CSV, JSON and (optionally) a PNG."""
    result = band_sweep(
        cfg.material,
        cfg.path(),
        cfg.n_layers,
        cfg.optimizer,
        cfg.eval_mode(),
        seed=cfg.seed,
        chunks=cfg.workers,
        convention=cfg.convention,
        kane_sqrt3=cfg.kane_sqrt3,
    )
    files = list(write_band_result(result, cfg.out_dir, cfg.material, cfg.metadata()))
    if cfg.plot:
        from .plotting import plot_bands

        files.append(plot_bands(result, cfg.out_dir / f"bands_{result.material}.png"))
    return result, files


def bounds_ok(result: BandStructureResult) -> bool:
    e = result.errors
    if result.any_diverged or not np.isfinite(e).all():
        return False
    return float(e.max()) <= MAX_ERROR_BOUND and float(np.median(e)) <= MEDIAN_ERROR_BOUND


@dataclass
class MaterialsReport:
    results: dict[str, BandStructureResult]
    failures: dict[str, str]

    @property
    def exit_code(self) -> int:
        if self.failures or any(r.any_diverged for r in self.results.values()):
            return EXIT_PARTIAL
        return EXIT_OK


def run_all_materials(config_dir: Path, base: Optional[RunConfig] = None) -> MaterialsReport:
    """One band sweep per material file in ``config_dir``; failures stay isolated."""
    config_dir = Path(config_dir)
    files = sorted(config_dir.glob("*.json")) if config_dir.is_dir() else []
    if not files:
        raise ConfigError(f"{config_dir}: no material files found")
    results, failures = {}, {}
    for f in files:
        try:
            material = load_material_file(f)
            if base is None:
                cfg = RunConfig(material)
            else:
                cfg = RunConfig(**{**vars(base), "material": material})
            results[material.name], _ = run_bands(cfg)
        except (MaterialError, ConfigError, OSError, ValueError) as exc:
            log.error("%s: %s", f, exc)
            failures[f.name] = str(exc)
    return MaterialsReport(results, failures)


def load_observable(spec: str, material: MaterialParams) -> PauliHamiltonian:
    if spec == "identity":
        return identity_observable(2)
    if spec.startswith("momentum-") and spec[-1] in "xyz" and len(spec) == len("momentum-x"):
        return momentum_observable(material, spec[-1])
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"observable: {spec!r} is neither a known name nor a file")
    try:
        doc = json.loads(path.read_text())
        if "matrix" in doc:
            m = np.asarray(doc["matrix"], dtype=float)
            m = m + 1j * np.asarray(doc.get("imag", np.zeros_like(m)), dtype=float)
            return decompose(m)
        terms = [(t["string"], float(t["coefficient"])) for t in doc["terms"]]
        return PauliHamiltonian(len(terms[0][0]), terms).with_groups()
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: invalid observable file ({exc})") from exc


def parse_layers(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            layers = list(range(lo, hi + 1))
        else:
            layers = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"layers: cannot parse {text!r}") from exc
    if not layers or min(layers) < 1:
        raise ConfigError(f"layers: {text!r} gives no valid layer counts")
    return layers


def parse_kvector(text: str) -> KPoint:
    try:
        kx, ky, kz = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"k: expected KX,KY,KZ, got {text!r}") from exc
    return KPoint(kx, ky, kz)


def _optimizer(args, tol: float) -> OptimizerConfig:
    try:
        kind = OptimizerKind.parse(args.optimizer)
    except ValueError as exc:
        raise ConfigError(f"optimizer: {exc}") from exc
    return OptimizerConfig(kind=kind, step_rate=args.lr, tol=tol, max_cycles=args.max_cycles)


def config_from_args(args) -> RunConfig:
    material = resolve_material(args.material)
    tol = args.tol if args.tol is not None else MODE_DEFAULTS[args.mode]["tol"]
    try:
        noise = NoiseConfig(args.noise_1q, args.noise_2q, args.noise_readout)
    except ValueError as exc:
        raise ConfigError(f"noise: {exc}") from exc
    return RunConfig(
        material=material,
        n_layers=args.layers,
        optimizer=_optimizer(args, tol),
        mode=args.mode,
        shots=args.shots,
        seed=args.seed,
        noise=noise,
        n_per_segment=args.kpoints,
        extent=args.extent,
        out_dir=Path(args.out),
        workers=args.workers,
        plot=not args.no_plot,
        convention=SignConvention(args.convention),
        kane_sqrt3=args.kane_sqrt3,
    )


def cmd_decompose(args) -> int:
    material = resolve_material(args.material)
    h = decompose(build_hamiltonian(material, parse_kvector(args.k), SignConvention(args.convention)))
    doc = {
        "material": material.name,
        "k": args.k,
        "terms": [{"string": s, "coefficient": c} for s, c in h.terms],
        "groups": [{"basis": g.basis, "member_strings": g.member_strings(h)} for g in h.groups],
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_bands(args) -> int:
    cfg = config_from_args(args)
    result, files = run_bands(cfg)
    for f in files:
        print(f)
    if result.any_diverged:
        log.error("divergence at points %s", [i for i, p in enumerate(result.points) if p.diverged])
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_validate(args) -> int:
    args.mode = "statevector"
    cfg = config_from_args(args)
    cfg.plot = False
    result = band_sweep(cfg.material, cfg.path(), cfg.n_layers, cfg.optimizer, Exact(), seed=cfg.seed, chunks=cfg.workers)
    print(error_table(result))
    if result.any_diverged:
        return EXIT_DIVERGED
    ok = bounds_ok(result)
    print("PASS" if ok else "FAIL", f"(max <= {MAX_ERROR_BOUND} eV, median <= {MEDIAN_ERROR_BOUND} eV)")
    return EXIT_OK if ok else EXIT_PARTIAL


def cmd_spectrum(args) -> int:
    material = resolve_material(args.material)
    path = Path(args.bands_result)
    try:
        band = band_from_dict(json.loads(path.read_text()))
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: cannot read band result ({exc})") from exc
    observable = load_observable(args.observable, material)
    mode: EvalMode = Exact() if args.shots is None else Sampled(args.shots, args.seed)
    usable = [p for p in band.points if not p.diverged]
    if not usable:
        raise ConfigError(f"{path}: every k-point diverged")
    grid = default_omega_grid(min(p.energies[-1] - p.energies[-2] for p in usable), args.step)
    spec = absorption(band, observable, grid, mode, args.printed_step)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"spectrum_{band.material}"
    (out / f"{stem}.csv").write_text(spectrum_csv(spec.photon_energies, spec.alpha))
    sidecar = {
        "material": band.material,
        "bands_result": str(path),
        "observable": args.observable,
        "mode": "statevector" if args.shots is None else "sampled",
        "printed_step": args.printed_step,
        "calls_per_kpoint": spec.calls_per_kpoint,
        "transitions": [{"energy": e, "strength": w} for e, w in spec.transitions],
    }
    (out / f"{stem}.json").write_text(json.dumps(sidecar, indent=2))
    print(out / f"{stem}.csv")
    if not args.no_plot:
        from .plotting import plot_spectrum

        ref = classical_absorption(band, observable, grid, args.printed_step).alpha
        print(plot_spectrum(spec.photon_energies, spec.alpha, out / f"{stem}.png", band.material, ref))
    return EXIT_DIVERGED if band.any_diverged else EXIT_OK


def cmd_benchmark(args) -> int:
    material = resolve_material(args.material)
    layers = parse_layers(args.layers)
    names = [n.strip() for n in args.optimizers.split(",") if n.strip()]
    if not names:
        raise ConfigError("optimizers: empty optimizer set")
    try:
        opts = [
            OptimizerConfig(kind=OptimizerKind.parse(n), step_rate=args.lr, tol=args.tol, max_cycles=args.max_cycles)
            for n in names
        ]
    except ValueError as exc:
        raise ConfigError(f"optimizers: {exc}") from exc
    path = make_kpath(material.a, args.kpoints, args.extent)
    rows = run_benchmark(material, path, layers, opts, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"benchmark_{material.name}"
    (out / f"{stem}.csv").write_text(benchmark_csv(rows))
    (out / f"{stem}.json").write_text(
        json.dumps({"material": material.name, "seed": args.seed, "n_kpoints": len(path), "rows": [vars(r) for r in rows]}, indent=2)
    )
    print(out / f"{stem}.csv")
    if not args.no_plot:
        from .plotting import plot_benchmark

        print(plot_benchmark(rows, out / f"{stem}.png", material.name))
    return EXIT_OK


def cmd_materials(args) -> int:
    base = config_from_args(args)
    report = run_all_materials(Path(args.directory), base)
    for name, res in report.results.items():
        e = res.errors
        print(f"{name:8s} max {np.nanmax(e):.3e} eV  median {np.nanmedian(e):.3e} eV")
    for name, msg in report.failures.items():
        print(f"FAILED {name}: {msg}", file=sys.stderr)
    return report.exit_code


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--layers", type=int, default=5)
    p.add_argument("--optimizer", default="adam")
    p.add_argument("--lr", type=float, default=0.01, help="step rate")
    p.add_argument("--tol", type=float, default=None, help="convergence threshold in eV (mode default if omitted)")
    p.add_argument("--max-cycles", type=int, default=2000)
    p.add_argument("--mode", choices=sorted(MODE_DEFAULTS), default="statevector")
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--kpoints", type=int, default=21, help="points per path segment")
    p.add_argument("--extent", type=float, default=0.1, help="fraction of Gamma-X and Gamma-L covered")
    p.add_argument("--noise-1q", type=float, default=0.0)
    p.add_argument("--noise-2q", type=float, default=0.0)
    p.add_argument("--noise-readout", type=float, default=0.0)
    p.add_argument("--workers", type=int, default=1, help="processes over k-path chunks")
    p.add_argument("--convention", choices=[c.value for c in SignConvention], default=SignConvention.FIGURE.value)
    p.add_argument("--kane-sqrt3", action="store_true")
    p.add_argument("--out", default="results")
    p.add_argument("--no-plot", action="store_true", help="skip PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kpssvqe", description="k.p band structures with SSVQE on a simulated quantum circuit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="Pauli terms and measurement groups of H(k)")
    p.add_argument("--material", required=True)
    p.add_argument("--k", required=True, help="KX,KY,KZ in 1/Angstrom")
    p.add_argument("--convention", choices=[c.value for c in SignConvention], default=SignConvention.FIGURE.value)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("bands", help="band structure along X-Gamma-L")
    p.add_argument("--material", required=True)
    _add_run_options(p)
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("validate", help="statevector sweep with an error table")
    p.add_argument("--material", required=True)
    _add_run_options(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("spectrum", help="absorption spectrum from a saved band result")
    p.add_argument("--material", required=True)
    p.add_argument("--bands-result", required=True)
    p.add_argument("--observable", default="momentum-z", help="identity, momentum-x|y|z, or a JSON file")
    p.add_argument("--shots", type=int, default=None, help="sample expectations instead of exact")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--step", type=float, default=0.005, help="photon energy grid step in eV")
    p.add_argument("--printed-step", action="store_true", help="use step(e_vc - w) instead of step(w - e_vc)")
    p.add_argument("--out", default="results")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("benchmark", help="cycles and timing over layer counts and optimizers")
    p.add_argument("--material", required=True)
    p.add_argument("--layers", default="2..7")
    p.add_argument("--optimizers", default="adam,adagrad,nesterov,cg")
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-cycles", type=int, default=2000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--kpoints", type=int, default=21)
    p.add_argument("--extent", type=float, default=0.1)
    p.add_argument("--out", default="results")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("materials", help="band structure for every material file in a directory")
    p.add_argument("directory")
    p.add_argument("--material", default="GaAs", help=argparse.SUPPRESS)
    _add_run_options(p)
    p.set_defaults(func=cmd_materials)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, MaterialError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
