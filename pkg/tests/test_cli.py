import json
import shutil

import numpy as np
import pytest

from kpssvqe.cli import (
    EXIT_CONFIG,
    EXIT_DIVERGED,
    EXIT_OK,
    EXIT_PARTIAL,
    ConfigError,
    RunConfig,
    main,
    parse_layers,
    run_all_materials,
)
from kpssvqe.kp_model import bundled_material, bundled_material_dir
from kpssvqe.reports import BAND_COLUMNS, BENCHMARK_COLUMNS, SPECTRUM_COLUMNS, band_from_dict, deterministic_band_csv

FAST = ["--kpoints", "2", "--layers", "2", "--max-cycles", "300"]


def header(path):
    return path.read_text().splitlines()[0].split(",")


def test_decompose(capsys):
    assert main(["decompose", "--material", "GaAs", "--k", "0.05,0,0"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    strings = [t["string"] for t in doc["terms"]]
    assert len(strings) == len(set(strings)) <= 16
    members = sorted(s for g in doc["groups"] for s in g["member_strings"])
    assert members == sorted(strings)


def test_bands_outputs(tmp_path):
    out = tmp_path / "r"
    assert main(["bands", "--material", "GaAs", *FAST, "--out", str(out)]) == EXIT_OK
    csv_path = out / "bands_GaAs.csv"
    assert header(csv_path) == BAND_COLUMNS
    assert len(csv_path.read_text().splitlines()) == 1 + 3
    doc = json.loads((out / "bands_GaAs.json").read_text())
    assert doc["config"]["tol"] == 1e-7 and doc["layers"] == 2
    assert len(band_from_dict(doc).points) == 3
    assert (out / "bands_GaAs.png").stat().st_size > 0


def test_bands_deterministic(tmp_path):
    bodies = []
    for name in ("a", "b"):
        main(["bands", "--material", "InP", *FAST, "--seed", "5", "--no-plot", "--out", str(tmp_path / name)])
        bodies.append(deterministic_band_csv((tmp_path / name / "bands_InP.csv").read_text()))
    assert bodies[0] == bodies[1]
    assert not (tmp_path / "a" / "bands_InP.png").exists()


@pytest.mark.parametrize("mode, tol, shots", [("statevector", 1e-7, None), ("sampled", 1e-4, 10000), ("noisy", 1e-3, 10000)])
def test_mode_defaults(mode, tol, shots):
    from kpssvqe.cli import build_parser, config_from_args

    args = build_parser().parse_args(["bands", "--material", "GaAs", "--mode", mode])
    cfg = config_from_args(args)
    assert cfg.optimizer.tol == tol
    assert cfg.metadata()["config"]["shots"] == shots
    assert getattr(cfg.eval_mode(), "shots", None) == shots


def test_spectrum(tmp_path):
    out = tmp_path / "r"
    main(["bands", "--material", "GaAs", *FAST, "--no-plot", "--out", str(out)])
    rc = main(["spectrum", "--material", "GaAs", "--bands-result", str(out / "bands_GaAs.json"), "--out", str(out)])
    assert rc == EXIT_OK
    assert header(out / "spectrum_GaAs.csv") == SPECTRUM_COLUMNS
    side = json.loads((out / "spectrum_GaAs.json").read_text())
    assert side["calls_per_kpoint"] == 10
    assert (out / "spectrum_GaAs.png").exists()


def test_spectrum_observable_file(tmp_path):
    out = tmp_path / "r"
    main(["bands", "--material", "GaAs", *FAST, "--no-plot", "--out", str(out)])
    obs = tmp_path / "t.json"
    obs.write_text(json.dumps({"terms": [{"string": "XI", "coefficient": 1.0}, {"string": "IX", "coefficient": 0.5}]}))
    args = ["spectrum", "--material", "GaAs", "--bands-result", str(out / "bands_GaAs.json"), "--no-plot", "--out", str(out)]
    assert main([*args, "--observable", str(obs)]) == EXIT_OK
    assert main([*args, "--observable", "identity"]) == EXIT_OK
    alpha = np.loadtxt(out / "spectrum_GaAs.csv", delimiter=",", skiprows=1)[:, 1]
    assert np.all(alpha == 0)
    assert main([*args, "--observable", "nonsense"]) == EXIT_CONFIG


def test_benchmark(tmp_path):
    out = tmp_path / "r"
    rc = main(["benchmark", "--material", "GaAs", "--layers", "2..3", "--optimizers", "adam,cg", "--kpoints", "2", "--out", str(out)])
    assert rc == EXIT_OK
    assert header(out / "benchmark_GaAs.csv") == BENCHMARK_COLUMNS
    rows = json.loads((out / "benchmark_GaAs.json").read_text())["rows"]
    assert len(rows) == 4
    assert all(r["min_cycles"] <= r["mean_cycles"] <= r["max_cycles"] for r in rows)


def test_benchmark_empty_optimizer_set():
    assert main(["benchmark", "--material", "GaAs", "--optimizers", ","]) == EXIT_CONFIG


@pytest.mark.parametrize("text, expected", [("2..7", [2, 3, 4, 5, 6, 7]), ("3", [3]), ("2,5", [2, 5])])
def test_parse_layers(text, expected):
    assert parse_layers(text) == expected


@pytest.mark.parametrize("text", ["", "x..3", "0..2"])
def test_parse_layers_rejects(text):
    with pytest.raises(ConfigError):
        parse_layers(text)


def test_validate(capsys):
    rc = main(["validate", "--material", "GaAs", "--kpoints", "3"])
    out = capsys.readouterr().out
    assert rc == EXIT_OK and "PASS" in out and "median" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["bands", "--material", "missing.json"],
        ["bands", "--material", "GaAs", "--optimizer", "lbfgs"],
        ["bands", "--material", "GaAs", "--noise-1q", "2"],
        ["bands", "--material", "GaAs", "--extent", "0"],
        ["decompose", "--material", "GaAs", "--k", "1,2"],
    ],
)
def test_config_errors(argv, capsys):
    assert main(argv) == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_material_error_reports_path_and_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    doc = bundled_material("GaAs").to_dict()
    doc["eps_gamma"] = -1
    bad.write_text(json.dumps(doc))
    assert main(["bands", "--material", str(bad)]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert str(bad) in err and "eps_gamma" in err


def test_divergence_exit_code(tmp_path, monkeypatch):
    import kpssvqe.ssvqe as engine

    def boom(*a, **k):
        raise engine.DivergenceError("injected")

    monkeypatch.setattr(engine, "minimize", boom)
    assert main(["bands", "--material", "GaAs", *FAST, "--no-plot", "--out", str(tmp_path)]) == EXIT_DIVERGED


def test_all_materials_partial_failure(tmp_path):
    src = tmp_path / "mats"
    shutil.copytree(bundled_material_dir(), src, ignore=shutil.ignore_patterns("*.py", "__pycache__"))
    (src / "GaP.json").write_text("{ not json")
    base = RunConfig(bundled_material("GaAs"), n_layers=2, n_per_segment=2, out_dir=tmp_path / "out", plot=False)
    report = run_all_materials(src, base)
    assert len(report.results) == 6 and list(report.failures) == ["GaP.json"]
    assert report.exit_code == EXIT_PARTIAL
    assert len(list((tmp_path / "out").glob("bands_*.csv"))) == 6


def test_all_materials_empty_dir(tmp_path):
    with pytest.raises(ConfigError):
        run_all_materials(tmp_path)
    assert main(["materials", str(tmp_path)]) == EXIT_CONFIG
