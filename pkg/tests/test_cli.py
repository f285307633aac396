import csv
import json
from pathlib import Path

import numpy as np
import pytest

from mrc import cli
from mrc import geometry as G
from mrc.config import RunConfig


def write_config(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def base_config(**overrides):
    doc = {
        "surface": {"preset": "sphere", "params": {"a": 1.0}},
        "bc": {"kind": "dirichlet"},
        "data": {"type": "band_limited", "coefficients": [[3, 2, 1.0]]},
        "mrc": {"epsilon": 1e-10, "L_start": 0, "L_max": 12},
        "quadrature": "auto",
        "outputs": {},
    }
    doc.update(overrides)
    return doc


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_solve_band_limited(tmp_path):
    cfg = write_config(tmp_path, base_config())
    rc = cli.main(["solve", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["chosen_L"] == 3
    assert report["termination"] == "converged"


def test_negative_epsilon_is_config_error(tmp_path):
    doc = base_config()
    doc["mrc"]["epsilon"] = -1.0
    cfg = write_config(tmp_path, doc)
    rc = cli.main(["solve", str(cfg), "--out", str(tmp_path)])
    assert rc == cli.EXIT_CONFIG
    assert not (tmp_path / "report.json").exists()
    assert not (tmp_path / "history.csv").exists()


def test_malformed_config(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert cli.main(["solve", str(cfg)]) == cli.EXIT_CONFIG


def test_nonconvergence_exit_code_with_report(tmp_path):
    doc = base_config(
        data={"type": "point_source", "z": [0.3, 0.0, 0.0], "q": 1.0},
        mrc={"epsilon": 1e-15, "L_start": 0, "L_max": 10},
    )
    cfg = write_config(tmp_path, doc)
    rc = cli.main(["solve", str(cfg), "--out", str(tmp_path)])
    assert rc == cli.EXIT_NONCONVERGED
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["termination"] in ("stagnated", "L_max_reached")


def test_history_csv_non_increasing(tmp_path):
    doc = base_config(
        surface={"preset": "cosine_bump", "params": {"a": 1.0, "delta": 0.2, "k": 2, "p": 3}},
        data={"type": "point_source", "z": [0.3, 0.0, 0.0], "q": 1.0},
        mrc={"epsilon": 1e-6, "L_start": 2, "L_max": 30},
    )
    cfg = write_config(tmp_path, doc)
    rc = cli.main(["solve", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "history.csv")
    residuals = [float(r["residual_l2"]) for r in rows]
    assert all(b <= a for a, b in zip(residuals, residuals[1:]))
    errs = read_csv(tmp_path / "field_errors.csv")
    assert set(errs[0]) == {"R", "l2_error", "sup_error"}


def test_report_schema_complete(tmp_path):
    cfg = write_config(tmp_path, base_config())
    cli.main(["solve", str(cfg), "--out", str(tmp_path)])
    report = json.loads((tmp_path / "report.json").read_text())
    for key in (
        "chosen_L", "termination", "epsilon", "svd_rtol", "bc", "sigma", "f_norm",
        "final_residual", "rule_refined", "fd_derivatives", "history", "coefficients", "config",
    ):
        assert key in report
    for key in ("L", "residual_l2", "residual_rel", "sup_residual", "rank", "cond_estimate"):
        assert key in report["history"][0]


def test_config_roundtrip_bit_identical(tmp_path):
    doc = base_config()
    cfg1 = write_config(tmp_path, doc, "a.json")
    out1 = tmp_path / "out1"
    cli.main(["solve", str(cfg1), "--out", str(out1)])

    # re-serialize the parsed config and run again
    parsed = RunConfig.load(cfg1)
    cfg2 = write_config(tmp_path, parsed.to_dict(), "b.json")
    out2 = tmp_path / "out2"
    cli.main(["solve", str(cfg2), "--out", str(out2)])

    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "history.csv").read_bytes() == (out2 / "history.csv").read_bytes()


def test_sweep_epsilon_grid(tmp_path):
    doc = base_config(data={"type": "point_source", "z": [0.3, 0.0, 0.0], "q": 1.0})
    doc["mrc"]["L_max"] = 20
    doc["grid"] = {"mrc.epsilon": [1e-2, 1e-4, 1e-6, 1e-8]}
    cfg = write_config(tmp_path, doc)
    rc = cli.main(["sweep", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert [float(r["mrc.epsilon"]) for r in rows] == [1e-2, 1e-4, 1e-6, 1e-8]
    chosen = [int(r["chosen_L"]) for r in rows]
    assert chosen == sorted(chosen)  # tighter epsilon needs at least as many degrees


def test_sweep_empty_grid(tmp_path):
    doc = base_config()
    doc["grid"] = {}
    cfg = write_config(tmp_path, doc)
    rc = cli.main(["sweep", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    text = (tmp_path / "sweep.csv").read_text()
    assert text.splitlines() == ["termination,chosen_L,final_residual,sr_error,error"]


def test_sweep_delta_zero_matches_pure_sphere(tmp_path):
    doc = base_config(
        surface={"preset": "cosine_bump", "params": {"a": 1.0, "delta": 0.1, "k": 2, "p": 3}},
        data={"type": "point_source", "z": [0.3, 0.0, 0.0], "q": 1.0},
        mrc={"epsilon": 1e-6, "L_start": 2, "L_max": 25},
    )
    doc["grid"] = {"surface.params.delta": [0.0, 0.1, 0.2]}
    cfg = write_config(tmp_path, doc)
    assert cli.main(["sweep", str(cfg), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")

    sphere_doc = base_config(
        surface={"preset": "cosine_bump", "params": {"a": 1.0, "delta": 0.0, "k": 2, "p": 3}},
        data={"type": "point_source", "z": [0.3, 0.0, 0.0], "q": 1.0},
        mrc={"epsilon": 1e-6, "L_start": 2, "L_max": 25},
    )
    cfg2 = write_config(tmp_path, sphere_doc, "sphere.json")
    out2 = tmp_path / "sphere_out"
    cli.main(["solve", str(cfg2), "--out", str(out2)])
    report = json.loads((out2 / "report.json").read_text())
    row0 = rows[0]
    assert float(row0["surface.params.delta"]) == 0.0
    assert row0["termination"] == report["termination"]
    assert int(row0["chosen_L"]) == report["chosen_L"]
    assert float(row0["final_residual"]) == report["final_residual"]


def test_sweep_cell_failure_recorded_in_row(tmp_path):
    doc = base_config(data={"type": "point_source", "z": [0.3, 0.0, 0.0], "q": 1.0})
    doc["mrc"] = {"epsilon": 1e-6, "L_start": 0, "L_max": 20}
    doc["grid"] = {"data.z": [[0.3, 0.0, 0.0], [2.0, 0.0, 0.0]]}  # second source is exterior
    cfg = write_config(tmp_path, doc)
    assert cli.main(["sweep", str(cfg), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert rows[0]["termination"] == "converged"
    assert rows[1]["termination"] == "error"
    assert rows[1]["error"]


def test_sweep_jobs_parallel_deterministic(tmp_path):
    doc = base_config(data={"type": "point_source", "z": [0.3, 0.0, 0.0], "q": 1.0})
    doc["grid"] = {"mrc.epsilon": [1e-3, 1e-5, 1e-7]}
    cfg = write_config(tmp_path, doc)
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert cli.main(["sweep", str(cfg), "--out", str(out1), "--jobs", "3"]) == 0
    assert cli.main(["sweep", str(cfg), "--out", str(out2)]) == 0
    assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()


def test_tabulated_data_roundtrip(tmp_path):
    # samples written on the exact quadrature nodes reproduce the oracle run
    spec = G.SurfaceSpec.sphere(1.0)
    rule = G.build_quadrature(spec, 14, 26)  # auto size for L_max=12
    z = np.array([0.3, 0.0, 0.0])
    f = 1.0 / np.linalg.norm(rule.points - z, axis=1)
    lines = ["theta,phi,f"] + [
        f"{t:.17g},{p:.17g},{v:.17g}" for t, p, v in zip(rule.theta, rule.phi, f)
    ]
    (tmp_path / "samples.csv").write_text("\n".join(lines) + "\n")

    doc = base_config(
        data={"type": "tabulated", "path": "samples.csv"},
        mrc={"epsilon": 1e-6, "L_start": 0, "L_max": 12},
    )
    cfg = write_config(tmp_path, doc)
    rc = cli.main(["solve", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    report = json.loads((tmp_path / "report.json").read_text())

    doc2 = base_config(
        data={"type": "point_source", "z": [0.3, 0.0, 0.0], "q": 1.0},
        mrc={"epsilon": 1e-6, "L_start": 0, "L_max": 12},
    )
    cfg2 = write_config(tmp_path, doc2, "oracle.json")
    out2 = tmp_path / "o"
    cli.main(["solve", str(cfg2), "--out", str(out2)])
    report2 = json.loads((out2 / "report.json").read_text())
    assert report["chosen_L"] == report2["chosen_L"]
    assert report["final_residual"] == pytest.approx(report2["final_residual"], rel=1e-12)


def test_tabulated_angle_mismatch_fails_loudly(tmp_path):
    spec = G.SurfaceSpec.sphere(1.0)
    rule = G.build_quadrature(spec, 14, 26)
    f = np.ones(rule.n_nodes)
    lines = ["theta,phi,f"] + [
        f"{t + 1e-6:.17g},{p:.17g},{v:.17g}" for t, p, v in zip(rule.theta, rule.phi, f)
    ]
    (tmp_path / "samples.csv").write_text("\n".join(lines) + "\n")
    doc = base_config(data={"type": "tabulated", "path": "samples.csv"},
                      mrc={"epsilon": 1e-6, "L_start": 0, "L_max": 12})
    cfg = write_config(tmp_path, doc)
    assert cli.main(["solve", str(cfg), "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_geometry_error_exit_code(tmp_path):
    doc = base_config(surface={"preset": "torus", "params": {"a": 1.0}})
    cfg = write_config(tmp_path, doc)
    assert cli.main(["solve", str(cfg)]) == cli.EXIT_CONFIG  # unknown preset is config

    # interior-source violation surfaces as a config error as well
    doc2 = base_config(data={"type": "point_source", "z": [5.0, 0.0, 0.0], "q": 1.0})
    cfg2 = write_config(tmp_path, doc2, "g.json")
    assert cli.main(["solve", str(cfg2)]) == cli.EXIT_CONFIG


def test_float_formatting_17_digits(tmp_path):
    cfg = write_config(tmp_path, base_config())
    cli.main(["solve", str(cfg), "--out", str(tmp_path)])
    report = json.loads((tmp_path / "report.json").read_text())
    # every float in the file round-trips exactly through its text form
    coeff = next(c for c in report["coefficients"] if c["ell"] == 3 and c["m"] == 2)
    assert coeff["value"] == pytest.approx(1.0, abs=1e-11)
