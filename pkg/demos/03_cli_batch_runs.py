"""Driving batch solves through the command-line front end.

Writes a JSON run config and a sweep config to a scratch directory, invokes
the same entry points as the `mrc` console script, and shows the generated
reports. The sweep demonstrates how the required degree grows as the target
residual tightens.
"""

import json
import tempfile
from pathlib import Path

from mrc import cli

workdir = Path(tempfile.mkdtemp(prefix="mrc_demo_"))

solve_cfg = {
    "surface": {"preset": "spheroid", "params": {"a": 1.0, "e": 0.5}},
    "bc": {"kind": "dirichlet"},
    "data": {"type": "point_source", "z": [0.3, 0.0, 0.0], "q": 1.0},
    "mrc": {"epsilon": 1e-7, "L_start": 2, "L_max": 30},
    "quadrature": "auto",
    "outputs": {},
}
cfg_path = workdir / "solve.json"
cfg_path.write_text(json.dumps(solve_cfg, indent=2))

rc = cli.main(["solve", str(cfg_path), "--out", str(workdir), "--verbose"])
print(f"solve exit code: {rc}")
print((workdir / "history.csv").read_text())

sweep_cfg = dict(solve_cfg)
sweep_cfg["grid"] = {"mrc.epsilon": [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7]}
sweep_path = workdir / "sweep.json"
sweep_path.write_text(json.dumps(sweep_cfg, indent=2))

rc = cli.main(["sweep", str(sweep_path), "--out", str(workdir)])
print(f"sweep exit code: {rc}")
print((workdir / "sweep.csv").read_text())
print(f"outputs in {workdir}")
