"""Run configuration: a single JSON document describing one solve.

Schema (all floats; "grid" turns a run into a sweep, see cli):

    {
      "surface": {"preset": "sphere" | "spheroid" | "cosine_bump",
                  "params": {...}, "center": [x, y, z]},
      "bc": {"kind": "dirichlet" | "neumann" | "robin", "sigma": 0.0},
      "data": {"type": "point_source", "z": [x, y, z], "q": 1.0}
            | {"type": "band_limited", "coefficients": [[ell, m, value], ...]}
            | {"type": "tabulated", "path": "samples.csv"},
      "mrc": {"epsilon": ..., "L_start": 2, "L_step": 1, "L_max": 40,
              "svd_rtol": 1e-12, "stagnation_factor": 0.999},
      "quadrature": "auto" | {"n_theta": ..., "n_phi": ...},
      "outputs": {"report": "report.json", "history_csv": "history.csv",
                  "field_error_csv": "field_errors.csv",
                  "field_radii": [2.0, 4.0]}
    }

"auto" quadrature resolves to n_theta = L_max+2, n_phi = 2*L_max+2.
Tabulated samples are CSV rows theta,phi,f that must match the generated
quadrature nodes to 1e-12 in angle; no interpolation is attempted.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import driver, fields, geometry, harmonics
from .errors import ConfigError
from .lsq import BC_KINDS, DIRICHLET

_SURFACE_PARAMS = {
    "sphere": {"a"},
    "spheroid": {"a", "e"},
    "cosine_bump": {"a", "delta", "k", "p"},
}


@dataclass(frozen=True)
class RunConfig:
    surface: dict
    bc: dict
    data: dict
    mrc: dict
    quadrature: object  # "auto" or {"n_theta", "n_phi"}
    outputs: dict
    grid: dict | None = None

    @staticmethod
    def from_dict(doc: dict, base_dir: Path | None = None) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        for key in ("surface", "data", "mrc"):
            if key not in doc:
                raise ConfigError(f"config is missing required section {key!r}")
        cfg = RunConfig(
            surface=dict(doc["surface"]),
            bc=dict(doc.get("bc", {"kind": DIRICHLET})),
            data=dict(doc["data"]),
            mrc=dict(doc["mrc"]),
            quadrature=doc.get("quadrature", "auto"),
            outputs=dict(doc.get("outputs", {})),
            grid=dict(doc["grid"]) if "grid" in doc else None,
        )
        cfg.validate(base_dir)
        return cfg

    @staticmethod
    def load(path) -> "RunConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return RunConfig.from_dict(doc, base_dir=path.parent)

    def to_dict(self) -> dict:
        doc = {
            "surface": self.surface,
            "bc": self.bc,
            "data": self.data,
            "mrc": self.mrc,
            "quadrature": self.quadrature,
            "outputs": self.outputs,
        }
        if self.grid is not None:
            doc["grid"] = self.grid
        return doc

    # -- validation ----------------------------------------------------

    def validate(self, base_dir: Path | None = None) -> None:
        preset = self.surface.get("preset")
        if preset not in _SURFACE_PARAMS:
            raise ConfigError(f"unknown surface preset {preset!r}")
        params = self.surface.get("params", {})
        extra = set(params) - _SURFACE_PARAMS[preset]
        if extra:
            raise ConfigError(f"unknown parameters for {preset!r}: {sorted(extra)}")

        if self.bc.get("kind") not in BC_KINDS:
            raise ConfigError(f"unknown boundary condition {self.bc.get('kind')!r}")
        if self.bc.get("sigma", 0.0) < 0:
            raise ConfigError("Robin coefficient sigma must be >= 0")

        dtype = self.data.get("type")
        if dtype not in ("point_source", "band_limited", "tabulated"):
            raise ConfigError(f"unknown data type {dtype!r}")
        if dtype == "tabulated":
            path = Path(self.data.get("path", ""))
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            if not path.is_file():
                raise ConfigError(f"tabulated data file not found: {path}")

        # constructing MrcConfig runs the numeric range checks
        self.mrc_config()

        if self.quadrature != "auto":
            if not isinstance(self.quadrature, dict) or not {"n_theta", "n_phi"} <= set(self.quadrature):
                raise ConfigError('quadrature must be "auto" or {"n_theta": ..., "n_phi": ...}')

        if self.grid is not None:
            for key, vals in self.grid.items():
                if not isinstance(vals, list):
                    raise ConfigError(f"grid entry {key!r} must be a list of values")

    # -- construction of the run pieces ---------------------------------

    def surface_spec(self) -> geometry.SurfaceSpec:
        return geometry.SurfaceSpec(
            self.surface["preset"],
            dict(self.surface.get("params", {})),
            tuple(self.surface.get("center", (0.0, 0.0, 0.0))),
        )

    def mrc_config(self) -> driver.MrcConfig:
        m = self.mrc
        return driver.MrcConfig(
            epsilon=m.get("epsilon", -1.0),
            L_start=m.get("L_start", 2),
            L_step=m.get("L_step", 1),
            L_max=m.get("L_max", 40),
            svd_rtol=m.get("svd_rtol", 1e-12),
            stagnation_factor=m.get("stagnation_factor", 0.999),
            stagnation_patience=m.get("stagnation_patience", 3),
        )

    def quadrature_rule(self, spec: geometry.SurfaceSpec) -> geometry.QuadratureRule:
        if self.quadrature == "auto":
            L_max = self.mrc_config().L_max
            return geometry.build_quadrature(spec, L_max + 2, 2 * L_max + 2)
        return geometry.build_quadrature(spec, int(self.quadrature["n_theta"]), int(self.quadrature["n_phi"]))

    def oracle(self):
        """The exact-solution oracle, or None for tabulated data."""
        d = self.data
        if d["type"] == "point_source":
            return fields.PointSource(d["z"], d.get("q", 1.0))
        if d["type"] == "band_limited":
            entries = d["coefficients"]
            ell_max = max(int(e[0]) for e in entries)
            c = np.zeros(harmonics.n_terms(ell_max))
            for ell, m, value in entries:
                c[harmonics.flatten(int(ell), int(m))] = float(value)
            center = tuple(self.surface.get("center", (0.0, 0.0, 0.0)))
            return fields.BandLimited(c, center)
        return None

    def boundary_data(self, spec, rule, base_dir: Path | None = None) -> fields.BoundaryData:
        bc = self.bc["kind"]
        sigma = float(self.bc.get("sigma", 0.0))
        oracle = self.oracle()
        if oracle is not None:
            if isinstance(oracle, fields.PointSource):
                fields.interior_source_or_raise(spec, oracle.z)
            return fields.boundary_data_from_oracle(rule, oracle, bc, sigma)
        path = Path(self.data["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return boundary_data_from_csv(path, rule, bc, sigma)


def boundary_data_from_csv(path: Path, rule, bc: str, sigma: float) -> fields.BoundaryData:
    """Read theta,phi,f samples; node angles must match the rule to 1e-12."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["theta", "phi", "f"]:
            raise ConfigError(f"{path}: expected CSV header theta,phi,f")
        for row in reader:
            rows.append((float(row[0]), float(row[1]), float(row[2])))
    if len(rows) != rule.n_nodes:
        raise ConfigError(f"{path}: {len(rows)} samples but the rule has {rule.n_nodes} nodes")
    arr = np.asarray(rows)
    if np.max(np.abs(arr[:, 0] - rule.theta)) > 1e-12 or np.max(np.abs(arr[:, 1] - rule.phi)) > 1e-12:
        raise ConfigError(f"{path}: sample angles do not match the quadrature nodes (no interpolation)")
    return fields.BoundaryData(bc=bc, values=arr[:, 2].copy(), sigma=sigma, oracle=None)
