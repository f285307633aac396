"""Batch front end: `mrc solve config.json` and `mrc sweep config.json`.

Outputs are machine-readable: a JSON solve report, a CSV convergence
history, and (when an exact oracle is configured) a CSV of field errors on
enclosing spheres. All floats are printed with 17 significant digits so
reports are byte-reproducible. Exit codes: 0 success, 2 config error,
3 geometry error, 4 solver degeneracy, 5 nonconvergence (report still
written).

The environment variable MRC_SEED is reserved but ignored: the pipeline
contains no randomness.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import driver, fields, geometry
from .config import RunConfig
from .errors import ConfigError, GeometryError, SolverError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GEOMETRY = 3
EXIT_SOLVER = 4
EXIT_NONCONVERGED = 5

HISTORY_COLUMNS = ["L", "residual_l2", "residual_rel", "sup_residual", "rank", "cond_estimate"]
FIELD_ERROR_COLUMNS = ["R", "l2_error", "sup_error"]


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (list, tuple)):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def _dumps_17g(obj, indent: int = 0) -> str:
    """JSON text with every float printed to 17 significant digits."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {_dumps_17g(v, indent + 1)}' for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{pad}  {_dumps_17g(v, indent + 1)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format(obj, ".17g")
    return json.dumps(obj)


def _write_csv(path: Path, columns: list[str], rows: list[list]) -> None:
    import csv as _csv
    import io

    buf = io.StringIO()
    writer = _csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue())


def _default_outputs(outputs: dict, out_dir: Path | None) -> dict:
    resolved = {
        "report": outputs.get("report", "report.json"),
        "history_csv": outputs.get("history_csv", "history.csv"),
        "field_error_csv": outputs.get("field_error_csv", "field_errors.csv"),
        "field_radii": outputs.get("field_radii"),
    }
    base = out_dir if out_dir is not None else Path.cwd()
    for key in ("report", "history_csv", "field_error_csv"):
        p = Path(resolved[key])
        resolved[key] = p if p.is_absolute() else base / p
    return resolved


def execute_run(cfg: RunConfig, base_dir: Path | None = None):
    """Run one solve; returns (report, field_error_rows)."""
    spec = cfg.surface_spec()
    rule = cfg.quadrature_rule(spec)
    data = cfg.boundary_data(spec, rule, base_dir)
    report = driver.run_mrc(spec, rule, data, cfg.mrc_config())

    error_rows = []
    oracle = cfg.oracle()
    if oracle is not None:
        radii = cfg.outputs.get("field_radii")
        if radii is None:
            radii = [2.0 * geometry.enclosing_radius(spec)]
        for R in radii:
            err = fields.error_on_enclosing_sphere(report.field, oracle, float(R))
            error_rows.append([float(R), err.l2, err.sup])
    return report, error_rows


def write_reports(cfg: RunConfig, report, error_rows, out_dir: Path | None, verbose: bool) -> None:
    paths = _default_outputs(cfg.outputs, out_dir)
    for key in ("report", "history_csv", "field_error_csv"):
        paths[key].parent.mkdir(parents=True, exist_ok=True)

    doc = report.to_dict()
    doc["config"] = cfg.to_dict()
    paths["report"].write_text(_dumps_17g(doc) + "\n")

    _write_csv(
        paths["history_csv"],
        HISTORY_COLUMNS,
        [[h.L, h.residual_l2, h.residual_rel, h.sup_residual, h.rank, h.cond_estimate] for h in report.history],
    )
    if error_rows:
        _write_csv(paths["field_error_csv"], FIELD_ERROR_COLUMNS, error_rows)

    if verbose:
        last = report.history[-1]
        print(
            f"termination={report.termination} chosen_L={report.chosen_L} "
            f"residual={_fmt(last.residual_l2)} rel={_fmt(last.residual_rel)}"
        )


def cmd_solve(args) -> int:
    cfg = RunConfig.load(args.config)
    base_dir = Path(args.config).parent
    out_dir = Path(args.out) if args.out else None
    report, error_rows = execute_run(cfg, base_dir)
    write_reports(cfg, report, error_rows, out_dir, args.verbose)
    return EXIT_OK if report.termination == driver.CONVERGED else EXIT_NONCONVERGED


def _set_by_path(doc: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = doc
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value


def _sweep_cell(base_doc: dict, keys: list[str], values: tuple, base_dir: Path | None) -> list:
    doc = json.loads(json.dumps(base_doc))
    for key, value in zip(keys, values):
        _set_by_path(doc, key, value)
    row = list(values)
    try:
        cfg = RunConfig.from_dict(doc, base_dir)
        report, error_rows = execute_run(cfg, base_dir)
        sr_error = error_rows[0][1] if error_rows else ""
        row += [report.termination, report.chosen_L if report.chosen_L is not None else "",
                report.final_residual, sr_error, ""]
    except (ConfigError, GeometryError, SolverError, ValueError) as exc:
        row += ["error", "", "", "", f"{type(exc).__name__}: {exc}"]
    return row


def cmd_sweep(args) -> int:
    cfg = RunConfig.load(args.config)
    if cfg.grid is None:
        raise ConfigError("sweep requires a 'grid' section in the config")
    base_dir = Path(args.config).parent
    out_dir = Path(args.out) if args.out else Path.cwd()
    out_dir.mkdir(parents=True, exist_ok=True)

    keys = sorted(cfg.grid)
    cells = list(itertools.product(*(cfg.grid[k] for k in keys)))
    if len(cells) > 10_000 and cells != [()]:
        raise ConfigError(f"sweep grid has {len(cells)} cells (limit 10000)")

    base_doc = cfg.to_dict()
    base_doc.pop("grid", None)
    columns = keys + ["termination", "chosen_L", "final_residual", "sr_error", "error"]

    if not keys:
        rows = []
    elif args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_sweep_cell, base_doc, keys, values, base_dir) for values in cells]
            rows = [f.result() for f in futures]  # submission order keeps rows deterministic
    else:
        rows = [_sweep_cell(base_doc, keys, values, base_dir) for values in cells]

    _write_csv(out_dir / cfg.outputs.get("sweep_csv", "sweep.csv"), columns, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run a single adaptive solve")
    p_solve.add_argument("config", help="path to a JSON run config")
    p_solve.add_argument("--out", default=None, help="directory for output files")
    p_solve.add_argument("--jobs", type=int, default=1, help="accepted for symmetry; a solve is sequential")
    p_solve.add_argument("--verbose", action="store_true")
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid of solves")
    p_sweep.add_argument("config", help="path to a JSON run config with a 'grid' section")
    p_sweep.add_argument("--out", default=None, help="directory for output files")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GeometryError as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
