"""Command-line interface: ``gwc-bssrdf <command> [options]``.

Angles on the command line are in radians; scene files use degrees.
Exit codes: 0 success, 1 usage or runtime error, 2 validation threshold exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .core.errors import BssrdfError
from .core.medium import DEFAULT_CONVENTION, MediumParams, SignConvention
from .core.rng import uniform_block
from .evaluation.figures import (
    anchor_fit_error,
    compare_sign_conventions,
    emit_error_histogram,
    emit_heatmap,
)
from .evaluation.framework import validate
from .model.serialization import load, save
from .model.table import BuildConfig, TableGrids, build_table
from .model.wrapped_cauchy import AXIS_ANCHORS, OPTIMIZED_ANCHORS
from .reporting.html_report import HTMLReportGenerator
from .reporting.junit import JUnitXMLWriter
from .simulation.pbd import BUILD_SAMPLES, ORACLE_SAMPLES, BeamGeometry, eval_sp_ms
from .simulation.scene import load_scene
from .simulation.tracer import trace_beam

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_THRESHOLD = 2


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(data: dict[str, Any], as_json: bool) -> None:
    if as_json:
        print(json.dumps(data, indent=2))
    else:
        for key, value in data.items():
            print(f"{key}: {value}")


def _convention(args: argparse.Namespace) -> SignConvention:
    return SignConvention(flip_zb=args.flip_zb, flip_virtual_flux=args.flip_virtual_flux)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_build(args: argparse.Namespace) -> int:
    grids = TableGrids.build(
        n_rho=args.n_rho, n_theta=args.n_theta, n_r=args.n_r, r_growth=args.r_growth
    )
    config = BuildConfig(
        grids=grids,
        convention=_convention(args),
        workers=args.workers,
        diagnostics=args.diagnostics,
    )
    table = build_table(args.eta, args.g, build_samples=args.samples, config=config)
    path = save(table, args.out)
    _emit({"table": str(path), **table.stats.to_dict()}, args.json)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    table = load(args.table)
    value = float(table.evaluate(args.rho, args.theta, args.r, args.phi))
    report: dict[str, Any] = {"model": value}
    if args.oracle:
        params = MediumParams.from_albedo(table.eta, table.g, args.rho)
        geom = BeamGeometry(theta=args.theta, r=args.r, phi=args.phi)
        reference = eval_sp_ms(params, geom, n_samples=args.oracle_samples, convention=table.convention)
        report["oracle"] = reference
        report["rel_error"] = (value - reference) / reference if reference > 0 else math.nan
    _emit(report, args.json)
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    table = load(args.table)
    u = uniform_block(args.seed, 0, args.n)
    r, phi, pdf = table.sample_exit_batch(args.rho, args.theta, u[:, 0], u[:, 1])
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    np.savez(out, r=r, phi=phi, pdf=pdf)
    _emit({"samples": int(args.n), "out": str(out), "mean_r": float(r.mean())}, args.json)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    table = load(args.table)
    stats = validate(
        table, args.rho, args.theta, n=args.n, seed=args.seed,
        oracle_samples=args.oracle_samples, model=args.model,
    )
    if args.html:
        HTMLReportGenerator().generate([stats], args.html, build_stats=table.stats,
                                       threshold=args.max_mean_rel_error)
    if args.junit:
        threshold = args.max_mean_rel_error if args.max_mean_rel_error is not None else math.inf
        JUnitXMLWriter().write([stats], threshold, args.junit)
    _emit(stats.to_dict(), args.json)
    if args.max_mean_rel_error is not None and stats.mean_rel_error > args.max_mean_rel_error:
        logger.error(
            "mean relative error %.4f%% exceeds %.4f%%", stats.mean_rel_error, args.max_mean_rel_error
        )
        return EXIT_THRESHOLD
    return EXIT_OK


def cmd_heatmap(args: argparse.Namespace) -> int:
    params = MediumParams.from_albedo(args.eta, args.g, args.rho)
    if args.compare_conventions:
        report = compare_sign_conventions(params, args.theta, args.extent, args.resolution, args.samples)
        _emit(report, True)
        return EXIT_OK
    heatmap = emit_heatmap(
        params, args.theta, args.extent, args.resolution, args.out,
        n_samples=args.samples, convention=_convention(args),
    )
    _emit({k: str(v) for k, v in heatmap.paths.items()}, args.json)
    return EXIT_OK


def cmd_histogram(args: argparse.Namespace) -> int:
    table = load(args.table)
    histogram = emit_error_histogram(
        table, args.rho, args.theta, args.n, args.bins, args.out,
        seed=args.seed, oracle_samples=args.oracle_samples,
    )
    _emit({"stats": histogram.stats.to_dict(), **{k: str(v) for k, v in histogram.paths.items()}},
          args.json)
    return EXIT_OK


def cmd_trace_beam(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene)
    material = scene.materials[0]
    table_dir = Path(args.table_dir)
    table_path = table_dir / f"eta{material.eta:g}_g{material.g:g}_n{scene.build_samples}.bsrt"
    table = load(table_path) if table_path.exists() else None
    if table is not None and table.convention != DEFAULT_CONVENTION:
        logger.info("Cached table %s uses signs %s; rebuilding", table_path, table.convention.label())
        table = None
    if table is None:
        logger.info("No usable cached table at %s; building one", table_path)
        table = build_table(material.eta, material.g, build_samples=scene.build_samples)
        save(table, table_path)
    result = trace_beam(scene, table, out=args.out)
    report = {
        "emitted": result.emitted.tolist(),
        "centroids": [result.centroid(k) for k in range(3)],
        **{k: str(v) for k, v in result.paths.items()},
    }
    _emit(report, args.json)
    return EXIT_OK


def cmd_anchors(args: argparse.Namespace) -> int:
    params = MediumParams.from_albedo(args.eta, args.g, args.rho)
    report = {}
    for name, anchors in (("optimized", OPTIMIZED_ANCHORS), ("axis", AXIS_ANCHORS)):
        study = anchor_fit_error(params, args.theta, args.r, anchors, n_samples=args.samples)
        report[name] = study.to_dict()
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as fh:
            json.dump(report, fh, indent=2)
    _emit(report, True)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_sign_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--flip-zb", action=argparse.BooleanOptionalAction,
                   default=DEFAULT_CONVENTION.flip_zb,
                   help="use a positive extrapolated-boundary offset")
    p.add_argument("--flip-virtual-flux", action=argparse.BooleanOptionalAction,
                   default=DEFAULT_CONVENTION.flip_virtual_flux,
                   help="virtual-source flux factor -z_v instead of z_r + 2 z_b (default: on)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gwc-bssrdf", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="tabulate the model for one material")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--samples", type=int, default=BUILD_SAMPLES, help="beam samples per oracle call")
    p.add_argument("--out", required=True, help="output .bsrt path")
    p.add_argument("--diagnostics", help="HDF5 file receiving per-slice fit diagnostics")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--n-rho", type=int, default=100)
    p.add_argument("--n-theta", type=int, default=10)
    p.add_argument("--n-r", type=int, default=64)
    p.add_argument("--r-growth", type=float, default=1.2)
    p.add_argument("--json", action="store_true")
    _add_sign_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("eval", help="evaluate the model at one point")
    p.add_argument("--table", required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--oracle", action="store_true", help="also evaluate the PBD reference")
    p.add_argument("--oracle-samples", type=int, default=ORACLE_SAMPLES)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sample", help="importance-sample exit points into an .npz file")
    p.add_argument("--table", required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("validate", help="relative error of the model against the oracle")
    p.add_argument("--table", required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle-samples", type=int, default=ORACLE_SAMPLES)
    p.add_argument("--model", choices=("table", "perpendicular"), default="table")
    p.add_argument("--max-mean-rel-error", type=float, help="fail (exit 2) above this mean, in percent")
    p.add_argument("--html", help="write an HTML report")
    p.add_argument("--junit", help="write a JUnit XML report")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("heatmap", help="oracle field over the surface plane")
    p.add_argument("--eta", type=float, default=1.33)
    p.add_argument("--g", type=float, default=0.0)
    p.add_argument("--rho", type=float, default=0.95)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--extent", type=float, default=8.0)
    p.add_argument("--resolution", type=int, default=128)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--out", default="heatmap")
    p.add_argument("--compare-conventions", action="store_true",
                   help="report diagnostics for all four sign variants instead of writing images")
    p.add_argument("--json", action="store_true")
    _add_sign_flags(p)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("histogram", help="histogram of signed relative errors")
    p.add_argument("--table", required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle-samples", type=int, default=ORACLE_SAMPLES)
    p.add_argument("--out", default="histogram")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("trace-beam", help="render a cone of light on a slab")
    p.add_argument("--scene", required=True, help="YAML scene file")
    p.add_argument("--out", default="beam")
    p.add_argument("--table-dir", default=".tables", help="where tables are cached")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_trace_beam)

    p = sub.add_parser("anchors", help="compare fitted profiles for both anchor sets")
    p.add_argument("--eta", type=float, default=1.33)
    p.add_argument("--g", type=float, default=0.0)
    p.add_argument("--rho", type=float, default=0.99)
    p.add_argument("--theta", type=float, default=math.radians(89.0))
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=ORACLE_SAMPLES)
    p.add_argument("--out")
    p.set_defaults(func=cmd_anchors)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        return args.func(args)
    except BssrdfError as exc:
        print(f"gwc-bssrdf {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"gwc-bssrdf {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
