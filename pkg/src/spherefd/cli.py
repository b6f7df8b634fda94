"""Command-line entry point: ``spherefd run|bench|synth``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .errors import ConfigError, InputError, NumericError
from .pipeline import RunConfig, bench, bench_csv, format_report, key_value_block, run_box_cnt
from .structure import save_structure
from .synth import PD_LATTICE_CONSTANT, ShapeKind, ShapeSpec, generate_structure

EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4

_BOOL_PARAMS = {"trim_len", "rm_in_surf", "voxel_surf", "exact_surf"}
_HELP = {
    "rad_type": "radius table, atomic or metallic",
    "rad_mult": "multiplier on summed radii for the neighbour cutoff",
    "find_surf_alg": "alphaShape, convexHull or numNeigh",
    "alpha_mult": "alpha = alpha_mult * smallest radius",
    "trim_len": "drop box counts from extreme box sizes before fitting",
    "min_sample": "minimum points kept in the fit window",
    "conf_lvl": "confidence level of the slope interval, percent",
    "rm_in_surf": "remove inner-surface points and boxes",
    "voxel_surf": "run the voxelised point-cloud pipeline",
    "num_points": "surface points generated per atom",
    "grid_num": "voxels per grid edge",
    "exact_surf": "run the exact-surface pipeline",
    "min_len_mult": "smallest box length = min_len_mult * smallest radius",
    "max_len_mult": "largest box length = max_len_mult * largest radius",
    "num_cpus": "worker threads",
    "num_box_len": "number of exact-pipeline box lengths",
    "num_neigh_threshold": "numNeigh: atoms with fewer neighbours are surface",
}


def _flag(name):
    return "--" + name.replace("_", "-")


def _add_run_params(p):
    defaults = RunConfig()
    for f in fields(RunConfig):
        name = f.name
        if name not in _HELP:
            continue
        default = getattr(defaults, name)
        if name in _BOOL_PARAMS:
            p.add_argument(_flag(name), action=argparse.BooleanOptionalAction,
                           default=default, help=_HELP[name])
        else:
            kind = type(default) if default is not None else str
            if name == "conf_lvl":
                kind = float
            p.add_argument(_flag(name), type=kind, default=default,
                           help=f"{_HELP[name]} (default {default})")


def _config_from(args) -> RunConfig:
    kwargs = {f.name: getattr(args, f.name) for f in fields(RunConfig) if hasattr(args, f.name)}
    return RunConfig(**kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spherefd",
        description="Box-counting dimension of surfaces made of overlapping spheres.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="estimate the box-counting dimension of an XYZ file")
    run.add_argument("inp_file_path", nargs="?", help="XYZ coordinate file")
    _add_run_params(run)
    run.add_argument("-o", "--out-dir", help="directory for reports, CSVs and dumps")
    run.add_argument("--dump-surface-atoms", action="store_true")
    run.add_argument("--dump-points", action="store_true")
    run.add_argument("--dump-voxels", action="store_true")
    run.add_argument("--dump-boxes", action="store_true")
    run.add_argument("--plot", action="store_true", help="also render SVG plots")
    run.add_argument("--dump-config", action="store_true",
                     help="print the effective parameters as JSON and exit")
    run.add_argument("-v", "--verbose", action="store_true")

    b = sub.add_parser("bench", help="time both pipelines over a particle-size ladder")
    b.add_argument("--shape", default=ShapeKind.FCC_OCTAHEDRON.value,
                   choices=[k.value for k in ShapeKind])
    b.add_argument("--orders", type=int, nargs="+", default=[4, 6, 8, 11])
    b.add_argument("--element", default="Pd")
    b.add_argument("--lattice-constant", type=float, default=PD_LATTICE_CONSTANT)
    b.add_argument("--repeats", type=int, default=5)
    _add_run_params(b)
    b.add_argument("-o", "--output", help="CSV file (default stdout)")
    b.add_argument("-v", "--verbose", action="store_true")

    s = sub.add_parser("synth", help="write a generated structure as XYZ")
    s.add_argument("kind", choices=[k.value for k in ShapeKind])
    s.add_argument("--order", type=int, default=1)
    s.add_argument("--element", default="Pd")
    s.add_argument("--lattice-constant", type=float, default=PD_LATTICE_CONSTANT)
    s.add_argument("-o", "--output", required=True)
    return parser


def _cmd_run(args):
    config = _config_from(args)
    if args.dump_config:
        print(json.dumps(config.table_params(), indent=2))
        return EXIT_OK
    report = run_box_cnt(config)
    sys.stdout.write(format_report(report))
    sys.stdout.write("\n[results]\n" + key_value_block(report))
    return EXIT_OK


def _cmd_bench(args):
    config = _config_from(args)
    config.validate()
    specs = [ShapeSpec(args.shape, args.element, args.lattice_constant, o) for o in args.orders]
    text = bench_csv(bench(specs, args.repeats, config))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_synth(args):
    spec = ShapeSpec(args.kind, args.element, args.lattice_constant, args.order)
    structure = generate_structure(spec)
    save_structure(structure, args.output, spec.label)
    print(f"wrote {len(structure)} atoms to {args.output}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "bench": _cmd_bench, "synth": _cmd_synth}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        code = EXIT_CONFIG
        err = exc
    except (InputError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        code = EXIT_INPUT
        err = exc
    except (NumericError, ValueError) as exc:
        code = EXIT_NUMERIC
        err = exc
    stage = getattr(err, "stage", None)
    prefix = f"{stage}: " if stage else ""
    print(f"spherefd: error: {prefix}{err}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
