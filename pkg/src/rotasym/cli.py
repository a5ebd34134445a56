"""Command line entry point: ``rotasym run | analyze | render``.

Exit codes: 0 success, 1 validation error, 2 solver abort, 3 FSS
certification failure (only with ``--expect-fss``).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .geometry import GridError
from .io import ConfigError, read_field, render_pgm
from .pipeline import AnalysisParams, analyze_files, load_config, run_scenario

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_NOT_FSS = 3

OUT_ENV = "ROTASYM_OUT"


def _out_dir(flag, fallback):
    if flag:
        return flag
    return os.environ.get(OUT_ENV) or fallback


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args.out, cfg.out_dir)
    result = run_scenario(cfg, out)
    print(result.summary.to_text(), end="")
    if result.aborted:
        print(f"solver aborted: {result.summary.message} (partial artifacts in {out})",
              file=sys.stderr)
        return EXIT_SOLVER
    if args.expect_fss and not result.summary.fss_certified:
        print("FSS certification failed", file=sys.stderr)
        return EXIT_NOT_FSS
    return EXIT_OK


def _cmd_analyze(args) -> int:
    params = AnalysisParams(
        tol=args.tol, relative=not args.absolute, window_fraction=args.window_fraction,
        min_snapshots=args.min_snapshots, e_start_deg=args.e_start,
    )
    out = args.out or os.environ.get(OUT_ENV)
    summary = analyze_files(args.files, params, out)
    print(summary.to_text(), end="")
    if args.expect_fss and not summary.fss_certified:
        print("FSS certification failed", file=sys.stderr)
        return EXIT_NOT_FSS
    return EXIT_OK


def _cmd_render(args) -> int:
    field = read_field(args.field)
    if args.size < 2:
        raise ConfigError("size must be >= 2", key="--size")
    text = render_pgm(field, args.size)
    if args.out:
        target = Path(args.out)
    elif os.environ.get(OUT_ENV):
        target = Path(os.environ[OUT_ENV]) / (Path(args.field).stem + ".pgm")
    else:
        target = Path(args.field).with_suffix(".pgm")
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text)
    print(target)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rotasym",
                                     description="Symmetry diagnostics for radial reaction-diffusion runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a scenario config and analyse it")
    p.add_argument("config")
    p.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and output.dir)")
    p.add_argument("--expect-fss", action="store_true",
                   help="exit 3 unless every omega representative is certified")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("analyze", help="re-run the symmetry pipeline on snapshot files")
    p.add_argument("files", nargs="*")
    p.add_argument("--tol", type=float, default=1e-3,
                   help="tolerance, relative to the largest sup-norm unless --absolute")
    p.add_argument("--absolute", action="store_true", help="treat --tol as absolute")
    p.add_argument("--e-start", type=float, default=0.0, help="start direction in degrees")
    p.add_argument("--window-fraction", type=float, default=0.2)
    p.add_argument("--min-snapshots", type=int, default=5)
    p.add_argument("--out", help="write metrics.csv and summary.txt here")
    p.add_argument("--expect-fss", action="store_true")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("render", help="render a field file as an ASCII PGM")
    p.add_argument("field")
    p.add_argument("--out")
    p.add_argument("--size", type=int, default=128)
    p.set_defaults(func=_cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GridError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
