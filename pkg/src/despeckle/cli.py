"""Command-line interface.

Subcommands: phantom, corrupt, filter, evaluate, montecarlo, masks.
Exit codes: 0 success, 2 usage error, 1 runtime error.  Diagnostics go to
stderr, data to files or stdout.  The default seed comes from the
DESPECKLE_SEED environment variable when set.
"""

from __future__ import annotations

import argparse
import os
import sys

from .divergence import TestConfig
from .errors import DespeckleError, InvalidArgumentError
from .harness import (
    SITUATIONS,
    RunPlan,
    corrupt,
    make_phantom,
    replicate_stream,
    run_protocol,
    write_csv,
)
from .lee import LeeSpec, lee_filter
from .metrics import METRIC_HEADER, compute_report
from .nmfilter import FilterSpec, filter_image, mask_table_text
from .phantom import default_geometry, read_geometry
from .raster import FORMATS, read_raster, write_raster


def _default_seed() -> int:
    return int(os.environ.get("DESPECKLE_SEED", "0"))


def _add_format(p):
    p.add_argument("--format", choices=FORMATS, default="raw",
                   help="raster file format (default raw)")


def _geometry_for(args, size):
    if getattr(args, "geometry", None):
        return read_geometry(args.geometry)
    return default_geometry(size)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="despeckle",
        description="Hypothesis-test-guided speckle filtering and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="write a noiseless test phantom")
    p.add_argument("--situation", type=int, choices=sorted(SITUATIONS), default=1)
    p.add_argument("--size", type=int, default=128, choices=(64, 128))
    p.add_argument("--geometry", help="geometry file overriding the built-in layout")
    p.add_argument("--out", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("corrupt", help="multiply an image by simulated speckle")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--situation", type=int, choices=sorted(SITUATIONS), default=1,
                   help="situation whose look count drives the speckle")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--replicate", type=int, default=0,
                   help="replicate index of the RNG stream (default 0)")
    p.add_argument("--out", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("filter", help="despeckle an image")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--filter", dest="kind", default="hellinger",
                   choices=("hellinger", "kl", "renyi", "lee"))
    p.add_argument("--window", type=int, choices=(5, 7), default=5)
    p.add_argument("--alpha", type=float, default=0.2,
                   help="overall significance of the 8-test series (default 0.2)")
    p.add_argument("--beta", type=float, default=0.5, help="Renyi order in (0,1)")
    p.add_argument("--looks", type=float, default=1.0,
                   help="nominal looks for the lee filter (default 1)")
    p.add_argument("--dof", type=int, choices=(1, 2), default=1)
    p.add_argument("--shared", choices=("pooled", "sample1"), default="pooled",
                   help="looks estimate shared by the test statistics")
    p.add_argument("--threads", type=int, default=1)
    _add_format(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("evaluate", help="print quality metrics of test vs reference")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--geometry", help="geometry file enabling the ground-truth metrics")
    p.add_argument("--geometry-size", type=int, choices=(64, 128),
                   help="use the built-in geometry of this size")
    _add_format(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("montecarlo", help="run the simulation protocol, write a CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--fast", action="store_true", help="64x64 phantom, 20 replicates")
    p.add_argument("--size", type=int, choices=(64, 128))
    p.add_argument("--replicates", type=int)
    p.add_argument("--situations", default="1,2,3,4",
                   help="comma-separated subset of 1..4")
    p.add_argument("--levels", default="0.2",
                   help="comma-separated overall significance levels")
    p.add_argument("--filters", default="input,lee:5,lee:7,hellinger:5,hellinger:7",
                   help="comma-separated kind[:window] entries")
    p.add_argument("--dof", type=int, choices=(1, 2), default=1)
    p.add_argument("--shared", choices=("pooled", "sample1"), default="pooled")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--geometry", help="geometry file replacing the built-in layout")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("masks", help="print the committed region mask tables")
    p.add_argument("--window", type=int, choices=(5, 7), default=5)
    p.set_defaults(func=cmd_masks)

    return parser


def cmd_phantom(args) -> int:
    geom = _geometry_for(args, args.size)
    img = make_phantom(geom, SITUATIONS[args.situation])
    write_raster(img, args.out, args.format)
    return 0


def cmd_corrupt(args) -> int:
    img = read_raster(args.infile, args.format)
    sit = SITUATIONS[args.situation]
    stream = replicate_stream(args.seed, sit.id, args.replicate)
    write_raster(corrupt(img, sit, stream), args.out, args.format)
    return 0


def cmd_filter(args) -> int:
    img = read_raster(args.infile, args.format)
    if args.kind == "lee":
        out = lee_filter(img, LeeSpec(window=args.window, nominal_looks=args.looks))
    else:
        cfg = TestConfig(
            kind=args.kind,
            renyi_order=args.beta,
            alpha=args.alpha,
            num_tests=8,
            dof=args.dof,
            shared_looks=args.shared,
        )
        out = filter_image(img, FilterSpec(window=args.window, test=cfg), threads=args.threads)
    write_raster(out, args.out, args.format)
    return 0


def cmd_evaluate(args) -> int:
    ref = read_raster(args.ref, args.format)
    test = read_raster(args.test, args.format)
    geom = None
    if args.geometry:
        geom = read_geometry(args.geometry)
    elif args.geometry_size:
        geom = default_geometry(args.geometry_size)
    report = compute_report(ref, test, geom)
    print(f"# despeckle evaluate --ref {args.ref} --test {args.test}")
    print(METRIC_HEADER)
    print(report.as_csv_row())
    return 0


def _parse_montecarlo_plan(args) -> RunPlan:
    size = 64 if args.fast else 128
    if args.size:
        size = args.size
    replicates = args.replicates
    if replicates is None:
        replicates = 20 if args.fast else 100
    situations = tuple(int(s) for s in args.situations.split(",") if s)
    levels = tuple(float(s) for s in args.levels.split(",") if s)
    filters = []
    for entry in args.filters.split(","):
        entry = entry.strip()
        if not entry:
            continue
        kind, _, window = entry.partition(":")
        filters.append((kind, int(window) if window else None))
    return RunPlan(
        situations=situations,
        replicates=replicates,
        filters=tuple(filters),
        levels=levels,
        master_seed=args.seed,
        size=size,
        dof=args.dof,
        shared_looks=args.shared,
        renyi_order=args.beta,
    )


def cmd_montecarlo(args) -> int:
    plan = _parse_montecarlo_plan(args)
    geom = read_geometry(args.geometry) if args.geometry else None
    rows = run_protocol(plan, geom, threads=args.threads)
    # echo the plan-defining flags (threads and paths do not change results)
    echo = (
        "despeckle montecarlo"
        f" --seed {plan.master_seed} --size {plan.size} --replicates {plan.replicates}"
        f" --situations {','.join(str(s) for s in plan.situations)}"
        f" --levels {','.join(repr(v) for v in plan.levels)}"
        f" --filters {','.join(k if w is None else f'{k}:{w}' for k, w in plan.filters)}"
        f" --dof {plan.dof} --shared {plan.shared_looks} --beta {repr(plan.renyi_order)}"
    )
    write_csv(rows, args.out, comments=(echo,))
    return 0


def cmd_masks(args) -> int:
    print(mask_table_text(args.window))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, InvalidArgumentError) as exc:
        # bad flag values and missing inputs are usage errors, like argparse's own
        print(parser.format_usage(), end="", file=sys.stderr)
        print(f"despeckle: {exc}", file=sys.stderr)
        return 2
    except DespeckleError as exc:
        print(f"despeckle: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"despeckle: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - unexpected failure guard
        print(f"despeckle: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
