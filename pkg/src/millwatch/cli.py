"""Command-line entry point: one subcommand per pipeline stage plus ``pipeline``."""

import argparse
import sys

from .errors import MillwatchError
from .optimizers import ALGORITHMS
from .pipeline import STAGES, load_manifest, run_pipeline, run_stage


def build_parser():
    parser = argparse.ArgumentParser(prog="millwatch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES + ("pipeline",):
        p = sub.add_parser(name)
        p.add_argument("--config", help="run manifest JSON")
        p.add_argument("--seed", type=int, help="override the manifest seed")
        p.add_argument("--out", default="run", help="run directory (default: ./run)")
        if name == "tune":
            p.add_argument("--algorithm", choices=ALGORITHMS,
                           help="run only this tuner (default: all configured)")
        if name == "report":
            p.add_argument("--format", default="all", choices=("csv", "md", "all"))
        if name in ("tune", "pipeline"):
            p.add_argument("--jobs", type=int, help="parallel fitness evaluations")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        manifest = load_manifest(args.config, args.out, args.seed)
        if getattr(args, "jobs", None):
            manifest.n_jobs = args.jobs
            manifest.validate()
        if args.command == "pipeline":
            run_pipeline(manifest, args.out)
        else:
            kwargs = {}
            if args.command == "tune":
                kwargs["algorithm"] = args.algorithm
            elif args.command == "report":
                kwargs["fmt"] = args.format
            run_stage(args.command, args.out, manifest, **kwargs)
    except MillwatchError as exc:
        print(f"millwatch {args.command}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"millwatch {args.command}: [config] {exc}", file=sys.stderr)
        return 1
    return 0
