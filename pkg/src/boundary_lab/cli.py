"""Command line entry point.

    boundary-lab run CONFIG [--output-dir DIR] [--threads K] [--seed S]
    boundary-lab cache --model free:2 --nmax 10 [--cache-dir DIR]

Exit status: 0 all audits pass, 1 some audit failed, 2 invalid configuration,
3 a resource cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from .cache import build_cache, default_cache_dir, prime_from_cache
from .config import load_config
from .errors import CacheError, ConfigError, LabError, ParameterError, ResourceError
from .runner import run_experiments, write_results
from .tree import TreeModel

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3


def _parser():
    ap = argparse.ArgumentParser(prog="boundary-lab",
                                 description="Exact audits on tree models of hyperbolic groups.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiments of a config file")
    r.add_argument("config")
    r.add_argument("--output-dir")
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--seed", type=int)
    c = sub.add_parser("cache", help="write or refresh sphere enumeration files")
    c.add_argument("--model", required=True)
    c.add_argument("--nmax", type=int, required=True)
    c.add_argument("--cache-dir")
    return ap


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config, {"seed": args.seed, "output_dir": args.output_dir})
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    prime_from_cache(cfg.model, cfg.cache_dir or default_cache_dir())
    try:
        results = run_experiments(cfg, args.threads)
    except ResourceError as exc:
        print(f"resource cap {exc.cap} exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ParameterError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = write_results(cfg, results, cfg.output_dir)
    for e in summary["experiments"]:
        print(f"{e['experiment']:<24} {e['audit']:<22} {'pass' if e['pass'] else 'FAIL'}")
    return EXIT_OK if summary["pass"] else EXIT_FAIL


def cmd_cache(args) -> int:
    try:
        model = TreeModel.parse(args.model)
        status = build_cache(model, args.nmax, args.cache_dir)
    except ResourceError as exc:
        print(f"resource cap {exc.cap} exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (LabError, CacheError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps({str(k): v for k, v in status.items()}))
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    return cmd_cache(args)


if __name__ == "__main__":
    sys.exit(main())
