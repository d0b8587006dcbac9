"""Command-line front end: run experiments, verify claims, check data."""

from __future__ import annotations

import argparse
import sys

from .bench import ConfigError, load_config, run
from .environments import load_mnist_idx, mnist_paths, resolve_data_dir
from .verify import SUITES, format_report, verify


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    try:
        run(cfg, args.out, seed_override=args.seed_override,
            diagnostics=True if args.diagnostics else None)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        print("hint: predfilt mnist-fetch-check --data-dir <dir>",
              file=sys.stderr)
        return 2
    print(f"wrote traces and summary.csv to {args.out}")
    return 0


def _cmd_verify(args) -> int:
    try:
        results = verify(args.suite)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    print(format_report(results))
    failed = [r for r in results if r.passed is False]
    skipped = [r for r in results if r.passed is None]
    if skipped:
        print(f"{len(skipped)} check(s) skipped", file=sys.stderr)
    return 1 if failed else 0


def _cmd_mnist_check(args) -> int:
    data_dir = resolve_data_dir(args.data_dir)
    try:
        images_path, labels_path = mnist_paths(data_dir)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        print(
            "place the raw IDX files (not gzipped) in the data directory; "
            "this tool never downloads",
            file=sys.stderr,
        )
        return 2
    try:
        images, labels = load_mnist_idx(images_path, labels_path)
    except ValueError as exc:
        print(f"dataset failed validation: {exc}", file=sys.stderr)
        return 2
    print(
        f"ok: {images.shape[0]} images of {images.shape[1]} pixels, "
        f"labels 0..{int(labels.max())}"
    )
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="predfilt",
        description="Online low-rank filtering benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a TOML config")
    p_run.add_argument("--config", required=True, help="path to TOML config")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--seed-override", type=int, default=None,
                       help="run only this seed")
    p_run.add_argument("--diagnostics", action="store_true",
                       help="record per-step bound diagnostics")
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("suite", choices=sorted(SUITES),
                          help="which suite to run")
    p_verify.set_defaults(func=_cmd_verify)

    p_mnist = sub.add_parser(
        "mnist-fetch-check",
        help="validate local IDX dataset files (never downloads)",
    )
    p_mnist.add_argument("--data-dir", default=None,
                         help="directory holding the IDX files")
    p_mnist.set_defaults(func=_cmd_mnist_check)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
