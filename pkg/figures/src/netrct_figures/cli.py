"""Render figures from simulator outputs: netrct-figures <id>|all <input-dir>."""

from __future__ import annotations

import argparse
import sys

from .io import InputError
from .render import render
from .specs import REGISTRY


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="netrct-figures",
        description="Regenerate study figures from netrct CSV/JSON outputs",
    )
    parser.add_argument("figure", help="figure id (fig1..fig15) or 'all'")
    parser.add_argument("input_dir",
                        help="directory holding the scenario output folders")
    parser.add_argument("--out-dir", default=None,
                        help="image directory (default: <input-dir>/figures)")
    args = parser.parse_args(argv)

    if args.figure == "all":
        specs = list(REGISTRY.values())
    elif args.figure in REGISTRY:
        specs = [REGISTRY[args.figure]]
    else:
        parser.error(f"unknown figure {args.figure!r}; "
                     f"choose one of {', '.join(REGISTRY)} or 'all'")
    outdir = args.out_dir or f"{args.input_dir}/figures"
    status = 0
    for spec in specs:
        try:
            target = render(spec, args.input_dir, outdir)
        except InputError as exc:
            print(f"error: {spec.figure_id}: {exc}", file=sys.stderr)
            status = 1
        else:
            print(f"{spec.figure_id} -> {target}")
    return status


if __name__ == "__main__":
    sys.exit(main())
