"""Batch command line: ``cluster -i points.txt -o out.txt --param key=value ...``.

Each requested k produces one assignment line labeled ``k=<v>``, preceded
by ``# eval <name> <value>`` lines for the indices asked for with
``--eval``. Exit status is 0 on success, 2 for usage or configuration
errors and 3 for data errors.

Hierarchical heights are reported in the units of the input
dissimilarity; Ward and the other centroid-based linkages therefore
expect (and default to) squared Euclidean input.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .builder import ALGORITHMS, ConfigError, ParamSet, build_algorithm, execute
from .evaluation import NAMES, evaluate
from .io import parse_points, read_points, write_assignment

EXIT_USAGE = 2
EXIT_DATA = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cluster",
        description="Cluster a whitespace-separated vector file.",
        epilog=f"algorithms: {', '.join(ALGORITHMS)}; example: --param algorithm=kmeans --param kmeans.k=2,3,..,10",
    )
    p.add_argument("-i", "--input", required=True, help="vector file ('-' for stdin)")
    p.add_argument("-o", "--output", default="-", help="assignment file (default: stdout)")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="repeatable setting")
    p.add_argument("--seed", type=int, help="random seed (overrides --param seed)")
    p.add_argument("--eval", default="", metavar="NAMES", help=f"comma-separated indices: {', '.join(NAMES)}")
    return p


def _format(value: float) -> str:
    return repr(float(value))


def run(args: argparse.Namespace) -> str:
    """Run every requested k and return the output text."""
    params = ParamSet.parse(args.param)
    if args.seed is not None:
        params.set("seed", str(args.seed))
    spec = build_algorithm(params)
    indices = [name.strip() for name in args.eval.split(",") if name.strip()]
    unknown = [name for name in indices if name not in NAMES]
    if unknown:
        raise ConfigError(f"unknown index {unknown[0]!r} (valid: {', '.join(NAMES)})")
    data = parse_points(sys.stdin) if args.input == "-" else read_points(args.input)
    lines = []
    for k in spec.ks or (None,):
        clustering = execute(spec, data, k)
        for name in indices:
            lines.append(f"# eval {name} {_format(evaluate(name, data, clustering))}\n")
        label = f"k={k}" if k is not None else f"height={_format(spec['hac.height'])}"
        lines.append(write_assignment(clustering, label))
    return "".join(lines)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        text = run(args)
    except ConfigError as exc:
        print(f"cluster: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"cluster: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
