"""Command-line driver: ``mixer-chain <experiment> [options]``.

Exit status is 0 when every check passes, 1 when a check fails, and 2 for
usage or resource errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .bfs import BFSResourceError
from .experiments import (
    DEFAULT_GRID,
    ExperimentConfig,
    estimate_exponent,
    verify_claim,
    verify_conditional_law,
    verify_domination,
    verify_mirror,
    verify_sandwich,
    verify_words,
)
from .report import emit_report

log = logging.getLogger("mixer_chain")

DEFAULT_TRIALS = {
    "exponent": 2000,
    "sandwich": 1,
    "words": 10**4,
    "claim": 10**5,
    "domination": 10**4,
    "conditional": 10**5,
    "mirror": 10**5,
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("tolerance overrides look like name=value")
    return name.strip(), float(value)


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=_u64, default=0)
    shared.add_argument("--trials", type=_positive, default=None,
                        help="trajectories / samples (per-experiment default)")
    shared.add_argument("--t-max", type=_positive, default=None)
    shared.add_argument("--grid", type=_int_list, default=None, help="comma-separated times")
    shared.add_argument("--probe", type=_int_list, default=None, help="comma-separated sites")
    shared.add_argument("--radius", type=int, default=8)
    shared.add_argument("--max-support", type=_positive, default=10)
    shared.add_argument("--format", choices=("csv", "json"), default="json")
    shared.add_argument("--out", default=None, help="output file (default: stdout)")
    shared.add_argument("--workers", type=_positive, default=1)
    shared.add_argument("--tol", type=_tolerance, action="append", default=[],
                        metavar="NAME=VALUE", help="tolerance override, repeatable")
    shared.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="mixer-chain", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("exponent", parents=[shared], help="fit the escape exponent")
    sub.add_parser("sandwich", parents=[shared], help="distance bounds against exact BFS distances")
    sub.add_parser("words", parents=[shared], help="validate synthesized generator words")
    sub.add_parser("claim", parents=[shared], help="tile displacement at the first return")
    sub.add_parser("domination", parents=[shared], help="visit counts versus SRW local times")
    sub.add_parser("conditional", parents=[shared], help="tile displacement given its visit count")
    sub.add_parser("mirror", parents=[shared], help="reflection symmetry of the chain")
    return p


def _grid(args) -> tuple[int, ...] | None:
    if args.grid:
        return tuple(sorted(set(args.grid)))
    if args.t_max:
        g = [t for t in DEFAULT_GRID if t < args.t_max] + [args.t_max]
        return tuple(g)
    return None


def run(args) -> int:
    trials = args.trials or DEFAULT_TRIALS[args.command]
    grid = _grid(args)
    cfg = ExperimentConfig(
        seed=args.seed,
        trials=trials,
        t_grid=grid or DEFAULT_GRID,
        probe_sites=tuple(args.probe or ()),
        output_format=args.format,
        output_path=args.out,
        workers=args.workers,
        radius=args.radius,
        tolerances=dict(args.tol),
    )
    cmd = args.command
    if cmd == "exponent":
        report = estimate_exponent(cfg)
    elif cmd == "sandwich":
        report = verify_sandwich(args.radius)
    elif cmd == "words":
        report = verify_words(trials, args.max_support, args.seed)
    elif cmd == "claim":
        kw = {"tolerance": cfg.tol("frequency", 0.01), "workers": args.workers}
        if "step_cap" in cfg.tolerances:
            kw["step_cap"] = int(cfg.tolerances["step_cap"])
        report = verify_claim(trials, args.seed, **kw)
    elif cmd == "domination":
        report = verify_domination(cfg, times=grid)
    elif cmd == "conditional":
        report = verify_conditional_law(cfg, times=grid)
    elif cmd == "mirror":
        report = verify_mirror(cfg, t=args.t_max or 256)
    else:  # pragma: no cover - argparse rejects unknown commands
        raise AssertionError(cmd)

    text = emit_report(report, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    print(report.summary(), file=sys.stderr)
    return 0 if report.passed else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except BFSResourceError as exc:
        log.error("resource limit: %s", exc)
        return 2
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
