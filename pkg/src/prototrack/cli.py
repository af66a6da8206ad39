"""``prototrack track | compare | sweep``.

Output goes under ``--out``, defaulting to ``$PROTO_TRACK_OUT`` and then to
``./prototrack-out``.  Exit status is 0 only when every requested file was
written; configuration problems exit with 2, everything else with 1.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import runner
from .config import STRATEGIES, RunConfig
from .errors import ConfigError, TrackError
from .synth import spec_from_text

log = logging.getLogger("prototrack")

DEFAULT_OUT = "prototrack-out"


def _values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, multi_source: bool) -> None:
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--m", type=int, default=30, dest="window_m", help="candidate window size")
    p.add_argument("--beta", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seg-threshold", type=float, default=0.6)
    p.add_argument("--binarize-threshold", type=float, default=0.5)
    p.add_argument("--out", default=None, help="output root (default $PROTO_TRACK_OUT)")
    p.add_argument("--workers", type=int, default=1, help="sequences tracked in parallel")
    src = p.add_mutually_exclusive_group(required=not multi_source)
    if multi_source:
        src.add_argument("--scenario", action="append",
                         help="suite scenario name or scenario file (repeatable; default: whole suite)")
        src.add_argument("--sequence-dir", action="append", help="on-disk sequence (repeatable)")
    else:
        src.add_argument("--scenario", help="suite scenario name or scenario file")
        src.add_argument("--sequence-dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prototrack", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="track one scenario or sequence")
    _common(p, multi_source=False)
    p.add_argument("--strategy", choices=STRATEGIES, default="samite")

    p = sub.add_parser("compare", help="compare strategies over the standard suite")
    _common(p, multi_source=True)
    p.add_argument("--strategy", choices=STRATEGIES, action="append", dest="strategies",
                   help="strategy to include (repeatable; default: samite, sam2_default, "
                        "feature_only, position_only)")

    p = sub.add_parser("sweep", help="aggregate metrics across one hyperparameter")
    _common(p, multi_source=True)
    p.add_argument("--strategy", choices=STRATEGIES, default="samite")
    p.add_argument("--param", choices=sorted(runner.SWEEP_PARAMS), required=True)
    p.add_argument("--values", type=_values, default=None,
                   help="comma-separated, e.g. 0,0.3,1 (default: a standard grid per parameter)")
    return parser


def _config(args, strategy: str = "samite") -> RunConfig:
    return RunConfig(alpha=args.alpha, window_m=args.window_m, beta=args.beta, strategy=strategy,
                     seg_threshold=args.seg_threshold, binarize_threshold=args.binarize_threshold,
                     seed=args.seed)


def _sources(args) -> list[runner.Source]:
    dirs = args.sequence_dir
    if isinstance(dirs, str):
        dirs = [dirs]
    if dirs:
        return [runner.Source(directory=str(Path(d))) for d in dirs]
    names = args.scenario
    if isinstance(names, str):
        names = [names]
    if not names:
        return runner.suite_sources(args.seed)
    out = []
    for n in names:
        # a path to a scenario file instead of a suite name; the file's own seed is kept
        if Path(n).is_file():
            out.append(runner.Source(scenario=spec_from_text(Path(n).read_text())))
        else:
            out.extend(runner.suite_sources(args.seed, [n]))
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    out = Path(args.out or os.environ.get("PROTO_TRACK_OUT") or DEFAULT_OUT)
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        sources = _sources(args)
        if args.command == "track":
            summary = runner.run_sources(sources, _config(args, args.strategy), out, args.workers)
            agg = summary["aggregate"]
            print(f"{sources[0].name}: AUC {agg['auc']:.4f}  AO {agg['ao']:.4f}  P {agg['precision']:.4f}")
        elif args.command == "compare":
            strategies = args.strategies or ["samite", "sam2_default", "feature_only", "position_only"]
            runner.compare(sources, _config(args), strategies, out, args.workers)
            print((out / "compare.txt").read_text(), end="")
        else:
            values = args.values if args.values is not None else list(runner.DEFAULT_GRIDS[args.param])
            if args.param == "m":
                if any(v != int(v) for v in values):
                    raise ConfigError("m values must be integers")
                values = [int(v) for v in values]
            runner.sweep(sources, _config(args, args.strategy), args.param, values, out, args.workers)
            print((out / "sweep.txt").read_text(), end="")
    except ConfigError as exc:
        print(f"prototrack: config error: {exc}", file=sys.stderr)
        return 2
    except (TrackError, ValueError, KeyError, OSError) as exc:
        print(f"prototrack: error: {exc}", file=sys.stderr)
        return 1
    log.info("wrote outputs under %s", out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
