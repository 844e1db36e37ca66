"""Command-line entry points: run, replay, analyze, serve.

Exit codes: 0 ok, 2 config error, 3 protocol/log error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Optional, Sequence

from .errors import ConfigError, ProtocolError, ReplayError
from .server import SessionServer, default_server_config
from .session import TickLog, load_config, replay_log, run_match
from .stats import PairedSamples, bh_adjust, goal_differential, wilcoxon_signed_rank

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROTOCOL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sharedpad",
        description="Shared-control gaming middleware: two players, one virtual pad.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one match from a config file")
    run_p.add_argument("--config", required=True, help="session config file")
    run_p.add_argument("--headless", action="store_true",
                       help="run unpaced at maximum speed")
    run_p.add_argument("--log", help="write the tick log here (overrides config)")

    replay_p = sub.add_parser("replay", help="re-run a match from its tick log")
    replay_p.add_argument("--log", required=True, help="tick log to replay")
    replay_p.add_argument("--config", required=True, help="session config file")

    analyze_p = sub.add_parser("analyze", help="paired-condition statistics from CSV")
    analyze_p.add_argument("--pairs", required=True,
                           help="CSV with columns label,condition_a,condition_b")
    analyze_p.add_argument("--alpha", type=float, default=0.05,
                           help="significance level (default 0.05)")

    serve_p = sub.add_parser("serve", help="start the WebSocket session endpoint")
    serve_p.add_argument("--port", type=int, required=True)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--config", help="session config file (default: remote "
                                          "pilot + chase agent copilot)")
    serve_p.add_argument("--matches", type=int, default=None,
                         help="stop after this many matches (default: run forever)")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.log:
        config.log_path = args.log
    result, log = run_match(config, headless=args.headless)
    print(json.dumps({
        "result": result.as_dict(),
        "frames": len(log.frame_records()),
        "log": str(config.log_path) if config.log_path else None,
    }, indent=2))
    return EXIT_OK


def _cmd_replay(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    log = TickLog.read(args.log)
    result, trace_hash = replay_log(log, config.arena)
    print(json.dumps({
        "result": result.as_dict(),
        "trace_hash": trace_hash,
    }, indent=2))
    return EXIT_OK


def _read_pairs(path: str) -> PairedSamples:
    rows: list[tuple[str, float, float]] = []
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            for n, row in enumerate(csv.reader(handle)):
                if not row or not "".join(row).strip():
                    continue
                if len(row) < 3:
                    raise ConfigError(f"{path}:{n + 1}: want label,condition_a,condition_b")
                try:
                    a, b = float(row[1]), float(row[2])
                except ValueError:
                    if n == 0:
                        continue  # header row
                    raise ConfigError(f"{path}:{n + 1}: non-numeric value") from None
                rows.append((row[0].strip(), a, b))
    except OSError as exc:
        raise ConfigError(f"cannot read pairs file {path}: {exc}") from None
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    return PairedSamples(tuple(rows))


def _cmd_analyze(args: argparse.Namespace) -> int:
    samples = _read_pairs(args.pairs)
    summary = goal_differential(samples)
    test = wilcoxon_signed_rank(samples)
    correction = bh_adjust([test.p_value], alpha=args.alpha)

    def _condition(s) -> dict:
        return {"mean": s.mean, "std": s.std, "std_population": s.std_population}

    print(json.dumps({
        "n": len(samples),
        "condition_a": _condition(summary.condition_a),
        "condition_b": _condition(summary.condition_b),
        "wilcoxon": {"statistic": test.statistic, "p_value": test.p_value,
                     "n": test.n, "exact": test.exact, "degenerate": test.degenerate},
        "alpha": args.alpha,
        "adjusted_p": correction.adjusted[0],
        "reject": correction.rejected[0],
    }, indent=2))
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import asyncio

    config = load_config(args.config) if args.config else default_server_config()
    server = SessionServer(config, host=args.host, port=args.port,
                           matches=args.matches)
    try:
        asyncio.run(server.run())
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "replay": _cmd_replay,
        "analyze": _cmd_analyze,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ProtocolError, ReplayError) as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL


if __name__ == "__main__":
    sys.exit(main())
