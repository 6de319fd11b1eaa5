"""Command-line entry points: calibrate, annotate, simulate, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .calibration import (
    DEFAULT_PIECE_RANGE, DEFAULT_SCHEDULE, calibrate, load_table, save_table,
)
from .core import FenError, parse_fen, to_san
from .domain import domain_factors
from .evaluator import DEFAULT_CONFIG, EvalConfig, evaluate, rank_moves
from .rga import RGAConfig, TemplateRegistry, generate_rationale, percentile_of
from .study import StudyConfig, StudyRunner, load_corpus, simulate_agent


def _int_pair(text: str) -> tuple:
    parts = [int(x) for x in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected 'lo,hi'")
    return tuple(parts)


def _schedule(text: str) -> tuple:
    return tuple(int(x) for x in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chesscoach",
                                     description="Chess endgame coaching toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    cal = sub.add_parser("calibrate", help="build a factor calibration table")
    cal.add_argument("--schedule", type=_schedule, default=DEFAULT_SCHEDULE,
                     help="comma-separated stage sizes (default 30,60,120)")
    cal.add_argument("--seed", type=int, default=0)
    cal.add_argument("--pieces", type=_int_pair, default=DEFAULT_PIECE_RANGE,
                     help="piece-count range lo,hi (default 2,32)")
    cal.add_argument("--eval-config", help="weight-constant overrides file")
    cal.add_argument("--out", required=True, help="output table path")

    ann = sub.add_parser("annotate", help="rank moves and print rationales for a FEN")
    ann.add_argument("fen")
    ann.add_argument("--table", required=True, help="calibration table path")
    ann.add_argument("--k", type=int, default=2)
    ann.add_argument("--variant", choices=("rga", "rga+"), default="rga+")
    ann.add_argument("--depth", type=int, default=4)
    ann.add_argument("--templates", help="template registry file")
    ann.add_argument("--eval-config", help="weight-constant overrides file")
    ann.add_argument("--json", action="store_true", help="machine-readable output")

    sim = sub.add_parser("simulate", help="run scripted-agent sessions")
    sim.add_argument("--policy", required=True,
                     choices=("random-legal", "hint-follower", "caution-aware"))
    sim.add_argument("--condition", required=True)
    sim.add_argument("--corpus", default=os.environ.get("CHESSCOACH_CORPUS"),
                     required="CHESSCOACH_CORPUS" not in os.environ)
    sim.add_argument("--table", default=os.environ.get("CHESSCOACH_TABLE"))
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--follow-prob", type=float, default=1.0)
    sim.add_argument("--hint-depth", type=int, default=4)
    sim.add_argument("--opponent-depth", type=int, default=6)
    sim.add_argument("--json", action="store_true")

    srv = sub.add_parser("serve", help="run the HTTP/JSON study service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int,
                     default=int(os.environ.get("CHESSCOACH_PORT", "8000")))
    srv.add_argument("--corpus", default=os.environ.get("CHESSCOACH_CORPUS"),
                     required="CHESSCOACH_CORPUS" not in os.environ)
    srv.add_argument("--table", default=os.environ.get("CHESSCOACH_TABLE"),
                     required="CHESSCOACH_TABLE" not in os.environ)
    srv.add_argument("--hint-depth", type=int, default=4)
    srv.add_argument("--opponent-depth", type=int, default=6)
    srv.add_argument("--log-dir", help="directory for per-session event logs")
    srv.add_argument("--engine", help="external UCI engine command (optional)")
    srv.add_argument("--eval-config", help="weight-constant overrides file")
    srv.add_argument("--static", help="directory with the built web client")
    return parser


def _eval_config(path) -> EvalConfig:
    return EvalConfig.from_file(path) if path else DEFAULT_CONFIG


def cmd_calibrate(args) -> int:
    table = calibrate(schedule=args.schedule, seed=args.seed,
                      piece_range=args.pieces, config=_eval_config(args.eval_config))
    save_table(table, args.out)
    print(f"wrote {args.out} (seed={table.seed}, schedule={','.join(map(str, table.schedule))})")
    if table.stage_deltas:
        print("stage deltas:")
        for d in table.stage_deltas:
            marker = "converged" if d.converged else "drifting"
            print(f"  n={d.samples:<4} {d.factor:<14} d-mean={d.delta_mean:>10.3f} "
                  f"d-std={d.delta_std:>10.3f}  {marker}")
    else:
        print("stage deltas: none (single-stage schedule)")
    flagged = {name: flags for name, flags in table.flags.items() if flags}
    if flagged:
        print(f"flags: {flagged}")
    return 0


def cmd_annotate(args) -> int:
    try:
        p = parse_fen(args.fen)
    except FenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    table = load_table(args.table)
    eval_config = _eval_config(args.eval_config)
    templates = (TemplateRegistry.load_file(args.templates)
                 if args.templates else None)
    rga_cfg = RGAConfig(k=args.k) if templates is None else \
        RGAConfig(k=args.k, templates=templates)
    ranking = rank_moves(p, args.depth, eval_config)
    best = ranking[-1]
    _, factors = evaluate(p, eval_config)
    dom = domain_factors(p, best.move, rga_cfg.mate_horizon) \
        if args.variant == "rga+" else None
    rationale = generate_rationale(factors, best.move, dom, rga_cfg, table, p)

    rows = [
        {"move": sm.move.uci(), "san": to_san(p, sm.move), "score": sm.score,
         "mate": sm.mate_distance, "rank": sm.rank,
         "percentile": float(percentile_of(ranking, sm.move))}
        for sm in ranking
    ]
    if args.json:
        print(json.dumps({
            "fen": args.fen,
            "variant": args.variant,
            "best_move": best.move.uci(),
            "best_san": rationale.move_san,
            "ranking": rows,
            "rationale": {"lines": list(rationale.lines),
                          "factors": [f.name for f in rationale.factors]},
        }, indent=2))
        return 0
    print(f"best move: {rationale.move_san} ({best.move.uci()})")
    print("ranking (worst to best):")
    for row in rows:
        mate = f" mate={row['mate']}" if row["mate"] is not None else ""
        print(f"  {row['rank']:>3}. {row['san']:<8} score={row['score']}{mate} "
              f"percentile={row['percentile']:.1f}")
    print(f"rationale ({args.variant}):")
    for line in rationale.lines:
        print(f"  - {line}")
    return 0


def cmd_simulate(args) -> int:
    if not os.path.exists(args.corpus):
        print(f"error: corpus file not found: {args.corpus}", file=sys.stderr)
        return 1
    corpus = load_corpus(args.corpus)
    if args.table:
        table = load_table(args.table)
    else:
        table = calibrate(seed=args.seed)
    runner = StudyRunner(
        corpus, table,
        study_config=StudyConfig(hint_depth=args.hint_depth,
                                 opponent_depth=args.opponent_depth))
    result = simulate_agent(args.policy, args.condition, corpus, args.seed,
                            runner=runner, follow_prob=args.follow_prob)
    if args.json:
        print(json.dumps({
            "policy": result.policy,
            "condition": result.condition,
            "days": [
                {"day": d.day, "win_percent": d.win_percent,
                 "mean_percentile": d.mean_percentile, "games": d.games}
                for d in result.days
            ],
            "overall": {"win_percent": result.overall_win_percent,
                        "mean_percentile": result.overall_mean_percentile},
        }, indent=2))
        return 0
    print(f"policy={result.policy} condition={result.condition}")
    for d in result.days:
        print(f"  day {d.day}: win%={d.win_percent:.1f} "
              f"mean-percentile={d.mean_percentile:.1f} ({d.games} games)")
    print(f"  overall: win%={result.overall_win_percent:.1f} "
          f"mean-percentile={result.overall_mean_percentile:.1f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    corpus = load_corpus(args.corpus)
    table = load_table(args.table)
    move_source = None
    if args.engine:
        from .uci import EngineMoveSource, connect
        move_source = EngineMoveSource(connect(args.engine.split()))
    runner = StudyRunner(
        corpus, table,
        study_config=StudyConfig(hint_depth=args.hint_depth,
                                 opponent_depth=args.opponent_depth),
        eval_config=_eval_config(args.eval_config),
        log_dir=args.log_dir,
        move_source=move_source)
    app = create_app(runner, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "calibrate": cmd_calibrate,
        "annotate": cmd_annotate,
        "simulate": cmd_simulate,
        "serve": cmd_serve,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
