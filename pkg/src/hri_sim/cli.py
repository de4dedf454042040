"""Command-line entry points: run one session, bench a grid, serve the UI."""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from .analysis import cost_report, segment_phases
from .harness import UserPolicy, clarifier_policy, confused_policy, run_session, silent_policy
from .report import run_bench

_SAY_RE = re.compile(r"^(?P<text>.*)@(?P<ms>\d+)$")


def _policy(name: str) -> UserPolicy:
    if name == "silent":
        return silent_policy()
    if name == "clarifier":
        return clarifier_policy()
    if name.startswith("confused"):
        k = int(name.split(":", 1)[1]) if ":" in name else 2
        return confused_policy(k)
    if name == "idle":
        return UserPolicy("idle")
    raise argparse.ArgumentTypeError(f"unknown policy {name!r}")


def _parse_say(value: str) -> tuple[int, str]:
    m = _SAY_RE.match(value)
    if m is None:
        raise argparse.ArgumentTypeError('expected "<text>"@<ms>')
    return int(m.group("ms")), m.group("text")


def cmd_run(args: argparse.Namespace) -> int:
    log = run_session(
        args.scenario,
        args.condition,
        _policy(args.policy),
        args.backend,
        seed=args.seed,
        operator_says=[_parse_say(s) for s in args.say],
    )
    status = log.records[-1]["status"]
    if args.out:
        path = log.write(Path(args.out) / f"{log.session_id}.ndjson")
        print(f"log: {path}")
    steps_done = len(log.tagged("step_complete"))
    phrases = len(log.tagged("phrase"))
    print(f"session {log.session_id}: {status}, {steps_done} steps completed, "
          f"{phrases} phrases, {log.records[-1]['ts']} ms virtual time")
    for phase in segment_phases(log):
        print(f"  step {phase.step_id:>3} {phase.kind:<9} "
              f"{phase.start_ms:>8} .. {phase.end_ms:>8} ms")
    return 0 if status == "completed" else 1


def cmd_bench(args: argparse.Namespace) -> int:
    policies = [_policy(p) for p in args.policies.split(",") if p]
    conditions = [c for c in args.conditions.split(",") if c]
    bench = run_bench(
        args.scenario, args.sessions, policies, conditions, args.backend,
        out_dir=args.out,
    )
    report = bench.cost
    for row in report.per_condition:
        print(f"{row.condition}: {row.sessions} sessions, "
              f"{row.prompt_tokens}+{row.completion_tokens} tokens, cost {row.cost:.3f}")
    print(f"costlier condition: {report.costlier or 'tied'}")
    if args.out:
        print(f"wrote {Path(args.out) / 'metrics.csv'} and {Path(args.out) / 'report.md'}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    static = args.static
    if static is None:
        default_static = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        if default_static.is_dir():
            static = str(default_static)
    app = create_app(static_dir=static, default_scenario=args.scenario)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hri-sim")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one headless session")
    run.add_argument("--scenario", default="corridor6")
    run.add_argument("--condition", choices=("scripted", "llm"), default="scripted")
    run.add_argument("--backend", default="scripted",
                     help="scripted | replay:<file> | replay:@<bundled> | remote:<url>")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--policy", default="silent",
                     help="silent | clarifier | confused[:k] | idle")
    run.add_argument("--out", default=None, help="directory for the session log")
    run.add_argument("--headless", action="store_true",
                     help="accepted for compatibility; run is always headless")
    run.add_argument("--say", action="append", default=[], metavar='"<text>"@<ms>',
                     help="inject an operator phrase at a virtual time")
    run.set_defaults(func=cmd_run)

    bench = sub.add_parser("bench", help="run an A/B session grid and write reports")
    bench.add_argument("--scenario", default="corridor6")
    bench.add_argument("--sessions", type=int, default=10)
    bench.add_argument("--policies", default="silent,clarifier")
    bench.add_argument("--conditions", default="scripted,llm")
    bench.add_argument("--backend", default="replay:@clarifier_corridor6")
    bench.add_argument("--out", default=None)
    bench.set_defaults(func=cmd_bench)

    serve = sub.add_parser("serve", help="serve the interactive session service")
    serve.add_argument("--scenario", default="corridor6")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--static", default=None,
                       help="directory of built UI assets (defaults to frontend/dist)")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
