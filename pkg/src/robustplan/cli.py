"""Command line entry point: ``plan``, ``bench`` and ``trace``.

Exit codes: 0 on success, 2 for configuration or usage errors, 3 when a run
fails.  The benchmark worker count is read from ``ROBUSTPLAN_WORKERS``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import bench
from .config import ConfigError, load_config
from .highway.env import EgoAction
from .render import render_trace

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robustplan", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    pl = sub.add_parser("plan", help="plan from the initial world of one seeded episode")
    pl.add_argument("--config", help="JSON config (default: packaged config)")
    pl.add_argument("--agent", default="drop", help="oracle, nominal, drop or irc, optionally with :discrete/:continuous")
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--episode", action="store_true", help="also play the whole episode")

    be = sub.add_parser("bench", help="run seeded episodes for several agents")
    be.add_argument("--config")
    be.add_argument("--agents", help="comma-separated agent labels (default: from the config)")
    be.add_argument("--episodes", type=int, help="episodes per agent (default: from the config)")
    be.add_argument("--out", default="results.csv", help="per-episode CSV")
    be.add_argument("--summary", help="optional per-agent summary CSV")

    tr = sub.add_parser("trace", help="draw one episode and its interval hulls as SVG")
    tr.add_argument("--config")
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--agent", default="irc")
    tr.add_argument("--svg", required=True, help="output SVG path")
    tr.add_argument("--hulls-csv", help="optional CSV of the predicted hulls")
    tr.add_argument("--horizon", type=int, default=5, help="epochs of hull prediction")
    return p


def _plan(args, cfg) -> int:
    spec = bench.AgentSpec.parse(args.agent, cfg)
    d = bench.first_decision(spec, cfg, args.seed)
    print(f"agent={d.agent} seed={d.seed} action={EgoAction(d.action).name} value={d.value:.6f} "
          f"plan={'-'.join(EgoAction(a).name for a in d.plan)} depth={d.depth}")
    if args.episode:
        r = bench.run_episode(spec, cfg, args.seed)
        print(f"return={r.ret:.6f} collision={int(r.collision)} steps={r.steps}")
        if r.failed:
            print(f"episode failed: {r.error}", file=sys.stderr)
            return EXIT_RUNTIME
    return EXIT_OK


def _bench(args, cfg) -> int:
    agents = [a for a in args.agents.split(",") if a.strip()] if args.agents is not None else None
    results = bench.benchmark(cfg, agents, args.episodes)
    Path(args.out).write_text(bench.results_csv(results))
    summaries = bench.summarize(results)
    if args.summary:
        Path(args.summary).write_text(bench.summary_csv(summaries))
    print(f"{'agent':<22}{'worst':>8}{'mean':>8}{'std':>7}{'coll':>6}{'n':>5}")
    for s in summaries:
        print(f"{s.agent:<22}{s.worst:8.2f}{s.mean:8.2f}{s.std:7.2f}{s.collisions:6d}{s.episodes:5d}")
    failed = [r for r in results if r.failed]
    for r in failed:
        print(f"failed episode {r.agent} seed {r.seed}: {r.error}", file=sys.stderr)
    return EXIT_RUNTIME if failed else EXIT_OK


def _trace(args, cfg) -> int:
    spec = bench.AgentSpec.parse(args.agent, cfg)
    record: list = []
    r = bench.run_episode(spec, cfg, args.seed, record)
    worlds = [w for w, _ in record]
    actions = [a for _, a in record[1:]]
    hulls = None
    if spec.mode == "continuous" and actions:
        hulls = bench.episode_hulls(cfg, args.seed, actions, args.horizon)
    Path(args.svg).write_text(render_trace(worlds[0].road, worlds, hulls))
    if args.hulls_csv and hulls is not None:
        Path(args.hulls_csv).write_text(hulls.to_csv())
    print(f"return={r.ret:.6f} collision={int(r.collision)} steps={r.steps} svg={args.svg}")
    if r.failed:
        print(f"episode failed: {r.error}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "plan":
            return _plan(args, cfg)
        if args.command == "bench":
            return _bench(args, cfg)
        return _trace(args, cfg)
    except (ConfigError, bench.AgentError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as err:  # noqa: BLE001 - mapped to the runtime exit code
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
