"""Command line entry point: ``privroll <command> ...``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import random
import sys

from . import blob, fraud
from .harness import capacity, inject, lind
from .harness.actions import Inject, Seal
from .harness.scenario import Scenario, generate_honest, run_scenario

SEED_ENV = "PRIVROLL_SEED"


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _load_scenario(args) -> Scenario:
    if args.scenario:
        with open(args.scenario) as f:
            return Scenario.loads(f.read())
    return generate_honest(args.seed)


def cmd_run(args) -> int:
    sc = _load_scenario(args)
    if args.save_scenario:
        with open(args.save_scenario, "w") as f:
            f.write(sc.dumps() + "\n")
    res = run_scenario(sc)
    _emit(res.report_text(), args.out)
    return 0 if not res.errors else 1


def cmd_inject(args) -> int:
    if args.scenario:
        sc = _load_scenario(args)
        seals = [i for i, a in enumerate(sc.actions) if isinstance(a, Seal)]
        if not 0 <= args.at < len(seals):
            print(f"scenario has {len(seals)} seals; --at must index one of them", file=sys.stderr)
            return 2
        actions = list(sc.actions)
        actions.insert(seals[args.at], Inject(args.rule))
        res = run_scenario(dataclasses.replace(sc, actions=tuple(actions)))
        _emit(res.report_text(), args.out)
        return 0 if any(d.accepted for d in res.disputes) else 1
    r = inject.run_injection(args.rule, args.seed, args.padding)
    d = dataclasses.asdict(r)
    d["expected"], d["detected"] = sorted(r.expected), sorted(r.detected)
    d["passed"] = r.passed
    _emit(json.dumps(d, sort_keys=True, indent=1), args.out)
    return 0 if r.passed else 1


def cmd_lind(args) -> int:
    if args.strict:
        results = []
        for n in range(args.rounds):
            script = lind.random_consistent_script(random.Random(f"{args.seed}:{n}"))
            equal, _, _ = lind.transcripts_equal(script, args.seed + n, args.leaky)
            results.append(equal)
        out = {"schema": "privroll-lind/1", "mode": "strict", "leaky": args.leaky,
               "scripts": len(results), "identical": sum(results)}
        ok = all(results)
    else:
        st = lind.run_lind_game(args.strategy, args.rounds, args.seed, args.leaky)
        lo, hi = st.interval
        out = {"schema": "privroll-lind/1", "mode": "game", "strategy": st.strategy, "leaky": st.leaky,
               "rounds": st.rounds, "wins": st.wins, "rate": st.rate, "advantage": st.advantage,
               "wilson95": [lo, hi], "rejected_queries": st.rejected, "lost_games": st.lost}
        ok = True
    _emit(json.dumps(out, sort_keys=True, indent=1), args.out)
    return 0 if ok else 1


def cmd_blob_dump(args) -> int:
    if args.file:
        with open(args.file, "rb") as f:
            b = blob.Blob.from_bytes(f.read())
    else:
        res = run_scenario(_load_scenario(args))
        chain = res.world.chain
        h = args.height or chain.cur_height
        if h not in chain.blobs:
            print(f"no blob at height {h}", file=sys.stderr)
            return 2
        b = chain.blobs[h]
    lines = [f"{i:5d}  {name:<40} 0x{value:064x}" for i, name, value in blob.annotate(b)]
    _emit("\n".join(lines), args.out)
    return 0


def cmd_capacity(args) -> int:
    rows = capacity.capacity_report(args.seed)
    if args.json:
        out = {"schema": "privroll-capacity/1",
               "layout": dict(capacity.layout_table()),
               "rows": [{"kind": r.kind, "measured": r.measured, "target": r.target,
                         "ratio": r.ratio, "within_tolerance": r.within_tolerance} for r in rows],
               "ordering": capacity.ordering_holds(rows)}
        _emit(json.dumps(out, sort_keys=True, indent=1), args.out)
    else:
        _emit(capacity.format_report(rows), args.out)
    return 0 if capacity.ordering_holds(rows) and all(r.within_tolerance for r in rows) else 1


def cmd_rules(args) -> int:
    lines = [f"{r}  budget={fraud.rule_reveal_budget(r, args.depth):3d}  {fraud.DESCRIPTIONS[r]}"
             for r in fraud.RULES]
    _emit("\n".join(lines), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="privroll", description="Private multi-token rollup simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        sp.add_argument("--seed", type=int, default=_default_seed(),
                        help=f"random seed (default: ${SEED_ENV} or 0)")
        sp.add_argument("--out", help="write output to this file instead of stdout")
        if scenario:
            sp.add_argument("--scenario", help="scenario JSON file (default: generated honest run)")

    sp = sub.add_parser("run", help="run a scenario and print its report")
    common(sp)
    sp.add_argument("--save-scenario", help="also write the scenario that was run")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("inject", help="publish a batch breaking one rule and report the dispute")
    common(sp)
    sp.add_argument("--rule", required=True, choices=fraud.RULES)
    sp.add_argument("--padding", type=int, default=0, help="extra mint brackets in the target batch")
    sp.add_argument("--at", type=int, default=0, help="with --scenario: which seal to tamper (0-based)")
    sp.set_defaults(func=cmd_inject)

    sp = sub.add_parser("lind", help="play the L2-IND privacy game")
    common(sp, scenario=False)
    sp.add_argument("--rounds", type=int, default=1000)
    sp.add_argument("--strategy", choices=sorted(lind.STRATEGIES), default="random")
    sp.add_argument("--strict", action="store_true", help="check transcript equality on random scripts")
    sp.add_argument("--leaky", action="store_true", help="negative control: plaintext in place of ciphertexts")
    sp.set_defaults(func=cmd_lind)

    sp = sub.add_parser("blob-dump", help="annotated word listing of a blob")
    common(sp)
    sp.add_argument("--height", type=int, default=0, help="batch height (default: tip)")
    sp.add_argument("--file", help="raw blob bytes to dump instead of running a scenario")
    sp.set_defaults(func=cmd_blob_dump)

    sp = sub.add_parser("capacity", help="layout table and homogeneous batch maxima")
    common(sp, scenario=False)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_capacity)

    sp = sub.add_parser("rules", help="list the fraud rules with reveal budgets")
    sp.add_argument("--depth", type=int, default=32, help="tree depth for budgets")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_rules)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
