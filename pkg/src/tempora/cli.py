"""``tempora`` command line: generate, solve, bench, ablate, inspect-trace."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import allen, bench
from .compiler import PHRASES, Document, Question
from .config import PROVIDERS, RunConfig, load_config
from .errors import ConfigError, MalformedInput, TemporaError
from .orchestrator import initial_blackboard, mcts_search

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _read_jsonl(path: str) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise MalformedInput(f"{path}:{lineno}:{exc.colno}: {exc.msg}") from None
    return out


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    cfg = replace(cfg, mcts=replace(cfg.mcts, seed=cfg.seed))
    if args.provider:
        provider = {"name": args.provider}
        if args.provider == "remote":
            if not args.endpoint:
                raise ConfigError("--provider remote needs --endpoint")
            provider["endpoint"] = args.endpoint
        elif args.provider == cfg.provider.get("name"):
            provider = cfg.provider
        cfg = replace(cfg, provider=provider)
    elif args.endpoint:
        cfg = replace(cfg, provider={"name": "remote", "endpoint": args.endpoint})
    return cfg


def parse_question(text: str) -> Question:
    """``"A before C"`` (optionally with a trailing ``?``) or an arithmetic expression."""
    t = " ".join(text.strip().rstrip("?").split())
    if "(" in t:
        return Question("arithmetic", expr=t)
    low = t.lower()
    for phrase in sorted(PHRASES, key=len, reverse=True):
        marker = f" {phrase} "
        if marker in low:
            i = low.index(marker)
            a, b = low[:i].strip(), low[i + len(marker) :].strip()
            for art in ("the ",):
                a = a[len(art) :] if a.startswith(art) else a
                b = b[len(art) :] if b.startswith(art) else b
            if a and b:
                return Question("entailment", (a, b), allen.mask(PHRASES[phrase]))
    names = low.split()
    if len(names) == 3 and names[1] in allen.INDEX:
        return Question("entailment", (names[0], names[2]), allen.mask(names[1]))
    raise MalformedInput(f"cannot parse question {text!r}")


# -- commands ----------------------------------------------------------------------------


def cmd_generate(args, cfg: RunConfig) -> int:
    out = args.out or cfg.paths.get("dataset")
    if not out:
        raise ConfigError("generate needs --out")
    n = args.n or 500
    instances = bench.build_suite(args.tier or "structured", cfg.seed, n)
    bench.write_jsonl(instances, out)
    golds = [i.gold for i in instances]
    print(
        f"wrote {len(instances)} {args.tier or 'structured'} instances to {out} "
        f"(yes={golds.count('yes')} no={golds.count('no')} "
        f"arithmetic={sum(1 for g in golds if isinstance(g, int))})"
    )
    return EXIT_OK


def _load_instance(args):
    if args.instance:
        rows = _read_jsonl(args.instance)
        if not rows:
            raise MalformedInput(f"{args.instance}: no instances")
        if args.id:
            rows = [r for r in rows if str(r.get("id")) == args.id]
            if not rows:
                raise MalformedInput(f"{args.instance}: no instance with id {args.id!r}")
        try:
            inst = bench.QAInstance.from_json(rows[0])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"{args.instance}: {exc}") from None
        question = parse_question(args.question) if args.question else inst.question
        return question, inst.context
    if not (args.context and args.question):
        raise MalformedInput("solve needs --instance, or --context with --question")
    data = _read_json(args.context)
    if not isinstance(data, list):
        raise MalformedInput(f"{args.context}: expected a JSON array of documents")
    try:
        docs = tuple(Document.from_json(d) for d in data)
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"{args.context}: document missing {exc}") from None
    return parse_question(args.question), docs


def cmd_solve(args, cfg: RunConfig) -> int:
    question, docs = _load_instance(args)
    provider = bench.make_provider(cfg.provider)
    bb = initial_blackboard(question, docs, provider, cfg.mcts.retrieve_k)
    trace, _ = mcts_search(bb, cfg.mcts, cfg.pis)
    out = args.out or cfg.paths.get("output") or "trace.jsonl"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(trace.to_jsonl(cfg.pis))
    verdict = trace.final_verdict
    print(f"verdict: {verdict.verdict}")
    print(f"credal: [{verdict.supporting_credal.lower:.4f}, {verdict.supporting_credal.upper:.4f}]")
    print(f"J_PIS: {trace.j_pis:.6f}")
    print(f"steps: {len(trace.steps)}")
    if trace.repairs:
        for r in trace.repairs:
            print(f"repair after step {r.after_step}: {r.kind} {r.outcome} {r.target}")
    else:
        print("repairs: none")
    print(f"trace written to {out}")
    return EXIT_OK


def cmd_bench(args, cfg: RunConfig) -> int:
    path = args.dataset or cfg.paths.get("dataset")
    if not path:
        raise ConfigError("bench needs a dataset path")
    rows = _read_jsonl(path)
    try:
        instances = [bench.QAInstance.from_json(r) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"{path}: {exc}") from None
    variant = args.variant or "full_pis"
    if variant not in bench.VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}")
    diag = bench.evaluate(variant, instances, cfg.pis, cfg.mcts, cfg.provider, args.parallel)
    print(diag.table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(diag.to_json(), fh, sort_keys=True, indent=1)
            fh.write("\n")
    return EXIT_OK


def cmd_ablate(args, cfg: RunConfig) -> int:
    tiers = tuple(args.tier.split(",")) if args.tier else ("semi",)
    for t in tiers:
        if t not in bench.TIERS:
            raise ConfigError(f"unknown tier {t!r}")
    seeds = tuple(int(s) for s in args.seeds.split(",")) if args.seeds else (cfg.seed,)
    rows = bench.run_ablation(tiers, bench.ABLATIONS, seeds, args.n or 500, cfg.pis, cfg.mcts, cfg.provider, args.parallel)
    text = bench.ablation_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_inspect_trace(args, cfg: RunConfig) -> int:
    rows = _read_jsonl(args.trace)
    steps = [r for r in rows if "k" in r]
    summary = next((r for r in rows if "j_pis" in r), None)
    print(f"{'k':>3}  {'kind':<17}{'conclusion':<40}{'l_inc':>8}  {'credal':<17}{'cause':<20}repair")
    for r in steps:
        c = r["conclusion"]
        rel = "|".join(c["relations"]) or "{}"
        concl = f"{c['edge'][0]} {rel} {c['edge'][1]}" if c["edge"] else "arithmetic"
        if len(concl) > 38:
            concl = concl[:35] + "..."
        lo, hi = r["credal"]
        reps = ", ".join(f"{x['kind']}:{x['outcome']}" for x in r["repair"] or [])
        print(f"{r['k']:>3}  {r['kind']:<17}{concl:<40}{r['l_inc']:>8.4f}  [{lo:.3f}, {hi:.3f}]   {r['cause']:<20}{reps}")
    if summary:
        pre = ", ".join(f"{x['kind']}:{x['outcome']}" for x in summary.get("pre_repairs", []))
        print(f"J_PIS={summary['j_pis']:.6f} verdict={summary['verdict']} seed={summary['seed']}" + (f" pre-repairs: {pre}" if pre else ""))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (default: $ANSB_CONFIG)")
    common.add_argument("--seed", type=int, help="overrides the config seed")
    common.add_argument("--provider", choices=PROVIDERS)
    common.add_argument("--endpoint", help="remote extractor URL")
    common.add_argument("--out", help="output path")

    p = argparse.ArgumentParser(prog="tempora", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write a benchmark dataset (JSONL)")
    g.add_argument("--tier", choices=bench.TIERS, default="structured")
    g.add_argument("--n", type=int, default=500)

    s = sub.add_parser("solve", parents=[common], help="answer one question and write its trace")
    s.add_argument("--instance", help="JSONL dataset; the first (or --id) instance is solved")
    s.add_argument("--id")
    s.add_argument("--context", help="JSON array of documents")
    s.add_argument("--question", help='e.g. "surgery before discharge" or "end(a) - start(b)"')

    parallel = dict(type=int, default=os.cpu_count() or 1, help="worker processes")
    b = sub.add_parser("bench", parents=[common], help="evaluate a variant on a dataset")
    b.add_argument("dataset", nargs="?")
    b.add_argument("--variant", choices=sorted(bench.VARIANTS), default="full_pis")
    b.add_argument("--parallel", **parallel)

    a = sub.add_parser("ablate", parents=[common], help="variant x tier accuracy table (CSV)")
    a.add_argument("--tier", help="comma-separated tiers (default: semi)")
    a.add_argument("--seeds", help="comma-separated seeds (default: --seed)")
    a.add_argument("--n", type=int, default=500)
    a.add_argument("--parallel", **parallel)

    t = sub.add_parser("inspect-trace", parents=[common], help="print a step table for a trace file")
    t.add_argument("trace")
    return p


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "bench": cmd_bench,
    "ablate": cmd_ablate,
    "inspect-trace": cmd_inspect_trace,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, MalformedInput) as exc:
        print(f"tempora: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TemporaError, OSError) as exc:
        print(f"tempora: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
