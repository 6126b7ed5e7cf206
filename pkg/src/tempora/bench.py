"""Synthetic tiered benchmark: timelines, rendering, questions, evaluation and ablations."""

from __future__ import annotations

import csv
import io
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from statistics import mean
from typing import Iterable, Sequence

from . import allen
from .compiler import Document, Question, compile_statements, eval_arithmetic, parse_document, parse_statement, render_relation, retrieve
from .errors import InvalidSize, Unanchored
from .evidential import NoisyProvider, RemoteProvider, RuleBasedProvider
from .network import Event, is_consistent, path_consistency, possible
from .orchestrator import MCTSConfig, SearchOptions, initial_blackboard, mcts_search
from .pis import NONE, PISConfig, classify_cause

TIERS = ("structured", "semi", "unstructured")
HORIZON = 400

EVENT_NOUNS = (
    "audit", "banquet", "briefing", "ceremony", "concert", "conference", "contract", "debate",
    "delivery", "deployment", "dinner", "drought", "election", "excavation", "exhibition", "expedition",
    "festival", "flood", "fundraiser", "hearing", "inspection", "interview", "investigation", "launch",
    "lecture", "lockdown", "merger", "migration", "negotiation", "outage", "parade", "pilgrimage",
    "protest", "rally", "recession", "rehearsal", "renovation", "retreat", "review", "seminar",
    "strike", "summit", "surgery", "survey", "tournament", "trial", "voyage", "wedding", "workshop",
    "harvest", "blizzard", "broadcast", "construction", "recall", "residency", "sabbatical", "tour",
    "treaty", "upgrade", "vigil",
)
DISTRACTOR_NOUNS = (
    "eclipse", "regatta", "marathon", "auction", "carnival", "symposium", "jamboree", "hackathon",
    "gala", "expo", "derby", "fiesta",
)

_PARAPHRASES = (
    "{a} came first, and later that week, {b} got going",
    "in the aftermath of {a}, people talked about {b}",
    "once {a} was under way, {b} was on everyone's mind",
    "{b}, as it turned out, was tied up with {a}",
    "people remember {a}; {b} was never far away",
)
_ANCHOR_PARAPHRASES = (
    "around day {d}, {a} was said to be {w}",
    "by day {d} or so, {a} had {w}",
)


@dataclass(frozen=True)
class Timeline:
    seed: int
    events: tuple[Event, ...]

    def labels(self) -> list[str]:
        return [e.id for e in self.events]

    def interval(self, label: str) -> tuple[int, int]:
        for e in self.events:
            if e.id == label:
                return e.interval
        raise KeyError(label)

    def relation(self, a: str, b: str) -> int:
        return allen.basic_relation_of(self.interval(a), self.interval(b))

    def truth(self) -> dict[tuple[str, str], int]:
        labels = self.labels()
        return {(a, b): self.relation(a, b) for i, a in enumerate(labels) for b in labels[i + 1 :]}


def generate_timeline(seed: int, n_events: int, vocabulary: Sequence[str] = EVENT_NOUNS) -> Timeline:
    """Random integer intervals in [0, 400]; endpoints are reused now and then so
    meets/starts/finishes/equals relations show up."""
    if not 2 <= n_events <= 12:
        raise InvalidSize(f"n_events must lie in [2, 12], got {n_events}")
    rng = random.Random(f"timeline|{seed}|{n_events}")
    labels = rng.sample(list(vocabulary), n_events)
    points: list[int] = []
    events = []
    for label in labels:
        while True:
            s = rng.choice(points) if points and rng.random() < 0.3 else rng.randint(0, HORIZON - 10)
            later = [p for p in points if p > s]
            e = rng.choice(later) if later and rng.random() < 0.3 else s + rng.randint(5, 80)
            if s < e <= HORIZON:
                break
        points += [s, e]
        events.append(Event(label, label, (s, e)))
    return Timeline(seed, tuple(events))


@dataclass(frozen=True)
class TierSpec:
    tier: str
    p_flip: float = 0.0
    p_drop: float = 0.0
    p_paraphrase: float = 0.0
    distractors: int = 0
    extra_pairs: float = 0.5
    anchor_rate: float = 0.5
    hedge_flipped: float = 0.8
    hedge_correct: float = 0.1

    def __post_init__(self):
        if self.tier not in TIERS:
            raise ValueError(f"unknown tier {self.tier!r}")
        for name in ("p_flip", "p_drop", "p_paraphrase", "extra_pairs", "anchor_rate", "hedge_flipped", "hedge_correct"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.distractors < 0:
            raise ValueError("distractors must be non-negative")
        if self.tier == "structured" and (self.p_flip or self.p_drop or self.p_paraphrase or self.distractors):
            raise ValueError("the structured tier carries no noise")
        if self.tier != "unstructured" and self.p_paraphrase:
            raise ValueError("paraphrasing only applies to the unstructured tier")
        if self.tier != "semi" and self.p_flip:
            raise ValueError("relation flips only apply to the semi tier")

    @classmethod
    def default(cls, tier: str) -> "TierSpec":
        if tier == "structured":
            return cls("structured")
        if tier == "semi":
            return cls("semi", p_flip=0.15, p_drop=0.15, distractors=2)
        if tier == "unstructured":
            return cls("unstructured", p_drop=0.15, p_paraphrase=0.6, distractors=2)
        raise ValueError(f"unknown tier {tier!r}")


def _anchor_sentences(label: str, iv: tuple[int, int]) -> list[tuple[str, str]]:
    return [(f"{label} starts on day {iv[0]}", "start"), (f"{label} ends on day {iv[1]}", "end")]


def _distractor_sentences(rng: random.Random, count: int) -> list[str]:
    if count == 0:
        return []
    tl = generate_timeline(rng.randrange(1 << 30), 3, DISTRACTOR_NOUNS)
    a, b, c = tl.labels()
    pool = [render_relation(x, tl.relation(x, y), y) for x, y in ((a, b), (b, c), (a, c))]
    return [pool[i % len(pool)] for i in range(count)]


def render_tier(tl: Timeline, spec: TierSpec, seed: int = 0) -> list[Document]:
    rng = random.Random(f"render|{spec.tier}|{tl.seed}|{seed}")
    order = sorted(tl.events, key=lambda e: (e.interval, e.id))
    labels = [e.id for e in order]
    prefix = f"{spec.tier}-{tl.seed}-{seed}"
    pairs = list(zip(labels, labels[1:]))
    if spec.tier == "structured":
        sentences = [render_relation(a, tl.relation(a, b), b) for a, b in pairs]
        for e in order:
            sentences += [s for s, _ in _anchor_sentences(e.id, e.interval)]
        return [Document(f"{prefix}-0", tuple(sentences), spec.tier)]

    pairs += [(labels[i], labels[i + 2]) for i in range(len(labels) - 2) if rng.random() < spec.extra_pairs]
    sentences: list[str] = []
    for a, b in pairs:
        if rng.random() < spec.p_drop:
            continue
        rel = tl.relation(a, b)
        if rng.random() < spec.p_flip:
            rel = rng.choice(allen.basics(allen.NEIGHBOURS[rel]))
            hedged = rng.random() < spec.hedge_flipped
        else:
            hedged = rng.random() < spec.hedge_correct
        text = render_relation(a, rel, b, hedged)
        if rng.random() < spec.p_paraphrase:
            text = rng.choice(_PARAPHRASES).format(a=f"the {a}", b=f"the {b}")
            assert not parse_statement(text)
        sentences.append(text)
    for e in order:
        if rng.random() >= spec.anchor_rate:
            continue
        for text, which in _anchor_sentences(e.id, e.interval):
            if rng.random() < spec.p_drop:
                continue
            if rng.random() < spec.p_paraphrase:
                d = e.interval[0] if which == "start" else e.interval[1]
                word = "beginning" if which == "start" else "wrapping up"
                text = rng.choice(_ANCHOR_PARAPHRASES).format(a=f"the {e.id}", d=d, w=word)
                assert not parse_statement(text)
            sentences.append(text)
    sentences += _distractor_sentences(rng, spec.distractors)
    rng.shuffle(sentences)
    docs = [
        Document(f"{prefix}-{i // 2}", tuple(sentences[i : i + 2]), spec.tier) for i in range(0, len(sentences), 2)
    ]
    return docs or [Document(f"{prefix}-0", (), spec.tier)]


# -- questions --------------------------------------------------------------------


@dataclass(frozen=True)
class QAInstance:
    id: str
    context: tuple[Document, ...]
    question: Question
    gold: object  # "yes" | "no" | int
    tier: str

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "tier": self.tier,
            "context": [d.to_json() for d in self.context],
            "question": self.question.to_json(),
            "gold": self.gold,
        }

    @classmethod
    def from_json(cls, d: dict) -> "QAInstance":
        return cls(
            str(d["id"]),
            tuple(Document.from_json(x) for x in d["context"]),
            Question.from_json(d["question"]),
            d["gold"],
            d["tier"],
        )


def _arithmetic(tl: Timeline, rng: random.Random) -> tuple[str, int]:
    a, b = rng.sample(tl.labels(), 2)
    (sa, ea), (sb, eb) = tl.interval(a), tl.interval(b)
    form = rng.randrange(3)
    if form == 0:
        return f"duration({a})", ea - sa
    if form == 1:
        return f"end({b}) - start({a})", eb - sa
    return f"start({b}) - end({a}) + duration({b})", sb - ea + (eb - sb)


def _entailment(tl: Timeline, rng: random.Random, yes: bool) -> Question:
    a, b = rng.sample(tl.labels(), 2)
    truth = tl.relation(a, b)
    if yes:
        rel = truth
    elif rng.random() < 0.5:
        rel = rng.choice(allen.basics(allen.NEIGHBOURS[truth]))
    else:
        rel = rng.choice([r for r in range(allen.K) if r != truth])
    return Question("entailment", (a, b), 1 << rel)


def make_questions(
    tl: Timeline,
    tier: str,
    seed: int,
    n: int,
    context: Sequence[Document] = (),
    start_yes: bool | None = None,
) -> list[QAInstance]:
    """Questions with gold answers read off the timeline only.

    Entailment golds alternate yes/no (from a random start unless
    ``start_yes`` is given), so the classes differ by at most one.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if tier not in TIERS:
        raise ValueError(f"unknown tier {tier!r}")
    rng = random.Random(f"questions|{tier}|{tl.seed}|{seed}")
    yes = rng.random() < 0.5 if start_yes is None else start_yes
    out = []
    for i in range(n):
        qid = f"{tier}-{tl.seed}-{seed}-q{i}"
        if tier == "structured" and i % 2 == 0:
            expr, value = _arithmetic(tl, rng)
            out.append(QAInstance(qid, tuple(context), Question("arithmetic", expr=expr), value, tier))
            continue
        q = _entailment(tl, rng, yes)
        out.append(QAInstance(qid, tuple(context), q, "yes" if yes else "no", tier))
        yes = not yes
    return out


def _check_decision_complete(docs: Sequence[Document]) -> None:
    statements = [st for d in docs for st in parse_document(d)]
    g, _ = compile_statements(statements, RuleBasedProvider())
    if len(g) <= 7 and path_consistency(g).consistent != is_consistent(g):
        raise RuntimeError("path consistency disagrees with exact search on a generated instance")


def build_suite(
    tier: str,
    seed: int,
    n: int = 500,
    per_timeline: int = 5,
    n_events: tuple[int, int] = (4, 6),
    spec: TierSpec | None = None,
) -> list[QAInstance]:
    spec = spec or TierSpec.default(tier)
    rng = random.Random(f"suite|{tier}|{seed}")
    out: list[QAInstance] = []
    j = 0
    while len(out) < n:
        tl = generate_timeline(seed * 100_003 + j, rng.randint(*n_events))
        docs = render_tier(tl, spec, seed)
        _check_decision_complete(docs)
        golds = [i.gold for i in out]
        start_yes = golds.count("yes") <= golds.count("no")
        out += make_questions(tl, tier, seed, min(per_timeline, n - len(out)), docs, start_yes)
        j += 1
    return out


def write_jsonl(instances: Iterable[QAInstance], path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(json.dumps(inst.to_json(), sort_keys=True) + "\n")
            count += 1
    return count


def read_jsonl(path) -> list[QAInstance]:
    with open(path, encoding="utf-8") as fh:
        return [QAInstance.from_json(json.loads(line)) for line in fh if line.strip()]


# -- variants and evaluation ---------------------------------------------------------


@dataclass(frozen=True)
class SystemVariant:
    name: str
    pis: dict = field(default_factory=dict)
    options: SearchOptions = SearchOptions()
    provider: str | None = None
    neural_only: bool = False


VARIANTS = {
    "full_pis": SystemVariant("full_pis"),
    "no_pis": SystemVariant("no_pis", options=SearchOptions(repairs=False, use_signal=False)),
    "no_credal": SystemVariant("no_credal", pis={"beta": 1.0}),
    "no_neural": SystemVariant("no_neural", pis={"beta": 0.0}, options=SearchOptions(culprit_by_evidence=False)),
    "no_step": SystemVariant("no_step", options=SearchOptions(step_level=False, localize_conflict=False)),
    "symbolic_only": SystemVariant(
        "symbolic_only", options=SearchOptions(repairs=False, use_signal=False), provider="rule_based"
    ),
    "neural_only": SystemVariant("neural_only", neural_only=True),
}
ABLATIONS = ("full_pis", "no_pis", "no_credal", "no_neural", "no_step")


def make_provider(spec: dict | None):
    spec = dict(spec or {"name": "rule_based"})
    name = spec.pop("name", "rule_based")
    if name == "rule_based":
        return RuleBasedProvider()
    if name == "noisy":
        return NoisyProvider(**spec)
    if name == "remote":
        return RemoteProvider(**spec)
    raise ValueError(f"unknown provider {name!r}")


@dataclass(frozen=True)
class InstanceResult:
    id: str
    tier: str
    kind: str
    gold: object
    verdict: object
    correct: bool
    flagged: tuple[tuple[int, str], ...]
    j_pis: float


def _neural_only(inst: QAInstance, provider) -> object:
    q = inst.question
    docs = retrieve(inst.context, q, 3) if inst.context else []
    statements = [st for d in docs for st in parse_document(d)]
    if q.kind == "arithmetic":
        g, _ = compile_statements([s for s in statements if s.kind != "relation"], provider)
        try:
            return eval_arithmetic(g, q.expr)
        except (Unanchored, KeyError):
            return "unknown"
    a, b = q.edge
    proposal = allen.UNIVERSAL
    for st in statements:
        if st.kind != "relation" or {st.event, st.other} != {a, b}:
            continue
        rel, _ = provider.propose(st)
        proposal &= rel if st.event == a else allen.converse(rel)
    if proposal == allen.UNIVERSAL:
        return "unknown"
    if proposal and proposal & ~q.relations == 0:
        return "yes"
    return "no" if proposal & q.relations == 0 else "unknown"


def _instance_seed(seed: int, inst_id: str) -> int:
    return random.Random(f"{seed}:{inst_id}").randrange(1 << 31)


def run_instance(
    inst: QAInstance,
    variant: SystemVariant,
    pis_cfg: PISConfig = PISConfig(),
    mcts_cfg: MCTSConfig = MCTSConfig(),
    provider_spec: dict | None = None,
) -> InstanceResult:
    provider = make_provider({"name": variant.provider} if variant.provider else provider_spec)
    cfg = replace(pis_cfg, **variant.pis)
    flagged: tuple = ()
    j = 0.0
    if variant.neural_only:
        verdict = _neural_only(inst, provider)
    else:
        mc = replace(mcts_cfg, seed=_instance_seed(mcts_cfg.seed, inst.id))
        bb = initial_blackboard(inst.question, inst.context, provider, mc.retrieve_k)
        trace, _ = mcts_search(bb, mc, cfg, variant.options)
        verdict = trace.final_verdict.verdict
        j = trace.j_pis
        flagged = tuple(
            (k, classify_cause(s.signal, cfg))
            for k, s in enumerate(trace.steps, start=1)
            if classify_cause(s.signal, cfg) != NONE
        )
    kind = inst.question.kind
    if kind == "entailment":
        predicted = "yes" if verdict == "yes" else "no"
        correct = predicted == inst.gold
    else:
        correct = verdict == inst.gold
    return InstanceResult(inst.id, inst.tier, kind, inst.gold, verdict, correct, flagged, j)


@dataclass(frozen=True)
class Diagnostics:
    accuracy: float
    fp: int
    fn: int
    correct: int
    total: int
    binary_total: int
    arithmetic_accuracy: float | None
    localization: dict
    per_tier: dict
    variant: str = ""

    def to_json(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        lines = [f"variant: {self.variant}", f"{'tier':<14}{'n':>6}{'accuracy':>10}{'fp':>6}{'fn':>6}"]
        for tier, row in self.per_tier.items():
            lines.append(f"{tier:<14}{row['n']:>6}{row['accuracy']:>10.4f}{row['fp']:>6}{row['fn']:>6}")
        lines.append(f"{'all':<14}{self.total:>6}{self.accuracy:>10.4f}{self.fp:>6}{self.fn:>6}")
        if self.arithmetic_accuracy is not None:
            lines.append(f"arithmetic accuracy: {self.arithmetic_accuracy:.4f} (FP/FN not defined)")
        flagged = sum(len(v) for v in self.localization.values())
        lines.append(f"flagged steps: {flagged} across {sum(1 for v in self.localization.values() if v)} instances")
        return "\n".join(lines)


def _aggregate(results: Sequence[InstanceResult], variant: str) -> Diagnostics:
    def summary(rs):
        binary = [r for r in rs if r.kind == "entailment"]
        return {
            "n": len(rs),
            "accuracy": sum(r.correct for r in rs) / len(rs),
            "fp": sum(1 for r in binary if r.gold == "no" and r.verdict == "yes"),
            "fn": sum(1 for r in binary if r.gold == "yes" and r.verdict != "yes"),
        }

    allrow = summary(results)
    arith = [r for r in results if r.kind == "arithmetic"]
    per_tier = {t: summary([r for r in results if r.tier == t]) for t in TIERS if any(r.tier == t for r in results)}
    return Diagnostics(
        accuracy=allrow["accuracy"],
        fp=allrow["fp"],
        fn=allrow["fn"],
        correct=sum(r.correct for r in results),
        total=len(results),
        binary_total=sum(1 for r in results if r.kind == "entailment"),
        arithmetic_accuracy=sum(r.correct for r in arith) / len(arith) if arith else None,
        localization={r.id: [list(f) for f in r.flagged] for r in results},
        per_tier=per_tier,
        variant=variant,
    )


def _run_chunk(args):
    chunk, variant, pis_cfg, mcts_cfg, provider_spec = args
    return [run_instance(i, variant, pis_cfg, mcts_cfg, provider_spec) for i in chunk]


def evaluate(
    variant: SystemVariant | str,
    instances: Sequence[QAInstance],
    pis_cfg: PISConfig = PISConfig(),
    mcts_cfg: MCTSConfig = MCTSConfig(),
    provider_spec: dict | None = None,
    parallel: int = 1,
) -> Diagnostics:
    if isinstance(variant, str):
        variant = VARIANTS[variant]
    if not instances:
        raise ValueError("no instances to evaluate")
    if parallel <= 1:
        results = [run_instance(i, variant, pis_cfg, mcts_cfg, provider_spec) for i in instances]
    else:
        size = max(1, len(instances) // (parallel * 4))
        chunks = [instances[i : i + size] for i in range(0, len(instances), size)]
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            parts = pool.map(_run_chunk, [(c, variant, pis_cfg, mcts_cfg, provider_spec) for c in chunks])
            results = [r for part in parts for r in part]
    return _aggregate(results, variant.name)


def run_ablation(
    tiers: Sequence[str] = ("semi",),
    variants: Sequence[str] = ABLATIONS,
    seeds: Sequence[int] = (0, 1, 2),
    n: int = 500,
    pis_cfg: PISConfig = PISConfig(),
    mcts_cfg: MCTSConfig = MCTSConfig(),
    provider_spec: dict | None = None,
    parallel: int = 1,
) -> list[dict]:
    """Variant x tier accuracy averaged over seeds, with the gap to ``full_pis``."""
    if not seeds:
        raise ValueError("need at least one seed")
    suites = {(t, s): build_suite(t, s, n) for t in tiers for s in seeds}
    acc: dict[tuple[str, str], float] = {}
    for v in variants:
        for t in tiers:
            acc[(v, t)] = mean(
                evaluate(v, suites[(t, s)], pis_cfg, replace(mcts_cfg, seed=s), provider_spec, parallel).accuracy
                for s in seeds
            )
    rows = []
    for v in variants:
        row = {"variant": v}
        for t in tiers:
            row[f"{t}_accuracy"] = acc[(v, t)]
            if ("full_pis", t) in acc:
                row[f"{t}_delta"] = acc[(v, t)] - acc[("full_pis", t)]
        rows.append(row)
    return rows


def ablation_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: f"{v:.6f}" if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


# -- repair fixture --------------------------------------------------------------------


@dataclass(frozen=True)
class RepairCase:
    instance: QAInstance
    culprit: str  # cid of the injected constraint


def repair_fixture(seed: int = 0, n: int = 200, n_events: tuple[int, int] = (4, 6)) -> list[RepairCase]:
    """Clean grammar contexts with one hedged constraint that contradicts the rest.

    The question always concerns the corrupted pair; golds alternate between
    the true relation (yes) and the injected one (no).
    """
    rng = random.Random(f"repair|{seed}")
    out: list[RepairCase] = []
    j = 0
    while len(out) < n:
        tl = generate_timeline(seed * 100_003 + 50_000 + j, rng.randint(*n_events))
        j += 1
        labels = [e.id for e in sorted(tl.events, key=lambda e: (e.interval, e.id))]
        pairs = list(zip(labels, labels[1:])) + list(zip(labels, labels[2:]))
        sentences = [render_relation(a, tl.relation(a, b), b) for a, b in pairs]
        doc = Document(f"fix-{seed}-{j}-0", tuple(sentences), "semi")
        g, _ = compile_statements(parse_document(doc), RuleBasedProvider())
        a, b = rng.sample(labels, 2)
        wrong = [r for r in range(allen.K) if not possible(g, (a, b), 1 << r)]
        if not wrong:
            continue
        r = rng.choice(wrong)
        culprit = Document(f"fix-{seed}-{j}-1", (render_relation(a, r, b, hedged=True),), "semi")
        yes = len(out) % 2 == 0
        q = Question("entailment", (a, b), 1 << (tl.relation(a, b) if yes else r))
        inst = QAInstance(f"fix-{seed}-{j}", (doc, culprit), q, "yes" if yes else "no", "semi")
        out.append(RepairCase(inst, f"{culprit.id}:0"))
    return out
