"""Blackboard state, proof steps, repairs and the UCT search over proof traces."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from . import allen
from .allen import UNIVERSAL, compose
from .compiler import Document, Question, compile_statements, eval_arithmetic, mentions, parse_document, retrieve
from .credal import CONTRADICTION, Assertion, CredalInterval, credal_support, focal_elements
from .errors import BudgetExhausted, InapplicableStep, Unanchored
from .evidential import RULE_EVIDENCE, DirichletEvidence, RuleBasedProvider, vacuity
from .network import EventGraph, entails, is_consistent, path_consistency, possible
from .pis import CREDAL, EPISTEMIC, NONE, PISConfig, StepSignal, classify_cause, step_inconsistency, trace_inconsistency

COMPOSITION = "composition"
ANSWER = "answer_assertion"
REPLAN = "replan"
MUTATE = "mutate"

_VACUOUS = DirichletEvidence.vacuous()

# lexicographic: Allen feasibility first, then reaching a verdict, then J
INFEASIBLE_COST = 1000.0
NO_VERDICT_COST = 100.0


@dataclass(frozen=True)
class MCTSConfig:
    iterations: int = 400
    c_uct: float = 1.4
    max_depth: int = 24
    max_mutations: int = 3
    seed: int = 0
    branching: int = 4
    patience: int = 16
    retrieve_k: int = 3

    def __post_init__(self):
        for name in ("iterations", "max_depth", "branching", "patience", "retrieve_k"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.max_mutations < 0 or self.c_uct < 0:
            raise ValueError("max_mutations and c_uct must be non-negative")


@dataclass(frozen=True)
class SearchOptions:
    """Switches used by the ablation variants."""

    repairs: bool = True
    dead_end_replan: bool = True
    step_level: bool = True
    culprit_by_evidence: bool = True
    localize_conflict: bool = True
    use_signal: bool = True


@dataclass(frozen=True)
class ProofStep:
    kind: str
    premises: tuple[tuple[str, str], ...]
    edge: tuple[str, str] | None
    relations: int
    signal: StepSignal
    evidence: DirichletEvidence
    touched: tuple[str, ...]

    @property
    def vertices(self) -> tuple[str, ...]:
        return self.touched

    @property
    def conclusion(self) -> tuple[tuple[str, str] | None, int]:
        return self.edge, self.relations

    def describe(self) -> str:
        if self.kind == ANSWER and self.edge is None:
            return "answer(arithmetic)"
        rel = "|".join(allen.names(self.relations)) or "{}"
        a, b = self.edge
        if self.kind == ANSWER:
            return f"answer {a} {rel} {b}"
        via = " , ".join(f"{x}-{y}" for x, y in self.premises)
        return f"{a} {rel} {b}  <= {via}"


@dataclass(frozen=True)
class RepairAction:
    kind: str
    target: str
    outcome: str
    after_step: int

    def to_json(self) -> dict:
        return {"kind": self.kind, "target": self.target, "outcome": self.outcome}


@dataclass(frozen=True)
class Answer:
    verdict: object  # "yes" | "no" | "unknown" | int
    supporting_credal: CredalInterval
    trace_ref: str | None = None


@dataclass(frozen=True)
class ProofTrace:
    steps: tuple[ProofStep, ...]
    repairs: tuple[RepairAction, ...] = ()
    final_verdict: Answer | None = None
    j_pis: float = 0.0
    seed: int = 0

    def __len__(self) -> int:
        return len(self.steps)

    def to_jsonl(self, cfg: PISConfig) -> str:
        lines = []
        for k, step in enumerate(self.steps):
            psi = 0.0
            if k:
                from .pis import continuity_penalty

                psi = continuity_penalty(self.steps[k - 1], step, cfg)
            after = [r.to_json() for r in self.repairs if r.after_step == k + 1]
            lines.append(
                {
                    "k": k + 1,
                    "kind": step.kind,
                    "premises": [list(p) for p in step.premises],
                    "conclusion": {
                        "edge": list(step.edge) if step.edge else None,
                        "relations": allen.names(step.relations),
                    },
                    "l_inc": step.signal.l_inc,
                    "epistemic": step.signal.epistemic_term,
                    "credal": step.signal.credal.to_json(),
                    "psi": psi,
                    "cause": classify_cause(step.signal, cfg),
                    "repair": after or None,
                }
            )
        verdict = self.final_verdict.verdict if self.final_verdict else "unknown"
        lines.append(
            {
                "j_pis": self.j_pis,
                "verdict": verdict,
                "seed": self.seed,
                "pre_repairs": [r.to_json() for r in self.repairs if r.after_step == 0],
            }
        )
        return "".join(json.dumps(line, sort_keys=True) + "\n" for line in lines)


@dataclass(frozen=True)
class Blackboard:
    question: Question
    pool: tuple[Document, ...]
    retrieved: tuple[str, ...]
    statements: tuple
    graph: EventGraph
    evidence: dict
    provider: object = field(compare=False)
    removed: tuple[str, ...] = ()
    derived_evidence: dict = field(default_factory=dict)
    trace: tuple[ProofStep, ...] = ()
    repair_log: tuple[RepairAction, ...] = ()
    mutations: int = 0
    replans: int = 0
    answered: bool = False
    pending: str = NONE
    focal: tuple = ()
    _steps: dict | None = field(default=None, init=False, compare=False, repr=False)

    @property
    def telemetry(self) -> list[StepSignal]:
        return [s.signal for s in self.trace]

    @property
    def feasible(self) -> bool:
        return bool(self.focal)


def _build_graph(question: Question, statements, provider, removed) -> tuple[EventGraph, dict, tuple]:
    g, evidence = compile_statements(statements, provider)
    for v in question.events():
        g = g.ensure_vertex(v)
    if removed:
        drop = set(removed)
        extracted = {}
        for key, cs in g.extracted.items():
            kept = tuple(c for c in cs if c.cid not in drop)
            if kept:
                extracted[key] = kept
        g = g.reset_to_extracted(extracted)
    return g, evidence, tuple(focal_elements(g))


def initial_blackboard(
    question: Question, pool: Sequence[Document], provider=None, k: int = 3
) -> Blackboard:
    provider = provider or RuleBasedProvider()
    pool = tuple(pool)
    docs = retrieve(pool, question, k) if pool else []
    statements = tuple(st for d in docs for st in parse_document(d))
    g, evidence, focal = _build_graph(question, statements, provider, ())
    return Blackboard(
        question=question,
        pool=pool,
        retrieved=tuple(d.id for d in docs),
        statements=statements,
        graph=g,
        evidence=evidence,
        provider=provider,
        focal=focal,
    )


# -- steps ----------------------------------------------------------------------


def _edge_evidence(bb: Blackboard, a: str, b: str) -> DirichletEvidence:
    idx = bb.graph._index
    key = (a, b) if idx[a] < idx[b] else (b, a)
    if key in bb.derived_evidence:
        return bb.derived_evidence[key]
    cs = bb.graph._extracted.get(key)
    if not cs:
        return _VACUOUS
    out = None
    for c in cs:
        alpha = bb.evidence.get(c.cid, _VACUOUS)
        out = alpha if out is None else out.fuse(alpha)
    return out


def _support(bb: Blackboard, edge: tuple[str, str], relations: int) -> CredalInterval:
    if not relations:
        return CONTRADICTION
    return credal_support(bb.graph, Assertion(edge, relations), list(bb.focal))


def _answer_step(bb: Blackboard, cfg: PISConfig) -> ProofStep | None:
    q = bb.question
    if q.kind == "entailment":
        a, b = q.edge
        lab = bb.graph.label(a, b)
        if lab & q.relations == 0:
            claim = UNIVERSAL & ~q.relations
        elif lab & ~q.relations == 0:
            claim = q.relations
        else:
            return None
        ci = _support(bb, (a, b), claim)
        ev = _edge_evidence(bb, a, b)
        return ProofStep(ANSWER, (), (a, b), claim, step_inconsistency(ci, ev, cfg), ev, (a, b))
    try:
        eval_arithmetic(bb.graph, q.expr)
    except Unanchored:
        return None
    ci = CredalInterval(1.0, 1.0) if bb.focal else CONTRADICTION
    ev = DirichletEvidence.concentrated(1 << allen.EQUALS, RULE_EVIDENCE)
    return ProofStep(ANSWER, (), None, 0, step_inconsistency(ci, ev, cfg), ev, tuple(q.events()))


def _composition_step(bb, i, k, j, new, cfg) -> ProofStep:
    # weakest link among premises that assert something; a universal premise carries no evidence
    informative = [p for p in ((i, k), (k, j)) if bb.graph.label(*p) != UNIVERSAL]
    ev = _VACUOUS
    if informative:
        ev = max((_edge_evidence(bb, *p) for p in informative), key=vacuity)
    ci = _support(bb, (i, j), new)
    return ProofStep(COMPOSITION, ((i, k), (k, j)), (i, j), new, step_inconsistency(ci, ev, cfg), ev, (i, k, j))


def _compositions(bb: Blackboard) -> list[tuple[str, str, str, int]]:
    g = bb.graph
    vs = g.vertices
    n = len(vs)
    M = g.matrix()
    seen = {}
    for x in range(n):
        for y in range(x + 1, n):
            cur = M[x][y]
            if not cur:
                continue
            for z in range(n):
                if z == x or z == y:
                    continue
                new = cur & compose(M[x][z], M[z][y])
                if new != cur and (x, y, new) not in seen:
                    seen[(x, y, new)] = (vs[x], vs[z], vs[y], new)
    return list(seen.values())


def _relevance(step: ProofStep, q: Question) -> int:
    qv = set(q.events())
    if q.kind == "entailment" and step.edge and set(step.edge) == qv:
        return 0
    return 1 if step.edge and set(step.edge) & qv else 2


def _step_order(bb: Blackboard, cfg: PISConfig):
    vs = bb.graph.vertices

    def key(step: ProofStep):
        flagged = step.signal.l_inc > cfg.tau
        pos = tuple(vs.index(v) for v in step.touched)
        return (flagged, _relevance(step, bb.question), round(step.signal.l_inc, 12), pos)

    return key


def applicable_steps(bb: Blackboard, cfg: PISConfig = PISConfig()) -> list[ProofStep]:
    """Answer assertion (when the question edge is decided) then strictly refining compositions."""
    if bb.answered:
        return []
    cached = bb._steps.get(cfg) if bb._steps is not None else None
    if cached is not None:
        return list(cached)
    out = []
    ans = _answer_step(bb, cfg)
    if ans is not None:
        out.append(ans)
    steps = [_composition_step(bb, i, k, j, new, cfg) for i, k, j, new in _compositions(bb)]
    steps.sort(key=_step_order(bb, cfg))
    out += steps
    if bb._steps is None:
        object.__setattr__(bb, "_steps", {})
    bb._steps[cfg] = tuple(out)
    return out


def _cause_after(bb: Blackboard, cfg: PISConfig, opts: SearchOptions) -> str:
    if opts.step_level:
        return classify_cause(bb.trace[-1].signal, cfg)
    sig = trace_inconsistency(bb.trace, cfg)
    if sig.j_pis <= cfg.tau:
        return NONE
    e = sum(cfg.gamma**k * cfg.beta * s.epistemic_term for k, s in enumerate(sig.per_step))
    c = sum(cfg.gamma**k * (1 - cfg.beta) * s.credal_term for k, s in enumerate(sig.per_step))
    return EPISTEMIC if e >= c else CREDAL


def apply_step(
    bb: Blackboard, step: ProofStep, cfg: PISConfig = PISConfig(), opts: SearchOptions = SearchOptions()
) -> Blackboard:
    if bb.answered:
        raise InapplicableStep("question already answered")
    if step.kind == COMPOSITION:
        (i, k), (_, j) = step.premises
        cur = bb.graph.label(i, j)
        new = cur & compose(bb.graph.label(i, k), bb.graph.label(k, j))
        if new == cur or new != step.relations:
            raise InapplicableStep(f"composition on ({i}, {j}) does not strictly refine")
        graph = bb.graph.refine(i, j, new)
        key = (i, j) if bb.graph.vertices.index(i) < bb.graph.vertices.index(j) else (j, i)
        derived = dict(bb.derived_evidence)
        derived[key] = step.evidence
        nb = replace(bb, graph=graph, derived_evidence=derived, trace=bb.trace + (step,))
    elif step.kind == ANSWER:
        ans = _answer_step(bb, cfg)
        if ans is None or ans.relations != step.relations:
            raise InapplicableStep("question edge is not decided")
        nb = replace(bb, answered=True, trace=bb.trace + (step,))
    else:
        raise InapplicableStep(f"unknown step kind {step.kind!r}")
    return replace(nb, pending=_cause_after(nb, cfg, opts))


# -- repairs --------------------------------------------------------------------


def _triangle_consistent(a: int, b: int, c: int) -> bool:
    """Path closure of a 3-vertex network x-y (a), y-z (b), x-z (c); complete at this size."""
    while a and b and c:
        a2 = a & compose(c, allen.converse(b))
        b2 = b & compose(allen.converse(a2), c)
        c2 = c & compose(a2, b2)
        if (a2, b2, c2) == (a, b, c):
            return True
        a, b, c = a2, b2, c2
    return False


def _local_triangle_conflicts(g: EventGraph) -> int:
    n = len(g)
    L = g.matrix()
    return sum(
        1
        for x in range(n)
        for y in range(x + 1, n)
        for z in range(y + 1, n)
        if not _triangle_consistent(L[x][y], L[y][z], L[x][z])
    )


def conflict_measure(g: EventGraph) -> tuple[int, int]:
    """(globally inconsistent, locally inconsistent triangles) of the extracted network."""
    base = g.reset_to_extracted()
    return (0 if is_consistent(base) else 1, _local_triangle_conflicts(base))


def _mutate(bb: Blackboard, opts: SearchOptions, mcts_cfg: MCTSConfig) -> tuple[Blackboard, RepairAction]:
    after = len(bb.trace)
    if bb.mutations >= mcts_cfg.max_mutations:
        return bb, RepairAction(MUTATE, "", "exhausted", after)
    g = bb.graph
    order = {c.cid: i for i, c in enumerate(g.constraints())}

    def rank(c):
        v = vacuity(bb.evidence[c.cid]) if opts.culprit_by_evidence and c.cid in bb.evidence else 0.0
        return (-v, order[c.cid])

    everything = sorted(g.constraints(), key=rank)
    candidates = []
    if opts.localize_conflict:
        pc = path_consistency(g.reset_to_extracted())
        if not pc.consistent:
            tri = set(pc.conflict)
            candidates = [c for c in everything if c.src in tri and c.dst in tri]
    before = conflict_measure(g)
    for pool in (candidates, everything):
        for c in pool:
            g2 = g.remove_constraint(c.cid)
            if conflict_measure(g2) < before:
                removed = bb.removed + (c.cid,)
                nb = replace(
                    bb,
                    graph=g2,
                    removed=removed,
                    derived_evidence={},
                    focal=tuple(focal_elements(g2)),
                    mutations=bb.mutations + 1,
                )
                return nb, RepairAction(MUTATE, c.cid, "applied", after)
    return bb, RepairAction(MUTATE, "", "exhausted", after)


def _replan_targets(bb: Blackboard) -> list[str]:
    if bb.trace and bb.pending != NONE:
        return list(bb.trace[-1].touched)
    return list(dict.fromkeys(list(bb.question.events()) + bb.graph.vertices))


def _replan(bb: Blackboard, mcts_cfg: MCTSConfig) -> tuple[Blackboard, RepairAction]:
    after = len(bb.trace)
    targets = _replan_targets(bb)
    have = set(bb.retrieved)
    scored = [(mentions(d, targets), d) for d in bb.pool if d.id not in have]
    scored = [(s, d) for s, d in scored if s > 0]
    scored.sort(key=lambda sd: (-sd[0], sd[1].id))
    docs = [d for _, d in scored[: mcts_cfg.retrieve_k]]
    if not docs:
        return bb, RepairAction(REPLAN, ",".join(targets), "exhausted", after)
    statements = bb.statements + tuple(st for d in docs for st in parse_document(d))
    g, evidence, focal = _build_graph(bb.question, statements, bb.provider, bb.removed)
    nb = replace(
        bb,
        retrieved=bb.retrieved + tuple(d.id for d in docs),
        statements=statements,
        graph=g,
        evidence=evidence,
        derived_evidence={},
        focal=focal,
        replans=bb.replans + 1,
    )
    return nb, RepairAction(REPLAN, ",".join(d.id for d in docs), "applied", after)


def trigger_repair(
    bb: Blackboard,
    cause: str,
    mcts_cfg: MCTSConfig = MCTSConfig(),
    opts: SearchOptions = SearchOptions(),
) -> Blackboard:
    """Replan on epistemic causes, mutate on credal ones; always logs the action."""
    if cause == NONE:
        raise ValueError("no repair for cause 'none'")
    if cause == EPISTEMIC:
        nb, action = _replan(bb, mcts_cfg)
    else:
        nb, action = _mutate(bb, opts, mcts_cfg)
    if action.outcome == "exhausted":
        return replace(bb, repair_log=bb.repair_log + (action,))
    return replace(nb, repair_log=nb.repair_log + (action,), pending=NONE, answered=False)


def _repair_options(bb: Blackboard, opts: SearchOptions, mcts_cfg: MCTSConfig, dead_end: bool) -> list[str]:
    causes = []
    if bb.pending != NONE and opts.repairs:
        causes.append(bb.pending)
    elif dead_end and not bb.answered and opts.dead_end_replan:
        causes.append(EPISTEMIC)
    out = []
    for cause in causes:
        if cause == CREDAL and bb.mutations >= mcts_cfg.max_mutations:
            continue
        out.append(cause)
    return out


# -- answers ------------------------------------------------------------------


def answer_question(bb: Blackboard) -> Answer:
    q = bb.question
    if q.kind == "arithmetic":
        try:
            value = eval_arithmetic(bb.graph, q.expr)
        except Unanchored:
            return Answer("unknown", CONTRADICTION if not bb.focal else CredalInterval(0.0, 1.0))
        return Answer(value, CredalInterval(1.0, 1.0) if bb.focal else CONTRADICTION)
    ci = _support(bb, q.edge, q.relations)
    if entails(bb.graph, q.edge, q.relations):
        verdict = "yes"
    elif not possible(bb.graph, q.edge, q.relations):
        verdict = "no"
    else:
        verdict = "unknown"
    return Answer(verdict, ci)


# -- search ---------------------------------------------------------------------


@dataclass
class _Node:
    bb: Blackboard
    parent: "_Node | None" = None
    children: list = field(default_factory=list)
    untried: list = field(default_factory=list)
    visits: int = 0
    best: float = math.inf
    exhausted: bool = False
    rollout: tuple | None = None


class _Search:
    def __init__(self, mcts_cfg: MCTSConfig, pis_cfg: PISConfig, opts: SearchOptions):
        self.mcts = mcts_cfg
        self.pis = pis_cfg
        self.opts = opts
        self.rng = random.Random(mcts_cfg.seed)
        self.best_key = None
        self.best_bb = None

    # actions are (label, thunk) pairs; labels keep ordering deterministic
    def actions(self, bb: Blackboard) -> list[tuple[str, Callable[[], Blackboard]]]:
        if len(bb.trace) >= self.mcts.max_depth:
            return []
        steps = applicable_steps(bb, self.pis)
        answer = [s for s in steps if s.kind == ANSWER]
        comps = [s for s in steps if s.kind == COMPOSITION][: self.mcts.branching]
        dead_end = not steps
        out = []
        for cause in _repair_options(bb, self.opts, self.mcts, dead_end):
            out.append((cause, lambda c=cause: trigger_repair(bb, c, self.mcts, self.opts)))
        for s in answer + comps:
            out.append((s.describe(), lambda s=s: apply_step(bb, s, self.pis, self.opts)))
        return out

    def cost(self, bb: Blackboard) -> float:
        if not bb.trace:
            j = 0.0
        elif self.opts.use_signal:
            j = trace_inconsistency(bb.trace, self.pis).j_pis
        else:
            j = 0.01 * len(bb.trace)
        return j + (0.0 if bb.feasible else INFEASIBLE_COST) + (0.0 if bb.answered else NO_VERDICT_COST)

    def consider(self, bb: Blackboard) -> float:
        c = self.cost(bb)
        if self.best_key is not None and (c, len(bb.trace)) > self.best_key[:2]:
            return c
        key = (c, len(bb.trace), tuple(s.describe() for s in bb.trace), len(bb.repair_log))
        if self.best_key is None or key < self.best_key:
            self.best_key = key
            self.best_bb = bb
        return c

    def expand_actions(self, node: _Node) -> None:
        node.untried = self.actions(node.bb)

    def rollout(self, node: _Node) -> float:
        if node.rollout is not None:
            return node.rollout[0]
        bb = node.bb
        best = self.consider(bb)
        acts = self.actions(bb)
        while acts:
            label, thunk = acts[0]
            nb = thunk()
            if nb is bb or (nb.repair_log and nb.repair_log[-1].outcome == "exhausted" and len(nb.repair_log) > len(bb.repair_log)):
                # repair exhausted: fall through to the next action
                acts = acts[1:]
                if nb is not bb:
                    bb = nb
                continue
            bb = nb
            best = min(best, self.consider(bb))
            acts = self.actions(bb)
        node.rollout = (best,)
        return best

    def uct_child(self, node: _Node) -> _Node:
        live = [c for c in node.children if not c.exhausted]
        logn = math.log(max(node.visits, 1))
        scored = []
        for c in live:
            exploit = 1.0 / (1.0 + c.best)
            explore = self.mcts.c_uct * math.sqrt(logn / c.visits) if c.visits else math.inf
            scored.append((exploit + explore, c))
        top = max(s for s, _ in scored)
        ties = [c for s, c in scored if s == top]
        return ties[0] if len(ties) == 1 else self.rng.choice(ties)

    def run(self, root_bb: Blackboard) -> Blackboard:
        root = _Node(root_bb)
        self.expand_actions(root)
        stale = 0
        for _ in range(self.mcts.iterations):
            node = root
            while not node.untried and node.children and any(not c.exhausted for c in node.children):
                node = self.uct_child(node)
            if node.untried:
                label, thunk = node.untried.pop(0)
                child = _Node(thunk(), parent=node)
                self.expand_actions(child)
                node.children.append(child)
                node = child
            prev = self.best_key
            value = self.rollout(node)
            stale = stale + 1 if prev == self.best_key else 0
            n = node
            while n is not None:
                n.visits += 1
                n.best = min(n.best, value)
                n = n.parent
            n = node
            while n is not None and not n.untried and all(c.exhausted for c in n.children):
                n.exhausted = True
                n = n.parent
            if root.exhausted:
                break
            if stale >= self.mcts.patience:
                break
        return self.best_bb if self.best_bb is not None else root_bb


def finalize(bb: Blackboard, cfg: PISConfig, seed: int = 0) -> ProofTrace:
    j = trace_inconsistency(bb.trace, cfg).j_pis if bb.trace else 0.0
    if bb.answered:
        verdict = answer_question(bb)
    else:
        verdict = Answer("unknown", _support(bb, bb.question.edge, bb.question.relations) if bb.question.kind == "entailment" else CONTRADICTION)
    return ProofTrace(bb.trace, bb.repair_log, verdict, j, seed)


def mcts_search(
    bb: Blackboard,
    mcts_cfg: MCTSConfig = MCTSConfig(),
    pis_cfg: PISConfig = PISConfig(),
    opts: SearchOptions = SearchOptions(),
    strict: bool = False,
) -> tuple[ProofTrace, Blackboard]:
    """Search proof traces minimizing the discounted inconsistency objective.

    Returns the best trace and the blackboard it ends in. With ``strict`` a
    search that never reaches a verdict raises :class:`BudgetExhausted`.
    """
    final = _Search(mcts_cfg, pis_cfg, opts).run(bb)
    trace = finalize(final, pis_cfg, mcts_cfg.seed)
    if strict and not final.answered:
        raise BudgetExhausted(trace)
    return trace, final


def replay(initial: Blackboard, trace: ProofTrace, pis_cfg: PISConfig = PISConfig(),
           mcts_cfg: MCTSConfig = MCTSConfig(), opts: SearchOptions = SearchOptions()) -> Blackboard:
    """Re-execute a trace (steps and interleaved repairs) from its initial blackboard."""
    bb = initial

    def repairs_at(k):
        nonlocal bb
        for r in trace.repairs:
            if r.after_step == k:
                cause = EPISTEMIC if r.kind == REPLAN else CREDAL
                bb = trigger_repair(bb, cause, mcts_cfg, opts)

    repairs_at(0)
    for k, step in enumerate(trace.steps, start=1):
        fresh = {s.describe(): s for s in applicable_steps(bb, pis_cfg)}
        if step.describe() not in fresh:
            raise InapplicableStep(f"step {k} is not applicable on replay")
        bb = apply_step(bb, fresh[step.describe()], pis_cfg, opts)
        repairs_at(k)
    return bb


def solve(
    question: Question,
    pool: Sequence[Document],
    provider=None,
    pis_cfg: PISConfig = PISConfig(),
    mcts_cfg: MCTSConfig = MCTSConfig(),
    opts: SearchOptions = SearchOptions(),
) -> tuple[ProofTrace, Blackboard]:
    bb = initial_blackboard(question, pool, provider, mcts_cfg.retrieve_k)
    return mcts_search(bb, mcts_cfg, pis_cfg, opts)
