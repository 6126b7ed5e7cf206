import pytest

from tempora import allen
from tempora.bench import (
    ABLATIONS,
    QAInstance,
    TierSpec,
    _aggregate,
    build_suite,
    evaluate,
    generate_timeline,
    make_questions,
    read_jsonl,
    render_tier,
    repair_fixture,
    run_ablation,
    run_instance,
    VARIANTS,
    write_jsonl,
)
from tempora.compiler import compile_statements, parse_document, parse_statement
from tempora.errors import InvalidSize
from tempora.evidential import RuleBasedProvider
from tempora.network import is_consistent

from .conftest import _relation_by_endpoints


def compiled(docs):
    return compile_statements([s for d in docs for s in parse_document(d)], RuleBasedProvider())[0]


def test_timeline_is_deterministic():
    assert generate_timeline(3, 5) == generate_timeline(3, 5)
    assert generate_timeline(3, 5) != generate_timeline(4, 5)


def test_two_event_timeline():
    tl = generate_timeline(0, 2)
    assert len(tl.events) == 2 and len(tl.truth()) == 1


@pytest.mark.parametrize("n", [0, 1, 13])
def test_invalid_timeline_size(n):
    with pytest.raises(InvalidSize):
        generate_timeline(0, n)


def test_truth_matches_endpoint_oracle():
    for seed in range(30):
        tl = generate_timeline(seed, 6)
        for (a, b), r in tl.truth().items():
            assert allen.RELATIONS[r] == _relation_by_endpoints(tl.interval(a), tl.interval(b))


def test_structured_render_recovers_timeline():
    for seed in range(40):
        tl = generate_timeline(seed, 5)
        g = compiled(render_tier(tl, TierSpec.default("structured")))
        assert is_consistent(g)
        for (a, b), r in tl.truth().items():
            assert g.label(a, b) >> r & 1
            assert g.event(a).interval == tl.interval(a)


def test_full_drop_leaves_no_relation_statements():
    tl = generate_timeline(1, 6)
    docs = render_tier(tl, TierSpec("semi", p_drop=1.0, distractors=2), 0)
    statements = [s for d in docs for s in parse_document(d)]
    events = set(tl.labels())
    assert not [s for s in statements if {s.event, s.other} & events]


def test_noise_free_semi_states_only_true_relations():
    for seed in range(20):
        tl = generate_timeline(seed, 5)
        docs = render_tier(tl, TierSpec("semi", p_flip=0.0, p_drop=0.0, distractors=3), seed)
        truth = tl.truth()
        for st in (s for d in docs for s in parse_document(d)):
            a, b = st.event, st.other
            if st.kind != "relation" or a not in tl.labels():
                continue
            r = truth[(a, b)] if (a, b) in truth else allen.converse_basic(truth[(b, a)])
            assert st.relation_mask() == 1 << r


def test_unstructured_paraphrases_are_unparseable():
    tl = generate_timeline(2, 6)
    spec = TierSpec("unstructured", p_paraphrase=1.0)
    docs = render_tier(tl, spec, 0)
    sentences = [s for d in docs for s in d.sentences]
    assert sentences and not any(parse_statement(s) for s in sentences)


@pytest.mark.parametrize("bad", [dict(tier="nope"), dict(tier="semi", p_drop=1.5), dict(tier="structured", p_flip=0.1)])
def test_tier_spec_validation(bad):
    with pytest.raises(ValueError):
        TierSpec(**bad)


def test_gold_comes_from_timeline_alone():
    for seed in range(15):
        tl = generate_timeline(seed, 5)
        docs = render_tier(tl, TierSpec.default("semi"), seed)
        with_ctx = make_questions(tl, "semi", seed, 8, docs)
        without = make_questions(tl, "semi", seed, 8)
        assert [i.gold for i in with_ctx] == [i.gold for i in without]
        for inst in with_ctx:
            a, b = inst.question.edge
            truth = tl.relation(a, b)
            assert inst.gold == ("yes" if inst.question.relations >> truth & 1 else "no")


def test_arithmetic_gold():
    tl = generate_timeline(5, 4)
    for inst in make_questions(tl, "structured", 0, 10):
        if inst.question.kind != "arithmetic":
            continue
        env = {f"{k}({e.id})": v for e in tl.events for k, v in
               (("start", e.interval[0]), ("end", e.interval[1]), ("duration", e.interval[1] - e.interval[0]))}
        expr = inst.question.expr
        for name in sorted(env, key=len, reverse=True):
            expr = expr.replace(name, str(env[name]))
        assert eval(expr) == inst.gold  # expression is digits and +/- only here


@pytest.mark.parametrize("tier", ["structured", "semi", "unstructured"])
def test_suite_is_balanced_and_deterministic(tier):
    suite = build_suite(tier, 0, 101)
    assert len(suite) == 101
    golds = [i.gold for i in suite]
    assert abs(golds.count("yes") - golds.count("no")) <= 1
    assert suite == build_suite(tier, 0, 101)


def test_jsonl_round_trip(tmp_path):
    suite = build_suite("semi", 1, 20)
    path = tmp_path / "d.jsonl"
    write_jsonl(suite, path)
    assert read_jsonl(path) == suite
    assert QAInstance.from_json(suite[0].to_json()) == suite[0]


def test_diagnostics_counts_add_up():
    suite = build_suite("semi", 2, 60)
    results = [run_instance(i, VARIANTS["full_pis"]) for i in suite]
    d = _aggregate(results, "full_pis")
    binary = [r for r in results if r.kind == "entailment"]
    assert d.fp + d.fn + sum(r.correct for r in binary) == len(binary) == d.binary_total
    assert d.fp == sum(1 for r in binary if r.gold == "no" and r.verdict == "yes")


def test_symbolic_only_solves_structured():
    d = evaluate("symbolic_only", build_suite("structured", 3, 50))
    assert d.accuracy == 1.0 and d.fp == d.fn == 0


def test_neural_only_runs():
    d = evaluate("neural_only", build_suite("semi", 0, 40))
    assert 0.0 <= d.accuracy <= 1.0 and d.total == 40


def test_parallel_evaluation_matches_serial():
    suite = build_suite("semi", 4, 30)
    assert evaluate("full_pis", suite, parallel=2) == evaluate("full_pis", suite, parallel=1)


def test_ablation_rows():
    rows = run_ablation(("structured",), ABLATIONS, (0,), 20)
    assert [r["variant"] for r in rows] == list(ABLATIONS)
    assert rows[0]["structured_delta"] == 0.0


def test_repair_fixture_shape():
    cases = repair_fixture(0, 20)
    assert len(cases) == 20
    for c in cases:
        g = compiled(c.instance.context)
        assert not is_consistent(g)
        assert c.culprit in {x.cid for x in g.constraints()}
        (bad,) = [x for x in g.constraints() if x.cid == c.culprit]
        assert set(c.instance.question.edge) == {bad.src, bad.dst}
