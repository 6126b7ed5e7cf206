"""Retrieval over a document pool, the controlled temporal grammar, and graph compilation."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import allen
from .errors import EmptyPool, Unanchored, ZeroLengthInterval
from .evidential import RULE_EVIDENCE, DirichletEvidence
from .network import Event, EventGraph

PHRASES = {
    "before": "before",
    "after": "after",
    "meets": "meets",
    "during": "during",
    "contains": "contains",
    "overlaps": "overlaps",
    "starts with": "starts",
    "finishes with": "finishes",
    "equals": "equals",
}
_PHRASE_OF = {rel: phrase for phrase, rel in PHRASES.items()}
HEDGE = "reportedly"

_LABEL = r"(?:the\s+)?([a-z0-9][a-z0-9_\- ]*?)"
_PHRASE_ALT = "|".join(p.replace(" ", r"\s+") for p in PHRASES)
_REL_RE = re.compile(
    rf"^(?:({HEDGE})\s+)?{_LABEL}\s+({_PHRASE_ALT})\s+{_LABEL}$",
    re.IGNORECASE,
)
_ANCHOR_RE = re.compile(rf"^{_LABEL}\s+(starts|ends)\s+on\s+day\s+(-?\d+)$", re.IGNORECASE)
_DURATION_RE = re.compile(rf"^{_LABEL}\s+lasts\s+(\d+)\s+days?$", re.IGNORECASE)


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple[str, ...]
    tier: str = ""

    def to_json(self) -> dict:
        return {"id": self.id, "tier": self.tier, "sentences": list(self.sentences)}

    @classmethod
    def from_json(cls, d: dict) -> "Document":
        return cls(str(d["id"]), tuple(d["sentences"]), d.get("tier", ""))


@dataclass(frozen=True)
class ParsedStatement:
    kind: str  # relation | anchor | duration
    event: str
    other: str | None = None
    phrase: str | None = None
    which: str | None = None  # start | end, for anchors
    value: int | None = None
    hedged: bool = False
    source: str = ""

    def relation_mask(self) -> int:
        return allen.mask(PHRASES[self.phrase])

    def render(self) -> str:
        if self.kind == "relation":
            text = f"{self.event} {self.phrase} {self.other}"
            return f"{HEDGE} {text}" if self.hedged else text
        if self.kind == "anchor":
            verb = "starts" if self.which == "start" else "ends"
            return f"{self.event} {verb} on day {self.value}"
        return f"{self.event} lasts {self.value} day{'s' if self.value != 1 else ''}"


class _Unparseable:
    __slots__ = ()

    def __repr__(self) -> str:
        return "Unparseable"

    def __bool__(self) -> bool:
        return False


Unparseable = _Unparseable()


def _norm(label: str) -> str:
    return " ".join(label.lower().split())


def parse_statement(sentence: str, source: str = ""):
    """Parse one sentence of the controlled grammar; anything else is ``Unparseable``."""
    s = " ".join(sentence.strip().rstrip(".").split())
    m = _ANCHOR_RE.match(s)
    if m:
        which = "start" if m.group(2).lower() == "starts" else "end"
        return ParsedStatement("anchor", _norm(m.group(1)), which=which, value=int(m.group(3)), source=source)
    m = _DURATION_RE.match(s)
    if m:
        return ParsedStatement("duration", _norm(m.group(1)), value=int(m.group(2)), source=source)
    m = _REL_RE.match(s)
    if m:
        phrase = " ".join(m.group(3).lower().split())
        return ParsedStatement(
            "relation",
            _norm(m.group(2)),
            other=_norm(m.group(4)),
            phrase=phrase,
            hedged=m.group(1) is not None,
            source=source,
        )
    return Unparseable


def render_relation(a: str, relation: int, b: str, hedged: bool = False) -> str:
    """Sentence stating basic relation index ``relation`` between ``a`` and ``b``.

    Converse-only relations (met-by, started-by, ...) are rendered with the
    events swapped.
    """
    name = allen.RELATIONS[relation]
    if name not in _PHRASE_OF:
        a, b = b, a
        name = allen.RELATIONS[allen.converse_basic(relation)]
    text = f"{a} {_PHRASE_OF[name]} {b}"
    return f"{HEDGE} {text}" if hedged else text


def parse_document(doc: Document) -> list[ParsedStatement]:
    out = []
    for i, sentence in enumerate(doc.sentences):
        st = parse_statement(sentence, source=f"{doc.id}:{i}")
        if st is not Unparseable:
            out.append(st)
    return out


# -- questions ----------------------------------------------------------------

_TERM_RE = re.compile(r"\s*(?:(start|end|duration)\(\s*([^)]+?)\s*\)|(\d+))\s*")


@dataclass(frozen=True)
class Question:
    kind: str  # entailment | arithmetic
    edge: tuple[str, str] | None = None
    relations: int = 0
    expr: str | None = None

    def events(self) -> list[str]:
        if self.kind == "entailment":
            return list(self.edge)
        return list(dict.fromkeys(_norm(m.group(2)) for m in _TERM_RE.finditer(self.expr) if m.group(2)))

    def to_json(self) -> dict:
        if self.kind == "entailment":
            return {"kind": "entailment", "edge": list(self.edge), "relations": allen.names(self.relations)}
        return {"kind": "arithmetic", "expr": self.expr}

    @classmethod
    def from_json(cls, d: dict) -> "Question":
        if d["kind"] == "entailment":
            return cls("entailment", tuple(d["edge"]), allen.from_names(d["relations"]))
        if d["kind"] == "arithmetic":
            return cls("arithmetic", expr=d["expr"])
        raise ValueError(f"unknown question kind {d['kind']!r}")

    def text(self) -> str:
        if self.kind == "entailment":
            a, b = self.edge
            return f"does {a} happen {'/'.join(allen.names(self.relations))} {b}?"
        return f"what is {self.expr}?"


def retrieve(pool: Sequence[Document], query, k: int) -> list[Document]:
    """Top-``k`` documents by count of query event labels they mention; ties by id."""
    if not pool:
        raise EmptyPool("document pool is empty")
    if k < 1:
        raise ValueError("k must be at least 1")
    labels = query.events() if isinstance(query, Question) else list(query)
    patterns = [re.compile(rf"\b{re.escape(lbl)}\b") for lbl in labels]

    def overlap(doc: Document) -> int:
        text = " ".join(doc.sentences).lower()
        return sum(1 for p in patterns if p.search(text))

    ranked = sorted(pool, key=lambda d: (-overlap(d), d.id))
    return ranked[:k]


def mentions(doc: Document, labels: Iterable[str]) -> int:
    text = " ".join(doc.sentences).lower()
    return sum(1 for lbl in labels if re.search(rf"\b{re.escape(lbl)}\b", text))


# -- compilation ---------------------------------------------------------------


def _intervals(statements: Sequence[ParsedStatement]) -> dict[str, tuple[int, int]]:
    starts: dict[str, int] = {}
    ends: dict[str, int] = {}
    durations: dict[str, int] = {}
    for st in statements:
        if st.kind == "anchor":
            (starts if st.which == "start" else ends).setdefault(st.event, st.value)
        elif st.kind == "duration":
            durations.setdefault(st.event, st.value)
    out = {}
    for ev in sorted(set(starts) | set(ends)):
        s, e, d = starts.get(ev), ends.get(ev), durations.get(ev)
        if s is not None and e is None and d is not None:
            e = s + d
        elif e is not None and s is None and d is not None:
            s = e - d
        if s is None or e is None:
            continue
        if not s < e:
            raise ZeroLengthInterval(f"event {ev!r} would span [{s}, {e}]")
        out[ev] = (s, e)
    return out


def compile_statements(
    statements: Sequence[ParsedStatement], provider, graph: EventGraph | None = None
) -> tuple[EventGraph, dict[str, DirichletEvidence]]:
    """Build the event graph and per-constraint evidence from parsed statements.

    Relation statements become extracted constraints (intersected per pair).
    Fully anchored events get concrete intervals, and every pair of anchored
    events receives the relation their intervals determine.
    """
    g = graph if graph is not None else EventGraph()
    evidence: dict[str, DirichletEvidence] = {}
    for st in statements:
        g = g.ensure_vertex(st.event)
        if st.kind == "relation":
            g = g.ensure_vertex(st.other)
    for i, st in enumerate(statements):
        if st.kind != "relation":
            continue
        rel, alpha = provider.propose(st)
        cid = st.source or f"s{i}"
        g = g.add_constraint(st.event, st.other, rel, provenance=st.source, cid=cid)
        evidence[cid] = alpha
    anchored = _intervals(statements)
    for ev, iv in anchored.items():
        g = g.with_event(Event(ev, g.event(ev).label, iv))
    names = [v for v in g.vertices if v in anchored]
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            r = allen.basic_relation_of(anchored[a], anchored[b])
            cid = f"anchor:{a}:{b}"
            g = g.add_constraint(a, b, 1 << r, provenance="anchor", cid=cid)
            evidence[cid] = DirichletEvidence.concentrated(1 << r, RULE_EVIDENCE)
    return g, evidence


compile = compile_statements


def eval_arithmetic(graph: EventGraph, expr: str) -> int:
    """Exact integer value of ``start(E)``, ``end(E)``, ``duration(E)`` sums/differences."""
    pos = 0
    total = 0
    sign = 1
    expect_term = True
    text = expr.strip()
    while pos < len(text):
        if expect_term:
            m = _TERM_RE.match(text, pos)
            if not m or m.end() == pos:
                raise ValueError(f"malformed expression {expr!r} at {pos}")
            if m.group(3) is not None:
                value = int(m.group(3))
            else:
                label = _norm(m.group(2))
                iv = graph.event(label).interval if label in graph else None
                if iv is None:
                    raise Unanchored(label)
                value = {"start": iv[0], "end": iv[1], "duration": iv[1] - iv[0]}[m.group(1)]
            total += sign * value
            pos = m.end()
            expect_term = False
        else:
            op = text[pos]
            if op not in "+-":
                raise ValueError(f"malformed expression {expr!r} at {pos}")
            sign = 1 if op == "+" else -1
            pos += 1
            while pos < len(text) and text[pos].isspace():
                pos += 1
            expect_term = True
    if expect_term:
        raise ValueError(f"malformed expression {expr!r}")
    return total
