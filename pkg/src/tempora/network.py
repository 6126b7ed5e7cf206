"""Event graphs over Allen relation sets, path consistency and exact scenario search."""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from typing import Iterator

from . import allen
from .allen import EQUALS, UNIVERSAL, compose, converse
from .errors import EmptyRelation, SizeExceeded, UnknownVertex


@dataclass(frozen=True)
class Event:
    id: str
    label: str = ""
    interval: tuple[int, int] | None = None

    def __post_init__(self):
        if self.interval is not None and not self.interval[0] < self.interval[1]:
            raise ValueError(f"event {self.id!r}: interval must have start < end")


@dataclass(frozen=True)
class Constraint:
    """One extracted assertion on an ordered pair, kept for provenance and repair."""

    cid: str
    src: str
    dst: str
    relations: int
    provenance: str = ""


class EventGraph:
    """Immutable temporal constraint network.

    Labels are stored for one orientation per pair (earlier-inserted vertex
    first); the reverse orientation is always the converse. Missing pairs are
    universal. Every mutator returns a new graph.
    """

    __slots__ = ("_events", "_index", "_labels", "_extracted", "_matrix")

    def __init__(self, events=(), labels=None, extracted=None):
        self._events: dict[str, Event] = {}
        for ev in events:
            if ev.id in self._events:
                raise ValueError(f"duplicate event id {ev.id!r}")
            self._events[ev.id] = ev
        self._index = {v: i for i, v in enumerate(self._events)}
        self._labels: dict[tuple[str, str], int] = dict(labels or {})
        self._extracted: dict[tuple[str, str], tuple[Constraint, ...]] = dict(
            extracted or {}
        )

    # -- access -----------------------------------------------------------

    @property
    def vertices(self) -> list[str]:
        return list(self._events)

    @property
    def events(self) -> dict[str, Event]:
        return dict(self._events)

    def __len__(self) -> int:
        return len(self._events)

    def __contains__(self, v) -> bool:
        return v in self._events

    def event(self, v: str) -> Event:
        try:
            return self._events[v]
        except KeyError:
            raise UnknownVertex(v) from None

    def _canon(self, a: str, b: str) -> tuple[tuple[str, str], bool]:
        if a not in self._index:
            raise UnknownVertex(a)
        if b not in self._index:
            raise UnknownVertex(b)
        if self._index[a] < self._index[b]:
            return (a, b), False
        return (b, a), True

    def label(self, a: str, b: str) -> int:
        if a == b:
            if a not in self._index:
                raise UnknownVertex(a)
            return 1 << EQUALS
        key, flipped = self._canon(a, b)
        m = self._labels.get(key, UNIVERSAL)
        return converse(m) if flipped else m

    def matrix(self) -> list[list[int]]:
        """Label matrix indexed by vertex position; cached, do not mutate."""
        m = getattr(self, "_matrix", None)
        if m is None:
            vs = list(self._events)
            n = len(vs)
            m = [[UNIVERSAL] * n for _ in range(n)]
            for i in range(n):
                m[i][i] = 1 << EQUALS
            for (a, b), lab in self._labels.items():
                i, j = self._index[a], self._index[b]
                m[i][j] = lab
                m[j][i] = converse(lab)
            self._matrix = m
        return m

    def pairs(self) -> list[tuple[str, str]]:
        vs = self.vertices
        return [(vs[i], vs[j]) for i in range(len(vs)) for j in range(i + 1, len(vs))]

    def is_extracted(self, a: str, b: str) -> bool:
        key, _ = self._canon(a, b)
        return key in self._extracted

    @property
    def extracted(self) -> dict[tuple[str, str], tuple[Constraint, ...]]:
        return dict(self._extracted)

    def constraints(self) -> list[Constraint]:
        return [c for key in sorted(self._extracted, key=self._pair_order) for c in self._extracted[key]]

    def extracted_label(self, a: str, b: str) -> int:
        """Intersection of the extracted assertions on a pair (universal if none)."""
        key, flipped = self._canon(a, b)
        m = UNIVERSAL
        for c in self._extracted.get(key, ()):
            m &= c.relations
        return converse(m) if flipped else m

    def _pair_order(self, key: tuple[str, str]) -> tuple[int, int]:
        return self._index[key[0]], self._index[key[1]]

    # -- value-semantic updates --------------------------------------------

    def _copy(self, events=None, labels=None, extracted=None) -> "EventGraph":
        g = EventGraph.__new__(EventGraph)
        g._events = self._events if events is None else events
        g._index = {v: i for i, v in enumerate(g._events)} if events is not None else self._index
        g._labels = self._labels if labels is None else labels
        g._extracted = self._extracted if extracted is None else extracted
        return g

    def with_event(self, event: Event) -> "EventGraph":
        """Add ``event`` or replace an existing event with the same id."""
        events = dict(self._events)
        events[event.id] = event
        return self._copy(events=events)

    def ensure_vertex(self, v: str, label: str | None = None) -> "EventGraph":
        if v in self._events:
            return self
        return self.with_event(Event(v, label or v))

    def add_constraint(
        self, a: str, b: str, relations: int, provenance: str = "", cid: str | None = None
    ) -> "EventGraph":
        if not relations:
            raise EmptyRelation(f"empty relation set on ({a}, {b})")
        g = self.ensure_vertex(a).ensure_vertex(b)
        key, flipped = g._canon(a, b)
        oriented = converse(relations) if flipped else relations
        if cid is None:
            cid = f"c{sum(len(v) for v in g._extracted.values())}"
        labels = dict(g._labels)
        labels[key] = labels.get(key, UNIVERSAL) & oriented
        extracted = dict(g._extracted)
        extracted[key] = extracted.get(key, ()) + (
            Constraint(cid, key[0], key[1], oriented, provenance),
        )
        return g._copy(labels=labels, extracted=extracted)

    def refine(self, a: str, b: str, relations: int) -> "EventGraph":
        """Intersect a label with a derived relation set (not recorded as extracted)."""
        key, flipped = self._canon(a, b)
        oriented = converse(relations) if flipped else relations
        labels = dict(self._labels)
        labels[key] = labels.get(key, UNIVERSAL) & oriented
        return self._copy(labels=labels)

    def with_labels(self, labels: dict[tuple[str, str], int]) -> "EventGraph":
        out = {}
        for (a, b), m in labels.items():
            key, flipped = self._canon(a, b)
            out[key] = converse(m) if flipped else m
        return self._copy(labels=out)

    def remove_constraint(self, cid: str) -> "EventGraph":
        """Drop one extracted assertion and rebuild labels from the remaining ones.

        Derived refinements are discarded since they may rest on the removed
        assertion.
        """
        extracted = {}
        found = False
        for key, cs in self._extracted.items():
            kept = tuple(c for c in cs if c.cid != cid)
            found = found or len(kept) != len(cs)
            if kept:
                extracted[key] = kept
        if not found:
            raise KeyError(cid)
        return self.reset_to_extracted(extracted)

    def reset_to_extracted(self, extracted=None) -> "EventGraph":
        extracted = self._extracted if extracted is None else extracted
        labels = {}
        for key, cs in extracted.items():
            m = UNIVERSAL
            for c in cs:
                m &= c.relations
            labels[key] = m
        return self._copy(labels=labels, extracted=dict(extracted))

    # -- comparison / serialization ------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventGraph):
            return NotImplemented
        if set(self._events) != set(other._events):
            return False
        if any(self._events[v] != other._events[v] for v in self._events):
            return False
        for a, b in self.pairs():
            if self.label(a, b) != other.label(a, b):
                return False
            if self.is_extracted(a, b) != other.is_extracted(a, b):
                return False
        return True

    __hash__ = None

    def key(self) -> tuple:
        """Hashable identity of the labels and extracted assertions."""
        return (
            tuple(self._events),
            tuple(sorted((k, m) for k, m in self._labels.items() if m != UNIVERSAL)),
            tuple(sorted((k, tuple(c.cid for c in v)) for k, v in self._extracted.items())),
        )

    def to_json(self) -> dict:
        edges = []
        for a, b in self.pairs():
            m = self.label(a, b)
            ext = self.is_extracted(a, b)
            if m == UNIVERSAL and not ext:
                continue
            edges.append({"src": a, "dst": b, "relations": allen.names(m), "extracted": ext})
        return {
            "events": [
                {"id": e.id, "label": e.label, "interval": list(e.interval) if e.interval else None}
                for e in self._events.values()
            ],
            "edges": edges,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "EventGraph":
        events = [
            Event(e["id"], e.get("label", e["id"]), tuple(e["interval"]) if e.get("interval") else None)
            for e in data["events"]
        ]
        g = cls(events)
        for i, e in enumerate(data.get("edges", [])):
            m = allen.from_names(e["relations"])
            if e.get("extracted"):
                if m:
                    g = g.add_constraint(e["src"], e["dst"], m, "json", cid=f"json{i}")
                else:
                    g = g.refine(e["src"], e["dst"], 0)
            else:
                g = g.refine(e["src"], e["dst"], m)
        return g

    def __repr__(self) -> str:
        body = ", ".join(
            f"{a}-{b}:{'|'.join(allen.names(self.label(a, b))) or '{}'}"
            for a, b in self.pairs()
            if self.label(a, b) != UNIVERSAL
        )
        return f"EventGraph([{body}])"


@dataclass(frozen=True)
class ConsistencyOutcome:
    status: str
    refined: EventGraph
    conflict: tuple[str, str, str] | None = None

    @property
    def consistent(self) -> bool:
        return self.status == "consistent"


def path_consistency(g: EventGraph) -> ConsistencyOutcome:
    """Queue-based path consistency; pairs are processed in lexicographic order.

    The conflict triple ``(i, k, j)`` satisfies
    ``label(i, j) & compose(label(i, k), label(k, j)) == 0`` in ``refined``.
    """
    vs = g.vertices
    n = len(vs)
    M = [row[:] for row in g.matrix()]

    def outcome(conflict=None):
        labels = {(vs[i], vs[j]): M[i][j] for i in range(n) for j in range(i + 1, n) if M[i][j] != UNIVERSAL}
        refined = g.with_labels(labels)
        if conflict is None:
            return ConsistencyOutcome("consistent", refined)
        i, k, j = conflict
        return ConsistencyOutcome("inconsistent", refined, (vs[i], vs[k], vs[j]))

    for i in range(n):
        for j in range(i + 1, n):
            if not M[i][j]:
                k = next((k for k in range(n) if k not in (i, j)), j)
                return outcome((i, k, j))

    queue = deque((i, j) for i in range(n) for j in range(i + 1, n))
    queued = set(queue)
    while queue:
        i, j = queue.popleft()
        queued.discard((i, j))
        for k in range(n):
            if k == i or k == j:
                continue
            for x, y, z in ((i, j, k), (k, i, j)):
                new = M[x][z] & compose(M[x][y], M[y][z])
                if new != M[x][z]:
                    M[x][z] = new
                    M[z][x] = converse(new)
                    if not new:
                        return outcome((x, y, z))
                    e = (x, z) if x < z else (z, x)
                    if e not in queued:
                        queued.add(e)
                        queue.append(e)
    return outcome()


# -- exact search -------------------------------------------------------------


def _scenarios(
    vertices: list[str], domains: dict[tuple[str, str], int]
) -> Iterator[dict[tuple[str, str], int]]:
    order = sorted(domains, key=lambda e: (bin(domains[e]).count("1"), vertices.index(e[0]), vertices.index(e[1])))
    assigned: dict[tuple[str, str], int] = {}

    def rec(depth: int):
        if depth == len(order):
            yield dict(assigned)
            return
        e = order[depth]
        for r in allen.basics(domains[e]):
            assigned[e] = r
            if allen.realize(vertices, assigned) is not None:
                yield from rec(depth + 1)
            del assigned[e]

    return rec(0)


def enumerate_scenarios(
    g: EventGraph, max_vertices: int = 7, limit: int | None = None
) -> list[dict[tuple[str, str], int]]:
    """Every globally consistent atomic labeling of all vertex pairs (at most ``limit``).

    Each scenario maps ordered pairs (in vertex order) to a basic relation
    index. Partial labelings are pruned by exact point-order realizability.
    """
    if len(g) > max_vertices:
        raise SizeExceeded(f"{len(g)} vertices exceeds bound {max_vertices}")
    domains = {(a, b): g.label(a, b) for a, b in g.pairs()}
    if any(m == 0 for m in domains.values()):
        return []
    return list(itertools.islice(_scenarios(g.vertices, domains), limit))


def find_scenario(g: EventGraph, restrict: dict[tuple[str, str], int] | None = None):
    """One atomic labeling of the constrained pairs that is realizable, or ``None``.

    Pairs left universal impose no constraint, so only constrained pairs are
    branched on; path consistency prunes domains first.
    """
    if restrict:
        for (a, b), m in restrict.items():
            g = g.refine(a, b, m)
    pc = path_consistency(g)
    if not pc.consistent:
        return None
    r = pc.refined
    domains = {}
    for a, b in r.pairs():
        m = r.label(a, b)
        if m != UNIVERSAL:
            domains[(a, b)] = m
    return next(_scenarios(r.vertices, domains), None)


def is_consistent(g: EventGraph) -> bool:
    return find_scenario(g) is not None


def possible(g: EventGraph, edge: tuple[str, str], relations: int) -> bool:
    a, b = edge
    g.label(a, b)
    return find_scenario(g, {(a, b): relations}) is not None


def entails(g: EventGraph, edge: tuple[str, str], relations: int) -> bool:
    a, b = edge
    g.label(a, b)
    if not is_consistent(g):
        return False
    rest = UNIVERSAL & ~relations
    return not rest or find_scenario(g, {(a, b): rest}) is None


def add_constraint(g: EventGraph, edge: tuple[str, str], relations: int, provenance: str = "") -> EventGraph:
    return g.add_constraint(edge[0], edge[1], relations, provenance)
