"""Allen's interval algebra over 13-bit relation masks.

A relation set is a plain ``int`` whose bit ``i`` stands for ``RELATIONS[i]``.
The composition table is derived at import time from endpoint-order
semantics using the point solver in :func:`realize`.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Mapping

RELATIONS = (
    "before",
    "after",
    "meets",
    "met-by",
    "overlaps",
    "overlapped-by",
    "starts",
    "started-by",
    "during",
    "contains",
    "finishes",
    "finished-by",
    "equals",
)
K = len(RELATIONS)
INDEX = {name: i for i, name in enumerate(RELATIONS)}

UNIVERSAL = (1 << K) - 1
EMPTY = 0
EQUALS = 12


def _cmp(x: int, y: int) -> int:
    return (x > y) - (x < y)


def basic_relation_of(a: tuple[int, int], b: tuple[int, int]) -> int:
    """Index of the unique basic relation holding between intervals ``a`` and ``b``."""
    s1, e1 = a
    s2, e2 = b
    if s1 >= e1 or s2 >= e2:
        raise ValueError(f"intervals must satisfy start < end: {a}, {b}")
    if e1 < s2:
        return 0
    if s1 > e2:
        return 1
    if e1 == s2:
        return 2
    if s1 == e2:
        return 3
    if s1 == s2:
        if e1 == e2:
            return 12
        return 6 if e1 < e2 else 7
    if e1 == e2:
        return 10 if s1 > s2 else 11
    if s1 > s2 and e1 < e2:
        return 8
    if s1 < s2 and e1 > e2:
        return 9
    return 4 if s1 < s2 else 5


# Canonical realizations on small integers; SIGNATURE[r] lists the order of
# (s1 vs s2, s1 vs e2, e1 vs s2, e1 vs e2) as -1/0/1.
_WITNESS = {
    0: ((0, 1), (2, 3)),
    1: ((2, 3), (0, 1)),
    2: ((0, 1), (1, 2)),
    3: ((1, 2), (0, 1)),
    4: ((0, 2), (1, 3)),
    5: ((1, 3), (0, 2)),
    6: ((0, 1), (0, 2)),
    7: ((0, 2), (0, 1)),
    8: ((1, 2), (0, 3)),
    9: ((0, 3), (1, 2)),
    10: ((1, 2), (0, 2)),
    11: ((0, 2), (1, 2)),
    12: ((0, 1), (0, 1)),
}
SIGNATURE = tuple(
    (_cmp(a[0], b[0]), _cmp(a[0], b[1]), _cmp(a[1], b[0]), _cmp(a[1], b[1]))
    for a, b in (_WITNESS[r] for r in range(K))
)
assert all(basic_relation_of(*_WITNESS[r]) == r for r in range(K))


def converse_basic(r: int) -> int:
    return r if r == EQUALS else r ^ 1


def mask(*names: str) -> int:
    m = 0
    for name in names:
        m |= 1 << INDEX[name]
    return m


def names(m: int) -> list[str]:
    return [RELATIONS[i] for i in range(K) if m >> i & 1]


def from_names(items: Iterable[str]) -> int:
    m = 0
    for name in items:
        if name not in INDEX:
            raise ValueError(f"unknown Allen relation {name!r}")
        m |= 1 << INDEX[name]
    return m


def basics(m: int) -> list[int]:
    return [i for i in range(K) if m >> i & 1]


def _converse(m: int) -> int:
    out = 0
    for i in range(K):
        if m >> i & 1:
            out |= 1 << converse_basic(i)
    return out


_CONVERSE = [_converse(m) for m in range(1 << K)]


def converse(m: int) -> int:
    return _CONVERSE[m]


def realize(
    vertices: Iterable, constraints: Mapping[tuple, int]
) -> dict | None:
    """Concrete integer intervals satisfying an atomic labeling, or ``None``.

    ``constraints`` maps ordered vertex pairs to basic relation indices.
    Endpoints are merged on equalities, then levelled by a topological sort
    of the strict-order graph.
    """
    ids = list(dict.fromkeys(vertices))
    for a, b in constraints:
        for v in (a, b):
            if v not in ids:
                ids.append(v)
    pos = {v: i for i, v in enumerate(ids)}
    n = 2 * len(ids)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    less: list[tuple[int, int]] = [(2 * i, 2 * i + 1) for i in range(len(ids))]
    for (a, b), r in constraints.items():
        i, j = pos[a], pos[b]
        pts_a = (2 * i, 2 * i, 2 * i + 1, 2 * i + 1)
        pts_b = (2 * j, 2 * j + 1, 2 * j, 2 * j + 1)
        for pa, pb, sign in zip(pts_a, pts_b, SIGNATURE[r]):
            if sign == 0:
                ra, rb = find(pa), find(pb)
                if ra != rb:
                    parent[ra] = rb
            elif sign < 0:
                less.append((pa, pb))
            else:
                less.append((pb, pa))

    succ: dict[int, set[int]] = {}
    indeg: dict[int, int] = {}
    roots = {find(x) for x in range(n)}
    for x in roots:
        succ[x] = set()
        indeg[x] = 0
    for x, y in less:
        rx, ry = find(x), find(y)
        if rx == ry:
            return None
        if ry not in succ[rx]:
            succ[rx].add(ry)
            indeg[ry] += 1
    level = {x: 0 for x in roots}
    frontier = sorted(x for x in roots if indeg[x] == 0)
    seen = 0
    while frontier:
        x = frontier.pop()
        seen += 1
        for y in succ[x]:
            level[y] = max(level[y], level[x] + 1)
            indeg[y] -= 1
            if indeg[y] == 0:
                frontier.append(y)
    if seen != len(roots):
        return None
    return {
        v: (level[find(2 * pos[v])], level[find(2 * pos[v] + 1)]) for v in ids
    }


def _build_table() -> tuple[tuple[int, ...], ...]:
    table = []
    for r in range(K):
        row = []
        for s in range(K):
            m = 0
            for t in range(K):
                if realize("abc", {("a", "b"): r, ("b", "c"): s, ("a", "c"): t}):
                    m |= 1 << t
            row.append(m)
        table.append(tuple(row))
    return tuple(table)


COMPOSITION = _build_table()


@lru_cache(maxsize=1 << 16)
def compose(m1: int, m2: int) -> int:
    """Union of basic compositions over every pair drawn from ``m1`` x ``m2``."""
    if not m1 or not m2:
        return EMPTY
    if m1 == UNIVERSAL or m2 == UNIVERSAL:
        return UNIVERSAL
    out = 0
    for r in basics(m1):
        row = COMPOSITION[r]
        for s in basics(m2):
            out |= row[s]
            if out == UNIVERSAL:
                return out
    return out


def _neighbours() -> tuple[int, ...]:
    """Conceptual neighbours: basics whose endpoint orders differ in one step."""
    out = []
    for r in range(K):
        m = 0
        for s in range(K):
            diff = [abs(x - y) for x, y in zip(SIGNATURE[r], SIGNATURE[s])]
            if sum(diff) == 1:
                m |= 1 << s
        out.append(m)
    return tuple(out)


NEIGHBOURS = _neighbours()
