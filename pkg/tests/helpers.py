import itertools
import random

from tempora import allen
from tempora.network import EventGraph

# convex point relations as allowed sign sets
CONVEX_PA = ({-1}, {-1, 0}, {0}, {0, 1}, {1}, {-1, 0, 1})


def convex_relation(rng):
    while True:
        parts = [rng.choice(CONVEX_PA) for _ in range(4)]
        m = 0
        for r in range(allen.K):
            if all(s in p for s, p in zip(allen.SIGNATURE[r], parts)):
                m |= 1 << r
        if m:
            return m


def _draw(rng, kind, truth=None):
    while True:
        if kind == "convex":
            m = convex_relation(rng)
        elif kind == "basic":
            m = 1 << rng.randrange(allen.K)
        else:
            m = 0
            for r in rng.sample(range(allen.K), rng.randint(1, 3)):
                m |= 1 << r
        if truth is None or m >> truth & 1:
            return m


def random_graph(rng, n, density=0.7, kind="general", planted=0.5):
    """Random network; with probability ``planted`` every label contains a hidden
    true scenario except (sometimes) one corrupted edge, so both outcomes occur."""
    names = [f"v{i}" for i in range(n)]
    g = EventGraph()
    for v in names:
        g = g.ensure_vertex(v)
    plant = rng.random() < planted
    if plant:
        ivs = {}
        for v in names:
            s = rng.randint(0, 6)
            ivs[v] = (s, s + rng.randint(1, 4))
    pairs = list(itertools.combinations(names, 2))
    bad = rng.choice(pairs) if plant and rng.random() < 0.5 else None
    for a, b in pairs:
        if rng.random() > density:
            continue
        truth = allen.basic_relation_of(ivs[a], ivs[b]) if plant and (a, b) != bad else None
        g = g.add_constraint(a, b, _draw(rng, kind, truth))
    return g


def concrete_scenarios(g):
    """Atomic labelings realized by integer intervals on 2n points (independent oracle)."""
    vs = g.vertices
    n = len(vs)
    ivs = list(itertools.combinations(range(2 * n), 2))
    out = set()

    def rec(chosen, rels):
        i = len(chosen)
        if i == n:
            out.add(tuple(r for _, r in sorted(rels)))
            return
        for iv in ivs:
            new = []
            for j, other in enumerate(chosen):
                r = allen.basic_relation_of(other, iv)
                if not g.label(vs[j], vs[i]) >> r & 1:
                    break
                new.append(((j, i), r))
            else:
                rec(chosen + [iv], rels + new)

    rec([], [])
    return out


def rng_for(name):
    return random.Random(name)
