import contextlib
import itertools
import time

import networkx as nx
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from orchardkit.graph import Graph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


ACCEPTANCE = []


@contextlib.contextmanager
def criterion(number, title):
    """Record and print a PASS/FAIL line for one acceptance criterion.

    The body fills ``notes`` with measured figures for the line.
    """
    notes = {}
    start = time.perf_counter()
    try:
        yield notes
    except BaseException as exc:
        notes["error"] = f"{type(exc).__name__}: {exc}".splitlines()[0][:160]
        verdict = "FAIL"
        raise
    else:
        verdict = "PASS"
    finally:
        notes["seconds"] = round(time.perf_counter() - start, 1)
        detail = ", ".join(f"{k}={v}" for k, v in notes.items())
        line = f"criterion {number:>2} {verdict}: {title} ({detail})"
        ACCEPTANCE.append(line)
        print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


def to_nx(g, vertices=None):
    out = nx.Graph()
    out.add_nodes_from(range(g.n) if vertices is None else vertices)
    keep = set(out.nodes)
    out.add_edges_from((u, v) for u, v in g.edges() if u in keep and v in keep)
    return out


@st.composite
def graphs(draw, min_n=0, max_n=8, p=None):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    if p is None:
        picked = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    else:
        picked = [draw(st.floats(0, 1)) < p for _ in pairs]
    return Graph(n, [e for e, keep in zip(pairs, picked) if keep])


def simple_cycles(g):
    """All cycles as vertex lists, via networkx (independent of the oracles)."""
    return [c for c in nx.simple_cycles(to_nx(g)) if len(c) >= 3]


def brute_min_separator(g, sources, sinks):
    """Smallest vertex set meeting every source-sink path (sources/sinks may be cut)."""
    gx = to_nx(g)
    for k in range(g.n + 1):
        for cut in itertools.combinations(range(g.n), k):
            cut = set(cut)
            rest = gx.subgraph(set(gx) - cut)
            if not any(nx.has_path(rest, s, t) for s in sources - cut for t in sinks - cut):
                return k
    return g.n


@pytest.fixture
def k3():
    return Graph(3, [(0, 1), (1, 2), (0, 2)])


def random_orchard(rng, a, b, max_n=30, orders=None, slack=True):
    """A valid a x b orchard on a fresh host, with gaps, long intersections,
    subdivided tree links and off-path branch vertices.

    ``orders[i]`` fixes the tree order along path i; by default every path
    gets a random order.  Falls back to a compact layout to respect max_n.
    """
    from orchardkit.orchards import Orchard, Tree

    for attempt in range(60):
        loose = slack and attempt < 40
        nxt = [0]

        def fresh(k):
            out = list(range(nxt[0], nxt[0] + k))
            nxt[0] += k
            return out

        paths, seg = [], {}
        for i in range(a):
            order = list(orders[i]) if orders else rng.sample(range(b), b)
            p = []
            for pos, j in enumerate(order):
                if pos and loose and rng.random() < 0.3:
                    p += fresh(1)
                seg[(i, j)] = fresh(rng.choice([1, 1, 2]) if loose else 1)
                p += seg[(i, j)]
            if loose and rng.random() < 0.3:
                p += fresh(1)
            paths.append(tuple(p))
        edges = {(min(u, v), max(u, v)) for p in paths for u, v in zip(p, p[1:])}
        trees = []
        for j in range(b):
            tv, te = set(), set()
            for i in range(a):
                s = seg[(i, j)]
                tv.update(s)
                te.update((min(u, v), max(u, v)) for u, v in zip(s, s[1:]))
            joined = [rng.randrange(a)]
            off = []  # off-path tree vertices usable as attachment points
            for i in rng.sample([x for x in range(a) if x != joined[0]], a - 1):
                if off and loose and rng.random() < 0.35:
                    u = rng.choice(off)
                else:
                    u = rng.choice(seg[(rng.choice(joined), j)])
                chain = fresh(rng.choice([0, 1, 1, 2]) if loose else 0)
                route = [u] + chain + [rng.choice(seg[(i, j)])]
                tv.update(chain)
                off.extend(chain)
                te.update((min(x, y), max(x, y)) for x, y in zip(route, route[1:]))
                joined.append(i)
            trees.append(Tree(frozenset(tv), frozenset(te)))
            edges |= te
        n = nxt[0]
        if n > max_n:
            continue
        for _ in range(rng.randrange(3) if loose else 0):
            u, v = rng.sample(range(n), 2) if n > 1 else (0, 0)
            if u != v:
                edges.add((min(u, v), max(u, v)))
        host = Graph(n, sorted(edges))
        return Orchard(host, tuple(paths), tuple(trees))
    raise RuntimeError(f"no {a}x{b} orchard within {max_n} vertices")
