"""Deterministic graph families for tests and the CLI."""
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .graph import Graph

KINDS = ("grid", "cycle", "clique", "path", "tree", "subdivision", "union",
         "random-regular-girth", "gnp")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __hash__(self):
        return hash((self.kind, repr(sorted(self.params.items())), self.seed))


def _rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def generate(spec):
    kind, p = spec.kind, spec.params
    if kind not in KINDS:
        raise InvalidInput(f"unknown generator kind {kind!r}")
    if kind == "grid":
        r = _pos(p, "r")
        c = int(p.get("c", r))
        return grid(r, c)
    if kind == "cycle":
        return cycle(_pos(p, "n", 3))
    if kind == "clique":
        return clique(_pos(p, "n"))
    if kind == "path":
        return path(_pos(p, "n"))
    if kind == "tree":
        return random_tree(_pos(p, "n"), _rng(spec.seed))
    if kind == "gnp":
        return gnp(_pos(p, "n"), float(p.get("p", 0.3)), _rng(spec.seed))
    if kind == "subdivision":
        base = p["base"]
        base = generate(base) if isinstance(base, GeneratorSpec) else base
        return subdivide(base, int(p.get("extra", 1)))
    if kind == "union":
        parts = p["parts"]
        seeds = np.random.SeedSequence(spec.seed).spawn(len(parts))
        graphs = []
        for part, ss in zip(parts, seeds):
            if isinstance(part, GeneratorSpec):
                part = generate(GeneratorSpec(part.kind, part.params,
                                              int(ss.generate_state(1, np.uint64)[0])))
            graphs.append(part)
        return disjoint_union(graphs)
    return random_regular_girth(_pos(p, "n"), _pos(p, "d"), int(p.get("girth", 3)),
                                _rng(spec.seed), int(p.get("retries", 200)))


def _pos(p, key, least=1):
    if key not in p:
        raise InvalidInput(f"missing parameter {key}")
    v = int(p[key])
    if v < least:
        raise InvalidInput(f"{key} must be at least {least}")
    return v


def grid(r, c=None):
    c = r if c is None else c
    edges = [(i * c + j, i * c + j + 1) for i in range(r) for j in range(c - 1)]
    edges += [(i * c + j, (i + 1) * c + j) for i in range(r - 1) for j in range(c)]
    return Graph(r * c, edges)


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def clique(n):
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def random_tree(n, rng):
    if n <= 2:
        return path(n)
    prufer = [int(x) for x in rng.integers(0, n, size=n - 2)]
    degree = [1] * n
    for x in prufer:
        degree[x] += 1
    edges = []
    for x in prufer:
        leaf = min(v for v in range(n) if degree[v] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [w for w in range(n) if degree[w] == 1]
    edges.append((u, v))
    return Graph(n, edges)


def gnp(n, prob, rng):
    draws = rng.random(n * (n - 1) // 2)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return Graph(n, [e for e, x in zip(pairs, draws) if x < prob])


def subdivide(g, extra):
    """Replace every edge by a path with ``extra`` new inner vertices."""
    if extra < 0:
        raise InvalidInput("extra must be non-negative")
    edges = []
    n = g.n
    for u, v in g.edges():
        chain = [u] + list(range(n, n + extra)) + [v]
        n += extra
        edges += list(zip(chain, chain[1:]))
    return Graph(n, edges)


def disjoint_union(graphs):
    edges, off = [], 0
    for h in graphs:
        edges += [(u + off, v + off) for u, v in h.edges()]
        off += h.n
    return Graph(off, edges)


def girth(g):
    """Length of a shortest cycle, math.inf for forests."""
    best = math.inf
    for s in range(g.n):
        dist = {s: 0}
        parent = {s: -1}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            if 2 * dist[v] + 1 >= best:
                break
            for u in g.adj(v):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    parent[u] = v
                    queue.append(u)
                elif parent[v] != u:
                    best = min(best, dist[u] + dist[v] + 1)
    return best


def random_regular_girth(n, d, min_girth, rng, retries=200):
    """Random d-regular graph of girth >= min_girth by randomized greedy pairing.

    Each attempt adds edges between unsaturated vertices at distance at least
    min_girth - 1; a stuck attempt restarts.  The girth is verified by BFS.
    """
    if (n * d) % 2 or d >= n:
        raise InvalidInput(f"no {d}-regular graph on {n} vertices")
    for _ in range(retries):
        adj = [set() for _ in range(n)]
        ok = True
        while ok:
            open_ = [v for v in range(n) if len(adj[v]) < d]
            if not open_:
                break
            pairs = [(u, v) for i, u in enumerate(open_) for v in open_[i + 1:]
                     if v not in adj[u] and _far(adj, u, v, min_girth - 1)]
            if not pairs:
                ok = False
                break
            u, v = pairs[int(rng.integers(len(pairs)))]
            adj[u].add(v)
            adj[v].add(u)
        if ok:
            g = Graph(n, [(u, v) for u in range(n) for v in adj[u] if u < v])
            if girth(g) >= min_girth:
                return g
    raise InvalidInput(f"no {d}-regular graph of girth {min_girth} on {n} vertices after {retries} tries")


def _far(adj, u, v, need):
    """True if dist(u, v) >= need."""
    seen = {u}
    frontier = [u]
    for _ in range(need - 1):
        nxt = []
        for x in frontier:
            for y in adj[x]:
                if y == v:
                    return False
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return True
