"""Simple undirected graphs on dense integer vertices, plus the flow and
matching primitives the separation routines are built on."""
import re
from collections import deque, namedtuple

import numpy as np

from .errors import InvalidInput, ParseError
from .kernels import MAX_BITS


class Graph:
    """Immutable simple graph on vertices 0..n-1."""

    __slots__ = ("n", "_adj", "labels", "_masks")

    def __init__(self, n, edges=(), labels=None):
        adj = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise InvalidInput(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidInput(f"edge ({u}, {v}) outside 0..{n - 1}")
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self._adj = tuple(frozenset(a) for a in adj)
        self.labels = tuple(labels) if labels is not None else None
        self._masks = None

    def adj(self, v):
        return self._adj[v]

    def degree(self, v):
        return len(self._adj[v])

    def has_edge(self, u, v):
        return v in self._adj[u]

    def vertices(self):
        return range(self.n)

    def edges(self):
        return [(u, v) for u in range(self.n) for v in sorted(self._adj[u]) if u < v]

    @property
    def m(self):
        return sum(len(a) for a in self._adj) // 2

    def label(self, v):
        return self.labels[v] if self.labels is not None else str(v)

    def masks(self):
        """Adjacency as int64 bitmasks, for the compiled kernels."""
        if self.n > MAX_BITS:
            raise InvalidInput(f"bitmask kernels support at most {MAX_BITS} vertices")
        if self._masks is None:
            arr = np.zeros(self.n, dtype=np.int64)
            for v in range(self.n):
                x = 0
                for u in self._adj[v]:
                    x |= 1 << u
                arr[v] = x
            self._masks = arr
        return self._masks

    def induced(self, vertices):
        """Induced subgraph, relabelled 0..k-1 in sorted order; returns (graph, old ids)."""
        old = sorted(set(vertices))
        index = {v: i for i, v in enumerate(old)}
        edges = [(index[u], index[v]) for u in old for v in self._adj[u]
                 if v in index and u < v]
        return Graph(len(old), edges), old

    def remove(self, vertices):
        keep = set(range(self.n)) - set(vertices)
        return self.induced(keep)

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self._adj == other._adj

    def __hash__(self):
        return hash((self.n, self._adj))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


Separation = namedtuple("Separation", "side_a side_b")


_TOKEN = re.compile(r"^[A-Za-z0-9_.:\-]+$")


def parse_graph(text, fmt="edge-list"):
    """Parse an edge list (``u v`` per line, ``#`` comments) or a DOT subset.

    Vertices are renumbered densely by first appearance; duplicate edges are
    dropped, loops are rejected.
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    if fmt in ("edge-list", "el", "edgelist"):
        pairs, singles = _parse_edge_list(text)
    elif fmt in ("dot", "dot-subset"):
        pairs, singles = _parse_dot(text)
    else:
        raise ParseError(f"unknown graph format {fmt!r}")
    index = {}
    order = []

    def vid(tok):
        if tok not in index:
            index[tok] = len(order)
            order.append(tok)
        return index[tok]

    edges = set()
    for kind, item, line in sorted(
            [("e", p, ln) for p, ln in pairs] + [("v", s, ln) for s, ln in singles],
            key=lambda t: t[2]):
        if kind == "v":
            vid(item)
            continue
        a, b = item
        u, v = vid(a), vid(b)
        if u == v:
            raise ParseError(f"loop on vertex {a!r}", line)
        edges.add((min(u, v), max(u, v)))
    return Graph(len(order), sorted(edges), labels=order)


def _parse_edge_list(text):
    pairs, singles = [], []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        for t in toks:
            if not _TOKEN.match(t):
                raise ParseError(f"bad vertex identifier {t!r}", ln)
        if len(toks) == 2:
            pairs.append(((toks[0], toks[1]), ln))
        elif len(toks) == 1:
            singles.append((toks[0], ln))
        else:
            raise ParseError(f"expected 'u v', got {len(toks)} tokens", ln)
    return pairs, singles


def _parse_dot(text):
    pairs, singles = [], []
    body_started = False
    closed = False
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].split("#", 1)[0].strip()
        if not line:
            continue
        if not body_started:
            m = re.match(r"^(strict\s+)?graph(\s+[A-Za-z0-9_]+)?\s*\{(.*)$", line)
            if not m:
                raise ParseError("expected 'graph {'", ln)
            body_started = True
            line = m.group(3).strip()
        if closed and line:
            raise ParseError("content after closing brace", ln)
        if "}" in line:
            line, after = line.split("}", 1)
            if after.strip():
                raise ParseError("content after closing brace", ln)
            closed = True
        for stmt in line.split(";"):
            stmt = stmt.strip()
            if not stmt:
                continue
            parts = [p.strip() for p in stmt.split("--")]
            for p in parts:
                if not _TOKEN.match(p):
                    raise ParseError(f"bad statement {stmt!r}", ln)
            if len(parts) == 1:
                singles.append((parts[0], ln))
            for a, b in zip(parts, parts[1:]):
                pairs.append(((a, b), ln))
    if not body_started and (pairs or singles):
        raise ParseError("missing 'graph {'")
    if body_started and not closed:
        raise ParseError("missing closing brace")
    return pairs, singles


def format_graph(g, fmt="edge-list"):
    touched = set()
    lines = []
    for u, v in g.edges():
        touched.update((u, v))
        if fmt == "dot":
            lines.append(f"  {g.label(u)} -- {g.label(v)};")
        else:
            lines.append(f"{g.label(u)} {g.label(v)}")
    for v in range(g.n):
        if v not in touched:
            lines.append(f"  {g.label(v)};" if fmt == "dot" else g.label(v))
    if fmt == "dot":
        return "graph {\n" + "\n".join(lines) + ("\n" if lines else "") + "}\n"
    return "\n".join(lines) + ("\n" if lines else "")


def reachable(g, start, allowed=None):
    """Vertices reachable from ``start`` using only ``allowed`` vertices."""
    ok = (lambda v: True) if allowed is None else allowed.__contains__
    seen = {v for v in start if ok(v)}
    queue = deque(sorted(seen))
    while queue:
        v = queue.popleft()
        for u in g.adj(v):
            if u not in seen and ok(u):
                seen.add(u)
                queue.append(u)
    return seen


def is_connected(g, vertices):
    vs = set(vertices)
    if not vs:
        return False
    return reachable(g, [min(vs)], vs) == vs


def components(g, forbidden=()):
    """Components of g - forbidden, each a frozenset, ordered by smallest member."""
    forbidden = set(forbidden)
    seen = set(forbidden)
    out = []
    for v in range(g.n):
        if v in seen:
            continue
        comp = reachable(g, [v], None if not forbidden else _Complement(forbidden))
        seen |= comp
        out.append(frozenset(comp))
    return out


class _Complement:
    __slots__ = ("excluded",)

    def __init__(self, excluded):
        self.excluded = excluded

    def __contains__(self, v):
        return v not in self.excluded


def shortest_path(g, sources, targets, allowed=None):
    """Shortest path (vertex list) from any source to any target inside ``allowed``."""
    ok = (lambda v: True) if allowed is None else allowed.__contains__
    targets = set(targets)
    parent = {}
    queue = deque()
    for s in sorted(set(sources)):
        if ok(s):
            parent[s] = None
            queue.append(s)
    while queue:
        v = queue.popleft()
        if v in targets:
            path = [v]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        for u in sorted(g.adj(v)):
            if u not in parent and ok(u):
                parent[u] = v
                queue.append(u)
    return None


class HopcroftKarp:
    """Maximum bipartite matching; left/right are index ranges 0..nl-1, 0..nr-1."""

    def __init__(self, nl, nr, adj):
        self.nl = nl
        self.nr = nr
        self.adj = adj
        self.match_l = [-1] * nl
        self.match_r = [-1] * nr

    def _bfs(self):
        dist = [-1] * self.nl
        queue = deque()
        for u in range(self.nl):
            if self.match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in self.adj[u]:
                w = self.match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == -1:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        self.dist = dist
        return found

    def _dfs(self, u):
        # iterative to dodge recursion limits on long augmenting paths
        stack = [(u, iter(self.adj[u]))]
        trail = []
        while stack:
            x, it = stack[-1]
            advanced = False
            for v in it:
                w = self.match_r[v]
                if w == -1:
                    trail.append((x, v))
                    for a, b in trail:
                        self.match_l[a] = b
                        self.match_r[b] = a
                    return True
                if self.dist[w] == self.dist[x] + 1:
                    trail.append((x, v))
                    stack.append((w, iter(self.adj[w])))
                    advanced = True
                    break
            if not advanced:
                self.dist[x] = -1
                stack.pop()
                if trail:
                    trail.pop()
        return False

    def run(self):
        while self._bfs():
            for u in range(self.nl):
                if self.match_l[u] == -1:
                    self._dfs(u)
        return [(u, self.match_l[u]) for u in range(self.nl) if self.match_l[u] != -1]


def max_bipartite_matching(left, right, edges):
    """Maximum matching between two item lists; returns a set of (left, right) pairs."""
    li = {x: i for i, x in enumerate(left)}
    ri = {x: i for i, x in enumerate(right)}
    adj = [[] for _ in left]
    for a, b in edges:
        if a not in li or b not in ri:
            raise InvalidInput(f"edge ({a!r}, {b!r}) outside left x right")
        adj[li[a]].append(ri[b])
    adj = [sorted(set(a)) for a in adj]
    pairs = HopcroftKarp(len(left), len(right), adj).run()
    return {(left[u], right[v]) for u, v in pairs}


def menger(g, sources, sinks, avoid=(), internal=False):
    """Maximum set of vertex-disjoint source-sink paths and a minimum separator.

    Unit-capacity max flow on the vertex-split digraph.  Each returned path
    meets the sources only at its first vertex and the sinks only at its last.
    A vertex in both sets is a length-0 path.  ``avoid`` vertices are deleted.

    With ``internal=True`` the paths need only be internally disjoint: source
    and sink vertices have unbounded capacity and never enter the separator.
    That mode needs disjoint, non-adjacent ends.
    """
    avoid = set(avoid)
    sources = set(sources) - avoid
    sinks = set(sinks) - avoid
    common = sorted(sources & sinks)
    if internal:
        if common or any(u in sinks for v in sources for u in g.adj(v)):
            raise InvalidInput("internal mode needs disjoint, non-adjacent ends")
    blocked = avoid | set(common)
    src = sorted(sources - blocked)
    snk = set(sinks) - blocked
    n = g.n
    # node 2v = v_in, 2v+1 = v_out, S = 2n, T = 2n+1
    S, T = 2 * n, 2 * n + 1
    cap = {}
    out = [[] for _ in range(2 * n + 2)]

    inf = n + 1

    def add(a, b, c):
        if (a, b) not in cap:
            cap[(a, b)] = 0
            cap.setdefault((b, a), 0)
            out[a].append(b)
            out[b].append(a)
        cap[(a, b)] += c

    # only the split arcs have unit capacity, so every min cut is a vertex cut
    for v in range(n):
        if v in blocked:
            continue
        add(2 * v, 2 * v + 1, inf if internal and (v in sources or v in sinks) else 1)
        for u in sorted(g.adj(v)):
            if u not in blocked:
                add(2 * v + 1, 2 * u, inf)
    for s in src:
        add(S, 2 * s, inf)
    for t in sorted(snk):
        add(2 * t + 1, T, inf)
    flow = {}

    def bfs():
        parent = {S: None}
        queue = deque([S])
        while queue:
            x = queue.popleft()
            for y in out[x]:
                if y not in parent and cap[(x, y)] - flow.get((x, y), 0) > 0:
                    parent[y] = x
                    if y == T:
                        return parent
                    queue.append(y)
        return parent

    while True:
        parent = bfs()
        if T not in parent:
            break
        y = T
        while parent[y] is not None:
            x = parent[y]
            flow[(x, y)] = flow.get((x, y), 0) + 1
            flow[(y, x)] = flow.get((y, x), 0) - 1
            y = x
    reach = parent  # residual reachability from S after the last search
    separator = set(common)
    for v in range(n):
        if v in blocked:
            continue
        if 2 * v in reach and 2 * v + 1 not in reach:
            separator.add(v)
    # decompose the flow into vertex paths
    paths = [[v] for v in common]
    used = dict(flow)
    for s in src:
        while used.get((S, 2 * s), 0) > 0:
            used[(S, 2 * s)] -= 1
            walk = [s]
            node = 2 * s + 1
            while used.get((node, T), 0) <= 0:
                nxt = next(y for y in out[node]
                           if y % 2 == 0 and y < S and used.get((node, y), 0) > 0)
                used[(node, nxt)] -= 1
                walk.append(nxt // 2)
                node = nxt + 1
            used[(node, T)] -= 1
            paths.append(_trim(walk, sources, sinks))
    assert len(paths) == len(separator)
    return paths, separator


def _trim(walk, sources, sinks):
    first_sink = next(i for i, v in enumerate(walk) if v in sinks)
    walk = walk[: first_sink + 1]
    last_source = max(i for i, v in enumerate(walk) if v in sources)
    return walk[last_source:]


def contract_sets(g, sets):
    """Contract each (connected, pairwise disjoint) set to one vertex.

    New vertices are numbered by the smallest old vertex of each group;
    returns (graph, mapping old vertex -> new vertex).
    """
    owner = {}
    for i, s in enumerate(sets):
        s = set(s)
        if not s:
            raise InvalidInput(f"set {i} is empty")
        if not is_connected(g, s):
            raise InvalidInput(f"set {i} is not connected")
        for v in s:
            if v in owner:
                raise InvalidInput(f"sets {owner[v]} and {i} overlap at vertex {v}")
            owner[v] = i
    groups = {}
    for v in range(g.n):
        key = ("s", owner[v]) if v in owner else ("v", v)
        groups.setdefault(key, []).append(v)
    ordered = sorted(groups.values(), key=min)
    mapping = {}
    for new, members in enumerate(ordered):
        for v in members:
            mapping[v] = new
    edges = {(min(mapping[u], mapping[v]), max(mapping[u], mapping[v]))
             for u, v in g.edges() if mapping[u] != mapping[v]}
    return Graph(len(ordered), sorted(edges)), mapping


def is_separation(g, s):
    a, b = set(s.side_a), set(s.side_b)
    if a | b != set(range(g.n)):
        return False
    only_a, only_b = a - b, b - a
    return not any(u in only_b for v in only_a for u in g.adj(v))


def separation_order(s):
    return len(set(s.side_a) & set(s.side_b))
