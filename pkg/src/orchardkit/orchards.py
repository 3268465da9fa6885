"""Orchards: a disjoint horizontal paths crossed by b disjoint vertical trees.

Covers validation, the section decomposition, myriapod covers, tame
suborchards and the orchard bramble.
"""
import json
from dataclasses import dataclass, field

from .errors import InvalidInput, InvalidOrchard
from .graph import Graph, is_connected
from .oracles import erdos_szekeres


@dataclass(frozen=True)
class Tree:
    vertices: frozenset
    edges: frozenset  # of (u, v) with u < v

    @classmethod
    def of(cls, edges=(), vertices=()):
        es = frozenset((min(u, v), max(u, v)) for u, v in edges)
        vs = set(vertices)
        for u, v in es:
            vs.update((u, v))
        return cls(frozenset(vs), es)

    def adjacency(self):
        adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj


@dataclass(frozen=True)
class Orchard:
    host: Graph = field(repr=False)
    paths: tuple   # tuple of vertex tuples
    trees: tuple   # tuple of Tree

    @property
    def a(self):
        return len(self.paths)

    @property
    def b(self):
        return len(self.trees)

    def vertices(self):
        vs = set()
        for p in self.paths:
            vs.update(p)
        for t in self.trees:
            vs |= t.vertices
        return frozenset(vs)

    def edges(self):
        es = set()
        for p in self.paths:
            es.update((min(u, v), max(u, v)) for u, v in zip(p, p[1:]))
        for t in self.trees:
            es |= t.edges
        return es


@dataclass(frozen=True)
class Report:
    ok: bool
    clause: str = ""
    detail: str = ""
    witness: tuple = ()

    def to_json(self):
        return {"ok": self.ok, "clause": self.clause, "detail": self.detail,
                "witness": list(self.witness)}


@dataclass(frozen=True)
class Section:
    kind: str          # "horizontal" or "vertical"
    vertices: tuple    # in path order
    provenance: tuple  # ("cross", i, j) | ("gap", i, k) | ("branch", j, w) | ("stem", j, k)


@dataclass(frozen=True)
class Myriapod:
    spine_index: int
    spine: tuple
    legs: tuple  # of (tree index, attachment spine vertex, leg vertices from the spine outwards)

    def vertices(self):
        vs = set(self.spine)
        for _, _, leg in self.legs:
            vs.update(leg)
        return vs

    def edges(self):
        es = {(min(u, v), max(u, v)) for u, v in zip(self.spine, self.spine[1:])}
        for _, at, leg in self.legs:
            seq = (at,) + tuple(leg)
            es |= {(min(u, v), max(u, v)) for u, v in zip(seq, seq[1:])}
        return es


def f_tame(a, b):
    """Tree count that guarantees a tame a x b suborchard: b ** (2 ** (a - 1))."""
    if a < 1 or b < 1:
        raise InvalidInput("a and b must be positive")
    return b ** (2 ** (a - 1))


# ------------------------------------------------------------------ validity

def validate_orchard(o):
    g = o.host
    if o.a < 1 or o.b < 1:
        return Report(False, "shape", f"need a, b >= 1, got {o.a} x {o.b}")
    for i, p in enumerate(o.paths):
        if not p or len(set(p)) != len(p):
            return Report(False, "path", f"horizontal path {i} is empty or repeats a vertex", tuple(p))
        for u, v in zip(p, p[1:]):
            if not (0 <= u < g.n and 0 <= v < g.n) or not g.has_edge(u, v):
                return Report(False, "path", f"horizontal path {i} uses non-edge {u}-{v}", (u, v))
    for j, t in enumerate(o.trees):
        if not t.vertices:
            return Report(False, "tree", f"vertical tree {j} is empty")
        for u, v in sorted(t.edges):
            if not g.has_edge(u, v):
                return Report(False, "tree", f"vertical tree {j} uses non-edge {u}-{v}", (u, v))
        if len(t.edges) != len(t.vertices) - 1 or not _tree_connected(t):
            return Report(False, "tree", f"vertical tree {j} is not a tree", tuple(sorted(t.vertices)))
    owner = {}
    for i, p in enumerate(o.paths):
        for v in p:
            if v in owner:
                return Report(False, "path-disjoint",
                              f"horizontal paths {owner[v]} and {i} share vertex {v}", (v,))
            owner[v] = i
    towner = {}
    for j, t in enumerate(o.trees):
        for v in sorted(t.vertices):
            if v in towner:
                return Report(False, "tree-disjoint",
                              f"vertical trees {towner[v]} and {j} share vertex {v}", (v,))
            towner[v] = j
    for i, p in enumerate(o.paths):
        for j, t in enumerate(o.trees):
            idx = [k for k, v in enumerate(p) if v in t.vertices]
            if not idx:
                return Report(False, "intersection",
                              f"path {i} and tree {j} are disjoint", (i, j))
            if idx != list(range(idx[0], idx[-1] + 1)) or any(
                    (min(p[k], p[k + 1]), max(p[k], p[k + 1])) not in t.edges
                    for k in idx[:-1]):
                return Report(False, "intersection",
                              f"path {i} meets tree {j} in a disconnected set",
                              tuple(p[k] for k in idx))
    for j, t in enumerate(o.trees):
        adj = t.adjacency()
        for v in sorted(t.vertices):
            if len(adj[v]) <= 1 and v not in owner:
                return Report(False, "leaf", f"leaf {v} of tree {j} is on no horizontal path", (v,))
    return Report(True)


def _tree_connected(t):
    adj = t.adjacency()
    start = min(t.vertices)
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen == set(t.vertices)


def require_valid(o):
    rep = validate_orchard(o)
    if not rep.ok:
        raise InvalidOrchard(rep)


# ------------------------------------------------------------------ sections

def sections(o):
    """The section decomposition, horizontal sections path by path first."""
    require_valid(o)
    return _sections(o)


def _sections(o):
    tree_of = {}
    for j, t in enumerate(o.trees):
        for v in t.vertices:
            tree_of[v] = j
    on_path = set()
    for p in o.paths:
        on_path.update(p)
    out = []
    for i, p in enumerate(o.paths):
        gap = 0
        k = 0
        while k < len(p):
            j = tree_of.get(p[k])
            run = [p[k]]
            k += 1
            while k < len(p) and tree_of.get(p[k]) == j:
                run.append(p[k])
                k += 1
            if j is None:
                out.append(Section("horizontal", tuple(run), ("gap", i, gap)))
                gap += 1
            else:
                out.append(Section("horizontal", tuple(run), ("cross", i, j)))
    for j, t in enumerate(o.trees):
        adj = t.adjacency()
        branch = sorted(v for v in t.vertices if v not in on_path and len(adj[v]) >= 3)
        for w in branch:
            out.append(Section("vertical", (w,), ("branch", j, w)))
        rest = set(t.vertices) - on_path - set(branch)
        stems = []
        while rest:
            v = min(rest)
            comp = {v}
            stack = [v]
            while stack:
                x = stack.pop()
                for u in adj[x]:
                    if u in rest and u not in comp:
                        comp.add(u)
                        stack.append(u)
            rest -= comp
            stems.append(_order_path(comp, adj))
        for k, stem in enumerate(sorted(stems, key=min)):
            out.append(Section("vertical", stem, ("stem", j, k)))
    return out


def _order_path(comp, adj):
    ends = [v for v in comp if len(adj[v] & comp) <= 1]
    start = min(ends) if ends else min(comp)
    order = [start]
    prev = None
    while True:
        nxt = [u for u in adj[order[-1]] if u in comp and u != prev]
        if not nxt:
            break
        prev = order[-1]
        order.append(nxt[0])
        if len(order) > len(comp):
            raise InvalidInput("section is not a path")
    return tuple(order)


def section_owner(secs):
    return {v: k for k, s in enumerate(secs) for v in s.vertices}


def vertical_section_counts(o, secs=None):
    secs = sections(o) if secs is None else secs
    counts = [0] * o.b
    for s in secs:
        if s.kind == "vertical":
            counts[s.provenance[1]] += 1
    return counts


# ------------------------------------------------------------------ myriapods

def tree_path(t, u, v):
    """The unique u-v path inside tree t."""
    adj = t.adjacency()
    parent = {u: None}
    stack = [u]
    while stack:
        x = stack.pop()
        if x == v:
            break
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                stack.append(y)
    out = [v]
    while parent[out[-1]] is not None:
        out.append(parent[out[-1]])
    return out[::-1]


def connecting_subpath(o, j, i1, i2):
    """Subpath of tree j from path i1 to path i2 with no interior vertex on either."""
    t = o.trees[j]
    a = next(v for v in o.paths[i1] if v in t.vertices)
    b = next(v for v in o.paths[i2] if v in t.vertices)
    route = tree_path(t, a, b)
    p1, p2 = set(o.paths[i1]), set(o.paths[i2])
    last1 = max(k for k, v in enumerate(route) if v in p1)
    first2 = min(k for k, v in enumerate(route) if v in p2 and k > last1)
    return route[last1:first2 + 1]


def myriapod_cover(o):
    """At most a^2 myriapods covering every section.

    One myriapod per ordered pair of distinct paths (P_i, P_j): spine P_i,
    plus for each tree the leg running from P_i to P_j.  With a single path
    the path itself is the only myriapod.
    """
    require_valid(o)
    if o.a == 1:
        return [Myriapod(0, tuple(o.paths[0]), ())]
    out = []
    for i in range(o.a):
        for j in range(o.a):
            if i == j:
                continue
            legs = []
            for k in range(o.b):
                sub = connecting_subpath(o, k, i, j)
                legs.append((k, sub[0], tuple(sub[1:])))
            out.append(Myriapod(i, tuple(o.paths[i]), tuple(legs)))
    return out


def check_myriapod(m):
    """None if m is a myriapod (tree, max degree 3, degree-3 vertices on the spine)."""
    es = m.edges()
    vs = m.vertices()
    if len(es) != len(vs) - 1:
        return "not a tree"
    deg = {v: 0 for v in vs}
    for u, v in es:
        deg[u] += 1
        deg[v] += 1
    spine = set(m.spine)
    for v, d in deg.items():
        if d > 3:
            return f"vertex {v} has degree {d}"
        if d == 3 and v not in spine:
            return f"degree-3 vertex {v} is off the spine"
    return None


# ------------------------------------------------------------------ suborchards

def tree_order(o, i):
    """Tree indices in the order met along path i."""
    first = {}
    for k, v in enumerate(o.paths[i]):
        for j, t in enumerate(o.trees):
            if v in t.vertices and j not in first:
                first[j] = k
    return sorted(first, key=first.get)


def is_tame(o):
    base = tree_order(o, 0)
    rev = base[::-1]
    return all(tree_order(o, i) in (base, rev) for i in range(o.a))


def prune_tree(t, keep):
    """Iteratively delete leaves that are not in ``keep``."""
    adj = t.adjacency()
    alive = set(t.vertices)
    changed = True
    while changed and len(alive) > 1:
        changed = False
        for v in sorted(alive):
            if v not in keep and len(adj[v] & alive) <= 1 and len(alive) > 1:
                alive.discard(v)
                changed = True
    edges = {(u, v) for u, v in t.edges if u in alive and v in alive}
    return Tree(frozenset(alive), frozenset(edges))


def suborchard(o, path_idx, tree_idx):
    paths = tuple(o.paths[i] for i in path_idx)
    keep = set()
    for p in paths:
        keep.update(p)
    trees = tuple(prune_tree(o.trees[j], keep) for j in tree_idx)
    return Orchard(o.host, paths, trees)


def _position_on(o, i, j):
    t = o.trees[j]
    return next(k for k, v in enumerate(o.paths[i]) if v in t.vertices)


def tame_suborchard(o, b_target):
    """A tame a x b_target suborchard, following the induction on a.

    Needs at least f_tame(a, b_target) trees.  Each level keeps the trees with
    the smallest indices and takes the lexicographically smallest monotone run.
    """
    require_valid(o)
    need = f_tame(o.a, b_target)
    if o.b < need:
        raise InvalidInput(f"need {need} vertical trees for a tame {o.a}x{b_target} suborchard, have {o.b}")
    chosen = _tame_levels(o, o.a, b_target)
    return suborchard(o, range(o.a), chosen)


def _tame_levels(o, k, target):
    if k == 1:
        pick = set(range(min(target, o.b)))
        return [j for j in tree_order(o, 0) if j in pick]
    lower = suborchard(o, range(k - 1), range(o.b))
    prev = _tame_levels(lower, k - 1, target * target)
    seq = [_position_on(o, k - 1, j) for j in prev]
    res = erdos_szekeres(seq, target, target)
    if res.tag == "too-short":
        raise InvalidInput("monotone subsequence not found")
    return [prev[x] for x in res.indices]


def largest_tame(o):
    """Greedy tame suborchard keeping all paths: longest monotone run per level."""
    chosen = tree_order(o, 0)
    for k in range(1, o.a):
        seq = [_position_on(o, k, j) for j in chosen]
        inc = _longest_monotone(seq, 1)
        dec = _longest_monotone(seq, -1)
        pick = inc if len(inc) >= len(dec) else dec
        chosen = [chosen[x] for x in pick]
    return suborchard(o, range(o.a), chosen)


def _longest_monotone(seq, sign):
    n = len(seq)
    best = [1] * n
    prev = [-1] * n
    for i in range(n):
        for j in range(i):
            if sign * (seq[i] - seq[j]) > 0 and best[j] + 1 > best[i]:
                best[i] = best[j] + 1
                prev[i] = j
    if not n:
        return []
    end = max(range(n), key=lambda i: (best[i], -i))
    out = [end]
    while prev[out[-1]] != -1:
        out.append(prev[out[-1]])
    return out[::-1]


def split_tame(o, parts, c):
    """Cut a tame orchard with >= parts*c trees into disjoint a x c orchards."""
    if not is_tame(o):
        raise InvalidInput("orchard is not tame")
    order = tree_order(o, 0)
    if len(order) < parts * c:
        raise InvalidInput(f"need {parts * c} trees, have {len(order)}")
    out = []
    for g_ in range(parts):
        group = order[g_ * c:(g_ + 1) * c]
        paths = []
        for p in o.paths:
            idx = [k for k, v in enumerate(p) if any(v in o.trees[j].vertices for j in group)]
            paths.append(tuple(p[min(idx):max(idx) + 1]))
        out.append(Orchard(o.host, tuple(paths), tuple(o.trees[j] for j in group)))
    return out


# ------------------------------------------------------------------ brambles

def orchard_bramble(o):
    """The a*b sets T_j + P_i; pairwise touching since every P meets every T."""
    require_valid(o)
    return [frozenset(t.vertices | set(p)) for p in o.paths for t in o.trees]


# ------------------------------------------------------------------ builders

def grid_graph(rows, cols=None):
    cols = rows if cols is None else cols
    edges = [(r * cols + c, r * cols + c + 1) for r in range(rows) for c in range(cols - 1)]
    edges += [(r * cols + c, (r + 1) * cols + c) for r in range(rows - 1) for c in range(cols)]
    return Graph(rows * cols, edges)


def grid_orchard(rows, cols=None, host=None):
    """Rows as horizontal paths, columns as vertical trees."""
    cols = rows if cols is None else cols
    host = grid_graph(rows, cols) if host is None else host
    paths = tuple(tuple(r * cols + c for c in range(cols)) for r in range(rows))
    trees = tuple(Tree.of([(r * cols + c, (r + 1) * cols + c) for r in range(rows - 1)],
                          [r * cols + c for r in range(rows)]) for c in range(cols))
    return Orchard(host, paths, trees)


def path_orchard(host, path):
    """A path viewed as a 1 x |path| orchard with singleton trees."""
    return Orchard(host, (tuple(path),), tuple(Tree.of((), [v]) for v in path))


# ------------------------------------------------------------------ JSON

def orchard_to_json(o):
    return {"paths": [list(p) for p in o.paths],
            "trees": [{"vertices": sorted(t.vertices), "edges": [list(e) for e in sorted(t.edges)]}
                      for t in o.trees]}


def orchard_from_json(data, host):
    if isinstance(data, str):
        data = json.loads(data)
    try:
        paths = tuple(tuple(int(v) for v in p) for p in data["paths"])
        trees = []
        for t in data["trees"]:
            if isinstance(t, dict):
                trees.append(Tree.of([tuple(e) for e in t.get("edges", [])], t.get("vertices", [])))
            else:
                trees.append(Tree.of([tuple(e) for e in t]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed orchard JSON: {exc}") from exc
    return Orchard(host, paths, tuple(trees))


def orchard_subgraph_connected(o):
    return is_connected(o.host, o.vertices())


def relabel_orchard(o, host, old_ids):
    """Map an orchard on an induced subgraph back to ``host`` via ``old_ids``."""
    paths = tuple(tuple(old_ids[v] for v in p) for p in o.paths)
    trees = tuple(Tree(frozenset(old_ids[v] for v in t.vertices),
                       frozenset(tuple(sorted((old_ids[u], old_ids[v]))) for u, v in t.edges))
                  for t in o.trees)
    return Orchard(host, paths, trees)


def restrict_orchard(o, sub, old_ids):
    """View an orchard of the host inside an induced subgraph containing it."""
    new = {v: k for k, v in enumerate(old_ids)}
    return relabel_orchard(o, sub, new)
