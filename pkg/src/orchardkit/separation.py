"""Separation lemmas for orchards.

Each routine returns a tagged outcome with a witness that can be checked
independently.  Cutset outcomes carry ``within_bound``: the structural claim
(what X separates) always holds, while the size bounds are guaranteed only
for the exact threshold formulas.  Tiny overrides can push the constructive
branch past what the graph supports; those calls degrade to the cutset
outcome with ``within_bound=False`` instead of failing.
"""
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from math import comb

from .errors import BudgetExceeded, InvalidInput
from .graph import Graph, components, contract_sets, max_bipartite_matching, menger
from .oracles import bramble_order_exact, check_bramble
from .orchards import (Orchard, Tree, largest_tame, myriapod_cover, path_orchard,
                       require_valid, section_owner, sections, split_tame,
                       validate_orchard)

BRAMBLE_ORDER_LIMIT = 40


# ------------------------------------------------------------------ thresholds

@lru_cache(maxsize=64)
def thresholds_eval(c, m):
    """(f_sep, g_sep, f_58, g_58) as exact integers."""
    if c < 1 or m < 1:
        raise InvalidInput("c and m must be positive")
    f = (2 * (2 ** m * c) ** (2 ** m) + 1) ** 2 * m ** 6
    g = f * f
    g58 = (5 * f + 5 * g) ** m
    f58 = (5 * f + 5 * g) * (g58 + 1) + m * comb(g58, m)
    return f, g, f58, g58


@dataclass(frozen=True)
class Bounds:
    f_sep: int
    g_sep: int
    f_58: int
    g_58: int
    z: int

    @property
    def five(self):
        return 5 * self.f_sep + 5 * self.g_sep


@dataclass(frozen=True)
class Thresholds:
    """Exact formulas, or constant overrides for desk-scale testing.

    ``overrides`` may set any of f_sep, g_sep, f_58, g_58, z; unset values
    fall back to the formulas (z to f_58 - 5(f+g)(g_58+1), floored at 0).
    """
    overrides: tuple = ()

    @classmethod
    def of(cls, **kw):
        bad = set(kw) - {"f_sep", "g_sep", "f_58", "g_58", "z"}
        if bad:
            raise InvalidInput(f"unknown threshold keys: {sorted(bad)}")
        if any(int(v) < 0 for v in kw.values()):
            raise InvalidInput("threshold overrides must be non-negative")
        return cls(tuple(sorted((k, int(v)) for k, v in kw.items())))

    @property
    def overridden(self):
        return bool(self.overrides)

    def at(self, c, m):
        o = dict(self.overrides)
        if {"f_sep", "g_sep", "f_58", "g_58"} <= set(o):
            f, g, f58, g58 = o["f_sep"], o["g_sep"], o["f_58"], o["g_58"]
        else:
            f, g, f58, g58 = thresholds_eval(c, m)
            f, g = o.get("f_sep", f), o.get("g_sep", g)
            f58, g58 = o.get("f_58", f58), o.get("g_58", g58)
        z = o.get("z", max(0, f58 - (5 * f + 5 * g) * (g58 + 1)))
        return Bounds(f, g, f58, g58, z)

    def to_json(self):
        return dict(self.overrides)


DEFAULT = Thresholds()


# ------------------------------------------------------------------ outcomes

@dataclass(frozen=True)
class ManyOrchards:
    orchards: tuple
    tag = "many-orchards"

    def summary(self):
        return {"tag": self.tag, "count": len(self.orchards),
                "shape": [self.orchards[0].a, self.orchards[0].b] if self.orchards else None}


@dataclass(frozen=True)
class SeesCutset:
    X: frozenset
    seen_sections: tuple
    within_bound: bool = True
    tag = "sees-cutset"

    def summary(self):
        return {"tag": self.tag, "X": sorted(self.X), "seen": len(self.seen_sections),
                "within_bound": self.within_bound}


@dataclass(frozen=True)
class ReachCutset:
    X: frozenset
    reached_sections: tuple
    within_bound: bool = True
    tag = "reach-cutset"

    def summary(self):
        return {"tag": self.tag, "X": sorted(self.X), "reached": len(self.reached_sections),
                "within_bound": self.within_bound}


@dataclass(frozen=True)
class BrambleFound:
    bramble: tuple
    order: object = None  # exact order, or None when over the oracle limit
    tag = "bramble"

    def summary(self):
        return {"tag": self.tag, "sets": len(self.bramble), "order": self.order,
                "order_verified": self.order is not None}


@dataclass(frozen=True)
class ComponentCutset:
    X: frozenset
    counts: tuple
    within_bound: bool = True
    max_outdegree: int = 0
    tag = "component-cutset"

    def summary(self):
        return {"tag": self.tag, "X": sorted(self.X), "counts": list(self.counts),
                "within_bound": self.within_bound}


# ------------------------------------------------------------------ helpers

def _check_pair(r, r2, m):
    require_valid(r)
    require_valid(r2)
    if r.a > m or r2.a > m:
        raise InvalidInput(f"orchards have {r.a} and {r2.a} paths, more than m={m}")
    if r.vertices() & r2.vertices():
        raise InvalidInput("orchards overlap")


def seeing_vertices(g, r, r2, f):
    """Vertices of r2 that see more than f sections of r."""
    owner = section_owner(sections(r))
    return frozenset(v for v in r2.vertices()
                     if len({owner[u] for u in g.adj(v) if u in owner}) > f)


def reached_sections(g, sources, owner, removed=frozenset()):
    """Sections reached from ``sources`` by paths with no internal orchard vertex."""
    hit = set()
    seen = set()
    queue = deque()
    for v in sorted(sources):
        if v in removed:
            continue
        seen.add(v)
        if v in owner:
            hit.add(owner[v])
        queue.append((v, True))
    while queue:
        v, start = queue.popleft()
        if v in owner and not start:
            continue
        for u in g.adj(v):
            if u in removed:
                continue
            if u in owner:
                hit.add(owner[u])
            if u not in seen and u not in owner:
                seen.add(u)
                queue.append((u, False))
    return hit


def component_section_counts(g, X, r_owner, r2_vertices):
    counts = []
    for comp in components(g, X):
        if comp & r2_vertices:
            counts.append(len({r_owner[v] for v in comp if v in r_owner}))
    return tuple(counts)


def _edge(u, v):
    return (u, v) if u < v else (v, u)


def _path_edges(p):
    return [_edge(u, v) for u, v in zip(p, p[1:])]


# ------------------------------------------------------------------ orchards from a matching

def _grow_orchards(g, r, r2, secs, owner, pairs, c, m):
    """Try to turn matched (vertex of r2, section of r) pairs into 2^m orchards."""
    need = 2 ** m * c
    link = {}
    for v, s in pairs:
        link[(v, s)] = min(u for u in g.adj(v) if owner.get(u) == s)
    options_r = []
    for ci, cr in enumerate(myriapod_cover(r)):
        spine = set(cr.spine)
        on_spine = [(v, s) for v, s in pairs if set(secs[s].vertices) <= spine]
        options_r.append((len(on_spine), 0, ci, "spine", cr, on_spine))
        per_leg = []
        for j, _, leg in cr.legs:
            lv = set(leg)
            hits = sorted((s, v) for v, s in pairs if set(secs[s].vertices) <= lv)
            if hits:
                per_leg.append((hits[0][1], hits[0][0], j))
        options_r.append((len(per_leg), 1, ci, "legs", cr, per_leg))
    options_r.sort(key=lambda t: (-t[0], t[1], t[2]))
    cover2 = myriapod_cover(r2)
    for size_r, _, _, kind_r, cr, chosen in options_r:
        if size_r < 2:
            continue
        tree_for = {}
        if kind_r == "legs":
            tree_for = {(v, s): j for v, s, j in chosen}
            chosen = [(v, s) for v, s, _ in chosen]
        for q, routes in _r2_options(cover2, chosen):
            trees = _extend_trees(r, cr, kind_r, tree_for, routes, link, owner)
            if len(trees) < need:
                continue
            grown = Orchard(g, tuple(r.paths) + (tuple(q),), tuple(trees))
            rep = validate_orchard(grown)
            assert rep.ok, rep
            tame = largest_tame(grown)
            if tame.b < need:
                continue
            return split_tame(tame, 2 ** m, c)
    return None


def _r2_options(cover2, chosen):
    """Candidate new paths with the route from each matched vertex to it.

    Yields (path, {(v, s): route}) where route runs from v to the new path.
    Order: spine, single leg, distinct legs; larger first within the order.
    """
    opts = []
    for ci, cm in enumerate(cover2):
        spine = set(cm.spine)
        on_spine = {(v, s): (v,) for v, s in chosen if v in spine}
        opts.append((len(on_spine), 0, ci, tuple(cm.spine), on_spine))
        legs_hit = {}
        for li, (_, at, leg) in enumerate(cm.legs):
            idx = {x: k for k, x in enumerate(leg)}
            on_leg = {(v, s): (v,) for v, s in chosen if v in idx}
            if on_leg:
                opts.append((len(on_leg), 1, ci, tuple(leg), on_leg))
                v, s = min((p for p in chosen if p[0] in idx), key=lambda p: idx[p[0]])
                legs_hit[(v, s)] = tuple(leg[idx[v]::-1]) + (at,)
        opts.append((len(legs_hit), 2, ci, tuple(cm.spine), legs_hit))
    opts.sort(key=lambda t: (-t[0], t[1], t[2]))
    for size, _, _, q, routes in opts:
        if size >= 2:
            yield q, routes


def _extend_trees(r, cr, kind_r, tree_for, routes, link, owner):
    tree_of = {}
    for j, t in enumerate(r.trees):
        for v in t.vertices:
            tree_of[v] = j
    grown = {}
    if kind_r == "legs":
        for key, route in sorted(routes.items()):
            j = tree_for[key]
            grown.setdefault(j, (key, ()))
    else:
        spine = cr.spine
        pos = {v: k for k, v in enumerate(spine)}
        for key, route in sorted(routes.items(), key=lambda kv: pos[link[kv[0]]]):
            u = link[key]
            k = pos[u]
            if u in tree_of:
                j, extra = tree_of[u], ()
            else:
                left = next((t for t in range(k - 1, -1, -1) if spine[t] in tree_of), None)
                if left is None:
                    continue  # no tree to the left of this one: dropped
                j, extra = tree_of[spine[left]], tuple(spine[left:k + 1])
            grown.setdefault(j, (key, extra))
    out = []
    for j, (key, extra) in sorted(grown.items()):
        t = r.trees[j]
        route = (link[key],) + routes[key]
        edges = set(t.edges) | set(_path_edges(extra)) | set(_path_edges(route))
        out.append(Tree.of(edges, t.vertices))
    return out


# ------------------------------------------------------------------ sees

def separate_orchards(g, r, r2, c, m, th=DEFAULT):
    """Many (a+1) x c orchards in G[V(r) + V(r2)], or X in V(r2) limiting what r2 sees."""
    _check_pair(r, r2, m)
    return _sees(g, r, r2, c, m, th)


def _sees(g, r, r2, c, m, th):
    b = th.at(c, m)
    secs = sections(r)
    owner = section_owner(secs)
    r2v = sorted(r2.vertices())
    sees = {v: {owner[u] for u in g.adj(v) if u in owner} for v in r2v}
    X = frozenset(v for v in r2v if len(sees[v]) > b.f_sep)
    rest = set()
    for v in r2v:
        if v not in X:
            rest |= sees[v]
    if len(X) <= b.f_sep and len(rest) <= b.g_sep:
        return SeesCutset(X, tuple(sorted(rest)), True)
    edges = [(v, s) for v in r2v for s in sorted(sees[v])]
    pairs = sorted(max_bipartite_matching(r2v, list(range(len(secs))), edges))
    built = _grow_orchards(g, r, r2, secs, owner, pairs, c, m)
    if built is not None:
        return ManyOrchards(tuple(built))
    return SeesCutset(X, tuple(sorted(rest)), False)


# ------------------------------------------------------------------ reach

def separate_reach(g, r, r2, c, m, th=DEFAULT):
    """Many orchards in G, or X outside V(r) limiting the sections r2 reaches."""
    _check_pair(r, r2, m)
    return _reach(g, r, r2, c, m, th)


def _reach(g, r, r2, c, m, th, avoid=frozenset()):
    b = th.at(c, m)
    secs = sections(r)
    owner = section_owner(secs)
    r2v = frozenset(r2.vertices())
    gc, mp = contract_sets(g, [s.vertices for s in secs])
    sec_node = {mp[s.vertices[0]]: k for k, s in enumerate(secs)}
    back = {mp[v]: v for v in range(g.n) if v not in owner}
    paths, sep = menger(gc, set(sec_node), {mp[v] for v in r2v}, avoid={mp[v] for v in avoid})
    if len(paths) >= b.f_sep + b.g_sep + 1:
        built = _reach_many(g, r, r2, secs, sec_node, back, paths, c, m, th)
        if built is not None:
            return built
    X = frozenset(back[z] for z in sep if z not in sec_node)
    hit = reached_sections(g, r2v, owner, removed=X | frozenset(avoid))
    ok = len(X) <= b.f_sep + b.g_sep and len(hit) <= b.f_sep + b.g_sep
    return ReachCutset(X, tuple(sorted(hit)), ok)


def _reach_many(g, r, r2, secs, sec_node, back, paths, c, m, th):
    links = {}
    for p in paths:
        s = sec_node[p[0]]
        rest = [back[x] for x in p[1:]]
        u = min(x for x in secs[s].vertices if g.has_edge(x, rest[0]))
        links[_edge(u, rest[-1])] = [u] + rest
    edges = set(r.edges()) | set(r2.edges()) | set(links)
    gstar = Graph(g.n, sorted(edges))
    out = _sees(gstar, r, r2, c, m, th)
    if not isinstance(out, ManyOrchards):
        return None
    expanded = []
    for o in out.orchards:
        trees = []
        for t in o.trees:
            es, vs = set(), set(t.vertices)
            for e in t.edges:
                route = links.get(e)
                if route is None or len(route) == 2:
                    es.add(e)
                else:
                    es.update(_path_edges(route))
                    vs.update(route)
            trees.append(Tree(frozenset(vs), frozenset(es)))
        new = Orchard(g, o.paths, tuple(trees))
        require_valid(new)
        expanded.append(new)
    return ManyOrchards(tuple(expanded))


# ------------------------------------------------------------------ one section

def separate_section(g, r, s, c, m, th=DEFAULT):
    """Many orchards, or X in V(s) + (V(G) - V(r)) limiting what s reaches."""
    require_valid(r)
    if r.a > m:
        raise InvalidInput(f"orchard has {r.a} paths, more than m={m}")
    secs = sections(r)
    if s not in secs:
        raise InvalidInput("s is not a section of the orchard")
    return _section(g, r, secs, s, c, m, th)


def _section(g, r, secs, s, c, m, th):
    b = th.at(c, m)
    owner = section_owner(secs)
    k = secs.index(s)
    sv = frozenset(s.vertices)
    if r.b == 1:
        X = frozenset()
    else:
        rs = path_orchard(g, s.vertices)
        subs = []
        if s.kind == "vertical":
            j = s.provenance[1]
            keep = [t for t in range(r.b) if t != j]
            sub = Orchard(g, r.paths, tuple(r.trees[t] for t in keep))
            subs.append(sub)
        else:
            i = s.provenance[1]
            p = r.paths[i]
            lo, hi = p.index(s.vertices[0]), p.index(s.vertices[-1])
            for part in (p[:lo], p[hi + 1:]):
                other = (set(p) - set(part))
                keep = [t for t in r.trees if not (t.vertices & other)]
                if keep:
                    paths = tuple(part if q is p else q for q in r.paths)
                    subs.append(Orchard(g, paths, tuple(keep)))
        X = frozenset()
        for sub in subs:
            avoid = r.vertices() - sub.vertices() - sv
            out = _reach(g, sub, rs, c, m, th, avoid=frozenset(avoid))
            if isinstance(out, ManyOrchards):
                return out
            X |= out.X
    hit = reached_sections(g, sv, owner, removed=X) - {k}
    ok = len(X) <= b.five and len(hit) <= b.five
    return ReachCutset(X, tuple(sorted(hit)), ok)


# ------------------------------------------------------------------ full

def separate_full(g, r, r2, c, m, th=DEFAULT):
    """Bramble of order >= m, many orchards, or X bounding the sections met by r2's components."""
    _check_pair(r, r2, m)
    b = th.at(c, m)
    secs = sections(r)
    owner = section_owner(secs)
    r2v = frozenset(r2.vertices())
    yr = _reach(g, r, r2, c, m, th)
    if isinstance(yr, ManyOrchards):
        return yr
    ys = []
    for s in secs:
        out = _section(g, r, secs, s, c, m, th)
        if isinstance(out, ManyOrchards):
            return out
        ys.append(out.X)
    # auxiliary digraph on sections plus the root, -1
    arcs = {-1: sorted(yr.reached_sections)}
    for k, s in enumerate(secs):
        arcs[k] = sorted(reached_sections(g, s.vertices, owner, removed=ys[k]) - {k})
    max_out = max(len(v) for v in arcs.values())
    depth = {-1: 0}
    queue = deque([-1])
    while queue:
        x = queue.popleft()
        for y in arcs[x]:
            if y not in depth:
                depth[y] = depth[x] + 1
                queue.append(y)
    shallow = [k for k, d in depth.items() if k >= 0 and d <= m]
    Y = set(yr.X)
    for k in shallow:
        Y |= ys[k]
    height = max(depth.values())

    def cutset(X):
        X = frozenset(X)
        counts = component_section_counts(g, X, owner, r2v)
        # the out-degree bound fails when a section cutset degraded
        ok = len(X) <= b.f_58 and all(x <= b.g_58 for x in counts) and max_out <= b.five
        return ComponentCutset(X, counts, ok, max_out)

    if height < m:
        return cutset(Y)
    deep = [k for k, d in depth.items() if k >= 0 and d == m]
    vq = {v for k in deep for v in secs[k].vertices}
    paths, sep = menger(g, r2v, vq, avoid=Y)
    if len(paths) <= b.z:
        return cutset(Y | sep)
    groups = {}
    for p in paths:
        sig = []
        for v in p:
            if v in owner and owner[v] not in sig:
                sig.append(owner[v])
                if len(sig) == m:
                    break
        if len(sig) == m:
            groups.setdefault(tuple(sorted(sig)), []).append(p)
    best = sorted((sig for sig, ps in groups.items() if len(ps) >= m),
                  key=lambda sig: (-len(groups[sig]), sig))
    if not best:
        return cutset(Y | sep)
    sig = best[0]
    chosen = groups[sig][:m]
    bramble = tuple(frozenset(secs[k].vertices) | frozenset(p) for k in sig for p in chosen)
    check_bramble(g, bramble)
    order = None
    if g.n <= BRAMBLE_ORDER_LIMIT:
        try:
            order = bramble_order_exact(g, bramble)
        except BudgetExceeded:
            order = None
    return BrambleFound(bramble, order)
