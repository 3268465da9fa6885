"""Exhaustive ground-truth oracles: minor models, packing and hitting
numbers, treewidth, bramble orders, monotone subsequences, short clique
models and cycles of length divisible by m."""
import itertools
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BudgetExceeded, InvalidBramble, InvalidInput
from .graph import Graph, components, is_connected

DEFAULT_BUDGET = 2_000_000
TABLE_LIMIT = 16      # subset tables for nu
GENERIC_TABLE_LIMIT = 12
TREEWIDTH_LIMIT = 20


@dataclass(frozen=True)
class MinorModel:
    """Branch sets of an H-model: h-vertex -> frozenset of g-vertices."""

    branch_sets: tuple  # tuple of frozensets indexed by h-vertex

    @classmethod
    def of(cls, sets):
        return cls(tuple(frozenset(s) for s in sets))

    @property
    def size(self):
        return sum(len(b) for b in self.branch_sets)

    def vertices(self):
        out = set()
        for b in self.branch_sets:
            out |= b
        return frozenset(out)

    def relabel(self, mapping):
        return MinorModel.of([{mapping[v] for v in b} for b in self.branch_sets])

    def to_json(self):
        return [sorted(b) for b in self.branch_sets]


def check_model(g, h, model):
    """Return None if ``model`` is a valid h-model in g, else the first problem."""
    sets = model.branch_sets
    if len(sets) != h.n:
        return f"expected {h.n} branch sets, got {len(sets)}"
    seen = {}
    for x, b in enumerate(sets):
        if not b:
            return f"branch set {x} is empty"
        for v in b:
            if not 0 <= v < g.n:
                return f"branch set {x} has unknown vertex {v}"
            if v in seen:
                return f"branch sets {seen[v]} and {x} share vertex {v}"
            seen[v] = x
        if not is_connected(g, b):
            return f"branch set {x} is not connected"
    for x, y in h.edges():
        if not any(u in sets[y] for v in sets[x] for u in g.adj(v)):
            return f"no edge between branch sets {x} and {y}"
    return None


def complete_graph(p):
    return Graph(p, [(i, j) for i in range(p) for j in range(i + 1, p)])


def is_triangle(h):
    return h.n == 3 and h.m == 3


# ---------------------------------------------------------------- minor search

def shortest_cycle(g, allowed=None):
    """A shortest cycle (vertex list) of g[allowed], or None."""
    verts = range(g.n) if allowed is None else sorted(allowed)
    ok = (lambda v: True) if allowed is None else set(allowed).__contains__
    best = None
    for r in verts:
        dist = {r: 0}
        parent = {r: None}
        queue = deque([r])
        found = None
        while queue and found is None:
            v = queue.popleft()
            for u in sorted(g.adj(v)):
                if not ok(u):
                    continue
                if u not in dist:
                    dist[u] = dist[v] + 1
                    parent[u] = v
                    queue.append(u)
                elif parent[v] != u:
                    found = (v, u)
                    break
        if found is None:
            continue
        v, u = found
        length = dist[v] + dist[u] + 1
        if best is not None and length >= len(best):
            continue
        a = [v]
        while parent[a[-1]] is not None:
            a.append(parent[a[-1]])
        b = [u]
        while parent[b[-1]] is not None:
            b.append(parent[b[-1]])
        if set(a) & set(b) == {r}:
            best = a[::-1] + b[:-1][::-1]
    return best


def _cycle_to_triangle(cycle):
    return MinorModel.of([{cycle[0]}, {cycle[1]}, set(cycle[2:])])


class _Search:
    """Branch-set backtracking for H-models with a total-size limit."""

    def __init__(self, g, h, budget):
        self.g = g
        self.h = h
        self.budget = budget
        self.steps = 0
        self.nbr = [0] * g.n
        for v in range(g.n):
            x = 0
            for u in g.adj(v):
                x |= 1 << u
            self.nbr[v] = x
        self.order = _h_order(h)
        pos = {x: i for i, x in enumerate(self.order)}
        self.earlier = [sorted((y for y in h.adj(x) if pos[y] < pos[x]), key=pos.get)
                        for x in self.order]
        self.pos = pos
        # interchangeable h-vertices: force their branch-set minima to increase
        self.twin_before = [None] * len(self.order)
        for i, x in enumerate(self.order):
            for j in range(i - 1, -1, -1):
                y = self.order[j]
                if set(h.adj(x)) - {y} == set(h.adj(y)) - {x}:
                    self.twin_before[i] = y
                    break

    def tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded("minor search", self.budget)

    def nbhd(self, mask):
        out = 0
        m = mask
        while m:
            low = m & -m
            out |= self.nbr[low.bit_length() - 1]
            m ^= low
        return out & ~mask

    def run(self, limit, allowed_mask):
        self.limit = limit
        self.sets = [0] * self.h.n
        return self._assign(0, allowed_mask, 0)

    def _assign(self, level, free, used):
        if level == len(self.order):
            return True
        x = self.order[level]
        remaining = len(self.order) - level - 1
        cap = self.limit - used - remaining
        if cap < 1:
            return False
        req = [self.sets[y] for y in self.earlier[level]]
        if req:
            anchor = self.nbhd(req[0]) & free
        else:
            anchor = free
        twin = self.twin_before[level]
        if twin is not None:
            low_twin = self.sets[twin] & -self.sets[twin]
            free_here = free & ~((low_twin << 1) - 1)
            anchor &= free_here
        else:
            free_here = free
        if not anchor:
            return False
        # one connected set per seed, the seed being its smallest anchor vertex
        a = anchor
        while a:
            low = a & -a
            a ^= low
            banned = (anchor & (low - 1))
            for s in self._grow(low, free_here & ~banned, cap):
                if all(self.nbhd(r) & s for r in req[1:]):
                    self.sets[x] = s
                    rest = free & ~s
                    if self._feasible(level, rest) and \
                            self._assign(level + 1, rest, used + bin(s).count("1")):
                        return True
            self.sets[x] = 0
        return False

    def _feasible(self, level, free):
        # every later vertex needs a free region next to all its placed neighbours
        for nxt in range(level + 1, len(self.order)):
            placed = [self.sets[y] for y in self.earlier[nxt] if self.pos[y] <= level]
            if not placed:
                continue
            start = self.nbhd(placed[0]) & free
            if not start:
                return False
            ok = False
            rest = start
            while rest and not ok:
                low = rest & -rest
                comp = self._reach(low, free)
                rest &= ~comp
                if all(self.nbhd(p) & comp for p in placed[1:]):
                    ok = True
            if not ok:
                return False
        return True

    def _reach(self, start, allowed):
        seen = start
        frontier = start
        while frontier:
            frontier = self.nbhd(frontier) & allowed & ~seen
            seen |= frontier
        return seen

    def _grow(self, root, allowed, cap):
        # connected sets containing root, each exactly once
        stack = [(root, self.nbhd(root) & allowed, 0)]
        while stack:
            s, frontier, banned = stack.pop()
            self.tick()
            yield s
            if bin(s).count("1") >= cap:
                continue
            f = frontier
            children = []
            while f:
                low = f & -f
                f ^= low
                ns = s | low
                nb = banned | (frontier & (low - 1))
                nf = (frontier & ~(low - 1) & ~low) | (self.nbhd(low) & allowed & ~ns & ~nb)
                children.append((ns, nf & ~ns & ~nb, nb))
            stack.extend(reversed(children))


def _h_order(h):
    order = []
    seen = set()
    verts = sorted(range(h.n), key=lambda x: (-h.degree(x), x))
    for r in verts:
        if r in seen:
            continue
        seen.add(r)
        queue = deque([r])
        while queue:
            x = queue.popleft()
            order.append(x)
            for y in sorted(h.adj(x), key=lambda y: (-h.degree(y), y)):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    return order


def _mask_to_set(mask):
    out = set()
    while mask:
        low = mask & -mask
        out.add(low.bit_length() - 1)
        mask ^= low
    return out


def _core_vertices(g, h):
    """Vertices that can appear in a minimal model (prunes pendant trees)."""
    if h.n == 0 or min(h.degree(x) for x in range(h.n)) < 2:
        return set(range(g.n))
    alive = set(range(g.n))
    deg = {v: g.degree(v) for v in alive}
    queue = deque(v for v in alive if deg[v] < 2)
    while queue:
        v = queue.popleft()
        if v not in alive:
            continue
        alive.discard(v)
        for u in g.adj(v):
            if u in alive:
                deg[u] -= 1
                if deg[u] < 2:
                    queue.append(u)
    return alive


def find_h_model(g, h, size_cap=None, budget=DEFAULT_BUDGET, allowed=None):
    """An h-model in g (within ``allowed`` if given), or None.

    With ``size_cap`` the search deepens on total size and the returned model
    is size-minimal; without it any model is returned.  Exceeding ``budget``
    search steps raises BudgetExceeded, which never means "no model".
    """
    if h.n == 0:
        return MinorModel(())
    pool = set(range(g.n)) if allowed is None else set(allowed)
    pool &= _core_vertices(g, h) if allowed is None else _core_vertices_within(g, h, pool)
    if len(pool) < h.n:
        return None
    if is_triangle(h):
        cyc = shortest_cycle(g, pool)
        if cyc is None or (size_cap is not None and len(cyc) > size_cap):
            return None
        return _cycle_to_triangle(cyc)
    search = _Search(g, h, budget)
    pool_mask = 0
    for v in pool:
        pool_mask |= 1 << v
    top = len(pool) if size_cap is None else min(size_cap, len(pool))
    limits = range(h.n, top + 1) if size_cap is not None else [top]
    for limit in limits:
        if search.run(limit, pool_mask):
            sets = [_mask_to_set(search.sets[x]) for x in range(h.n)]
            return MinorModel.of(sets)
    return None


def _core_vertices_within(g, h, pool):
    sub, old = g.induced(pool)
    return {old[v] for v in _core_vertices(sub, h)}


def has_h_minor(g, h, budget=DEFAULT_BUDGET, allowed=None):
    return find_h_model(g, h, budget=budget, allowed=allowed) is not None


# ------------------------------------------------------------ nu and tau

def model_table(g, h, budget=DEFAULT_BUDGET):
    """Boolean array over vertex subsets: does g[S] contain an h-model?"""
    n = g.n
    if is_triangle(h):
        if n > TABLE_LIMIT:
            raise BudgetExceeded("subset table", TABLE_LIMIT, "vertices")
        return kernels.cyclic_table(g.masks(), n)
    if n > GENERIC_TABLE_LIMIT:
        raise BudgetExceeded("subset table", GENERIC_TABLE_LIMIT, "vertices")
    table = np.zeros(1 << n, dtype=np.bool_)
    for s in range(1, 1 << n):
        if any(table[s & ~(1 << v)] for v in range(n) if s >> v & 1):
            table[s] = True
            continue
        if bin(s).count("1") < h.n:
            continue
        verts = _mask_to_set(s)
        sub, _ = g.induced(verts)
        if sub.m < h.m:
            continue
        table[s] = find_h_model(sub, h, budget=budget) is not None
    return table


def nu_packing(g, h, budget=DEFAULT_BUDGET):
    """A maximum packing of disjoint h-models, as a list of MinorModels."""
    if g.n == 0:
        return []
    table = model_table(g, h, budget)
    nu = kernels.packing_number(table, g.n)
    out = []
    s = (1 << g.n) - 1
    while s and nu[s] > 0:
        v = (s & -s).bit_length() - 1
        vb = 1 << v
        if nu[s & ~vb] == nu[s]:
            s &= ~vb
            continue
        rest = s & ~vb
        sub = rest
        while True:
            t = sub | vb
            if table[t] and 1 + nu[s & ~t] == nu[s]:
                break
            sub = (sub - 1) & rest
        model = find_h_model(g, h, budget=budget, allowed=_mask_to_set(t))
        out.append(model)
        s &= ~t
    return out


def nu_exact(g, h, budget=DEFAULT_BUDGET):
    if g.n == 0:
        return 0
    table = model_table(g, h, budget)
    return int(kernels.packing_number(table, g.n)[(1 << g.n) - 1])


def tau_exact(g, h, budget=DEFAULT_BUDGET):
    """Minimum size of a vertex set meeting every h-model, with a witness."""
    n = g.n
    if is_triangle(h):
        if n > kernels.MAX_BITS:
            raise BudgetExceeded("feedback set search", kernels.MAX_BITS, "vertices")
        spent = 0
        adj = g.masks()
        for k in range(n + 1):
            spent += math.comb(n, k)
            if spent > budget * 10:
                raise BudgetExceeded("feedback set search", budget * 10)
            x = kernels.feedback_set_of_size(adj, n, k)
            if x >= 0:
                return k, frozenset(_mask_to_set(int(x)))
        return n, frozenset(range(n))
    if n <= GENERIC_TABLE_LIMIT:
        table = model_table(g, h, budget)
        x = int(kernels.min_blocker(table, n))
        return bin(x).count("1"), frozenset(_mask_to_set(x))
    spent = 0
    for k in range(n + 1):
        for xs in itertools.combinations(range(n), k):
            spent += 1
            if spent > budget:
                raise BudgetExceeded("hitting set search", budget)
            rest = set(range(n)) - set(xs)
            if find_h_model(g, h, budget=budget, allowed=rest) is None:
                return k, frozenset(xs)
    return n, frozenset(range(n))


# ------------------------------------------------------- treewidth, brambles

def treewidth_exact(g):
    if g.n > TREEWIDTH_LIMIT:
        raise BudgetExceeded("treewidth", TREEWIDTH_LIMIT, "vertices")
    if g.n == 0:
        return -1
    return int(kernels.treewidth_dp(g.masks(), g.n))


def sets_touch(g, a, b):
    if a & b:
        return True
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    return any(u in big for v in small for u in g.adj(v))


def check_bramble(g, sets):
    """Raise InvalidBramble naming the first bad set or pair."""
    sets = [frozenset(s) for s in sets]
    for i, s in enumerate(sets):
        if not s or not is_connected(g, s):
            raise InvalidBramble(f"bramble set {i} is not connected", (i, i))
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if not sets_touch(g, sets[i], sets[j]):
                raise InvalidBramble(f"bramble sets {i} and {j} do not touch", (i, j))
    return sets


def bramble_order_exact(g, sets):
    sets = check_bramble(g, sets)
    if not sets:
        return 0
    if g.n > kernels.MAX_BITS:
        raise BudgetExceeded("bramble order", kernels.MAX_BITS, "vertices")
    arr = np.array([sum(1 << v for v in s) for s in sets], dtype=np.int64)
    x = int(kernels.min_hitting_set(arr, g.n))
    return bin(x).count("1")


def find_bramble(g, order, budget=DEFAULT_BUDGET):
    """A bramble of order >= ``order``, or None if none exists.

    Complete search: such a bramble exists iff one can pick, for every set W
    of order-1 vertices, a component of g - W so that the picks pairwise
    touch (a bramble set avoiding W can always be grown to its component).
    """
    if order <= 0:
        return []
    k = order - 1
    if k >= g.n:
        return None
    vars_ = []
    for w in itertools.combinations(range(g.n), k):
        comps = components(g, w)
        if not comps:
            return None
        vars_.append(comps)
    doms = {}
    for comps in vars_:
        for c in comps:
            doms.setdefault(c, len(doms))
    comp_list = sorted(doms, key=doms.get)
    touch = [[sets_touch(g, a, b) for b in comp_list] for a in comp_list]
    idx = [[doms[c] for c in comps] for comps in vars_]
    order_vars = sorted(range(len(idx)), key=lambda i: len(idx[i]))
    chosen = []
    steps = [0]

    def solve(pos, alive):
        steps[0] += 1
        if steps[0] > budget:
            raise BudgetExceeded("bramble search", budget)
        if pos == len(order_vars):
            return True
        opts = [c for c in idx[order_vars[pos]] if c in alive]
        if any(c in chosen for c in opts):
            # a set already picked avoids this W; reuse keeps the family small
            return solve(pos + 1, alive)
        for c in opts:
            chosen.append(c)
            narrowed = {d for d in alive if touch[c][d]}
            if solve(pos + 1, narrowed):
                return True
            chosen.pop()
        return False

    if not solve(0, set(range(len(comp_list)))):
        return None
    return [comp_list[c] for c in chosen]


def max_bramble_order(g, budget=DEFAULT_BUDGET):
    best = 0
    for order in range(1, g.n + 1):
        if find_bramble(g, order, budget) is None:
            break
        best = order
    return best


# ------------------------------------------------------------- subsequences

@dataclass(frozen=True)
class MonotoneResult:
    tag: str          # "increasing", "decreasing" or "too-short"
    subsequence: tuple
    indices: tuple


def _lex_smallest_chain(seq, length, better):
    n = len(seq)
    run = [1] * n
    for i in range(n - 1, -1, -1):
        for j in range(i + 1, n):
            if better(seq[j], seq[i]) and run[j] + 1 > run[i]:
                run[i] = run[j] + 1
    picked = []
    last = None
    need = length
    for i in range(n):
        if need == 0:
            break
        if run[i] >= need and (last is None or better(seq[i], seq[last])):
            picked.append(i)
            last = i
            need -= 1
    return picked if need == 0 else None


def erdos_szekeres(seq, p, q):
    """Increasing subsequence of length p, else decreasing of length q.

    The index tuple returned is the lexicographically smallest qualifying one.
    """
    seq = list(seq)
    if len(set(seq)) != len(seq):
        raise InvalidInput("entries must be distinct")
    if p < 1 or q < 1:
        raise InvalidInput("p and q must be positive")
    inc = _lex_smallest_chain(seq, p, lambda a, b: a > b)
    if inc is not None:
        return MonotoneResult("increasing", tuple(seq[i] for i in inc), tuple(inc))
    dec = _lex_smallest_chain(seq, q, lambda a, b: a < b)
    if dec is not None:
        return MonotoneResult("decreasing", tuple(seq[i] for i in dec), tuple(dec))
    return MonotoneResult("too-short", (), ())


def erdos_szekeres_batch(seqs, p, q):
    """erdos_szekeres over every row of an integer array, compiled when possible.

    Returns (tags, idx): tags[r] in {"increasing", "decreasing", "too-short"}
    encoded as 1, 2, 0, and idx[r] the chosen indices padded with -1.
    """
    seqs = np.ascontiguousarray(seqs, dtype=np.int64)
    if seqs.ndim != 2:
        raise InvalidInput("expected a 2-D array of sequences")
    if p < 1 or q < 1:
        raise InvalidInput("p and q must be positive")
    if seqs.shape[0] == 0:
        return np.zeros(0, dtype=np.int8), np.zeros((0, max(p, q)), dtype=np.int64)
    srt = np.sort(seqs, axis=1)
    if (srt[:, 1:] == srt[:, :-1]).any():
        raise InvalidInput("entries must be distinct")
    return kernels.monotone_batch(seqs, p, q)


# ------------------------------------------------------------- clique models

def small_clique_model(g, p, size_budget=None, exact_limit=5, budget=DEFAULT_BUDGET):
    """A K_p model of size <= size_budget, or None.

    Exact for p <= exact_limit; above that a greedy contraction heuristic that
    may miss models but never returns an invalid one.
    """
    if p <= exact_limit:
        return find_h_model(g, complete_graph(p), size_cap=size_budget, budget=budget)
    model = _greedy_clique(g, p)
    if model is None or (size_budget is not None and model.size > size_budget):
        return None
    return model


def _greedy_clique(g, p):
    sets = {v: {v} for v in range(g.n)}
    nbrs = {v: set(g.adj(v)) for v in range(g.n)}
    while True:
        for v in [v for v in nbrs if len(nbrs[v]) < p - 1]:
            for u in nbrs.pop(v):
                nbrs[u].discard(v)
            del sets[v]
        if len(nbrs) < p:
            return None
        clique = _find_clique(nbrs, p)
        if clique is not None:
            return MinorModel.of([sets[v] for v in clique])
        v = min(nbrs, key=lambda x: (len(nbrs[x]), x))
        u = min(nbrs[v], key=lambda x: (len(nbrs[x] & nbrs[v]), -len(nbrs[x]), x))
        for w in nbrs.pop(v):
            nbrs[w].discard(v)
            if w != u:
                nbrs[w].add(u)
                nbrs[u].add(w)
        sets[u] |= sets.pop(v)


def _find_clique(nbrs, p):
    verts = sorted(nbrs)

    def extend(clique, cands):
        if len(clique) == p:
            return clique
        for i, v in enumerate(cands):
            got = extend(clique + [v], [u for u in cands[i + 1:] if u in nbrs[v]])
            if got:
                return got
        return None

    return extend([], verts)


# ------------------------------------------------------------ mod-m cycles

def find_mod_m_cycle(g, m, budget=DEFAULT_BUDGET):
    """A cycle (vertex list) whose length is divisible by m, or None.

    Simple paths are grown from the smallest cycle vertex; the (vertex,
    residue) product is searched breadth-first to prune states that cannot
    close to length 0 mod m even by a walk.
    """
    if m < 1:
        raise InvalidInput("m must be positive")
    steps = [0]
    for s in range(g.n):
        allowed = set(range(s, g.n))
        closable = _residue_reach(g, s, m, allowed)
        path = [s]
        on_path = {s}

        def dfs(v, length):
            steps[0] += 1
            if steps[0] > budget:
                raise BudgetExceeded("mod-m cycle search", budget)
            for u in sorted(g.adj(v)):
                if u == s and length >= 2 and (length + 1) % m == 0:
                    return True
                if u in on_path or u not in allowed:
                    continue
                if (-(length + 1)) % m not in closable[u]:
                    continue
                path.append(u)
                on_path.add(u)
                if dfs(u, length + 1):
                    return True
                path.pop()
                on_path.discard(u)
            return False

        if dfs(s, 0):
            return list(path)
    return None


def _residue_reach(g, s, m, allowed):
    """closable[v] = residues r such that some walk v -> s in g[allowed] has length = r mod m."""
    seen = {(s, 0)}
    queue = deque([(s, 0)])
    while queue:
        v, r = queue.popleft()
        for u in g.adj(v):
            if u in allowed:
                st = (u, (r + 1) % m)
                if st not in seen:
                    seen.add(st)
                    queue.append(st)
    out = {v: set() for v in allowed}
    for v, r in seen:
        out[v].add(r)
    return out
