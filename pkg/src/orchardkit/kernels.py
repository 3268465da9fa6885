"""Bitmask kernels for the exhaustive oracles.

Each kernel is plain Python over numpy arrays and int64 masks.  When numba is
importable and ``ORCHARDKIT_NO_NUMBA`` is unset, the kernels are compiled with
``njit``; otherwise the same functions run interpreted.  The compiled
dispatcher keeps the pure function reachable as ``kernel.py_func``, and so
does the interpreted wrapper.
"""
import functools
import os

import numpy as np

USE_NUMBA = os.environ.get("ORCHARDKIT_NO_NUMBA", "") in ("", "0")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:
    def _interpreted(fn):
        # compiled dispatchers hand back Python scalars; match that here
        @functools.wraps(fn)
        def call(*args):
            out = fn(*args)
            return out.item() if isinstance(out, np.generic) else out
        call.py_func = fn
        return call

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return _interpreted(args[0])
        return _interpreted


MAX_BITS = 62


@njit(cache=True)
def popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def lowbit_index(x):
    i = 0
    while not (x >> i) & 1:
        i += 1
    return i


@njit(cache=True)
def reach_mask(adj, start, allowed):
    """Vertices of ``allowed`` reachable from the bitmask ``start``."""
    seen = start & allowed
    frontier = seen
    while frontier:
        nxt = 0
        f = frontier
        while f:
            v = lowbit_index(f)
            f &= f - 1
            nxt |= adj[v]
        nxt &= allowed & ~seen
        seen |= nxt
        frontier = nxt
    return seen


@njit(cache=True)
def count_components(adj, mask):
    c = 0
    rest = mask
    while rest:
        v = lowbit_index(rest)
        comp = reach_mask(adj, np.int64(1) << v, mask)
        rest &= ~comp
        c += 1
    return c


@njit(cache=True)
def induced_edge_count(adj, mask):
    total = 0
    m = mask
    while m:
        v = lowbit_index(m)
        m &= m - 1
        total += popcount(adj[v] & mask)
    return total // 2


@njit(cache=True)
def is_forest_mask(adj, mask):
    k = popcount(mask)
    if k == 0:
        return True
    return induced_edge_count(adj, mask) == k - count_components(adj, mask)


@njit(cache=True)
def cyclic_table(adj, n):
    """out[S] is True iff the subgraph induced by S contains a cycle."""
    size = np.int64(1) << n
    out = np.zeros(size, dtype=np.bool_)
    for s in range(1, size):
        # monotone: inherit from S minus its top vertex first
        top = n - 1
        while not (s >> top) & 1:
            top -= 1
        if out[s & ~(np.int64(1) << top)]:
            out[s] = True
        elif not is_forest_mask(adj, np.int64(s)):
            out[s] = True
    return out


@njit(cache=True)
def packing_number(table, n):
    """Largest number of disjoint sets S with table[S] True.

    nu[S] = max(nu[S - v], 1 + nu[S - T]) over T ⊆ S containing the lowest
    vertex v of S with table[T]; runs in O(3^n).
    """
    size = np.int64(1) << n
    nu = np.zeros(size, dtype=np.int64)
    for s in range(1, size):
        v = lowbit_index(s)
        vb = np.int64(1) << v
        best = nu[s & ~vb]
        rest = s & ~vb
        sub = rest
        while True:
            t = sub | vb
            if table[t]:
                cand = 1 + nu[s & ~t]
                if cand > best:
                    best = cand
            if sub == 0:
                break
            sub = (sub - 1) & rest
        nu[s] = best
    return nu


@njit(cache=True)
def min_blocker(table, n):
    """Smallest X (as a mask) such that table[V - X] is False; -1 if none."""
    full = (np.int64(1) << n) - 1
    best = np.int64(-1)
    best_size = n + 1
    for x in range((np.int64(1) << n)):
        k = popcount(x)
        if k < best_size and not table[full & ~x]:
            best = x
            best_size = k
    return best


@njit(cache=True)
def next_combination(x):
    # Gosper's hack: next larger integer with the same popcount
    c = x & -x
    r = x + c
    return (((r ^ x) >> 2) // c) | r


@njit(cache=True)
def feedback_set_of_size(adj, n, k):
    """First k-subset (in Gosper order) whose removal leaves a forest; -1 if none."""
    full = (np.int64(1) << n) - 1
    if k == 0:
        return np.int64(0) if is_forest_mask(adj, full) else np.int64(-1)
    x = (np.int64(1) << k) - 1
    while x <= full:
        if is_forest_mask(adj, full & ~x):
            return x
        x = next_combination(x)
    return np.int64(-1)


@njit(cache=True)
def min_hitting_set(sets, n):
    """Smallest mask meeting every mask in ``sets``; ties go to the smaller mask."""
    full = (np.int64(1) << n) - 1
    m = sets.shape[0]
    for k in range(n + 1):
        if k == 0:
            if m == 0:
                return np.int64(0)
            continue
        x = (np.int64(1) << k) - 1
        while x <= full:
            ok = True
            for i in range(m):
                if sets[i] & x == 0:
                    ok = False
                    break
            if ok:
                return x
            x = next_combination(x)
    return np.int64(-1)


@njit(cache=True)
def treewidth_dp(adj, n):
    """Exact treewidth by the subset recurrence over elimination prefixes.

    TW(S) = min over v in S of max(TW(S - v), |Q(S - v, v)|) where Q(S, v)
    are the vertices outside S + v reachable from v through S.
    """
    if n == 0:
        return -1
    size = np.int64(1) << n
    full = size - 1
    big = n + 1
    tw = np.full(size, big, dtype=np.int64)
    tw[0] = -1
    for s in range(1, size):
        best = big
        m = s
        while m:
            v = lowbit_index(m)
            m &= m - 1
            vb = np.int64(1) << v
            prev = tw[s & ~vb]
            if prev >= best:
                continue
            inner = s & ~vb
            comp = reach_mask(adj, vb, inner | vb)
            nb = 0
            c = comp
            while c:
                u = lowbit_index(c)
                c &= c - 1
                nb |= adj[u]
            q = popcount(nb & full & ~inner & ~vb)
            val = prev if prev > q else q
            if val < best:
                best = val
        tw[s] = best
    return tw[full]


@njit(cache=True)
def _lex_chain_row(seq, length, sign, run, out):
    """Lexicographically smallest index chain where sign*seq increases; False if none."""
    n = seq.shape[0]
    for i in range(n - 1, -1, -1):
        run[i] = 1
        for j in range(i + 1, n):
            if sign * seq[j] > sign * seq[i] and run[j] + 1 > run[i]:
                run[i] = run[j] + 1
    need = length
    last = -1
    k = 0
    for i in range(n):
        if need == 0:
            break
        if run[i] >= need and (last < 0 or sign * seq[i] > sign * seq[last]):
            out[k] = i
            k += 1
            last = i
            need -= 1
    return need == 0


@njit(cache=True)
def monotone_batch(seqs, p, q):
    """Row-wise Erdos-Szekeres search over a 2-D array of distinct-entry rows.

    tags[r] is 1 (increasing of length p), 2 (decreasing of length q) or 0;
    idx[r, :p or q] holds the lexicographically smallest index chain.
    """
    rows, n = seqs.shape
    width = p if p > q else q
    tags = np.zeros(rows, dtype=np.int8)
    idx = np.full((rows, width), -1, dtype=np.int64)
    run = np.zeros(n, dtype=np.int64)
    out = np.zeros(width, dtype=np.int64)
    for r in range(rows):
        seq = seqs[r].astype(np.int64)
        if _lex_chain_row(seq, p, 1, run, out):
            tags[r] = 1
            idx[r, :p] = out[:p]
        elif _lex_chain_row(seq, q, -1, run, out):
            tags[r] = 2
            idx[r, :q] = out[:q]
    return tags, idx
