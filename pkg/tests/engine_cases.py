"""The 50-graph engine corpus and an independent check of engine witnesses."""
import itertools
import math
from fractions import Fraction

import networkx as nx

from orchardkit.generators import (GeneratorSpec, clique, cycle, disjoint_union, generate, grid,
                                   subdivide)
from orchardkit.graph import Graph
from orchardkit.oracles import complete_graph, tau_exact
from orchardkit.packing import EngineConfig
from orchardkit.separation import Thresholds

THRESHOLDS = Thresholds.of(f_sep=1, g_sep=1, f_58=4, g_58=2, z=1)


def corpus():
    out = []
    for r in (2, 3, 4):
        for c in range(r, 5):
            out.append((f"grid-{r}x{c}", grid(r, c)))
    for n, e in [(3, 1), (3, 2), (4, 1), (4, 2), (5, 1), (4, 3)]:
        out.append((f"subdivided-K{n}-{e}", subdivide(clique(n), e)))
    for s in range(12):
        out.append((f"tree-{s}", generate(GeneratorSpec("tree", {"n": 4 + 2 * s}, s))))
    for k in (1, 2, 3, 4):
        out.append((f"triangles-{k}", disjoint_union([clique(3)] * k)))
    out.append(("c4-and-k4", disjoint_union([cycle(4), clique(4)])))
    out.append(("tree-and-k4", disjoint_union([generate(GeneratorSpec("tree", {"n": 6}, 9)),
                                                clique(4)])))
    out.append(("grid-and-cycle", disjoint_union([grid(2, 3), cycle(5)])))
    out.append(("k5-and-c6", disjoint_union([clique(5), cycle(6)])))
    for n in (3, 5, 6, 8, 12):
        out.append((f"cycle-{n}", cycle(n)))
    edges = [(0, 1), (1, 2), (0, 2)] + [(i, i + 1) for i in range(2, 10)] + [(9, 11), (10, 11)]
    out.append(("triangles-on-a-path", Graph(12, edges)))
    out.append(("path-6", grid(1, 6)))
    for n, s in [(8, 0), (10, 1), (12, 2), (14, 3), (16, 4), (18, 5), (20, 6), (22, 7),
                 (24, 8), (24, 9), (12, 10)]:
        spec = GeneratorSpec("random-regular-girth",
                             {"n": n, "d": 3, "girth": 4 if n < 12 else 5}, s)
        out.append((f"cubic-{n}-{s}", generate(spec)))
    return out


def configs():
    """(name, h, cfg) used on every corpus graph."""
    out = []
    for hn, h in (("K3", complete_graph(3)), ("K4", complete_graph(4))):
        for om in ((3, 2), (2, 1)):
            out.append((f"{hn}-omega{om[0]}{om[1]}", h,
                        EngineConfig.for_h(h, m=2, omega=om, thresholds=THRESHOLDS)))
        out.append((f"{hn}-recursion", h,
                    EngineConfig.for_h(h, m=2, phi=1, thresholds=THRESHOLDS)))
    # average degree 2 forces a cycle, so phi=2 is sound for K3 and reaches the clique branch
    k3 = complete_graph(3)
    out.append(("K3-phi2", k3, EngineConfig.for_h(k3, m=2, omega=(2, 1), phi=2,
                                                  thresholds=THRESHOLDS)))
    return out


def _nx(g, keep=None):
    out = nx.Graph()
    out.add_nodes_from(range(g.n) if keep is None else keep)
    nodes = set(out)
    out.add_edges_from((u, v) for u, v in g.edges() if u in nodes and v in nodes)
    return out


def model_problems(g, h, sets):
    gx = _nx(g)
    sets = [set(s) for s in sets]
    probs = []
    if len(sets) != h.n:
        probs.append("wrong number of branch sets")
    for a, b in itertools.combinations(sets, 2):
        if a & b:
            probs.append("branch sets overlap")
    for s in sets:
        if not s or not nx.is_connected(gx.subgraph(s)):
            probs.append("branch set not connected")
    for x, y in h.edges():
        if x < len(sets) and y < len(sets) and \
                not any(gx.has_edge(u, v) for u in sets[x] for v in sets[y]):
            probs.append(f"no edge for {x}{y}")
    return probs


def sigma(cfg, schedule, h):
    """sigma recomputed here from the active thresholds."""
    f58 = cfg.thresholds.at(schedule.omega[0], cfg.m).f_58
    alpha = 2 ** (cfg.m + 1) * schedule.omega[0]
    return alpha * max(math.ceil(Fraction(cfg.p ** 2) * Fraction(cfg.phi_prime)),
                       max(h.m, 1) * (math.ceil(2 * Fraction(cfg.phi) ** 2 * f58) + 1))


def engine_problems(g, h, cfg, res):
    out = res.outcome
    probs = []
    if res.restarts > 2 ** cfg.m * max(g.n, 1):
        probs.append("too many restarts")
    s = sigma(cfg, res.packing.schedule, h)
    if out.tag == "h-model":
        probs += model_problems(g, h, out.model.branch_sets)
        if out.model.size > s:
            probs.append("model above sigma")
    elif out.tag == "clique-model":
        probs += model_problems(g, complete_graph(cfg.p), out.model.branch_sets)
        if out.model.size > s * max(1, math.log2(max(g.n, 2))):
            probs.append("clique model above sigma log n")
    elif out.tag == "separation":
        A, B = set(out.separation.side_a), set(out.separation.side_b)
        gx = _nx(g)
        if A | B != set(range(g.n)):
            probs.append("sides do not cover V")
        if any(u in A - B and v in B - A or v in A - B and u in B - A for u, v in gx.edges()):
            probs.append("edge across the separation")
        order = len(A & B)
        if order != out.order or order > s:
            probs.append("order")
        sub, _ = g.induced(A)
        if tau_exact(sub, h)[0] != 0:
            probs.append("G[A] has an H minor")
        if h.n == 3 and h.m == 3 and not (len(A) == 0 or nx.is_forest(_nx(g, A))):
            probs.append("G[A] has a cycle")
        # |A| >= g(0) = 1 presumes a nonempty graph; the engine flags the empty one
        if g.n and len(A) < cfg.g(order):
            probs.append("|A| below g(order)")
        if not g.n and out.within_bound:
            probs.append("empty graph claimed within bound")
    else:
        probs.append(f"no verified outcome: {out.summary()}")
    return probs
