"""Recursive packing/covering: k disjoint H-models plus a hitting set X.

The kernel step is replaced by a greedy exact reducer: single minor
operations are kept only when exact nu and tau do not move.  Witnesses found
on the reduced graph are lifted back one step at a time and re-checked.
"""
import math
from dataclasses import dataclass, field

from . import kernels
from .engine import SeparationOut, SmallCliqueModel, SmallHModel, main_engine
from .errors import BudgetExceeded, InvalidInput
from .graph import Graph, components
from .oracles import (DEFAULT_BUDGET, MinorModel, check_model, find_h_model, is_triangle,
                      nu_packing, tau_exact)
from .packing import EngineConfig

REDUCE_LIMIT = 14


# ------------------------------------------------------------------ steps

@dataclass(frozen=True)
class ReductionStep:
    operation: str  # vertex-delete | edge-delete | edge-contract
    target: object

    def to_json(self):
        t = self.target
        return {"operation": self.operation, "target": list(t) if isinstance(t, tuple) else t}


def apply_step(g, step):
    """The reduced graph and the forward map (old vertex -> new vertex or None)."""
    op, t = step.operation, step.target
    if op == "vertex-delete":
        fwd = [None if w == t else (w if w < t else w - 1) for w in range(g.n)]
        return g.remove([t])[0], fwd
    if op == "edge-delete":
        u, v = t
        if not g.has_edge(u, v):
            raise InvalidInput(f"no edge {u}-{v}")
        return Graph(g.n, [e for e in g.edges() if e != (u, v)]), list(range(g.n))
    if op == "edge-contract":
        u, v = t
        if not (u < v and g.has_edge(u, v)):
            raise InvalidInput(f"cannot contract {u}-{v}")
        fwd = [w if w < v else w - 1 for w in range(g.n)]
        fwd[v] = u
        edges = {(min(fwd[a], fwd[b]), max(fwd[a], fwd[b])) for a, b in g.edges()
                 if fwd[a] != fwd[b]}
        return Graph(g.n - 1, sorted(edges)), fwd
    raise InvalidInput(f"unknown operation {op}")


def _candidates(g):
    for v in range(g.n):
        yield ReductionStep("vertex-delete", v)
    for e in g.edges():
        yield ReductionStep("edge-delete", e)
    for e in g.edges():
        yield ReductionStep("edge-contract", e)


def _tau_at_least(g, h, tau, budget):
    if tau == 0:
        return True
    if is_triangle(h) and g.n <= kernels.MAX_BITS:
        return bool(kernels.feedback_set_of_size(g.masks(), g.n, tau - 1) < 0)
    return tau_exact(g, h, budget)[0] >= tau


def _push_models(models, fwd, g, h):
    out, used = [], set()
    for mdl in models:
        sets = [{fwd[v] for v in s} for s in mdl.branch_sets]
        if any(None in s for s in sets):
            return None
        new = MinorModel.of(sets)
        # a contraction can merge vertices of two models
        if check_model(g, h, new) is not None or used & new.vertices():
            return None
        used |= new.vertices()
        out.append(new)
    return out


def reduce_preserving(g, h, budget=DEFAULT_BUDGET, max_n=REDUCE_LIMIT):
    """Greedy (nu, tau)-preserving minor of g, with the steps taken.

    Over ``max_n`` vertices or on budget exhaustion it returns what it has
    (g itself when nothing was verified yet); every kept step was checked.
    """
    if g.n > max_n:
        return g, []
    try:
        models = nu_packing(g, h, budget)
        tau = tau_exact(g, h, budget)[0]
    except BudgetExceeded:
        return g, []
    nu = len(models)
    steps = []
    cur = g
    try:
        progress = True
        while progress:
            progress = False
            for step in _candidates(cur):
                nxt, fwd = apply_step(cur, step)
                if not _tau_at_least(nxt, h, tau, budget):
                    continue
                pushed = _push_models(models, fwd, nxt, h)
                if pushed is None:
                    pushed = nu_packing(nxt, h, budget) if nxt.n else []
                    if len(pushed) < nu:
                        continue
                cur, models = nxt, pushed
                steps.append(step)
                progress = True
                break
    except BudgetExceeded:
        pass
    return cur, steps


# ------------------------------------------------------------------ lifting

def _graphs_along(g, steps):
    out = [g]
    for s in steps:
        out.append(apply_step(out[-1], s)[0])
    return out


def lift(witness, steps, g, h=None, budget=DEFAULT_BUDGET):
    """Lift a model, a list of models, or a hitting set from the reduced graph to g."""
    graphs = _graphs_along(g, steps)
    for k in range(len(steps) - 1, -1, -1):
        prev = graphs[k]
        _, fwd = apply_step(prev, steps[k])
        witness = _lift_once(witness, fwd, prev, h, budget)
    return witness


def _lift_once(w, fwd, prev, h, budget):
    if isinstance(w, MinorModel):
        return MinorModel.of([{v for v in range(prev.n) if fwd[v] in s} for s in w.branch_sets])
    if isinstance(w, (list, tuple)):
        return [_lift_once(x, fwd, prev, h, budget) for x in w]
    xs = frozenset(w)
    pre = {}
    for v in range(prev.n):
        if fwd[v] is not None and fwd[v] in xs:
            pre.setdefault(fwd[v], []).append(v)
    cand = frozenset(vs[0] for vs in pre.values())
    if h is None or not _has_h(prev, h, frozenset(range(prev.n)) - cand, budget):
        return cand
    for x, vs in pre.items():
        if len(vs) == 2:
            alt = (cand - {vs[0]}) | {vs[1]}
            if not _has_h(prev, h, frozenset(range(prev.n)) - alt, budget):
                return alt
    t, wit = tau_exact(prev, h, budget)
    if t > len(xs):
        raise InvalidInput("hitting set cannot be lifted at the same size")
    extra = [v for v in range(prev.n) if v not in wit][: len(xs) - t]
    return frozenset(wit) | frozenset(extra)


def _has_h(g, h, allowed, budget):
    return find_h_model(g, h, budget=budget, allowed=allowed) is not None


# ------------------------------------------------------------------ pipeline

@dataclass
class PipelineResult:
    packing: list
    hitting_set: frozenset
    restart_count: int = 0
    reductions_applied: int = 0
    fallbacks: list = field(default_factory=list)

    @property
    def k(self):
        return len(self.packing)

    @property
    def measured_ratio(self):
        if self.k == 0:
            return 0.0
        return len(self.hitting_set) / (self.k * math.log2(self.k + 1))

    def to_json(self):
        return {"k": self.k, "hitting_set": sorted(self.hitting_set),
                "measured_ratio": self.measured_ratio, "restart_count": self.restart_count,
                "reductions_applied": self.reductions_applied,
                "packing": [m.to_json() for m in self.packing], "fallbacks": self.fallbacks}


def smallest_t(g, h, budget=DEFAULT_BUDGET, search=False):
    """tau directly, or by the smallest-t scan (kept for interface fidelity)."""
    if not search:
        return tau_exact(g, h, budget)[0]
    for t in range(g.n + 1):
        if not _tau_at_least(g, h, t + 1, budget):
            return t
    return g.n


def approx_pack_cover(g, h, cfg=None, reducer="greedy", budget=DEFAULT_BUDGET):
    if h.n == 0:
        raise InvalidInput("h must have a vertex")
    if len(components(h)) > 1:
        return _disconnected(g, h, cfg, reducer, budget)
    cfg = EngineConfig.for_h(h) if cfg is None else cfg
    res = _recurse(g, h, cfg, reducer, budget)
    res.hitting_set = prune_hitting_set(g, h, res.hitting_set, budget)
    return res


def prune_hitting_set(g, h, X, budget=DEFAULT_BUDGET):
    """Drop vertices of X, largest first, while G - X stays H-minor-free."""
    X = set(X)
    for v in sorted(X, reverse=True):
        rest = frozenset(range(g.n)) - (X - {v})
        if not _has_h(g, h, rest, budget):
            X.discard(v)
    return frozenset(X)


def _recurse(g, h, cfg, reducer, budget):
    if reducer == "greedy":
        g1, steps = reduce_preserving(g, h, budget)
    elif reducer == "none":
        g1, steps = g, []
    else:
        raise InvalidInput(f"unknown reducer {reducer!r}")
    if g1.n == 0:
        return PipelineResult([], frozenset(), 0, len(steps))
    run = main_engine(g1, h, cfg)
    out = run.outcome
    if isinstance(out, (SmallHModel, SmallCliqueModel)):
        model = out.model
        if isinstance(out, SmallCliqueModel):
            model = MinorModel.of(model.branch_sets[: h.n])
        assert check_model(g1, h, model) is None
        rest, old = g1.remove(model.vertices())
        sub = _recurse(rest, h, cfg, reducer, budget)
        packing = [MinorModel.of([{old[v] for v in s} for s in m.branch_sets]) for m in sub.packing]
        packing.append(model)
        X = frozenset(old[v] for v in sub.hitting_set) | model.vertices()
        res = PipelineResult(packing, X, run.restarts + sub.restart_count,
                             len(steps) + sub.reductions_applied, sub.fallbacks)
    elif isinstance(out, SeparationOut) and not out.separation.side_b:
        res = PipelineResult([], frozenset(), run.restarts, len(steps))
    else:
        # no reducer across the separation is available: settle G' exactly
        packing = nu_packing(g1, h, budget)
        X = tau_exact(g1, h, budget)[1]
        res = PipelineResult(packing, frozenset(X), run.restarts, len(steps),
                             [f"exact fallback after {out.tag}"])
    if steps:
        res.packing = lift(res.packing, steps, g)
        res.hitting_set = frozenset(lift(res.hitting_set, steps, g, h, budget))
    return res


def _disconnected(g, h, cfg, reducer, budget):
    comps = sorted(components(h), key=min)
    joined = Graph(h.n, list(h.edges()) + [(min(a), min(b)) for a, b in zip(comps, comps[1:])])
    first = approx_pack_cover(g, joined, cfg, reducer, budget)
    # models of the supergraph are models of h; more go in the space they leave
    packing = [MinorModel.of(m.branch_sets) for m in first.packing]
    used = frozenset().union(*(m.vertices() for m in packing))
    spare, old = g.remove(used)
    packing += [MinorModel.of([{old[v] for v in s} for s in m.branch_sets])
                for m in nu_packing(spare, h, budget)]
    rest, old = g.remove(first.hitting_set)
    Y = tau_exact(rest, h, budget)[1]
    X = prune_hitting_set(g, h, first.hitting_set | frozenset(old[v] for v in Y), budget)
    return PipelineResult(packing, X, first.restart_count, first.reductions_applied,
                          first.fallbacks + ["connected-supergraph wrapper"])


# ------------------------------------------------------------------ bookkeeping

def verify_bookkeeping(result, g, h, budget=DEFAULT_BUDGET):
    """Check the witnesses and the logarithmic chain for the implied sigma'."""
    rep = {"k": result.k, "X": len(result.hitting_set)}
    tau = tau_exact(g, h, budget)[0]
    rest = frozenset(range(g.n)) - result.hitting_set
    rep["k_le_tau"] = result.k <= tau
    rep["cover_valid"] = not _has_h(g, h, rest, budget)
    used = set()
    disjoint = True
    for mdl in result.packing:
        if check_model(g, h, mdl) is not None or used & mdl.vertices():
            disjoint = False
        used |= mdl.vertices()
    rep["packing_valid"] = disjoint
    rep["chain"] = chain_check(len(result.hitting_set), result.k, tau)
    rep["ok"] = rep["k_le_tau"] and rep["cover_valid"] and rep["packing_valid"] and rep["chain"]["ok"]
    return rep


def chain_check(x, k, tau):
    """Evaluate each step of |X| <= s k log(tau+1) <= ... <= 3 s k log(s(k+1))."""
    if x == 0:
        return {"ok": True, "sigma_prime": 1.0, "steps": []}
    if k == 0 or tau == 0:
        return {"ok": False, "sigma_prime": None, "steps": ["nonempty X without a model"]}
    log = math.log2
    s = max(1.0, x / (k * log(tau + 1)))
    lx = log(x + 1)
    vals = [
        x,
        s * k * log(tau + 1),
        s * k * lx,
        3 * s * k * lx - 3 * s * k * log(lx),
        3 * s * k * log(s * k * lx + 1) - 3 * s * k * log(lx),
        3 * s * k * log(s * (k + 1) * lx) - 3 * s * k * log(lx),
        3 * s * k * log(s * (k + 1)),
    ]
    eps = 1e-9 * max(vals)
    steps = [vals[i] <= vals[i + 1] + eps for i in range(len(vals) - 1)]
    return {"ok": all(steps), "sigma_prime": s, "steps": steps, "values": vals}
