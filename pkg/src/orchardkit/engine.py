"""The packing engine: a small H-model, a small K_p-model, or a separation.

The engine keeps an orchard packing, starting from the empty one.  Every
routine that stumbles on a grade-increasing move hands it back; the engine
applies it and starts over.  The grade is bounded by 2^m * n, which bounds
the number of restarts.
"""
import math
from dataclasses import dataclass, field

from .errors import BudgetExceeded
from .graph import Graph, Separation, components, is_separation
from .oracles import MinorModel, check_model, complete_graph, find_h_model, small_clique_model
from .orchards import relabel_orchard, restrict_orchard, sections
from .packing import (EngineConfig, MergeMove, OrchardPacking, PathMove, apply_move,
                      extract_bounded_model, grade, omega_schedule)
from .separation import BrambleFound, ManyOrchards, separate_full


# ------------------------------------------------------------------ outcomes

@dataclass(frozen=True)
class SmallHModel:
    model: MinorModel
    within_bound: bool
    tag = "h-model"

    def summary(self):
        return {"tag": self.tag, "size": self.model.size, "model": self.model.to_json(),
                "within_bound": self.within_bound}


@dataclass(frozen=True)
class SmallCliqueModel:
    model: MinorModel
    aux_size: int
    within_bound: bool
    tag = "clique-model"

    def summary(self):
        return {"tag": self.tag, "size": self.model.size, "aux_model_size": self.aux_size,
                "model": self.model.to_json(), "within_bound": self.within_bound}


@dataclass(frozen=True)
class SeparationOut:
    separation: Separation
    order: int
    within_bound: bool
    tag = "separation"

    def summary(self):
        return {"tag": self.tag, "A": sorted(self.separation.side_a),
                "B": sorted(self.separation.side_b), "order": self.order,
                "within_bound": self.within_bound}


@dataclass(frozen=True)
class Unverified:
    reason: str
    tag = "unverified"

    def summary(self):
        return {"tag": self.tag, "reason": self.reason}


@dataclass
class EngineResult:
    outcome: object
    restarts: int
    packing: OrchardPacking
    trace: list = field(default_factory=list)


# ------------------------------------------------------------------ pieces

@dataclass(frozen=True)
class Piece:
    pid: int
    vertices: frozenset
    orchard_id: int = None  # id in the packing, None for components
    level: int = None


def pieces_of(g, pk):
    out = [Piece(k, o.vertices(), k, i) for k, i, o in pk.orchards()]
    for comp in components(g, pk.vertices()):
        out.append(Piece(len(out), frozenset(comp)))
    return out


def piece_contacts(g, pieces):
    owner = {}
    for p in pieces:
        for v in p.vertices:
            owner[v] = p.pid
    sees = {p.pid: set() for p in pieces}
    for u, v in g.edges():
        a, b = owner[u], owner[v]
        if a != b:
            sees[a].add(b)
            sees[b].add(a)
    return sees


@dataclass
class AuxGraphs:
    central: list              # piece ids, index = aux vertex
    small: Graph
    big: Graph
    labels: dict               # small-graph edge -> noncentral piece id
    centers: dict              # noncentral piece id -> aux vertex of its star centre


def build_aux_graphs(g, pk, cfg, pieces=None):
    pieces = pieces_of(g, pk) if pieces is None else pieces
    sees = piece_contacts(g, pieces)
    central = [p.pid for p in pieces if p.orchard_id is not None or len(sees[p.pid]) >= 2 * cfg.phi]
    idx = {pid: k for k, pid in enumerate(central)}
    big, small = set(), set()
    for a in central:
        for b in sees[a]:
            if b in idx and idx[a] < idx[b]:
                big.add((idx[a], idx[b]))
                small.add((idx[a], idx[b]))
    labels, centers = {}, {}
    for p in pieces:
        if p.pid in idx:
            continue
        seen = sorted(idx[b] for b in sees[p.pid] if b in idx)
        fresh = [(x, y) for k, x in enumerate(seen) for y in seen[k + 1:] if (x, y) not in big]
        if not fresh:
            continue
        big.update(fresh)
        gain = {x: 0 for x in seen}
        for x, y in fresh:
            gain[x] += 1
            gain[y] += 1
        centre = min(seen, key=lambda x: (-gain[x], x))
        centers[p.pid] = centre
        for x in seen:
            if x != centre:
                e = (min(x, centre), max(x, centre))
                if e not in small:
                    small.add(e)
                    labels[e] = p.pid
    n = len(central)
    return AuxGraphs(central, Graph(n, sorted(small)), Graph(n, sorted(big)), labels, centers)


def average_degree(g):
    return 2 * g.m / g.n if g.n else 0


# ------------------------------------------------------------------ engine

class _Restart(Exception):
    def __init__(self, move):
        self.move = move


def main_engine(g, h, cfg=None):
    cfg = EngineConfig.for_h(h) if cfg is None else cfg
    schedule = omega_schedule(cfg)
    pk = OrchardPacking.empty(g, schedule)
    limit = 2 ** cfg.m * max(g.n, 1)
    trace = []
    restarts = 0
    while True:
        try:
            outcome = _round(g, h, cfg, pk, trace)
        except _Restart as r:
            before = grade(pk)
            pk = apply_move(pk, r.move)
            after = grade(pk)
            assert after > before, (before, after)
            restarts += 1
            trace.append({"event": "move", "kind": r.move.kind, "grade": after,
                          "orchards": len(pk)})
            if restarts > limit:
                raise BudgetExceeded("engine", limit, "restarts")
            continue
        except BudgetExceeded as exc:
            outcome = Unverified(f"oracle budget exhausted: {exc}")
        trace.append({"event": "outcome", "tag": outcome.tag})
        return EngineResult(outcome, restarts, pk, trace)


def _model_or_move(g, pk, z, h, cfg, model=None):
    got = extract_bounded_model(g, pk, z, h, model=model, budget=cfg.budget)
    if isinstance(got, PathMove):
        raise _Restart(got)
    return got


def _h_outcome(g, h, pk, model):
    assert check_model(g, h, model) is None
    return SmallHModel(model, pk.schedule.within_sigma(model.size, h))


def _round(g, h, cfg, pk, trace):
    pieces = pieces_of(g, pk)
    for p in pieces:
        if find_h_model(g, h, budget=cfg.budget, allowed=p.vertices) is not None:
            trace.append({"event": "piece-has-h", "piece": p.pid})
            return _h_outcome(g, h, pk, _model_or_move(g, pk, p.vertices, h, cfg))
    if len(pk) <= 1:
        everything = frozenset(range(g.n))
        if find_h_model(g, h, budget=cfg.budget) is not None:
            return _h_outcome(g, h, pk, _model_or_move(g, pk, everything, h, cfg))
        return SeparationOut(Separation(everything, frozenset()), 0, g.n >= cfg.g(0))
    aux = build_aux_graphs(g, pk, cfg, pieces)
    trace.append({"event": "aux", "central": len(aux.central), "small_edges": aux.small.m,
                  "big_edges": aux.big.m})
    if average_degree(aux.small) >= cfg.phi:
        return _clique_branch(g, h, cfg, pk, pieces, aux)
    ds, db = aux.small, aux.big
    picks = [k for k in range(len(aux.central))
             if ds.degree(k) < 2 * cfg.phi and db.degree(k) < 2 * cfg.phi ** 2]
    if not picks:
        return Unverified("no central piece of low degree in both auxiliary graphs")
    # any low-degree piece will do; under overrides a later one may succeed
    # where the first has every horizontal section cut
    reasons = []
    for pick in picks:
        out = _separate_around(g, h, cfg, pk, pieces, aux, pick, trace)
        if not isinstance(out, Unverified):
            return out
        reasons.append(out.reason)
    return Unverified(reasons[0] if len(set(reasons)) == 1 else "; ".join(sorted(set(reasons))))


def _separate_around(g, h, cfg, pk, pieces, aux, pick, trace):
    db = aux.big
    K = pieces[aux.central[pick]]
    assert K.orchard_id is not None
    i = K.level
    if i >= cfg.m:
        return Unverified(f"an H-minor-free orchard reached the top level m={cfg.m}")
    orchard = pk.level_of(K.orchard_id)[1]
    free = frozenset(range(g.n)) - pk.vertices()
    X = set()
    c = pk.schedule.w(i + 1)
    for nb in sorted(db.adj(pick)):
        other = pieces[aux.central[nb]]
        if other.orchard_id is None:
            continue
        o2 = pk.level_of(other.orchard_id)[1]
        sub, old = g.induced(K.vertices | other.vertices | free)
        out = separate_full(sub, restrict_orchard(orchard, sub, old),
                            restrict_orchard(o2, sub, old), c, cfg.m, cfg.thresholds)
        trace.append({"event": "separate", "K": K.pid, "other": other.pid, "tag": out.tag})
        if isinstance(out, ManyOrchards):
            raise _Restart(MergeMove(K.orchard_id, other.orchard_id,
                                     tuple(relabel_orchard(o, g, old) for o in out.orchards)))
        if isinstance(out, BrambleFound):
            model = find_h_model(sub, h, budget=cfg.budget)
            if model is None:
                return Unverified("bramble of order m without an H-model; m too small for H")
            model = MinorModel.of([{old[v] for v in s} for s in model.branch_sets])
            zone = frozenset(old)
            return _h_outcome(g, h, pk, _model_or_move(g, pk, zone, h, cfg, model=model))
        X |= {old[v] for v in out.X}
    run = _longest_clear_run(orchard, X)
    if not run:
        return Unverified("every horizontal section of K meets the cutset")
    comp = next(cp for cp in components(g, X) if run[0] in cp)
    A = frozenset(X) | frozenset(comp)
    B = frozenset(range(g.n)) - frozenset(comp)
    if find_h_model(g, h, budget=cfg.budget, allowed=A) is not None:
        return _h_outcome(g, h, pk, _model_or_move(g, pk, A, h, cfg))
    sep = Separation(A, B)
    assert is_separation(g, sep)
    order = len(A & B)
    return SeparationOut(sep, order, len(A) >= cfg.g(order))


def _longest_clear_run(orchard, X):
    """Vertices of the longest run of consecutive horizontal sections on the
    first path of the orchard that avoids X."""
    horiz = [s for s in sections(orchard) if s.kind == "horizontal" and s.provenance[1] == 0]
    best, cur = [], []
    for s in horiz:
        if set(s.vertices) & X:
            cur = []
            continue
        cur = cur + [s]
        if len(cur) > len(best):
            best = cur
    return [v for s in best for v in s.vertices]


def _clique_branch(g, h, cfg, pk, pieces, aux):
    small = small_clique_model(aux.small, cfg.p, budget=cfg.budget)
    if small is None:
        return Unverified("auxiliary graph is dense but has no K_p model; phi too small")
    used = small.vertices()
    attach = {}
    for (x, y), pid in aux.labels.items():
        if x in used and y in used:
            attach.setdefault(aux.centers[pid], set()).add(pid)
    sets = []
    for bs in small.branch_sets:
        vs = set()
        for x in bs:
            vs |= pieces[aux.central[x]].vertices
            for pid in attach.get(x, ()):
                vs |= pieces[pid].vertices
        sets.append(vs)
    kp = complete_graph(cfg.p)
    model = MinorModel.of(sets)
    assert check_model(g, kp, model) is None
    zone = frozenset().union(*(pieces[aux.central[x]].vertices for x in used))
    zone |= frozenset(range(g.n)) - pk.vertices()
    got = _model_or_move(g, pk, zone, kp, cfg, model=model)
    factor = max(1, math.log2(max(g.n, 2)))
    return SmallCliqueModel(got, small.size, pk.schedule.within_sigma(got.size, h, factor))
