"""Orchard (m, omega)-packings, their grade, and the two improvement moves."""
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InvalidInput, ThresholdViolation
from .oracles import DEFAULT_BUDGET, MinorModel, check_model, find_h_model
from .orchards import path_orchard, validate_orchard
from .separation import DEFAULT as DEFAULT_THRESHOLDS
from .separation import Thresholds


def constant_one(q):
    return 1


# Average degree forcing a short K_p model, and the matching size factor.
# p = 3 follows from the girth bound for graphs of minimum degree 3.
PHI_DEFAULTS = {1: (1, 1), 2: (2, 1), 3: (4, 3)}


def phi_defaults(p):
    return PHI_DEFAULTS.get(p, (2 ** (p - 1), 4 * p))


@dataclass(frozen=True)
class EngineConfig:
    p: int = 3
    phi: object = 4
    phi_prime: object = 3
    m: int = 3
    thresholds: Thresholds = DEFAULT_THRESHOLDS
    g: object = constant_one
    omega: tuple = None  # explicit table (omega(1), ..., omega(m))
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.m < 1 or self.p < 1:
            raise InvalidInput("m and p must be positive")
        if self.phi < 1 or self.phi_prime <= 0:
            raise InvalidInput("phi must be >= 1 and phi_prime positive")
        if self.g(0) != 1:
            raise InvalidInput("g(0) must be 1")

    @classmethod
    def for_h(cls, h, **kw):
        p = kw.pop("p", max(h.n, 1))
        phi, phi_prime = phi_defaults(p)
        kw.setdefault("phi", phi)
        kw.setdefault("phi_prime", phi_prime)
        return cls(p=p, **kw)

    def describe(self):
        return {"p": self.p, "phi": str(self.phi), "phi_prime": str(self.phi_prime), "m": self.m,
                "thresholds": self.thresholds.to_json() or "formulas",
                "omega": list(self.omega) if self.omega else None}


# ------------------------------------------------------------------ schedule

def _ceil(x):
    return math.ceil(Fraction(x)) if not isinstance(x, int) else x


@dataclass(frozen=True)
class OmegaSchedule:
    m: int
    omega: tuple  # omega[i - 1] = omega(i)
    q: tuple      # q[i - 1] = q(i) for i < m
    cfg: EngineConfig = field(repr=False)

    def w(self, i):
        return self.omega[i - 1]

    @property
    def alpha(self):
        return 2 ** (self.m + 1) * self.omega[0]

    def sigma(self, h):
        cfg = self.cfg
        f58 = cfg.thresholds.at(self.omega[0], self.m).f_58
        edges = max(h.m, 1)
        return self.alpha * max(_ceil(cfg.p ** 2 * cfg.phi_prime),
                                edges * (_ceil(2 * cfg.phi ** 2 * f58) + 1))

    def within_sigma(self, size, h, factor=1):
        """size <= sigma * factor, without evaluating sigma when alpha already decides."""
        if size <= self.alpha * factor:
            return True
        return size <= self.sigma(h) * factor


def omega_schedule(cfg):
    m = cfg.m
    qs = []
    if cfg.omega is not None:
        omega = tuple(int(x) for x in cfg.omega)
        if len(omega) != m:
            raise InvalidInput(f"omega table needs {m} entries, got {len(omega)}")
        for i in range(1, m):
            qs.append(_ceil(2 * cfg.phi ** 2 * cfg.thresholds.at(omega[i], m).f_58))
    else:
        omega = [0] * m
        omega[m - 1] = m
        for i in range(m - 1, 0, -1):
            b = cfg.thresholds.at(omega[i], m)
            q = _ceil(2 * cfg.phi ** 2 * b.f_58)
            omega[i - 1] = (q + 1) * max(cfg.g(q) + 1, b.g_58 + 1)
            qs.append(q)
        qs.reverse()
        omega = tuple(omega)
    if omega[-1] < 1 or any(omega[i] <= omega[i + 1] for i in range(m - 1)):
        raise ThresholdViolation(f"omega schedule is not strictly decreasing: {omega[:4]}")
    return OmegaSchedule(m, omega, tuple(qs), cfg)


# ------------------------------------------------------------------ packings

@dataclass(frozen=True)
class OrchardPacking:
    host: object
    schedule: OmegaSchedule
    levels: tuple  # levels[i - 1] = tuple of orchards in R_i

    @classmethod
    def empty(cls, host, schedule):
        return cls(host, schedule, tuple(() for _ in range(schedule.m)))

    def orchards(self):
        """(id, level, orchard) in canonical order: by level, then insertion."""
        out = []
        for i, lvl in enumerate(self.levels, start=1):
            for o in lvl:
                out.append((len(out), i, o))
        return out

    def __len__(self):
        return sum(len(lvl) for lvl in self.levels)

    def vertices(self):
        vs = set()
        for lvl in self.levels:
            for o in lvl:
                vs |= o.vertices()
        return frozenset(vs)

    def level_of(self, oid):
        for k, i, o in self.orchards():
            if k == oid:
                return i, o
        raise InvalidInput(f"no orchard with id {oid}")

    def summary(self):
        return {"grade": grade(self), "sizes": [len(lvl) for lvl in self.levels]}


def grade(pk):
    return sum(2 ** i * len(lvl) for i, lvl in enumerate(pk.levels, start=1))


def packing_problems(pk):
    """Every violated packing invariant, as text (empty when valid)."""
    out = []
    seen = {}
    for k, i, o in pk.orchards():
        rep = validate_orchard(o)
        if not rep.ok:
            out.append(f"orchard {k}: {rep.clause}: {rep.detail}")
        if o.a != i or o.b != pk.schedule.w(i):
            out.append(f"orchard {k} is {o.a}x{o.b}, level {i} needs {i}x{pk.schedule.w(i)}")
        if i == 1 and len(o.paths[0]) != pk.schedule.w(1):
            out.append(f"orchard {k} in R_1 is not a path on omega(1) vertices")
        for v in o.vertices():
            if v in seen:
                out.append(f"orchards {seen[v]} and {k} share vertex {v}")
            seen[v] = k
    return out


def _replace(pk, remove, add_level, new):
    levels = []
    for i, lvl in enumerate(pk.levels, start=1):
        kept = [o for o in lvl if id(o) not in remove]
        if i == add_level:
            kept.extend(new)
        levels.append(tuple(kept))
    out = OrchardPacking(pk.host, pk.schedule, tuple(levels))
    problems = packing_problems(out)
    if problems:
        raise InvalidInput("move breaks the packing: " + problems[0])
    return out


@dataclass(frozen=True)
class MergeMove:
    """Replace orchards a (level i) and b by 2^m orchards at level i + 1."""
    a: int
    b: int
    replacements: tuple
    kind = "merge"


@dataclass(frozen=True)
class PathMove:
    """Replace the touched orchards by ω(1)-vertex pieces of a long path."""
    path: tuple
    touched: tuple
    kind = "path"


def apply_merge_move(pk, a, b, replacements):
    i, ra = pk.level_of(a)
    j, rb = pk.level_of(b)
    m = pk.schedule.m
    if a == b:
        raise InvalidInput("a merge needs two distinct orchards")
    if i >= m:
        raise InvalidInput(f"orchard {a} is already at the top level {m}")
    if len(replacements) != 2 ** m:
        raise InvalidInput(f"need {2 ** m} replacement orchards, got {len(replacements)}")
    room = ra.vertices() | rb.vertices() | (frozenset(range(pk.host.n)) - pk.vertices())
    for o in replacements:
        if not o.vertices() <= room:
            raise InvalidInput("replacement orchard leaves G[V(R) + V(R') + free vertices]")
    return _replace(pk, {id(ra), id(rb)}, i + 1, tuple(replacements))


def apply_path_move(pk, path, touched):
    path = tuple(path)
    w1 = pk.schedule.w(1)
    q = len(set(touched))
    pieces = q * 2 ** (pk.schedule.m + 1) if q else 1
    if len(path) < pieces * w1:
        raise InvalidInput(f"path too short: {len(path)} < {pieces * w1}")
    g = pk.host
    if len(set(path)) != len(path) or any(not g.has_edge(u, v) for u, v in zip(path, path[1:])):
        raise InvalidInput("not a path of the host graph")
    drop = set()
    for k, _, o in pk.orchards():
        if k in touched:
            drop.add(id(o))
        elif o.vertices() & set(path):
            raise InvalidInput(f"path meets untouched orchard {k}")
    new = tuple(path_orchard(g, path[t * w1:(t + 1) * w1]) for t in range(pieces))
    return _replace(pk, drop, 1, new)


def apply_move(pk, move):
    if isinstance(move, MergeMove):
        return apply_merge_move(pk, move.a, move.b, move.replacements)
    return apply_path_move(pk, move.path, move.touched)


# ------------------------------------------------------------------ bounded models

def path_threshold(pk, q):
    w1 = pk.schedule.w(1)
    return w1 if q == 0 else q * 2 ** (pk.schedule.m + 1) * w1


def extract_bounded_model(g, pk, z, h, model=None, budget=DEFAULT_BUDGET):
    """A small h-model in G[z], or a PathMove when a long path turns up.

    Each edge xy of h is routed from a root of M_x to a root of M_y through
    shortest paths inside the two branch sets; the model keeps only those
    routes.  Every route is a path of G[z], so a route on at least the move
    threshold of vertices is handed back as an improvement instead.
    """
    z = frozenset(z)
    touched = tuple(k for k, _, o in pk.orchards() if o.vertices() & z)
    limit = path_threshold(pk, len(touched))
    if model is None:
        model = find_h_model(g, h, budget=budget, allowed=z)
        if model is None:
            raise InvalidInput("G[z] has no h-model")
    elif not model.vertices() <= z:
        raise InvalidInput("model leaves z")
    sets = [set(s) for s in model.branch_sets]
    roots = [min(s) for s in sets]
    keep = [{r} for r in roots]
    for x, y in h.edges():
        route = _route(g, sets[x], sets[y], roots[x], roots[y])
        if len(route) >= limit:
            return PathMove(tuple(route[:limit]), touched)
        for v in route:
            (keep[x] if v in sets[x] else keep[y]).add(v)
    out = MinorModel.of(keep)
    bad = check_model(g, h, out)
    assert bad is None, bad
    return out


def _route(g, mx, my, rx, ry):
    best = None
    dist_x = _bfs_tree(g, rx, mx)
    dist_y = _bfs_tree(g, ry, my)
    for a in sorted(mx):
        for b in sorted(g.adj(a)):
            if b in my:
                cost = dist_x[a][0] + dist_y[b][0]
                if best is None or cost < best[0]:
                    best = (cost, a, b)
    _, a, b = best
    return _unwind(dist_x, a)[::-1] + _unwind(dist_y, b)


def _bfs_tree(g, root, allowed):
    info = {root: (0, None)}
    frontier = [root]
    while frontier:
        nxt = []
        for v in frontier:
            for u in sorted(g.adj(v)):
                if u in allowed and u not in info:
                    info[u] = (info[v][0] + 1, v)
                    nxt.append(u)
        frontier = nxt
    return info


def _unwind(info, v):
    out = [v]
    while info[out[-1]][1] is not None:
        out.append(info[out[-1]][1])
    return out
