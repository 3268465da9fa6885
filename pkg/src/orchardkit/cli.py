"""Command-line entry point: ``orchardkit <group> <action> [flags]``.

Every command builds a RunReport, re-checks its witness, and prints it as
text or JSON.  Exit status: 0 for any mathematical outcome, 2 when a search
budget runs out, 1 for usage, input and I/O errors.
"""
import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from . import generators as gen
from .engine import SeparationOut, SmallCliqueModel, SmallHModel, main_engine
from .errors import BudgetExceeded, InvalidBramble, InvalidInput, OrchardKitError
from .graph import components, format_graph, is_connected, is_separation, parse_graph
from .oracles import (DEFAULT_BUDGET, bramble_order_exact, check_bramble,
                      check_model, complete_graph, erdos_szekeres, find_bramble, find_h_model,
                      find_mod_m_cycle, max_bramble_order, nu_packing, tau_exact,
                      treewidth_exact)
from .orchards import (check_myriapod, is_tame, myriapod_cover, orchard_bramble,
                       orchard_from_json, orchard_to_json, require_valid, sections,
                       tame_suborchard, validate_orchard, vertical_section_counts)
from .packing import EngineConfig
from .pipeline import approx_pack_cover, verify_bookkeeping
from .separation import (BrambleFound, ComponentCutset, ManyOrchards, ReachCutset, SeesCutset,
                         Thresholds, component_section_counts, reached_sections,
                         separate_full, separate_orchards, separate_reach,
                         separate_section)

SCHEMA = "orchardkit.run-report/1"
WITNESS_CHECK_LIMIT = 10  # exhaustive bramble confirmation for tw


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------------ inputs

def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _fmt_for(path, fmt):
    if fmt:
        return fmt
    return "dot" if str(path).endswith((".dot", ".gv")) else "edge-list"


def _load_graph(path, fmt=None):
    return parse_graph(_read(path), _fmt_for(path, fmt))


def _need_graph(args):
    if not args.graph:
        raise UsageError("--graph is required")
    return _load_graph(args.graph, args.format)


def _load_h(args):
    return _load_graph(args.h, args.format) if args.h else complete_graph(3)


def _thresholds(args):
    if not args.override_thresholds:
        return Thresholds()
    try:
        data = json.loads(_read(args.override_thresholds))
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"threshold file is not JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidInput("threshold file must hold a JSON object")
    return Thresholds.of(**data)


def _vertex_index(g):
    if g.labels is None:
        return None
    return {lab: k for k, lab in enumerate(g.labels)}


def _map_vertices(obj, index):
    """Translate labels in an orchard or bramble file to dense vertex ids."""
    if index is None:
        return obj
    if isinstance(obj, dict):
        return {k: _map_vertices(v, index) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_map_vertices(v, index) for v in obj]
    key = str(obj)
    if key not in index:
        raise InvalidInput(f"unknown vertex {key!r}")
    return index[key]


def _load_orchard(path, g):
    try:
        data = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"orchard file is not JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidInput("orchard file must hold a JSON object")
    data = {"paths": _map_vertices(data.get("paths"), _vertex_index(g)),
            "trees": [{"vertices": _map_vertices(t.get("vertices", []), _vertex_index(g)),
                       "edges": _map_vertices(t.get("edges", []), _vertex_index(g))}
                      if isinstance(t, dict) else _map_vertices(t, _vertex_index(g))
                      for t in data.get("trees") or []]}
    return orchard_from_json(data, g)


def _need_orchard(args, g, attr="orchard"):
    path = getattr(args, attr)
    if not path:
        raise UsageError(f"--{attr} is required")
    return _load_orchard(path, g)


def _ints(text, what):
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"{what} must be a list of integers") from exc


def _labels(g, vs):
    return [g.label(v) for v in sorted(vs)]


def _relabel(g, obj):
    """Vertex ids nested in lists become the graph file's labels."""
    if isinstance(obj, list):
        return [_relabel(g, x) for x in obj]
    if isinstance(obj, dict):
        return {k: _relabel(g, v) for k, v in obj.items()}
    return g.label(obj)


def _relabel_fields(g, wit, keys):
    return {k: _relabel(g, v) if k in keys else v for k, v in wit.items()}


# ------------------------------------------------------------------ oracle

def _oracle(args):
    action = args.action
    if action == "es":
        if args.seq is None:
            raise UsageError("--seq is required")
        seq = _ints(args.seq, "--seq")
        res = erdos_szekeres(seq, args.p, args.q)
        ok = _monotone_ok(seq, res, args.p, args.q)
        return (res.tag, {"subsequence": list(res.subsequence), "indices": list(res.indices)},
                {"monotone": ok}, res.tag)
    g = _need_graph(args)
    if action == "tw":
        tw = treewidth_exact(g)
        ver = {"bramble_order_confirmed": "skipped"}
        if g.n <= WITNESS_CHECK_LIMIT:
            br = find_bramble(g, tw + 1, args.budget)
            ver["bramble_order_confirmed"] = br is not None and (
                bramble_order_exact(g, br) >= tw + 1)
        return "treewidth", {"value": tw}, ver, tw
    if action == "bramble-order":
        if args.bramble:
            sets = json.loads(_read(args.bramble))
            sets = [frozenset(s) for s in _map_vertices(sets, _vertex_index(g))]
            try:
                order = bramble_order_exact(g, sets)
            except InvalidBramble as exc:
                return "invalid-bramble", {"reason": str(exc), "pair": list(exc.pair or ())}, {}, "invalid"
            return "bramble-order", {"value": order}, {"bramble_valid": True}, order
        best = max_bramble_order(g, args.budget)
        br = find_bramble(g, best, args.budget) if best else []
        ok = best == 0 or (br is not None and bramble_order_exact(g, br) >= best)
        return ("bramble-order", {"value": best, "bramble": [_labels(g, s) for s in br or []]},
                {"bramble_valid": ok}, best)
    if action == "modm":
        cyc = find_mod_m_cycle(g, args.m, args.budget)
        if cyc is None:
            return "no-cycle", {"m": args.m}, {}, "none"
        ok = (len(set(cyc)) == len(cyc) >= 3 and len(cyc) % args.m == 0
              and all(g.has_edge(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))))
        return ("cycle", {"m": args.m, "length": len(cyc), "cycle": [g.label(v) for v in cyc]},
                {"cycle_valid": ok}, len(cyc))
    h = _load_h(args)
    if action == "model":
        model = find_h_model(g, h, budget=args.budget)
        if model is None:
            return "no-model", {}, {}, "none"
        ok = check_model(g, h, model) is None
        return ("model", {"size": model.size,
                          "branch_sets": [_labels(g, b) for b in model.branch_sets]},
                {"model_valid": ok}, model.size)
    if action == "nu":
        pack = nu_packing(g, h, args.budget)
        used, ok = set(), True
        for mdl in pack:
            ok = ok and check_model(g, h, mdl) is None and not (used & mdl.vertices())
            used |= mdl.vertices()
        return ("nu", {"value": len(pack),
                       "packing": [[_labels(g, b) for b in mdl.branch_sets] for mdl in pack]},
                {"packing_valid": ok}, len(pack))
    if action == "tau":
        k, X = tau_exact(g, h, args.budget)
        rest = frozenset(range(g.n)) - X
        ok = find_h_model(g, h, budget=args.budget, allowed=rest) is None
        return "tau", {"value": k, "hitting_set": _labels(g, X)}, {"cover_valid": ok}, k
    raise UsageError(f"unknown oracle {action!r}")


def _monotone_ok(seq, res, p, q):
    if res.tag == "too-short":
        return len(seq) <= (p - 1) * (q - 1)
    idx = res.indices
    want = p if res.tag == "increasing" else q
    sign = 1 if res.tag == "increasing" else -1
    return (len(idx) == want and list(idx) == sorted(set(idx))
            and all(sign * (seq[b] - seq[a]) > 0 for a, b in zip(idx, idx[1:])))


# ------------------------------------------------------------------ orchard

def _orchard(args):
    g = _need_graph(args)
    o = _need_orchard(args, g)
    action = args.action
    if action == "validate":
        rep = validate_orchard(o)
        tag = "valid" if rep.ok else "invalid"
        return tag, rep.to_json() | {"a": o.a, "b": o.b}, {"recomputed": rep.ok == validate_orchard(o).ok}, tag
    require_valid(o)
    if action == "sections":
        secs = sections(o)
        covered = [v for s in secs for v in s.vertices]
        ok = len(covered) == len(set(covered)) and set(covered) == o.vertices()
        counts = vertical_section_counts(o, secs)
        return ("sections", {"count": len(secs), "vertical_per_tree": list(counts),
                             "sections": [{"kind": s.kind, "vertices": [g.label(v) for v in s.vertices],
                                           "provenance": list(s.provenance)} for s in secs]},
                {"partition": ok}, len(secs))
    if action == "myriapods":
        cover = myriapod_cover(o)
        ok = all(check_myriapod(m) is None for m in cover) and len(cover) <= o.a ** 2
        union = set().union(*(m.vertices() for m in cover))
        ok = ok and union == set(o.vertices())
        return ("myriapods", {"count": len(cover),
                              "spines": [m.spine_index for m in cover]},
                {"myriapods_valid": ok}, len(cover))
    if action == "tame":
        sub = tame_suborchard(o, args.b)
        ok = validate_orchard(sub).ok and is_tame(sub)
        return ("tame", {"a": sub.a, "b": sub.b, "orchard": _relabel(g, orchard_to_json(sub))},
                {"tame": ok}, sub.b)
    if action == "bramble":
        br = orchard_bramble(o)
        try:
            check_bramble(g, br)
            ok = True
        except InvalidBramble:
            ok = False
        wit = {"sets": len(br)}
        ver = {"bramble_valid": ok}
        if g.n <= 60:
            wit["order"] = bramble_order_exact(g, br)
        return "bramble", wit, ver, len(br)
    raise UsageError(f"unknown orchard action {action!r}")


# ------------------------------------------------------------------ lemma

def _lemma(args):
    g = _need_graph(args)
    r = _need_orchard(args, g)
    th = _thresholds(args)
    c, m = args.c, args.m
    bounds = th.at(c, m)
    if args.action == "sep57":
        secs = sections(r)
        if not 0 <= args.section < len(secs):
            raise InvalidInput(f"section index {args.section} outside 0..{len(secs) - 1}")
        out = separate_section(g, r, secs[args.section], c, m, th)
        r2_vs = frozenset(secs[args.section].vertices)
        own = {args.section}
    else:
        r2 = _need_orchard(args, g, "orchard2")
        run = {"sep55": separate_orchards, "sep56": separate_reach, "sep58": separate_full}
        out = run[args.action](g, r, r2, c, m, th)
        r2_vs = r2.vertices()
        own = set()
    ver = _check_lemma_outcome(g, r, r2_vs, own, out, bounds, c, args.action)
    return out.tag, _relabel_fields(g, _safe(out.summary()), {"X"}), ver, out.tag


def _check_lemma_outcome(g, r, r2_vs, own, out, bounds, c, lemma):
    if isinstance(out, ManyOrchards):
        used, ok = set(), True
        for o in out.orchards:
            ok = ok and validate_orchard(o).ok and o.b >= c and not (used & o.vertices())
            used |= o.vertices()
        ok = ok and (r.vertices() | r2_vs) >= used
        return {"orchards_valid": ok}
    if isinstance(out, BrambleFound):
        try:
            check_bramble(g, out.bramble)
            ok = True
        except InvalidBramble:
            ok = False
        return {"bramble_valid": ok, "order_confirmed": out.order is not None}
    X = out.X
    ver = {"X_size": len(X)}
    owner = {v: k for k, s in enumerate(sections(r)) for v in s.vertices}
    if isinstance(out, SeesCutset):
        seen = {owner[u] for v in r2_vs - X for u in g.adj(v) if u in owner and u not in X}
        ver["recount_ok"] = seen <= set(out.seen_sections)
        ver["X_bound"] = len(X) <= bounds.f_sep
    elif isinstance(out, ReachCutset):
        reached = set(reached_sections(g, r2_vs - X, owner, X)) - own
        ver["recount_ok"] = reached <= set(out.reached_sections)
        limit = bounds.five if lemma == "sep57" else bounds.f_sep + bounds.g_sep
        ver["X_bound"] = len(X) <= limit
    elif isinstance(out, ComponentCutset):
        counts = component_section_counts(g, X, owner, r2_vs)
        ver["recount_ok"] = max(counts, default=0) <= max(out.counts, default=0)
        ver["X_bound"] = len(X) <= bounds.f_58
    ver["within_bound"] = out.within_bound
    return ver


# ------------------------------------------------------------------ engine / pipeline

def _engine(args):
    g = _need_graph(args)
    h = _load_h(args)
    kw = {"m": args.m, "thresholds": _thresholds(args), "budget": args.budget}
    if args.omega:
        kw["omega"] = tuple(_ints(args.omega, "--omega"))
    cfg = EngineConfig.for_h(h, **kw)
    res = main_engine(g, h, cfg)
    out = res.outcome
    wit = _relabel_fields(g, _safe(out.summary()), {"model", "A", "B"}) | {"restarts": res.restarts, "packing": res.packing.summary()}
    if args.trace:
        wit["trace"] = res.trace
    ver = {"restarts_within_limit": res.restarts <= 2 ** cfg.m * max(g.n, 1)}
    if isinstance(out, (SmallHModel, SmallCliqueModel)):
        target = h if isinstance(out, SmallHModel) else complete_graph(cfg.p)
        ver["model_valid"] = check_model(g, target, out.model) is None
    elif isinstance(out, SeparationOut):
        A = out.separation.side_a
        ver["separation_valid"] = is_separation(g, out.separation)
        ver["A_h_minor_free"] = find_h_model(g, h, budget=args.budget, allowed=A) is None
        ver["A_large"] = len(A) >= cfg.g(out.order)
    return out.tag, wit, ver, out.tag


def _pipeline(args):
    g = _need_graph(args)
    h = _load_h(args)
    kw = {"m": args.m, "thresholds": _thresholds(args), "budget": args.budget}
    cfg = EngineConfig.for_h(h, **kw) if not len(components(h)) > 1 else None
    res = approx_pack_cover(g, h, cfg, reducer=args.reducer, budget=args.budget)
    ver = verify_bookkeeping(res, g, h, args.budget)
    ver = {k: v for k, v in ver.items() if k != "chain"} | {"chain_ok": ver["chain"]["ok"]}
    wit = res.to_json()
    wit["hitting_set"] = _labels(g, res.hitting_set)
    wit["packing"] = [[_labels(g, b) for b in mdl.branch_sets] for mdl in res.packing]
    return "pack-cover", wit, ver, res.k


# ------------------------------------------------------------------ gen

def _gen(args):
    p = {}
    for key in ("r", "c", "n", "d", "girth", "extra"):
        val = getattr(args, key)
        if val is not None:
            p[key] = val
    if args.p is not None:
        p["p"] = args.p
    kind = args.kind
    if kind == "subdivision":
        base = gen.GeneratorSpec(args.base, {k: v for k, v in p.items() if k != "extra"}, args.seed)
        spec = gen.GeneratorSpec(kind, {"base": base, "extra": p.get("extra", 1)}, args.seed)
    elif kind == "union":
        part = gen.GeneratorSpec(args.base, p, args.seed)
        spec = gen.GeneratorSpec(kind, {"parts": [part] * args.copies}, args.seed)
    else:
        spec = gen.GeneratorSpec(kind, p, args.seed)
    g = gen.generate(spec)
    fmt = "dot" if args.out and args.out.endswith((".dot", ".gv")) else "edge-list"
    text = format_graph(g, fmt)
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc.strerror}") from exc
    ver = {"roundtrip": parse_graph(text, fmt).m == g.m}
    wit = {"n": g.n, "m": g.m, "connected": is_connected(g, range(g.n)) if g.n else True}
    if not args.out:
        wit["graph"] = text
    return "graph", wit, ver, f"{g.n} {g.m}"


# ------------------------------------------------------------------ reports

def _safe(obj):
    """Replace ints too large for readable JSON by a bit-length marker."""
    if isinstance(obj, dict):
        return {k: _safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_safe(v) for v in obj]
    if isinstance(obj, int) and not isinstance(obj, bool) and obj.bit_length() > 63:
        return {"bits": obj.bit_length()}
    return obj


def _digest(argv, args):
    h = hashlib.sha256()
    h.update(json.dumps([a for a in argv if a not in ("--json", "--no-timing")]).encode())
    for attr in ("graph", "h", "orchard", "orchard2", "override_thresholds", "bramble"):
        path = getattr(args, attr, None)
        if path:
            h.update(_read(path).encode())
    return h.hexdigest()


def run_report(argv, args, tag, witness, verification, elapsed):
    rep = {"schema": SCHEMA, "command": list(argv), "config_digest": _digest(argv, args),
           "outcome": tag, "witness": witness, "verification": verification}
    if not args.no_timing:
        rep["timing"] = {"seconds": round(elapsed, 6)}
    return rep


def _emit(rep, headline, as_json, stream):
    if as_json:
        stream.write(json.dumps(rep, indent=2) + "\n")
        return
    stream.write(f"{headline}\n")
    stream.write(f"outcome: {rep['outcome']}\n")
    for k, v in rep["witness"].items():
        if k == "graph":
            continue
        stream.write(f"{k}: {json.dumps(v)}\n")
    for k, v in rep["verification"].items():
        stream.write(f"check {k}: {json.dumps(v)}\n")
    if "timing" in rep:
        stream.write(f"seconds: {rep['timing']['seconds']}\n")
    if "graph" in rep["witness"]:
        stream.write(rep["witness"]["graph"])


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--graph")
    common.add_argument("--h", help="pattern graph (default K_3)")
    common.add_argument("--format", choices=["edge-list", "dot"])
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--override-thresholds", metavar="FILE")
    common.add_argument("--json", action="store_true")
    common.add_argument("--no-timing", action="store_true")

    top = _Parser(prog="orchardkit", description="Orchard packings and H-minor Erdos-Posa tools.")
    groups = top.add_subparsers(dest="group", required=True, parser_class=_Parser)

    orc = groups.add_parser("oracle", help="exact oracles").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    for name in ("nu", "tau", "tw", "model", "bramble-order", "es", "modm"):
        sp = orc.add_parser(name, parents=[common])
        if name == "bramble-order":
            sp.add_argument("--bramble", metavar="FILE", help="JSON list of vertex lists")
        if name == "es":
            sp.add_argument("--seq")
            sp.add_argument("--p", type=int, default=3)
            sp.add_argument("--q", type=int, default=3)
        if name == "modm":
            sp.add_argument("--m", type=int, default=3)

    orch = groups.add_parser("orchard", help="orchard tools").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    for name in ("validate", "sections", "myriapods", "tame", "bramble"):
        sp = orch.add_parser(name, parents=[common])
        sp.add_argument("--orchard", metavar="FILE")
        if name == "tame":
            sp.add_argument("--b", type=int, default=2)

    lem = groups.add_parser("lemma", help="separation lemmas").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    for name in ("sep55", "sep56", "sep57", "sep58"):
        sp = lem.add_parser(name, parents=[common])
        sp.add_argument("--orchard", metavar="FILE")
        sp.add_argument("--c", type=int, default=1)
        sp.add_argument("--m", type=int, default=2)
        if name == "sep57":
            sp.add_argument("--section", type=int, default=0)
        else:
            sp.add_argument("--orchard2", metavar="FILE")

    eng = groups.add_parser("engine", help="packing engine").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    sp = eng.add_parser("run", parents=[common])
    sp.add_argument("--m", type=int, default=3)
    sp.add_argument("--omega", help="explicit omega table, e.g. 9,4,3")
    sp.add_argument("--trace", action="store_true")

    pip = groups.add_parser("pipeline", help="approximate packing and covering").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    sp = pip.add_parser("run", parents=[common])
    sp.add_argument("--m", type=int, default=3)
    sp.add_argument("--report", choices=["json", "text"], default="text")
    sp.add_argument("--reducer", choices=["greedy", "none"], default="greedy")

    sp = groups.add_parser("gen", parents=[common], help="graph generators")
    sp.add_argument("--kind", required=True, choices=gen.KINDS)
    for key in ("r", "c", "n", "d", "girth", "extra"):
        sp.add_argument(f"--{key}", type=int)
    sp.add_argument("--p", type=float, help="edge probability for gnp")
    sp.add_argument("--base", default="clique", help="base kind for subdivision/union")
    sp.add_argument("--copies", type=int, default=2)
    sp.add_argument("--out")
    return top


HANDLERS = {"oracle": _oracle, "orchard": _orchard, "lemma": _lemma,
            "engine": _engine, "pipeline": _pipeline, "gen": _gen}


def main(argv=None, stdout=None, stderr=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.group == "pipeline" and args.report == "json":
            args.json = True
        start = time.perf_counter()
        tag, witness, verification, headline = HANDLERS[args.group](args)
        rep = run_report(argv, args, tag, witness, verification, time.perf_counter() - start)
    except UsageError as exc:
        stderr.write(f"error: {exc}\n")
        return 1
    except BudgetExceeded as exc:
        stderr.write(f"budget exhausted: {exc}\n")
        return 2
    except (OrchardKitError, OSError, RecursionError) as exc:
        stderr.write(f"error: {exc}\n")
        return 1
    _emit(rep, headline, args.json, stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
