"""Compiled kernels vs. the interpreted fallback.

Each mode runs in its own interpreter because ORCHARDKIT_NO_NUMBA is read
at import time.  Both modes must agree on every answer.

    python3 benchmarks/bench_kernels.py [--quick]
"""
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
from orchardkit import kernels
from orchardkit.generators import gnp, grid, _rng
from orchardkit.oracles import (complete_graph, erdos_szekeres_batch, nu_exact, tau_exact,
                                treewidth_exact)

quick = sys.argv[1] == "1"
rng = _rng(7)
graphs = [gnp(n, 0.4, rng) for n in ([10, 12] if quick else [12, 14, 16])]
graphs.append(grid(3, 4) if quick else grid(4, 4))
k3 = complete_graph(3)

def timed(fn):
    fn(graphs[0])  # warm-up, includes JIT compilation
    t = time.perf_counter()
    out = [fn(g) for g in graphs]
    return out, time.perf_counter() - t

rows = {}
for name, fn in [("treewidth", treewidth_exact),
                 ("tau_k3", lambda g: tau_exact(g, k3)[0]),
                 ("nu_k3", lambda g: nu_exact(g, k3))]:
    out, secs = timed(fn)
    rows[name] = {"answers": out, "seconds": secs}
perms = np.array([rng.permutation(10) for _ in range(2000 if quick else 20000)])
erdos_szekeres_batch(perms[:2], 4, 4)
t = time.perf_counter()
tags, idx = erdos_szekeres_batch(perms, 4, 4)
rows["es_batch"] = {"answers": [np.bincount(tags, minlength=3).tolist(), int(idx.sum())],
                    "seconds": time.perf_counter() - t}
print(json.dumps({"numba": kernels.USE_NUMBA, "rows": rows}))
"""


def run(mode, quick):
    env = dict(os.environ)
    if mode == "numpy":
        env["ORCHARDKIT_NO_NUMBA"] = "1"
    else:
        env.pop("ORCHARDKIT_NO_NUMBA", None)
    res = subprocess.run([sys.executable, "-c", WORKLOAD, "1" if quick else "0"],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    quick = "--quick" in argv
    fast, slow = run("numba", quick), run("numpy", quick)
    print(f"{'kernel':<12}{'numba s':>10}{'fallback s':>12}{'speedup':>10}  agree")
    agree = True
    for name, row in fast["rows"].items():
        other = slow["rows"][name]
        same = row["answers"] == other["answers"]
        agree &= same
        speed = other["seconds"] / max(row["seconds"], 1e-9)
        print(f"{name:<12}{row['seconds']:>10.4f}{other['seconds']:>12.4f}{speed:>9.1f}x  {same}")
    if not fast["numba"]:
        print("numba unavailable: both columns ran interpreted")
    return 0 if agree else 1


if __name__ == "__main__":
    sys.exit(main())
