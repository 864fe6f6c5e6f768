"""Builds the extension module, imports it, and checks it against numpy.

Usage: python3 python/smoke_test.py [--no-build]
"""

import argparse
import itertools
import os
import random
import shutil
import subprocess
import sys
import tempfile

import numpy as np

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build_module(skip_build):
    if not skip_build:
        subprocess.run(
            ["cargo", "build", "--release", "-p", "bdindex-py", "--features", "extension-module"],
            cwd=ROOT,
            check=True,
        )
    lib = os.path.join(ROOT, "target", "release", "libpybdindex.so")
    if not os.path.exists(lib):
        sys.exit(f"missing {lib}; build it first")
    out = tempfile.mkdtemp(prefix="pybdindex-")
    shutil.copy(lib, os.path.join(out, "pybdindex.so"))
    sys.path.insert(0, out)
    import pybdindex

    return pybdindex, out


def numpy_bd(n, edges):
    lap = np.zeros((n, n))
    for u, w, wt in edges:
        lap[u, u] += wt
        lap[w, w] += wt
        lap[u, w] -= wt
        lap[w, u] -= wt
    pinv = np.linalg.pinv(lap)
    return lambda s, t: float(np.sum((pinv[:, s] - pinv[:, t]) ** 2))


def random_graph(n, rng):
    edges = {(rng.randrange(i), i) for i in range(1, n)}
    while len(edges) < 2 * n:
        u, w = rng.randrange(n), rng.randrange(n)
        if u != w:
            edges.add((min(u, w), max(u, w)))
    return [(u, w, rng.uniform(0.5, 3.0)) for u, w in sorted(edges)]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--no-build", action="store_true")
    args = parser.parse_args()
    bd, workdir = build_module(args.no_build)

    p3 = bd.Graph(3, [(0, 1), (1, 2)])
    for strategy in ("separator", "min-degree"):
        idx = bd.Index.build(p3, strategy)
        assert abs(idx.query(0, 1) - 2 / 3) < 1e-12
        assert abs(idx.query(0, 2) - 2.0) < 1e-12
        assert idx.query(1, 1) == 0.0
    idx = bd.Index.build(p3, "separator")
    assert (idx.height, idx.entries, idx.root) == (2, 5, 1)
    assert idx.node_label(1) == ([1.0, 1.0, 1.0], 0.0)
    assert idx.edge_centrality(p3, 1)[0][:2] == (0, 1)

    c4 = bd.Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    c4_idx = bd.Index.build(c4)
    assert abs(c4_idx.query(0, 1) - 5 / 16) < 1e-12
    assert abs(c4_idx.query(0, 2) - 0.5) < 1e-12
    assert abs(bd.pseudoinverse_bd(c4, 0, 2) - 0.5) < 1e-12
    assert abs(bd.grounded_bd(c4, 3, 0, 2) - 0.5) < 1e-12
    value, steps = bd.walk_bd(c4, 0, 1)
    assert abs(value - 5 / 16) < 1e-6 and steps > 0

    rng = random.Random(7)
    worst = 0.0
    for n in (5, 17, 40):
        edges = random_graph(n, rng)
        g = bd.Graph(n, edges)
        reference = numpy_bd(n, edges)
        for strategy in ("separator", "min-degree"):
            idx = bd.Index.build(g, strategy)
            pairs = list(itertools.combinations(range(n), 2))
            for (s, t), got in zip(pairs, idx.batch(pairs)):
                ref = reference(s, t)
                worst = max(worst, abs(got - ref) / max(1.0, ref))

    path = os.path.join(workdir, "g.bdix")
    written = idx.save(path)
    back = bd.Index.load(path)
    assert written == os.path.getsize(path)
    assert back.to_bytes() == idx.to_bytes()
    assert back.query(0, n - 1) == idx.query(0, n - 1)

    split = bd.Graph(4, [(0, 1), (2, 3)])
    for bad in (lambda: idx.query(0, 10**6), lambda: bd.Index.build(split)):
        try:
            bad()
        except (IndexError, ValueError):
            pass
        else:
            raise AssertionError("expected an error")

    print(f"pybdindex smoke test passed; max relative error vs numpy pinv {worst:.2e}")
    assert worst <= 1e-9


if __name__ == "__main__":
    main()
