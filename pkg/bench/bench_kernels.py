"""Benchmark the Fourier-transform kernels (numba vs numpy backends) and
the two background engines.

The kernel backend is fixed at import time by XASKIT_NO_NUMBA, so the
script re-runs itself in a subprocess for each backend.

Usage: python3 bench/bench_kernels.py
"""
import json
import os
import subprocess
import sys
import time

import numpy as np


def bench_kernels(repeats=5):
    from xaskit._kernels import BACKEND, ft_forward, ft_inverse

    rng = np.random.default_rng(0)
    k = np.linspace(0.0, 14.0, 2801)
    chi_w = rng.normal(size=k.size)
    r = np.arange(0.0, 8.0 + 1e-9, np.pi / (2.0 * 8.0 * 14.0))
    values = rng.normal(size=r.size) + 1j * rng.normal(size=r.size)

    ft_forward(chi_w, k, r, 0.005)       # warm-up / jit compile
    ft_inverse(values, r, k, 0.01)

    t0 = time.perf_counter()
    for _ in range(repeats):
        ft_forward(chi_w, k, r, 0.005)
    fwd = (time.perf_counter() - t0) / repeats

    t0 = time.perf_counter()
    for _ in range(repeats):
        ft_inverse(values, r, k, 0.01)
    inv = (time.perf_counter() - t0) / repeats
    return {"backend": BACKEND, "forward_ms": 1e3 * fwd, "inverse_ms": 1e3 * inv,
            "n_k": k.size, "n_r": r.size}


def bench_engines():
    sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))
    from conftest import synthetic_exafs
    from xaskit.background import (fit_poly_background, fit_spline_background,
                                   refine_knots)

    spectrum, truth = synthetic_exafs(n_post=900)
    e0 = truth["e0"]

    t0 = time.perf_counter()
    for _ in range(20):
        fit_poly_background(spectrum, e0)
    poly = (time.perf_counter() - t0) / 20

    t0 = time.perf_counter()
    seed = fit_spline_background(spectrum, e0, r_bkg=0.5)
    refine_knots(spectrum, e0, seed, edge_step=truth["edge_step"])
    spline = time.perf_counter() - t0
    return {"poly_ms": 1e3 * poly, "spline_refine_ms": 1e3 * spline,
            "ratio": spline / poly}


def main():
    if len(sys.argv) > 1 and sys.argv[1] == "--kernels-only":
        print(json.dumps(bench_kernels()))
        return

    results = []
    for no_numba in ("0", "1"):
        env = dict(os.environ, XASKIT_NO_NUMBA=no_numba)
        out = subprocess.run([sys.executable, __file__, "--kernels-only"],
                             env=env, capture_output=True, text=True,
                             check=True)
        results.append(json.loads(out.stdout.splitlines()[-1]))

    print(f"FT kernels ({results[0]['n_k']} k-samples x "
          f"{results[0]['n_r']} r-samples):")
    for res in results:
        print(f"  {res['backend']:>5}: forward {res['forward_ms']:8.2f} ms  "
              f"inverse {res['inverse_ms']:8.2f} ms")
    speedup = results[1]["forward_ms"] / results[0]["forward_ms"]
    print(f"  forward speedup numba/numpy: {speedup:.1f}x")

    eng = bench_engines()
    print("Background engines (1000-point spectrum):")
    print(f"  poly          {eng['poly_ms']:8.2f} ms")
    print(f"  spline+refine {eng['spline_refine_ms']:8.2f} ms")
    print(f"  ratio {eng['ratio']:.0f}x")


if __name__ == "__main__":
    main()
