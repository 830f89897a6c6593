"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the three hot simulator kernels on workloads shaped like a real drop of
the pico scenario (127 cells, ~100 users, 4 antennas) and like the macro
scenario (heavier per-cell ZF), reporting per-call times for both backends.

Usage: python benchmarks/bench_kernels.py [--repeat 200]
"""

import argparse
import importlib
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))


def _load_backend(name: str):
    os.environ["CACHENET_BACKEND"] = name
    import cachenet._kernels as k

    importlib.reload(k)
    return k


def _workload(rng, n_cells, antennas, mean_streams):
    counts = np.maximum(1, rng.poisson(mean_streams, n_cells)).astype(np.int64)
    counts = np.minimum(counts, antennas)
    starts = np.concatenate(([0], np.cumsum(counts[:-1]))).astype(np.int64)
    total = int(counts.sum())
    h = (rng.standard_normal((total, antennas)) + 1j * rng.standard_normal((total, antennas))) / np.sqrt(2)
    n_vic = max(1, int(counts[0]))
    hx = (rng.standard_normal((n_vic, n_cells, antennas)) + 1j * rng.standard_normal((n_vic, n_cells, antennas))) / np.sqrt(2)
    cell_of_stream = np.repeat(np.arange(n_cells), counts).astype(np.int64)
    inv_streams = 1.0 / counts.astype(np.float64)
    rel_gain = rng.uniform(0.1, 1.0, (n_vic, n_cells)) * 40.0 ** (-3.67)
    rel_gain[:, 0] = 0.0
    dist = rng.uniform(10.0, 250.0, (n_vic, n_cells))
    fading = rng.standard_exponential((n_vic, n_cells))
    return dict(
        h=h, starts=starts, counts=counts, hx=hx, cell_of_stream=cell_of_stream,
        inv_streams=inv_streams, rel_gain=rel_gain, dist=dist, fading=fading,
    )


def _time(fn, repeat):
    fn()  # warm-up (numba compiles here)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    cases = {
        "pico-like (127 cells, 4 antennas)": _workload(rng, 127, 4, 0.8),
        "macro-like (127 cells, 148 antennas)": _workload(rng, 127, 148, 30.0),
    }

    results = {}
    for backend in ("numpy", "numba"):
        k = _load_backend(backend)
        if k.BACKEND != backend:
            print(f"backend {backend} unavailable, got {k.BACKEND}; skipping")
            continue
        for case, w in cases.items():
            zf = lambda: k.zf_precode(w["h"], w["starts"], w["counts"])
            wv, _ = k.zf_precode(w["h"], w["starts"], w["counts"])
            ip = lambda: k.interference_power(
                w["hx"], wv, w["cell_of_stream"], w["inv_streams"], w["rel_gain"]
            )
            ls = lambda: k.log2_interference_sum(w["dist"], w["fading"], 3.67)
            for kernel, fn in (("zf_precode", zf), ("interference_power", ip), ("log2_interference_sum", ls)):
                results[(case, kernel, backend)] = _time(fn, args.repeat)

    print(f"{'case':<38}{'kernel':<24}{'numpy':>12}{'numba':>12}{'speedup':>9}")
    for case in cases:
        for kernel in ("zf_precode", "interference_power", "log2_interference_sum"):
            t_np = results.get((case, kernel, "numpy"))
            t_nb = results.get((case, kernel, "numba"))
            cols = f"{case:<38}{kernel:<24}"
            cols += f"{t_np * 1e6:>10.1f}us" if t_np else f"{'-':>12}"
            cols += f"{t_nb * 1e6:>10.1f}us" if t_nb else f"{'-':>12}"
            if t_np and t_nb:
                cols += f"{t_np / t_nb:>8.1f}x"
            print(cols)


if __name__ == "__main__":
    main()
