"""Time the compiled and the vectorized numpy trajectory kernels on the same ensemble.

    python3 benchmarks/bench_unravel.py [--samples N] [--t T] [--model NAME]

Both backends consume identical random streams, so the script also checks
that they return the same entropy-rate samples.
"""
import argparse
import time

import numpy as np

from qdsfluct import corpus
from qdsfluct.unravel import sample_ensemble


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--t", type=float, default=20.0)
    p.add_argument("--model", default="qubit2r")
    p.add_argument("--seed", type=int, default=1)
    a = p.parse_args()

    model = corpus.load(a.model)
    rho = np.eye(model.dim) / model.dim
    # warm-up compiles (or loads cached) numba code outside the timed region
    sample_ensemble(model, rho, 1.0, 8, a.seed, backend="numba")

    fast, t_numba = timed(lambda: sample_ensemble(model, rho, a.t, a.samples, a.seed, backend="numba"))
    slow, t_numpy = timed(lambda: sample_ensemble(model, rho, a.t, a.samples, a.seed, backend="numpy"))
    same = np.array_equal(fast.counts, slow.counts) and np.allclose(fast.samples, slow.samples, atol=1e-12)
    events = int(fast.counts.sum())
    print(f"model={a.model} N={a.samples} t={a.t} events={events}")
    print(f"numba  {t_numba:8.3f} s  {events / t_numba:12.0f} events/s")
    print(f"numpy  {t_numpy:8.3f} s  {events / t_numpy:12.0f} events/s")
    print(f"speedup {t_numpy / t_numba:.2f}x, identical samples: {same}")


if __name__ == "__main__":
    main()
