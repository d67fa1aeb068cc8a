"""Compare the compiled and pure-numpy scan kernels.

    python benchmarks/bench_scan.py [--repeat 5] [--epoch]

Kernel rows time one forward and one backward scan per shape. ``--epoch`` also
times one hybrid training epoch on the default synthetic set, once per
backend, each in a fresh interpreter so the environment flag takes effect.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from locspike import _scan
from locspike._accel import HAVE_NUMBA
from locspike.response import KernelConfig, sample_kernels

SHAPES = [  # (inputs, outputs, steps)
    (16, 32, 50),
    (32, 4, 50),
    (78, 32, 325),
    (325, 32, 78),
]

EPOCH_SNIPPET = """
import time
from locspike.model import build_model
from locspike.synth import SynthSpec, generate, split
from locspike.train import TrainConfig, train
tr, te = split(generate(SynthSpec(seed=7)), 0.8, 7)
m = build_model("hybrid", 16, 50, 4, seed=7)
train(m, tr.subset([0]), TrainConfig(epochs=1))  # warm-up / compile
t0 = time.perf_counter()
train(m, tr, TrainConfig(epochs=1, seed=7))
print(time.perf_counter() - t0)
"""


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_kernels(repeat):
    cfg = KernelConfig()
    rng = np.random.default_rng(0)
    backends = {"numpy": (_scan.forward_np, _scan.backward_np)}
    if HAVE_NUMBA:
        backends["numba"] = (_scan.forward_nb, _scan.backward_nb)
    print(f"{'shape (in,out,steps)':>22} {'backend':>7} {'forward ms':>11} {'backward ms':>12}")
    for n_in, n_out, S in SHAPES:
        eps, eta = sample_kernels(cfg, S)
        W = rng.normal(0, 3, (n_out, n_in))
        x = (rng.random((n_in, S)) < 0.1).astype(np.float64)
        args = (W, eps, eta, cfg.theta, cfg.surr_alpha, cfg.surr_beta, False, x)
        for name, (fwd, bwd) in backends.items():
            _, _, u, _ = fwd(*args)  # also triggers compilation
            g = np.ones_like(u)
            bwd(u, g, eta, cfg.theta, cfg.surr_alpha, cfg.surr_beta)
            tf = _best(lambda: fwd(*args), repeat)
            tb = _best(lambda: bwd(u, g, eta, cfg.theta, cfg.surr_alpha, cfg.surr_beta), repeat)
            print(f"{str((n_in, n_out, S)):>22} {name:>7} {tf * 1e3:11.3f} {tb * 1e3:12.3f}")


def bench_epoch():
    for name, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, LOCSPIKE_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", EPOCH_SNIPPET], env=env,
                             capture_output=True, text=True, check=True)
        print(f"hybrid epoch ({name}): {float(out.stdout.strip()):.3f} s")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--epoch", action="store_true", help="also time a full training epoch")
    a = p.parse_args()
    if not HAVE_NUMBA:
        print("numba unavailable or disabled; timing the numpy kernels only")
    bench_kernels(a.repeat)
    if a.epoch:
        bench_epoch()


if __name__ == "__main__":
    main()
