"""Compiled vs numpy patch kernels, plus optional end-to-end timing.

    python benchmarks/bench_kernels.py            # kernel micro-benchmarks
    python benchmarks/bench_kernels.py --pipeline # also one 96x96 pipeline run per backend
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from chromasr import _pykernels

try:
    from chromasr import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    planes = rng.uniform(0, 255, size=(3, 288, 288))
    tpatch = np.ascontiguousarray(planes[:, 100:106, 100:106])
    rows = rng.integers(0, 283, size=400)
    cols = rng.integers(0, 283, size=400)
    patches = rng.normal(size=(400, 3, 6, 6))

    def window(mod):
        # one within-scale search: 25x25 window
        return lambda: mod.patch_ssd(planes, tpatch, 88, 112, 88, 112)

    def full(mod):
        # one cross-scale level scan over the whole image
        return lambda: mod.patch_ssd(planes, tpatch, 0, 282, 0, 282)

    def extract(mod):
        return lambda: mod.extract_patches(planes, rows, cols, 6)

    def accumulate(mod):
        canvas = np.zeros_like(planes)
        weights = np.zeros(planes.shape[1:])
        return lambda: mod.accumulate_patches(canvas, weights, rows, cols, patches)

    return {"window ssd 25x25": window, "full-image ssd": full,
            "extract 400 patches": extract, "accumulate 400 patches": accumulate}


def best_of(fn, repeat=5):
    n, _ = timeit.Timer(fn).autorange()
    return min(timeit.Timer(fn).repeat(repeat, n)) / n


def bench_kernels():
    rng = np.random.default_rng(0)
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    print(f"{'kernel':26s}" + "".join(f"{b:>14s}" for b in backends) + f"{'speedup':>10s}")
    for name, make in cases(rng).items():
        times = {b: best_of(make(mod)) for b, mod in backends.items()}
        row = f"{name:26s}" + "".join(f"{t * 1e6:12.1f}us" for t in times.values())
        if "cython" in times:
            row += f"{times['python'] / times['cython']:9.1f}x"
        print(row)


def bench_pipeline():
    code = (
        "import time; from chromasr import recon, imgcore, kernels;"
        "from chromasr.cli import synthesize; from chromasr.config import RunConfig;"
        "from chromasr.imgcore import ColorImage;"
        f"a = imgcore.read_image({os.path.join(os.path.dirname(__file__), '..', 'tests', 'data', 'astronaut_256.png')!r});"
        "gt, lr = synthesize(ColorImage(a.planes[:, 64:160, 48:144]), (15, 5, 10), RunConfig());"
        "t = time.perf_counter(); recon.run_pipeline(lr, RunConfig(workers=1));"
        "print(kernels.BACKEND, round(time.perf_counter() - t, 1))"
    )
    for pure in ("0", "1"):
        env = dict(os.environ, CHROMASR_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"pipeline 96x96 -> 288x288 [{backend}]: {secs}s")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--pipeline", action="store_true", help="also time a full run per backend")
    args = ap.parse_args()
    bench_kernels()
    if args.pipeline:
        bench_pipeline()


if __name__ == "__main__":
    main()
