#!/usr/bin/env python3
"""Compare the compiled filter-bank kernels against the numpy fallback.

Times the hot paths that dominate compressed stepping and per-snapshot
diagnostics: single analysis/synthesis passes, full 2-D transforms, and
the packet best-basis search.

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from waveleton import _kernels
from waveleton.mra import WaveletSpec, best_basis, daubechies_filters, dwt_forward, dwt_inverse


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    rng = np.random.default_rng(42)
    h, g = daubechies_filters(3)
    rows = np.ascontiguousarray(rng.standard_normal((256, 256)))
    field = rng.standard_normal((256, 256))
    trace = rng.standard_normal(4096)
    spec = WaveletSpec()

    cases = {
        "analysis 256x256": lambda b: b.analysis_periodic(rows, h, g),
        "synthesis 256x256": None,       # filled below, needs analysis output
    }
    a, d = _kernels.get_backend("python").analysis_periodic(rows, h, g)
    cases["synthesis 256x256"] = lambda b: b.synthesis_periodic(a, d, h, g)

    names = _kernels.available_backends()
    print("backends:", ", ".join(names))
    print()
    print("%-28s" % "kernel-level", *("%12s" % n for n in names))
    for label, call in cases.items():
        row = []
        for name in names:
            backend = _kernels.get_backend(name)
            row.append(timeit(lambda: call(backend), args.repeats))
        print("%-28s" % label, *("%10.2f ms" % (1e3 * t) for t in row))

    print()
    print("%-28s" % "transform-level", *("%12s" % n for n in names))
    transforms = {
        "dwt fwd+inv 256^2": lambda: dwt_inverse(dwt_forward(field, spec)),
        "dwt fwd+inv 4096 trace": lambda: dwt_inverse(dwt_forward(trace, spec)),
        "best basis 256^2 depth 4": lambda: best_basis(field, spec, 4),
    }
    for label, call in transforms.items():
        row = []
        for name in names:
            _kernels.set_backend(name)
            row.append(timeit(call, args.repeats))
        print("%-28s" % label, *("%10.2f ms" % (1e3 * t) for t in row))
    _kernels.set_backend("auto")


if __name__ == "__main__":
    main()
