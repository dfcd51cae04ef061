"""Pure-numpy filter-bank kernels (fallback when the compiled core is absent).

Both backends implement the same two primitives on batches of rows:
one analysis step (periodic convolution + decimation by 2) and its
adjoint synthesis step. Everything above this level (multi-level
transforms, separable 2-D passes, packet trees) is backend-agnostic.
"""

import numpy as np

NAME = "python"


def analysis_periodic(x, h, g):
    """One periodized filter-bank analysis step along the last axis.

    x : (m, n) float64, n even and >= len(h) is not required (indices wrap).
    Returns (approx, detail), each (m, n//2).
    """
    n = x.shape[1]
    taps = len(h)
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :]) % n
    windows = x[:, idx]
    return windows @ h, windows @ g


def synthesis_periodic(a, d, h, g):
    """Adjoint of analysis_periodic; exact inverse for orthonormal filters."""
    half = a.shape[1]
    n = 2 * half
    out = np.zeros((a.shape[0], n))
    base = 2 * np.arange(half)
    for k in range(len(h)):
        cols = (base + k) % n
        # cols are distinct for fixed k, so fancy-indexed += is safe
        out[:, cols] += h[k] * a + g[k] * d
    return out
