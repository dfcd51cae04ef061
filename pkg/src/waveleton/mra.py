"""Multiresolution machinery: dyadic wavelet transforms with compactly
supported orthonormal filters, the per-scale decomposition of fields,
the hierarchy norm, the scale-cutoff refinement loop, and wavelet-packet
best-basis search by additive Shannon-entropy minimization.

Scale indexing: a length-2^J axis decomposes as V_ic + D_{ic+1} + ... + D_J,
where block D_j holds the difference between resolutions 2^j and 2^(j-1)
(2^(j-1) coefficients per axis; three subbands per level in 2-D). The
approximation block V_ic has 2^ic points per axis.
"""

import struct
from dataclasses import dataclass
from functools import lru_cache
from math import comb, sqrt

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DimensionError
from .phasespace import HierarchyState, PairWignerState, WignerState

_SUBBANDS = ("ad", "da", "dd")


# ---------------------------------------------------------------------------
# Filters
# ---------------------------------------------------------------------------

def _factorize_lowpass(n_moments):
    # spectral factorization of the halfband polynomial, minimum-phase root set
    n = n_moments - 1
    yk = np.array([1.0])
    base = np.array([-0.25, 0.5, -0.25])
    laurent = np.zeros(2 * n + 1)
    for k in range(n_moments):
        pad = n - k
        laurent[pad: pad + len(yk)] += comb(n_moments - 1 + k, k) * yk
        yk = np.convolve(yk, base)
    roots = np.roots(laurent[::-1])
    inside = roots[np.abs(roots) < 1.0]
    factor = np.array([1.0 + 0j])
    for r in inside:
        factor = np.convolve(factor, [1.0, -r])
    h = np.array([1.0])
    for _ in range(n_moments):
        h = np.convolve(h, [0.5, 0.5])
    h = np.convolve(h, factor.real)
    return h * (sqrt(2.0) / h.sum())


def _polish(h, n_moments):
    # Newton-refine the double-shift orthonormality and moment conditions;
    # rows are normalized so the high-order moment rows stay well conditioned
    taps = 2 * n_moments
    k = np.arange(taps)
    for _ in range(8):
        rows, vals = [], []
        for m in range(n_moments):
            s = np.dot(h[: taps - 2 * m], h[2 * m:]) - (1.0 if m == 0 else 0.0)
            row = np.zeros(taps)
            row[: taps - 2 * m] += h[2 * m:]
            row[2 * m:] += h[: taps - 2 * m]
            rows.append(row)
            vals.append(s)
        for j in range(n_moments):
            w = ((-1.0) ** k) * (k ** j if j > 0 else np.ones(taps))
            rows.append(w)
            vals.append(np.dot(w, h))
        jac = np.array(rows)
        res = np.array(vals)
        scale = np.linalg.norm(jac, axis=1)
        step = np.linalg.solve(jac / scale[:, None], res / scale)
        h = h - step
        if np.abs(res / scale).max() < 1e-16:
            break
    return h


@lru_cache(maxsize=None)
def daubechies_filters(n_moments):
    """Orthonormal (lowpass, highpass) pair with the given vanishing moments."""
    if not 2 <= n_moments <= 10:
        raise ConfigurationError("vanishing moments must lie in 2..10")
    h = _polish(_factorize_lowpass(n_moments), n_moments)
    g = h[::-1].copy()
    g[1::2] *= -1.0
    h.setflags(write=False)
    g.setflags(write=False)
    return h, g


@dataclass(frozen=True)
class WaveletSpec:
    family: str = "daubechies"
    vanishing_moments: int = 3
    extension: str = "periodic"

    def __post_init__(self):
        if self.family != "daubechies":
            raise ConfigurationError("unsupported wavelet family %r" % self.family)
        if self.extension != "periodic":
            raise ConfigurationError("unsupported extension %r" % self.extension)
        if not 2 <= self.vanishing_moments <= 10:
            raise ConfigurationError("vanishing moments must lie in 2..10")

    def filters(self):
        return daubechies_filters(self.vanishing_moments)

    @property
    def taps(self):
        return 2 * self.vanishing_moments


# ---------------------------------------------------------------------------
# Single-level separable steps
# ---------------------------------------------------------------------------

def _analysis_axis(arr, h, g, axis):
    if arr.shape[axis] % 2:
        raise DimensionError("axis length must be even for an analysis step")
    moved = np.ascontiguousarray(np.moveaxis(arr, axis, -1))
    flat = moved.reshape(-1, moved.shape[-1]).astype(float, copy=False)
    a, d = _kernels.analysis_periodic(np.ascontiguousarray(flat), h, g)
    new_shape = moved.shape[:-1] + (moved.shape[-1] // 2,)
    return (
        np.moveaxis(a.reshape(new_shape), -1, axis),
        np.moveaxis(d.reshape(new_shape), -1, axis),
    )


def _synthesis_axis(a, d, h, g, axis):
    moved_a = np.ascontiguousarray(np.moveaxis(a, axis, -1))
    moved_d = np.ascontiguousarray(np.moveaxis(d, axis, -1))
    flat_a = moved_a.reshape(-1, moved_a.shape[-1])
    flat_d = moved_d.reshape(-1, moved_d.shape[-1])
    x = _kernels.synthesis_periodic(
        np.ascontiguousarray(flat_a), np.ascontiguousarray(flat_d), h, g
    )
    new_shape = moved_a.shape[:-1] + (2 * moved_a.shape[-1],)
    return np.moveaxis(x.reshape(new_shape), -1, axis)


def _split_once(arr, h, g):
    """One analysis level: 1-D -> (a, d); 2-D -> (aa, {'ad','da','dd'})."""
    if arr.ndim == 1:
        a, d = _analysis_axis(arr, h, g, 0)
        return a, d
    low1, high1 = _analysis_axis(arr, h, g, 1)
    aa, da = _analysis_axis(low1, h, g, 0)
    ad, dd = _analysis_axis(high1, h, g, 0)
    return aa, {"ad": ad, "da": da, "dd": dd}


def _merge_once(approx, detail, h, g):
    if isinstance(detail, dict):
        low1 = _synthesis_axis(approx, detail["da"], h, g, 0)
        high1 = _synthesis_axis(detail["ad"], detail["dd"], h, g, 0)
        return _synthesis_axis(low1, high1, h, g, 1)
    return _synthesis_axis(approx, detail, h, g, 0)


# ---------------------------------------------------------------------------
# Multi-level decomposition
# ---------------------------------------------------------------------------

@dataclass
class MraDecomposition:
    """Approximation block V_ic plus detail blocks D_j, j = ic+1 .. finest."""

    coarsest_level: int
    finest_level: int
    approx: np.ndarray
    details: dict
    spec: WaveletSpec
    shape: tuple

    @property
    def ndim(self):
        return len(self.shape)

    def scales(self):
        return tuple(sorted(self.details))

    def block_energy(self, j):
        block = self.details[j]
        if isinstance(block, dict):
            return float(sum((sub ** 2).sum() for sub in block.values()))
        return float((block ** 2).sum())

    def total_energy(self):
        return float((self.approx ** 2).sum()) + sum(
            self.block_energy(j) for j in self.details
        )

    def copy(self):
        details = {
            j: ({k: v.copy() for k, v in blk.items()} if isinstance(blk, dict)
                else blk.copy())
            for j, blk in self.details.items()
        }
        return MraDecomposition(
            self.coarsest_level, self.finest_level, self.approx.copy(),
            details, self.spec, self.shape,
        )


def _check_transformable(shape, levels, taps):
    for n in shape:
        if n % (1 << levels):
            raise DimensionError(
                "axis length %d not divisible by 2^%d" % (n, levels)
            )
        if (n >> levels) < taps:
            raise DimensionError(
                "coarsest block %d shorter than the %d-tap filter; "
                "reduce levels" % (n >> levels, taps)
            )


def dwt_forward(field, spec=WaveletSpec(), levels=None):
    """Multi-level orthonormal wavelet transform of a 1-D or 2-D field."""
    field = np.asarray(field, dtype=float)
    if field.ndim not in (1, 2):
        raise DimensionError("expected a 1-D or 2-D field")
    n0 = field.shape[0]
    if n0 & (n0 - 1):
        raise DimensionError("axis lengths must be powers of two")
    j_top = int(np.log2(n0))
    if levels is None:
        j_min = int(np.log2(min(field.shape)))
        by_filter = j_min - int(np.ceil(np.log2(spec.taps)))
        levels = max(1, min(j_min - 3, by_filter))
    if levels < 1:
        raise ConfigurationError("levels must be >= 1")
    _check_transformable(field.shape, levels, spec.taps)
    h, g = spec.filters()
    coarsest = j_top - levels
    details = {}
    current = field
    for step in range(levels):
        current, detail = _split_once(current, h, g)
        details[j_top - step] = detail
    return MraDecomposition(
        coarsest, j_top, current, details, spec, field.shape
    )


def dwt_inverse(decomp):
    """Exact inverse of dwt_forward."""
    h, g = decomp.spec.filters()
    current = decomp.approx
    for j in sorted(decomp.details):
        detail = decomp.details[j]
        expect = current.shape[0]
        got = detail["dd"].shape[0] if isinstance(detail, dict) else detail.shape[0]
        if got != expect:
            raise DimensionError(
                "detail block at scale %d has %d rows, expected %d"
                % (j, got, expect)
            )
        current = _merge_once(current, detail, h, g)
    if current.shape != decomp.shape:
        raise DimensionError("reconstruction shape mismatch")
    return current


def scale_truncate(decomp, n_keep):
    """Zero every detail block finer than scale n_keep (projection onto V_n)."""
    if n_keep < decomp.coarsest_level:
        raise ValueError(
            "cutoff %d below the coarsest level %d"
            % (n_keep, decomp.coarsest_level)
        )
    out = decomp.copy()
    for j in out.details:
        if j > n_keep:
            blk = out.details[j]
            if isinstance(blk, dict):
                for sub in blk.values():
                    sub[:] = 0.0
            else:
                blk[:] = 0.0
    return out


# ---------------------------------------------------------------------------
# Hierarchy norm and the cutoff loop
# ---------------------------------------------------------------------------

def fock_norm(hierarchy):
    """w0^2 plus measure-weighted sums of squares over the partial states."""
    total = hierarchy.w0 ** 2
    for s, level in enumerate(hierarchy.levels, start=1):
        total += float((level.values ** 2).sum()) * level.grid.cell ** s
    return total


def state_diff_norm(a, b):
    """l2 distance in the norm matching the operand type."""
    if isinstance(a, WignerState) and isinstance(b, WignerState):
        if a.grid != b.grid:
            raise DimensionError("states live on different grids")
        return float(np.sqrt(((a.values - b.values) ** 2).sum() * a.grid.cell))
    if isinstance(a, PairWignerState) and isinstance(b, PairWignerState):
        return float(
            np.sqrt(((a.values - b.values) ** 2).sum() * a.grid.cell ** 2)
        )
    if isinstance(a, HierarchyState) and isinstance(b, HierarchyState):
        total = (a.w0 - b.w0) ** 2
        for la, lb in zip(a.levels, b.levels):
            total += state_diff_norm(la, lb) ** 2
        return float(np.sqrt(total))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.sqrt(((a - b) ** 2).sum()))


@dataclass
class RefineResult:
    level: int
    state: object
    residuals: list
    converged: bool


def refine_until(make_state, epsilon, n_max, n_min=0):
    """Walk levels n_min..n_max until || W^(N+1) - W^N || <= epsilon.

    Returns the smallest such N with its state and the residual history,
    or (n_max, state, history, converged=False) when the tolerance is
    never met (an epsilon of zero therefore never converges).
    """
    if epsilon < 0:
        raise ConfigurationError("epsilon must be >= 0")
    if n_max < n_min:
        raise ConfigurationError("n_max below n_min")
    previous = make_state(n_min)
    residuals = []
    for level in range(n_min, n_max):
        candidate = make_state(level + 1)
        residual = state_diff_norm(candidate, previous)
        residuals.append(residual)
        if residual <= epsilon and epsilon > 0.0:
            return RefineResult(level, previous, residuals, True)
        previous = candidate
    return RefineResult(n_max, previous, residuals, False)


def truncation_builder(field, spec=WaveletSpec(), levels=None):
    """Builder for refine_until: N -> field projected onto resolution N."""
    decomp = dwt_forward(field, spec, levels)

    def make(n_keep):
        return dwt_inverse(scale_truncate(decomp, n_keep))

    return make, decomp.coarsest_level, decomp.finest_level


# ---------------------------------------------------------------------------
# Wavelet packets / best basis
# ---------------------------------------------------------------------------

@dataclass
class PacketBasis:
    """Selected leaf set of the packet tree and its Shannon entropy.

    Leaves are (depth, pos) in 1-D and (depth, pos0, pos1) in 2-D; the
    position indexes frequency bands in natural filter-bank order.
    """

    leaves: tuple
    entropy: float
    max_depth: int
    shape: tuple

    @property
    def ndim(self):
        return len(self.shape)

    def covers_exactly(self):
        split = 2 ** self.ndim
        return (
            sum(split ** (self.max_depth - d) for d, *_ in self.leaves)
            == split ** self.max_depth
        )


def _shannon_cost(block, total_energy):
    if total_energy <= 0.0:
        return 0.0
    v = np.ravel(block) ** 2 / total_energy
    v = v[v > 0.0]
    return float(-(v * np.log(v)).sum())


def _packet_children(arr, h, g):
    if arr.ndim == 1:
        a, d = _analysis_axis(arr, h, g, 0)
        return ((0,), a), ((1,), d)
    low1, high1 = _analysis_axis(arr, h, g, 1)
    aa, da = _analysis_axis(low1, h, g, 0)
    ad, dd = _analysis_axis(high1, h, g, 0)
    return ((0, 0), aa), ((0, 1), ad), ((1, 0), da), ((1, 1), dd)


def best_basis(field, spec=WaveletSpec(), max_depth=4):
    """Minimal-entropy packet basis (bottom-up Coifman-Wickerhauser search)."""
    field = np.asarray(field, dtype=float)
    if field.ndim not in (1, 2):
        raise DimensionError("expected a 1-D or 2-D field")
    if max_depth < 0:
        raise ConfigurationError("max_depth must be >= 0")
    _check_transformable(field.shape, max_depth, spec.taps) if max_depth else None
    h, g = spec.filters()
    total_energy = float((field ** 2).sum())

    def search(arr, depth, pos):
        own = _shannon_cost(arr, total_energy)
        if depth == max_depth:
            return own, [(depth,) + pos]
        child_cost = 0.0
        child_leaves = []
        for offset, data in _packet_children(arr, h, g):
            sub_pos = tuple(2 * p + o for p, o in zip(pos, offset))
            cost, leaves = search(data, depth + 1, sub_pos)
            child_cost += cost
            child_leaves.extend(leaves)
        if child_cost < own:
            return child_cost, child_leaves
        return own, [(depth,) + pos]

    origin = (0,) * field.ndim
    entropy, leaves = search(field, 0, origin)
    return PacketBasis(tuple(leaves), entropy, max_depth, field.shape)


def max_packet_depth(shape, spec=WaveletSpec()):
    """Deepest admissible packet split for this shape and filter length."""
    j_min = int(np.log2(min(shape)))
    return max(0, j_min - int(np.ceil(np.log2(spec.taps))))


def fixed_depth_entropy(field, spec=WaveletSpec(), depth=0):
    """Shannon entropy of the uniform packet basis at the given depth."""
    field = np.asarray(field, dtype=float)
    h, g = spec.filters()
    total_energy = float((field ** 2).sum())
    blocks = [field]
    for _ in range(depth):
        blocks = [data for blk in blocks for _, data in _packet_children(blk, h, g)]
    return sum(_shannon_cost(blk, total_energy) for blk in blocks)


# ---------------------------------------------------------------------------
# Decomposition dumps
# ---------------------------------------------------------------------------

MRAD_MAGIC = b"MRAD"
MRAD_VERSION = 1


def write_decomposition(path, decomp):
    """Binary dump: (magic, version, filter id, ic, finest, ndim, shape) + blocks."""
    with open(path, "wb") as fh:
        fh.write(MRAD_MAGIC)
        fh.write(struct.pack(
            "<IIIII", MRAD_VERSION, decomp.spec.vanishing_moments,
            decomp.coarsest_level, decomp.finest_level, decomp.ndim,
        ))
        fh.write(struct.pack("<%dI" % decomp.ndim, *decomp.shape))
        fh.write(np.ascontiguousarray(decomp.approx, dtype="<f8").tobytes())
        for j in sorted(decomp.details):
            blk = decomp.details[j]
            if isinstance(blk, dict):
                for key in _SUBBANDS:
                    fh.write(np.ascontiguousarray(blk[key], dtype="<f8").tobytes())
            else:
                fh.write(np.ascontiguousarray(blk, dtype="<f8").tobytes())


def read_decomposition(path):
    with open(path, "rb") as fh:
        if fh.read(4) != MRAD_MAGIC:
            raise ConfigurationError("bad magic in %s" % (path,))
        version, moments, coarsest, finest, ndim = struct.unpack("<IIIII", fh.read(20))
        if version != MRAD_VERSION:
            raise ConfigurationError("unsupported dump version %d" % version)
        shape = struct.unpack("<%dI" % ndim, fh.read(4 * ndim))

        def read_block(block_shape):
            count = int(np.prod(block_shape))
            data = np.frombuffer(fh.read(8 * count), dtype="<f8").copy()
            if data.size != count:
                raise ConfigurationError("truncated dump %s" % (path,))
            return data.reshape(block_shape)

        levels = finest - coarsest
        approx_shape = tuple(n >> levels for n in shape)
        approx = read_block(approx_shape)
        details = {}
        for j in range(coarsest + 1, finest + 1):
            step = finest - j
            block_shape = tuple(n >> (step + 1) for n in shape)
            if ndim == 2:
                details[j] = {key: read_block(block_shape) for key in _SUBBANDS}
            else:
                details[j] = read_block(block_shape)
    spec = WaveletSpec(vanishing_moments=moments)
    return MraDecomposition(coarsest, finest, approx, details, spec, shape)
