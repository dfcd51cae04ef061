"""Observables and pattern classification.

Numeric proxies for the qualitative pattern vocabulary: inverse
participation ratio for localization, wavelet-packet best-basis entropy
for spectral randomness, and the negative-part volume for phase-space
interference. Labels are a pure function of (record, thresholds), so
stored runs reclassify bitwise.
"""

from dataclasses import dataclass, replace
from math import factorial, log

import numpy as np

from .errors import ConfigurationError, DimensionError
from .mra import WaveletSpec, best_basis, dwt_forward, max_packet_depth
from .phasespace import HierarchyState, WignerState

LABELS = ("waveleton", "entangled_like", "decoherent", "delocalized", "unclassified")

CSV_HEADER = "t,norm,purity,entropy,negativity,localization,label"


def norm_integral(state):
    return float(state.values.sum() * state.grid.cell)


def purity(state):
    """Tr rho^2 = 2 pi hbar Integral W^2."""
    return float(
        2.0 * np.pi * state.hbar * (state.values ** 2).sum() * state.grid.cell
    )


def negativity_volume(state):
    """Volume of the negative part, mu * sum max(-W, 0)."""
    neg = np.minimum(state.values, 0.0)
    return float(-neg.sum() * state.grid.cell)


def localization(state):
    """Inverse participation ratio of |W|, in [1/(n_q n_p), 1]."""
    mass = np.abs(state.values)
    total = mass.sum()
    if total <= 0.0:
        return 0.0
    v = mass / total
    return float((v ** 2).sum())


def packet_entropy(state_or_values, wavelet=WaveletSpec(), max_depth=4):
    """Best-basis Shannon entropy of the normalized squared coefficients."""
    values = getattr(state_or_values, "values", state_or_values)
    depth = min(max_depth, max_packet_depth(values.shape, wavelet))
    return best_basis(values, wavelet, depth).entropy


@dataclass(frozen=True)
class Thresholds:
    """Classification cut points; entropy cuts are absolute values."""

    loc_hi: float = 0.05
    loc_lo: float = 0.005
    entropy_lo: float = 0.0
    entropy_hi: float = 0.0
    purity_hi: float = 0.95
    purity_lo: float = 0.6
    neg_hi: float = 0.05
    neg_lo: float = 0.01

    def __post_init__(self):
        pairs = (
            ("localization", self.loc_lo, self.loc_hi),
            ("entropy", self.entropy_lo, self.entropy_hi),
            ("purity", self.purity_lo, self.purity_hi),
            ("negativity", self.neg_lo, self.neg_hi),
        )
        for name, lo, hi in pairs:
            if lo >= hi:
                raise ConfigurationError(
                    "inconsistent %s thresholds: lo %g >= hi %g" % (name, lo, hi)
                )

    @classmethod
    def for_count(cls, count, **overrides):
        """Defaults with entropy cuts at 0.3/0.7 of the max entropy log(count)."""
        values = dict(
            entropy_lo=0.3 * log(count),
            entropy_hi=0.7 * log(count),
        )
        values.update(overrides)
        return cls(**values)

    def scaled_for_grid(self, count, reference_count):
        """Rescale the localization cuts when the grid resolution changes.

        The participation ratio of a fixed continuum state scales like the
        cell measure, so refinement-stable labels need loc cuts scaled by
        reference_count / count.
        """
        factor = reference_count / count
        return replace(self, loc_hi=self.loc_hi * factor, loc_lo=self.loc_lo * factor)


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    norm: float
    purity: float
    negativity_volume: float
    shannon_entropy: float
    localization: float
    label: str = "unclassified"


def classify(record, thresholds):
    """Deterministic decision rule over the numeric fields."""
    r, t = record, thresholds
    if (
        r.localization >= t.loc_hi
        and r.shannon_entropy <= t.entropy_lo
        and r.purity >= t.purity_hi
    ):
        return "waveleton"
    if r.negativity_volume >= t.neg_hi and r.shannon_entropy >= t.entropy_hi:
        return "entangled_like"
    if r.purity <= t.purity_lo and r.negativity_volume <= t.neg_lo:
        return "decoherent"
    if r.localization <= t.loc_lo:
        return "delocalized"
    return "unclassified"


def compute_record(state, thresholds=None, wavelet=WaveletSpec(), packet_depth=4):
    """Full diagnostics for one snapshot, classified."""
    if thresholds is None:
        thresholds = Thresholds.for_count(state.values.size)
    rec = DiagnosticsRecord(
        time=state.time,
        norm=norm_integral(state),
        purity=purity(state),
        negativity_volume=negativity_volume(state),
        shannon_entropy=packet_entropy(state, wavelet, packet_depth),
        localization=localization(state),
    )
    return replace(rec, label=classify(rec, thresholds))


# ---------------------------------------------------------------------------
# Hierarchy expectations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhasePolynomial:
    """Polynomial in the phase-space coordinates of one hierarchy level.

    terms maps exponent tuples to coefficients; a level-s kernel uses
    tuples of length 2s ordered (q1, p1, ..., qs, ps).
    """

    terms: dict

    def arity(self):
        lengths = {len(k) for k in self.terms}
        if len(lengths) > 1:
            raise ConfigurationError("mixed exponent tuple lengths")
        return lengths.pop() if lengths else 0

    def evaluate(self, grid):
        n_vars = self.arity()
        if n_vars not in (2, 4):
            raise ConfigurationError("kernels support one or two particles")
        axes = [grid.q, grid.p] * (n_vars // 2)
        shape = tuple(len(a) for a in axes)
        out = np.zeros(shape)
        for exponents, coeff in self.terms.items():
            term = np.array(coeff)
            for k, (axis, power) in enumerate(zip(axes, exponents)):
                vec = axis ** power
                expand = [None] * len(axes)
                expand[k] = slice(None)
                term = term * vec[tuple(expand)]
            out += term
        return out


@dataclass(frozen=True)
class ObservableSpec:
    """Scalar piece plus per-level polynomial kernels (s <= 2)."""

    a0: float = 0.0
    kernels: tuple = ()          # tuple of (level, PhasePolynomial)


def expectation(observable, hierarchy):
    """a0 w0 + sum_s (s!)^-1 Integral A_s W_s over the level grids."""
    if not isinstance(hierarchy, HierarchyState):
        raise DimensionError("expectation needs a HierarchyState")
    total = observable.a0 * hierarchy.w0
    for level_index, kernel in observable.kernels:
        if not 1 <= level_index <= len(hierarchy.levels):
            raise DimensionError(
                "observable targets level %d but hierarchy has %d"
                % (level_index, len(hierarchy.levels))
            )
        level = hierarchy.levels[level_index - 1]
        if kernel.arity() != 2 * level_index:
            raise DimensionError(
                "kernel arity %d does not match level %d"
                % (kernel.arity(), level_index)
            )
        weights = kernel.evaluate(level.grid)
        quad = float((weights * level.values).sum()) * level.grid.cell ** level_index
        total += quad / factorial(level_index)
    return total


# ---------------------------------------------------------------------------
# Scale spectrum
# ---------------------------------------------------------------------------

@dataclass
class ScaleSpectrum:
    """Per-scale energies of a field or trace; frequencies go like 2^j."""

    approx_energy: float
    energies: dict
    total_energy: float

    @property
    def frequencies(self):
        return {j: float(2 ** j) for j in self.energies}

    def fractions(self):
        if self.total_energy <= 0:
            return {j: 0.0 for j in self.energies}
        return {j: e / self.total_energy for j, e in self.energies.items()}


def scale_spectrum(field_or_trace, wavelet=WaveletSpec(), levels=None):
    values = getattr(field_or_trace, "values", field_or_trace)
    decomp = dwt_forward(np.asarray(values, dtype=float), wavelet, levels)
    energies = {j: decomp.block_energy(j) for j in decomp.scales()}
    approx = float((decomp.approx ** 2).sum())
    return ScaleSpectrum(approx, energies, approx + sum(energies.values()))


# ---------------------------------------------------------------------------
# CSV and image export
# ---------------------------------------------------------------------------

def format_record(record):
    return "%r,%r,%r,%r,%r,%r,%s" % (
        record.time, record.norm, record.purity, record.shannon_entropy,
        record.negativity_volume, record.localization, record.label,
    )


def write_diagnostics_csv(path, records):
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for record in records:
            fh.write(format_record(record) + "\n")


def read_diagnostics_csv(path):
    records = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ConfigurationError("unexpected diagnostics header %r" % header)
        for line in fh:
            t, norm, pur, ent, neg, loc, label = line.strip().split(",")
            records.append(DiagnosticsRecord(
                time=float(t), norm=float(norm), purity=float(pur),
                negativity_volume=float(neg), shannon_entropy=float(ent),
                localization=float(loc), label=label,
            ))
    return records


def _diverging_rgb(values, vmax):
    w = np.clip(values / vmax, -1.0, 1.0)
    r = np.rint(127.5 * (1.0 + w)).astype(np.uint8)
    g = np.rint(127.5 * (1.0 - np.abs(w))).astype(np.uint8)
    b = np.rint(127.5 * (1.0 - w)).astype(np.uint8)
    return r, g, b


def write_ppm(path, state_or_values, vmax=None):
    """8-bit binary PPM, sign-preserving diverging map, zero at mid-gray."""
    values = getattr(state_or_values, "values", state_or_values)
    if vmax is None:
        vmax = float(np.abs(values).max()) or 1.0
    r, g, b = _diverging_rgb(values, vmax)
    image = np.stack([r, g, b], axis=-1)
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (values.shape[1], values.shape[0]))
        fh.write(image.tobytes())


def write_pgm(path, state_or_values, vmax=None):
    values = getattr(state_or_values, "values", state_or_values)
    if vmax is None:
        vmax = float(np.abs(values).max()) or 1.0
    w = np.clip(values / vmax, -1.0, 1.0)
    gray = np.rint(127.5 * (1.0 + w)).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (values.shape[1], values.shape[0]))
        fh.write(gray.tobytes())
