"""Phase-space grids, Wigner states, and the wavefunction-to-Wigner transform.

Conventions: natural units with explicit hbar/mass fields (default 1),
uniform periodic grids with the right endpoint excluded, cell measure
dq*dp. The quasiprobability of a pure state psi is

    W(q, p) = (2*pi*hbar)^-1 * Integral dy psi*(q + y/2) psi(q - y/2) e^{i p y / hbar}

evaluated by trigonometric interpolation of psi onto the half-step grid
and a direct Fourier sum over the chord variable y, so any momentum grid
below the implied Nyquist bound pi*hbar/dq is admissible.
"""

import struct
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, DimensionError

PERIODIC = "periodic"
DECAY_PADDED = "decay-padded"
_BOUNDARIES = (PERIODIC, DECAY_PADDED)


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform rectangular (q, p) grid; sizes are powers of two."""

    n_q: int
    n_p: int
    q_min: float
    q_max: float
    p_min: float
    p_max: float
    boundary: str = PERIODIC

    @property
    def dq(self):
        return (self.q_max - self.q_min) / self.n_q

    @property
    def dp(self):
        return (self.p_max - self.p_min) / self.n_p

    @property
    def cell(self):
        """Cell measure dq*dp."""
        return self.dq * self.dp

    @cached_property
    def q(self):
        return self.q_min + self.dq * np.arange(self.n_q)

    @cached_property
    def p(self):
        return self.p_min + self.dp * np.arange(self.n_p)

    @property
    def p_abs_max(self):
        return max(abs(self.p_min), abs(self.p_max - self.dp))

    def refine(self, factor=2):
        """Dyadic refinement: same bounds, sizes multiplied by factor."""
        return replace(self, n_q=self.n_q * factor, n_p=self.n_p * factor)


def make_grid(n_q, n_p, q_bounds, p_bounds, boundary=PERIODIC):
    q_min, q_max = (float(b) for b in q_bounds)
    p_min, p_max = (float(b) for b in p_bounds)
    for n in (n_q, n_p):
        if not _is_pow2(n) or n < 16:
            raise ConfigurationError("size must be power of two (>= 16), got %r" % (n,))
    if not q_max > q_min:
        raise ConfigurationError("inverted q bounds: [%g, %g]" % (q_min, q_max))
    if not p_max > p_min:
        raise ConfigurationError("inverted p bounds: [%g, %g]" % (p_min, p_max))
    if boundary not in _BOUNDARIES:
        raise ConfigurationError("unknown boundary %r" % (boundary,))
    return PhaseGrid(int(n_q), int(n_p), q_min, q_max, p_min, p_max, boundary)


@dataclass(frozen=True)
class Wavefunction:
    """Complex amplitude on the position axis of a PhaseGrid."""

    q: np.ndarray
    values: np.ndarray

    @property
    def dq(self):
        return float(self.q[1] - self.q[0])

    def norm_squared(self):
        return float(np.sum(np.abs(self.values) ** 2) * self.dq)

    def normalize(self):
        n2 = self.norm_squared()
        if n2 <= 0.0:
            raise ConfigurationError("cannot normalize a zero wavefunction")
        return Wavefunction(self.q, self.values / np.sqrt(n2))

    def density(self):
        return np.abs(self.values) ** 2


def wavefunction_on_grid(grid, values):
    values = np.asarray(values, dtype=complex)
    if values.shape != (grid.n_q,):
        raise DimensionError(
            "wavefunction length %d does not match grid n_q=%d"
            % (values.size, grid.n_q)
        )
    return Wavefunction(grid.q, values)


@dataclass(frozen=True)
class WignerState:
    """Real quasiprobability density on a PhaseGrid plus physical metadata."""

    grid: PhaseGrid
    values: np.ndarray
    hbar: float = 1.0
    mass: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        if self.values.shape != (self.grid.n_q, self.grid.n_p):
            raise DimensionError(
                "values shape %s does not match grid (%d, %d)"
                % (self.values.shape, self.grid.n_q, self.grid.n_p)
            )
        if not np.isfinite(self.values).all():
            raise ConfigurationError("Wigner values must be finite reals")
        if self.hbar <= 0 or self.mass <= 0:
            raise ConfigurationError("hbar and mass must be positive")

    def with_values(self, values, time=None):
        return WignerState(
            self.grid, values, self.hbar, self.mass,
            self.time if time is None else time,
        )

    def total_mass(self):
        return float(self.values.sum() * self.grid.cell)


@dataclass(frozen=True)
class PairWignerState:
    """Two-particle level: values indexed (q1, p1, q2, p2) on a shared grid."""

    grid: PhaseGrid
    values: np.ndarray
    hbar: float = 1.0
    mass: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        n_q, n_p = self.grid.n_q, self.grid.n_p
        if self.values.shape != (n_q, n_p, n_q, n_p):
            raise DimensionError(
                "pair values shape %s does not match grid (%d, %d)^2"
                % (self.values.shape, n_q, n_p)
            )

    def with_values(self, values, time=None):
        return PairWignerState(
            self.grid, values, self.hbar, self.mass,
            self.time if time is None else time,
        )

    def total_mass(self):
        return float(self.values.sum() * self.grid.cell ** 2)


@dataclass(frozen=True)
class HierarchyState:
    """Vacuum component plus partial Wigner states W_1 (and optionally W_2)."""

    w0: float
    levels: tuple

    def __post_init__(self):
        if len(self.levels) > 2:
            raise ConfigurationError("hierarchy supports s <= 2 levels")
        for s, level in enumerate(self.levels, start=1):
            want = WignerState if s == 1 else PairWignerState
            if not isinstance(level, want):
                raise DimensionError(
                    "hierarchy level %d must be a %s" % (s, want.__name__)
                )


def pair_product(a, b):
    """Uncorrelated two-particle state W2 = W(x1) * W(x2)."""
    if a.grid != b.grid or a.hbar != b.hbar:
        raise DimensionError("pair factors must share grid and hbar")
    values = np.multiply.outer(a.values, b.values)
    return PairWignerState(a.grid, values, a.hbar, a.mass, a.time)


# ---------------------------------------------------------------------------
# Weyl transform
# ---------------------------------------------------------------------------

def _upsample2(values):
    """Exact trigonometric interpolation onto the half-step grid."""
    n = values.size
    spectrum = np.fft.fft(values)
    padded = np.zeros(2 * n, dtype=complex)
    padded[: n // 2] = spectrum[: n // 2]
    padded[-(n // 2):] = spectrum[-(n // 2):]
    # split the Nyquist coefficient symmetrically to keep interpolation exact
    padded[n // 2] = 0.5 * spectrum[n // 2]
    padded[2 * n - n // 2] = 0.5 * spectrum[n // 2]
    return np.fft.ifft(padded) * 2.0


def wignerize(psi, grid, hbar=1.0, mass=1.0, time=0.0):
    """Weyl transform of a normalized wavefunction onto the given grid.

    The chord product psi*(q + y/2) psi(q - y/2) is sampled at y = m*dq
    (half steps supplied by band-limited upsampling) on a zero-extended
    line, so states that decay inside the box see no periodic images,
    then Fourier-summed against the requested momentum values. The
    result is renormalized to unit total mass.
    """
    if psi.values.shape != (grid.n_q,) or abs(psi.q[0] - grid.q_min) > 1e-12:
        raise DimensionError("wavefunction grid does not match the q axis")
    if abs(psi.norm_squared() - 1.0) > 1e-8:
        raise ConfigurationError("wavefunction must be normalized first")
    nyquist = np.pi * hbar / grid.dq
    if grid.p_abs_max > nyquist * (1.0 + 1e-12):
        raise ConfigurationError(
            "momentum grid exceeds the Nyquist bound pi*hbar/dq = %g" % nyquist
        )

    n = grid.n_q
    ext = np.zeros(4 * n, dtype=complex)
    ext[n: 3 * n] = _upsample2(psi.values)   # half-step samples inside the box
    # grid point q_j sits at extended index n + 2j; chord separation y = m*dq
    ej = (n + 2 * np.arange(n))[:, None]
    m = np.arange(-2 * n, 2 * n)[None, :]
    # out-of-range indices wrap into the zero padding, never into the box
    chord = np.conj(ext[(ej + m) % (4 * n)]) * ext[(ej - m) % (4 * n)]

    y = grid.dq * np.arange(-2 * n, 2 * n)
    kernel = np.exp(1j * np.outer(y, grid.p) / hbar)
    w = (chord @ kernel) * (grid.dq / (2.0 * np.pi * hbar))

    residue = np.abs(w.imag).max() / max(np.abs(w.real).max(), 1e-300)
    if residue > 1e-9:
        raise ConfigurationError(
            "Weyl transform returned non-real values (residue %.2e)" % residue
        )
    values = np.ascontiguousarray(w.real)
    mass_total = values.sum() * grid.cell
    if mass_total < 0.5:
        raise ConfigurationError(
            "state mass %.3g on this grid; widen the bounds" % mass_total
        )
    values /= mass_total
    return WignerState(grid, values, hbar=hbar, mass=mass, time=time)


def marginals(state):
    """(position density, momentum density); each integrates to the total mass."""
    pos = state.values.sum(axis=1) * state.grid.dp
    mom = state.values.sum(axis=0) * state.grid.dq
    return pos, mom


def overlap(w1, w2):
    """Phase-space overlap 2*pi*hbar * Integral W1 W2; purity when w1 is w2."""
    if w1.grid != w2.grid:
        raise DimensionError("overlap requires identical grids")
    if w1.hbar != w2.hbar:
        raise DimensionError("overlap requires identical hbar")
    return float(
        2.0 * np.pi * w1.hbar * np.sum(w1.values * w2.values) * w1.grid.cell
    )


# ---------------------------------------------------------------------------
# Initial state library
# ---------------------------------------------------------------------------

def _gaussian_packet(grid, q0, p0, sigma, hbar):
    q = grid.q
    env = np.exp(-((q - q0) ** 2) / (4.0 * sigma ** 2))
    wave = env * np.exp(1j * p0 * q / hbar)
    return Wavefunction(q, wave).normalize()


def initial_state_library(name, grid, hbar=1.0, mass=1.0, **params):
    """Preset states: coherent, squeezed, cat (pure), thermal (mixed).

    Pure presets return a Wavefunction; "thermal" returns a WignerState
    directly since no wavefunction exists for it.
    """
    q0 = float(params.pop("q0", 0.0))
    p0 = float(params.pop("p0", 0.0))
    sigma0 = np.sqrt(hbar / 2.0)

    if name == "coherent":
        sigma = float(params.pop("sigma", sigma0))
        state = _gaussian_packet(grid, q0, p0, sigma, hbar)
    elif name == "squeezed":
        squeeze = float(params.pop("squeeze", 0.5))
        state = _gaussian_packet(grid, q0, p0, sigma0 * np.exp(-squeeze), hbar)
    elif name == "cat":
        sigma = float(params.pop("sigma", sigma0))
        parity = params.pop("parity", "even")
        if parity not in ("even", "odd"):
            raise ConfigurationError("cat parity must be even or odd")
        sign = 1.0 if parity == "even" else -1.0
        q = grid.q
        lobe_r = np.exp(-((q - q0) ** 2) / (4.0 * sigma ** 2))
        lobe_l = np.exp(-((q + q0) ** 2) / (4.0 * sigma ** 2))
        wave = (lobe_r + sign * lobe_l) * np.exp(1j * p0 * q / hbar)
        state = Wavefunction(q, wave.astype(complex)).normalize()
    elif name == "thermal":
        purity = float(params.pop("purity", 0.5))
        if not 0.0 < purity <= 1.0:
            raise ConfigurationError("thermal purity must lie in (0, 1]")
        var = hbar / (2.0 * purity)
        qq, pp = np.meshgrid(grid.q, grid.p, indexing="ij")
        values = np.exp(-((qq - q0) ** 2 + (pp - p0) ** 2) / (2.0 * var))
        values /= values.sum() * grid.cell
        state = WignerState(grid, values, hbar=hbar, mass=mass)
    else:
        raise ConfigurationError("unknown initial state %r" % (name,))

    if params:
        raise ConfigurationError(
            "unused parameters for state %r: %s" % (name, sorted(params))
        )
    return state


# ---------------------------------------------------------------------------
# Grid dumps
# ---------------------------------------------------------------------------

WIGR_MAGIC = b"WIGR"
WIGR_VERSION = 1
_WIGR_HEADER = struct.Struct("<4sIII4d")


def write_wigner(path, state):
    """Binary dump: header (magic, version, n_q, n_p, bounds) + row-major f64."""
    g = state.grid
    header = _WIGR_HEADER.pack(
        WIGR_MAGIC, WIGR_VERSION, g.n_q, g.n_p, g.q_min, g.q_max, g.p_min, g.p_max
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.values, dtype="<f8").tobytes())


def read_wigner(path, hbar=1.0, mass=1.0, time=0.0, boundary=PERIODIC):
    with open(path, "rb") as fh:
        raw = fh.read(_WIGR_HEADER.size)
        if len(raw) != _WIGR_HEADER.size:
            raise ConfigurationError("truncated grid dump %s" % (path,))
        magic, version, n_q, n_p, q_min, q_max, p_min, p_max = _WIGR_HEADER.unpack(raw)
        if magic != WIGR_MAGIC:
            raise ConfigurationError("bad magic in %s" % (path,))
        if version != WIGR_VERSION:
            raise ConfigurationError("unsupported dump version %d" % version)
        data = np.frombuffer(fh.read(8 * n_q * n_p), dtype="<f8").copy()
    if data.size != n_q * n_p:
        raise ConfigurationError("truncated grid dump %s" % (path,))
    grid = PhaseGrid(n_q, n_p, q_min, q_max, p_min, p_max, boundary)
    return WignerState(grid, data.reshape(n_q, n_p), hbar, mass, time)


def write_wigner_csv(path, state):
    """Plain (q, p, W) rows for plotting."""
    g = state.grid
    with open(path, "w") as fh:
        fh.write("q,p,W\n")
        for i, qv in enumerate(g.q):
            for j, pv in enumerate(g.p):
                fh.write("%r,%r,%r\n" % (qv, pv, state.values[i, j]))
