"""Polynomial Hamiltonians and the right-hand side of the quantum
phase-space evolution equation

    dW/dt = -(p/m) dW/dq
            + sum_l (-1)^l (hbar/2)^(2l) / (2l+1)!  U^(2l+1)(q)  d^(2l+1)W/dp^(2l+1)

The series terminates exactly at l_max = floor((deg U - 1)/2) for
polynomial U: every higher derivative of U vanishes identically. The
l = 0 truncation is the classical Liouville flow. All derivatives are
Fourier multipliers on the periodic grid; the optional open-system
generator is the high-temperature friction/diffusion form
2*gamma d/dp (p W) + D d^2 W/dp^2.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, ResolutionError
from .phasespace import DECAY_PADDED

MAX_DERIVATIVE_ORDER = 7


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial by coefficient list; coeffs[k] multiplies q**k."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        if not coeffs:
            coeffs = (0.0,)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self):
        if len(self.coeffs) == 1 and self.coeffs[0] == 0.0:
            return 0
        return len(self.coeffs) - 1

    def is_zero(self):
        return all(c == 0.0 for c in self.coeffs)

    def derivative(self, order=1):
        if order < 0:
            raise ConfigurationError("derivative order must be >= 0")
        c = np.asarray(self.coeffs, dtype=float)
        for _ in range(order):
            if c.size <= 1:
                return Polynomial((0.0,))
            c = c[1:] * np.arange(1, c.size)
        return Polynomial(tuple(c))

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)


def poly_derivative(poly, order):
    """Exact symbolic derivative of the coefficient list."""
    return poly.derivative(order)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Kinetic p^2/2m plus a polynomial potential."""

    mass: float
    potential: Polynomial
    label: str = ""

    def __post_init__(self):
        if self.mass <= 0:
            raise ConfigurationError("mass must be positive")

    @property
    def moyal_orders(self):
        """Odd potential-derivative orders 2l+1 with nonvanishing terms."""
        return tuple(range(1, self.potential.degree + 1, 2))


def hamiltonian(mass=1.0, potential=(0.0,), label=""):
    return HamiltonianSpec(float(mass), Polynomial(tuple(potential)), label)


@dataclass(frozen=True)
class OpenSystemSpec:
    """Friction rate gamma and momentum diffusion D; zeros mean closed."""

    gamma: float = 0.0
    diffusion: float = 0.0

    def __post_init__(self):
        if self.gamma < 0 or self.diffusion < 0:
            raise ConfigurationError("gamma and diffusion must be >= 0")

    def is_closed(self):
        return self.gamma == 0.0 and self.diffusion == 0.0


# ---------------------------------------------------------------------------
# Spectral derivatives
# ---------------------------------------------------------------------------

def _axis_index(axis):
    if axis in (0, "q"):
        return 0
    if axis in (1, "p"):
        return 1
    raise ConfigurationError("axis must be 'q' or 'p'")


def _multiplier(n, delta, order):
    k = 2.0 * np.pi * sfft.rfftfreq(n, d=delta)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[-1] = 0.0          # drop the unpaired Nyquist mode for odd orders
    return mult


def spectral_derivative(values, axis, order, grid, max_order=MAX_DERIVATIVE_ORDER):
    """Fourier-multiplier d^order/d(axis)^order; exact for band-limited input."""
    if order < 1:
        raise ConfigurationError("derivative order must be >= 1")
    if order > max_order:
        raise ResolutionError(
            "derivative order %d exceeds the spectral safety bound %d"
            % (order, max_order)
        )
    ax = _axis_index(axis)
    delta = grid.dq if ax == 0 else grid.dp
    n = values.shape[ax]
    pad = grid.boundary == DECAY_PADDED
    work = values
    if pad:
        pad_width = [(0, 0), (0, 0)]
        pad_width[ax] = (0, n)
        work = np.pad(values, pad_width)
        n = 2 * n
    spec = sfft.rfft(work, axis=ax)
    mult = _multiplier(n, delta, order)
    shape = [1, 1]
    shape[ax] = mult.size
    out = sfft.irfft(spec * mult.reshape(shape), n=n, axis=ax)
    if pad:
        out = out[: values.shape[0], : values.shape[1]]
    return np.ascontiguousarray(out)


class MoyalOperator:
    """Precomputed evaluator for the evolution right-hand side on one grid.

    Holds the Fourier multipliers, potential-derivative columns, and the
    optional open-system pieces; rhs(values) is then allocation-light and
    safe to call from integrator stages.
    """

    def __init__(self, grid, ham, hbar, open_system=None,
                 max_order=MAX_DERIVATIVE_ORDER):
        self.grid = grid
        self.ham = ham
        self.hbar = float(hbar)
        self.open_system = open_system or OpenSystemSpec()
        orders = ham.moyal_orders
        if orders and orders[-1] > max_order:
            raise ResolutionError(
                "potential degree %d needs dW/dp order %d beyond the bound %d"
                % (ham.potential.degree, orders[-1], max_order)
            )
        self._padded = grid.boundary == DECAY_PADDED
        nq, np_ = grid.n_q, grid.n_p
        fq = 2 * nq if self._padded else nq
        fp = 2 * np_ if self._padded else np_
        self._fq, self._fp = fq, fp
        self._mult_q1 = _multiplier(fq, grid.dq, 1).reshape(-1, 1)
        self._streaming = -(grid.p / ham.mass)[None, :]
        self._p_terms = []
        for ell, order in enumerate(orders):
            coeff = (
                (-1.0) ** ell
                * (self.hbar / 2.0) ** (2 * ell)
                / factorial(order)
            )
            u_col = coeff * ham.potential.derivative(order)(grid.q)[:, None]
            self._p_terms.append((u_col, _multiplier(fp, grid.dp, order)[None, :]))
        gamma, diff = self.open_system.gamma, self.open_system.diffusion
        self._open = not self.open_system.is_closed()
        if self._open:
            self._gamma2 = 2.0 * gamma
            self._diff_mult = diff * _multiplier(fp, grid.dp, 2)[None, :]
            self._mult_p1 = _multiplier(fp, grid.dp, 1)[None, :]
            self._p_row = grid.p[None, :]

    def _dq(self, values):
        if self._padded:
            work = np.pad(values, ((0, values.shape[0]), (0, 0)))
            out = sfft.irfft(sfft.rfft(work, axis=0) * self._mult_q1,
                             n=self._fq, axis=0)
            return out[: values.shape[0], :]
        return sfft.irfft(sfft.rfft(values, axis=0) * self._mult_q1,
                          n=self._fq, axis=0)

    def _rfft_p(self, values):
        if self._padded:
            return sfft.rfft(np.pad(values, ((0, 0), (0, values.shape[1]))), axis=1)
        return sfft.rfft(values, axis=1)

    def _irfft_p(self, spec, ncols):
        out = sfft.irfft(spec, n=self._fp, axis=1)
        return out[:, :ncols] if self._padded else out

    def rhs(self, values, classical_only=False):
        ncols = values.shape[1]
        out = self._streaming * self._dq(values)
        if self._p_terms:
            spec_p = self._rfft_p(values)
            terms = self._p_terms[:1] if classical_only else self._p_terms
            for u_col, mult in terms:
                out += u_col * self._irfft_p(spec_p * mult, ncols)
        if self._open:
            spec_pw = self._rfft_p(self._p_row * values)
            out += self._gamma2 * self._irfft_p(spec_pw * self._mult_p1, ncols)
            spec_w = self._rfft_p(values)
            out += self._irfft_p(spec_w * self._diff_mult, ncols)
        return out

    def open_rhs(self, values):
        if not self._open:
            return np.zeros_like(values)
        ncols = values.shape[1]
        spec_pw = self._rfft_p(self._p_row * values)
        out = self._gamma2 * self._irfft_p(spec_pw * self._mult_p1, ncols)
        out += self._irfft_p(self._rfft_p(values) * self._diff_mult, ncols)
        return out


def moyal_rhs(state, ham):
    """dW/dt for the closed system; the hbar series is truncated exactly."""
    op = MoyalOperator(state.grid, ham, state.hbar)
    return op.rhs(state.values)


def classical_liouville_rhs(state, ham):
    """The l = 0 (classical) truncation of the series."""
    op = MoyalOperator(state.grid, ham, state.hbar)
    return op.rhs(state.values, classical_only=True)


def open_system_rhs(state, spec):
    """Friction/diffusion generator alone: 2 gamma d_p(p W) + D d_p^2 W."""
    free = hamiltonian(mass=state.mass)
    op = MoyalOperator(state.grid, free, state.hbar, open_system=spec)
    return op.open_rhs(state.values)
