"""Explicit time integration of Wigner states and s <= 2 hierarchies.

Method of lines: spectral derivatives in phase space, fixed-step rk4 or
Euler in time, guarded by an advective CFL bound on both axes. Optional
wavelet thresholding of each right-hand-side evaluation carries the
evolution on sparse coefficients; a ladder of dyadically refined grids
plus the scale-cutoff test picks the working resolution.
"""

from dataclasses import dataclass, field

import numpy as np

from .diagnostics import Thresholds, compute_record
from .errors import (
    CflError,
    ConfigurationError,
    DimensionError,
    InstabilityError,
)
from .moyal import MoyalOperator, OpenSystemSpec
from .mra import WaveletSpec, dwt_forward, dwt_inverse, fock_norm, refine_until
from .phasespace import HierarchyState, PairWignerState, WignerState

INTEGRATORS = ("rk4", "euler")


@dataclass(frozen=True)
class EvolveConfig:
    dt: float
    t_final: float
    integrator: str = "rk4"
    snapshot_stride: int = 10
    compression_epsilon: float = None
    resolution_epsilon: float = None

    def __post_init__(self):
        if self.dt <= 0 or self.t_final <= 0:
            raise ConfigurationError("dt and t_final must be positive")
        if self.integrator not in INTEGRATORS:
            raise ConfigurationError(
                "integrator must be one of %s" % (INTEGRATORS,)
            )
        if self.snapshot_stride < 1:
            raise ConfigurationError("snapshot_stride must be >= 1")
        if self.compression_epsilon is not None and self.compression_epsilon < 0:
            raise ConfigurationError("compression epsilon must be >= 0")

    @property
    def n_steps(self):
        n = int(round(self.t_final / self.dt))
        return max(n, 1)


@dataclass
class Trajectory:
    snapshots: list                      # [(time, state)]
    records: list                        # DiagnosticsRecord per snapshot
    compression_ratios: list = None      # aligned with snapshots when compressed
    warnings: list = field(default_factory=list)

    @property
    def times(self):
        return [t for t, _ in self.snapshots]

    @property
    def states(self):
        return [s for _, s in self.snapshots]

    def final(self):
        return self.snapshots[-1][1]


@dataclass
class HierarchyTrajectory:
    snapshots: list                      # [(time, HierarchyState)]
    fock_norms: list
    records: list                        # level-1 diagnostics per snapshot
    warnings: list = field(default_factory=list)

    def final(self):
        return self.snapshots[-1][1]


def cfl_bound(grid, ham, open_system=None):
    """Largest admissible dt: advective bounds on both axes (0.5 safety
    factor) plus, for diffusive runs, the spectral rk4 real-axis limit."""
    bound = 0.5 * ham.mass * grid.dq / max(grid.p_abs_max, 1e-300)
    du = ham.potential.derivative(1)
    if not du.is_zero():
        u_max = float(np.abs(du(grid.q)).max())
        if u_max > 0.0:
            bound = min(bound, 0.5 * grid.dp / u_max)
    if open_system is not None and open_system.diffusion > 0.0:
        bound = min(bound, 0.25 * grid.dp ** 2 / open_system.diffusion)
    return bound


def check_cfl(grid, ham, dt, open_system=None):
    bound = cfl_bound(grid, ham, open_system)
    if dt > bound * (1.0 + 1e-12):
        raise CflError(
            "dt = %g violates the stability bound %g" % (dt, bound)
        )


def _advance(values, rhs, dt, integrator):
    if integrator == "euler":
        return values + dt * rhs(values)
    k1 = rhs(values)
    k2 = rhs(values + (0.5 * dt) * k1)
    k3 = rhs(values + (0.5 * dt) * k2)
    k4 = rhs(values + dt * k3)
    return values + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(state, ham, open_system=None, dt=1e-3, integrator="rk4"):
    """One explicit step of the closed-plus-open right-hand side."""
    check_cfl(state.grid, ham, dt, open_system)
    op = MoyalOperator(state.grid, ham, state.hbar, open_system)
    values = _advance(state.values, op.rhs, dt, integrator)
    if not np.isfinite(values).all():
        raise InstabilityError("non-finite values after one step", step_index=1,
                               time=state.time + dt)
    return state.with_values(values, time=state.time + dt)


class _CompressionFilter:
    """Thresholds each RHS evaluation in the wavelet domain."""

    def __init__(self, rhs, epsilon_c, wavelet, ratios):
        self.rhs = rhs
        self.epsilon_c = epsilon_c
        self.wavelet = wavelet
        self.ratios = ratios

    def _blocks(self, decomp):
        yield decomp.approx
        for j in decomp.details:
            blk = decomp.details[j]
            if isinstance(blk, dict):
                yield from blk.values()
            else:
                yield blk

    def __call__(self, values):
        out = self.rhs(values)
        decomp = dwt_forward(out, self.wavelet)
        peak = max(np.abs(b).max() for b in self._blocks(decomp))
        cut = self.epsilon_c * peak
        total = kept = 0
        for block in self._blocks(decomp):
            mask = np.abs(block) < cut
            block[mask] = 0.0
            total += block.size
            kept += int(block.size - mask.sum())
        self.ratios.append(total / max(kept, 1))
        return dwt_inverse(decomp)


def _run_level(values, rhs, cfg, on_snapshot):
    """Shared stepping loop; identical float operations for every caller."""
    dt = cfg.dt
    on_snapshot(0, values)
    for k in range(1, cfg.n_steps + 1):
        values = _advance(values, rhs, dt, cfg.integrator)
        if not np.isfinite(values).all():
            raise InstabilityError(
                "non-finite values during evolution", step_index=k, time=k * dt
            )
        if k % cfg.snapshot_stride == 0 or k == cfg.n_steps:
            on_snapshot(k, values)
    return values


def evolve(state, ham, open_system=None, cfg=None, thresholds=None,
           wavelet=WaveletSpec(), packet_depth=4):
    """Evolve a single Wigner state, recording diagnostics per snapshot."""
    if cfg is None:
        raise ConfigurationError("an EvolveConfig is required")
    check_cfl(state.grid, ham, cfg.dt, open_system)
    if thresholds is None:
        thresholds = Thresholds.for_count(state.values.size)
    op = MoyalOperator(state.grid, ham, state.hbar, open_system)
    rhs = op.rhs
    ratios = None
    ratio_log = []
    if cfg.compression_epsilon is not None:
        rhs = _CompressionFilter(op.rhs, cfg.compression_epsilon, wavelet, ratio_log)
        ratios = []
    traj = Trajectory(snapshots=[], records=[], compression_ratios=ratios)
    seen = [0]

    def on_snapshot(k, values):
        snap = state.with_values(values.copy(), time=k * cfg.dt)
        traj.snapshots.append((snap.time, snap))
        traj.records.append(
            compute_record(snap, thresholds, wavelet, packet_depth)
        )
        if ratios is not None:
            window = ratio_log[seen[0]:]
            seen[0] = len(ratio_log)
            ratios.append(float(np.mean(window)) if window else 1.0)
        drift = abs(traj.records[-1].norm - traj.records[0].norm)
        if drift > 1e-6 and not traj.warnings:
            traj.warnings.append(
                "norm drift %.3e beyond tolerance at t=%g" % (drift, snap.time)
            )

    _run_level(state.values, rhs, cfg, on_snapshot)
    return traj


def evolve_compressed(state, ham, open_system=None, cfg=None, **kwargs):
    """evolve with wavelet-thresholded stepping; cfg must set the threshold."""
    if cfg is None or cfg.compression_epsilon is None:
        raise ConfigurationError("cfg.compression_epsilon is required")
    return evolve(state, ham, open_system, cfg, **kwargs)


# ---------------------------------------------------------------------------
# Hierarchy evolution
# ---------------------------------------------------------------------------

class PairMoyalOperator:
    """Sum of single-particle generators acting on (q1, p1) and (q2, p2).

    Same series coefficients as MoyalOperator, applied along axes (0, 1)
    and (2, 3) of the 4-D array with broadcast multipliers.
    """

    def __init__(self, grid, ham, hbar, open_system=None):
        import scipy.fft as sfft
        from math import factorial
        from .moyal import _multiplier

        self.grid = grid
        self._sfft = sfft
        orders = ham.moyal_orders
        mult_q = _multiplier(grid.n_q, grid.dq, 1)
        self._terms = []          # (q_axis, p_axis, stream, u_cols, p_mults)
        for q_axis, p_axis in ((0, 1), (2, 3)):
            stream = -self._expand(grid.p, p_axis) / ham.mass
            u_cols, p_mults = [], []
            for ell, order in enumerate(orders):
                coeff = ((-1.0) ** ell * (hbar / 2.0) ** (2 * ell)
                         / factorial(order))
                u_cols.append(self._expand(
                    coeff * ham.potential.derivative(order)(grid.q), q_axis))
                p_mults.append(self._expand(
                    _multiplier(grid.n_p, grid.dp, order), p_axis))
            self._terms.append((
                q_axis, p_axis, stream, u_cols, p_mults,
                self._expand(mult_q, q_axis),
            ))
        self._open = open_system is not None and not open_system.is_closed()
        if self._open:
            self._gamma2 = 2.0 * open_system.gamma
            self._open_parts = []
            for q_axis, p_axis in ((0, 1), (2, 3)):
                self._open_parts.append((
                    p_axis,
                    self._expand(grid.p, p_axis),
                    self._expand(_multiplier(grid.n_p, grid.dp, 1), p_axis),
                    open_system.diffusion
                    * self._expand(_multiplier(grid.n_p, grid.dp, 2), p_axis),
                ))

    @staticmethod
    def _expand(vec, axis):
        shape = [1, 1, 1, 1]
        shape[axis] = len(vec)
        return np.asarray(vec).reshape(shape)

    def _deriv(self, values, mult, axis, n):
        spec = self._sfft.rfft(values, axis=axis)
        return self._sfft.irfft(spec * mult, n=n, axis=axis)

    def rhs(self, values):
        g = self.grid
        out = np.zeros_like(values)
        for q_axis, p_axis, stream, u_cols, p_mults, mult_q in self._terms:
            out += stream * self._deriv(values, mult_q, q_axis, g.n_q)
            if u_cols:
                spec_p = self._sfft.rfft(values, axis=p_axis)
                for u_col, p_mult in zip(u_cols, p_mults):
                    out += u_col * self._sfft.irfft(
                        spec_p * p_mult, n=g.n_p, axis=p_axis)
        if self._open:
            for p_axis, p_vec, mult1, diff_mult in self._open_parts:
                out += self._gamma2 * self._deriv(
                    p_vec * values, mult1, p_axis, g.n_p)
                out += self._sfft.irfft(
                    self._sfft.rfft(values, axis=p_axis) * diff_mult,
                    n=g.n_p, axis=p_axis)
        return out


def evolve_hierarchy(hierarchy, hams, open_system=None, cfg=None,
                     thresholds=None, wavelet=WaveletSpec(), packet_depth=4):
    """Evolve each level independently under its own Hamiltonian.

    hams is one HamiltonianSpec per level (a single spec is broadcast).
    The vacuum component w0 is constant. A one-level hierarchy
    reproduces evolve() exactly: both run the same stepping loop.
    """
    if cfg is None:
        raise ConfigurationError("an EvolveConfig is required")
    levels = hierarchy.levels
    if not levels:
        raise ConfigurationError("hierarchy must have at least one level")
    if not isinstance(hams, (list, tuple)):
        hams = [hams] * len(levels)
    if len(hams) != len(levels):
        raise DimensionError("need one Hamiltonian per hierarchy level")
    for level, ham in zip(levels, hams):
        check_cfl(level.grid, ham, cfg.dt, open_system)

    operators = []
    for level, ham in zip(levels, hams):
        if isinstance(level, PairWignerState):
            operators.append(PairMoyalOperator(level.grid, ham, level.hbar,
                                               open_system))
        else:
            operators.append(MoyalOperator(level.grid, ham, level.hbar,
                                           open_system))

    snapshots = {}

    def collector(slot):
        def on_snapshot(k, values):
            snapshots.setdefault(k, [None] * len(levels))[slot] = values.copy()
        return on_snapshot

    for slot, (level, op) in enumerate(zip(levels, operators)):
        _run_level(level.values, op.rhs, cfg, collector(slot))

    if thresholds is None:
        thresholds = Thresholds.for_count(levels[0].values.size)
    traj = HierarchyTrajectory(snapshots=[], fock_norms=[], records=[])
    for k in sorted(snapshots):
        time = k * cfg.dt
        new_levels = tuple(
            lvl.with_values(vals, time=time)
            for lvl, vals in zip(levels, snapshots[k])
        )
        hstate = HierarchyState(hierarchy.w0, new_levels)
        traj.snapshots.append((time, hstate))
        traj.fock_norms.append(fock_norm(hstate))
        traj.records.append(
            compute_record(new_levels[0], thresholds, wavelet, packet_depth)
        )
    return traj


# ---------------------------------------------------------------------------
# Resolution selection
# ---------------------------------------------------------------------------

@dataclass
class ResolutionResult:
    grid: object
    state: WignerState
    residuals: list
    converged: bool


def _restrict(state, coarse):
    fq = state.grid.n_q // coarse.n_q
    fp = state.grid.n_p // coarse.n_p
    return WignerState(
        coarse, np.ascontiguousarray(state.values[::fq, ::fp]),
        state.hbar, state.mass, state.time,
    )


def select_resolution(run_on_grid, epsilon, grids):
    """Run the scenario over a dyadic grid ladder until the cutoff test passes.

    Final states of consecutive grids are restricted to the coarsest grid
    and compared in the measure-weighted l2 norm; returns the first grid
    whose residual against its refinement is within epsilon.
    """
    if len(grids) < 2:
        raise ConfigurationError("need at least two grids in the ladder")
    base = grids[0]
    for prev, nxt in zip(grids, grids[1:]):
        same_bounds = (
            prev.q_min == nxt.q_min and prev.q_max == nxt.q_max
            and prev.p_min == nxt.p_min and prev.p_max == nxt.p_max
        )
        if not same_bounds or nxt.n_q != 2 * prev.n_q or nxt.n_p != 2 * prev.n_p:
            raise ConfigurationError("grid ladder must be a dyadic refinement")

    finals = {}

    def build(index):
        if index not in finals:
            finals[index] = run_on_grid(grids[index])
        return _restrict(finals[index], base)

    result = refine_until(build, epsilon, len(grids) - 1, n_min=0)
    return ResolutionResult(
        grids[result.level], finals[result.level], result.residuals,
        result.converged,
    )
