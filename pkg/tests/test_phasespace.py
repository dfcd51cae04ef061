import struct

import numpy as np
import pytest
from scipy import integrate

from waveleton.errors import ConfigurationError, DimensionError
from waveleton.phasespace import (
    HierarchyState,
    Wavefunction,
    WignerState,
    initial_state_library,
    make_grid,
    marginals,
    overlap,
    pair_product,
    read_wigner,
    wignerize,
    write_wigner,
    write_wigner_csv,
)


class TestMakeGrid:
    def test_spacing_16(self):
        g = make_grid(16, 16, (-1, 1), (-1, 1))
        assert g.dq == 0.125 and g.dp == 0.125

    def test_spacing_rectangular(self):
        g = make_grid(64, 32, (-8, 8), (-4, 4))
        assert g.dq == 0.25 and g.dp == 0.25

    def test_power_of_two_required(self):
        with pytest.raises(ConfigurationError, match="power of two"):
            make_grid(17, 16, (-1, 1), (-1, 1))

    def test_inverted_bounds(self):
        with pytest.raises(ConfigurationError, match="inverted"):
            make_grid(16, 16, (1, -1), (-1, 1))

    def test_unknown_boundary(self):
        with pytest.raises(ConfigurationError):
            make_grid(16, 16, (-1, 1), (-1, 1), boundary="reflecting")

    def test_cell_measure_positive(self):
        g = make_grid(32, 64, (-2, 2), (-3, 3))
        assert g.cell > 0


class TestWignerize:
    def test_ground_state_peak_matches_quadrature(self, grid128, ground_state):
        # independent route: quadrature of the chord integral at (0, 0)
        psi = lambda q: np.pi ** -0.25 * np.exp(-q * q / 2.0)
        quad, _ = integrate.quad(lambda y: psi(y / 2) * psi(-y / 2), -20, 20)
        expected = quad / (2.0 * np.pi)
        i0 = np.argmin(np.abs(grid128.q))
        j0 = np.argmin(np.abs(grid128.p))
        assert abs(ground_state.values[i0, j0] - expected) < 1e-12
        assert abs(expected - 1.0 / np.pi) < 1e-10

    def test_unit_mass(self, ground_state, cat_state):
        assert abs(ground_state.total_mass() - 1.0) < 1e-8
        assert abs(cat_state.total_mass() - 1.0) < 1e-8

    def test_position_marginal(self, grid128):
        psi = initial_state_library("coherent", grid128, q0=1.0, p0=0.5)
        w = wignerize(psi, grid128)
        pos, _ = marginals(w)
        assert np.abs(pos - psi.density()).max() < 1e-6

    def test_momentum_marginal_variance(self, grid128, ground_state):
        # sigma_p^2 = hbar m omega / 2 = 0.5 for the ground state
        _, mom = marginals(ground_state)
        var = float((mom * grid128.p ** 2).sum() * grid128.dp)
        assert abs(var - 0.5) < 1e-6

    def test_cat_fringe_period(self, grid128, cat_state):
        # interference along q = 0 oscillates like cos(2 q0 p / hbar)
        i0 = np.argmin(np.abs(grid128.q))
        row = cat_state.values[i0, :]
        spectrum = np.abs(np.fft.rfft(row))
        k = np.argmax(spectrum[1:]) + 1
        period = (grid128.p_max - grid128.p_min) / k
        assert abs(period - np.pi / 3.0) < grid128.dp

    def test_cat_against_analytic_formula(self, grid128, cat_state):
        q0 = 3.0
        n2 = 1.0 / (2.0 * (1.0 + np.exp(-q0 * q0)))
        qq, pp = np.meshgrid(grid128.q, grid128.p, indexing="ij")
        exact = (n2 / np.pi) * (
            np.exp(-(qq - q0) ** 2 - pp ** 2)
            + np.exp(-(qq + q0) ** 2 - pp ** 2)
            + 2.0 * np.exp(-qq ** 2 - pp ** 2) * np.cos(2.0 * q0 * pp)
        )
        assert np.abs(cat_state.values - exact).max() < 1e-7

    def test_pure_state_bound(self, ground_state, cat_state):
        bound = 1.0 / (np.pi * 1.0)
        assert ground_state.values.max() <= bound + 1e-6
        assert np.abs(cat_state.values).max() <= bound + 1e-6

    def test_parity_of_even_state(self, grid128):
        psi = initial_state_library("cat", grid128, q0=2.0)
        w = wignerize(psi, grid128).values
        flipped = np.roll(np.roll(w[::-1, :], 1, axis=0)[:, ::-1], 1, axis=1)
        assert np.abs(w - flipped).max() < 1e-10

    def test_norm_preservation(self, grid128):
        psi = initial_state_library("squeezed", grid128, q0=0.5, squeeze=0.4)
        w = wignerize(psi, grid128)
        assert abs(w.total_mass() - psi.norm_squared()) < 1e-8

    def test_grid_mismatch(self, grid128, grid64):
        psi = initial_state_library("coherent", grid64)
        with pytest.raises(DimensionError):
            wignerize(psi, grid128)

    def test_requires_normalization(self, grid128):
        psi = initial_state_library("coherent", grid128)
        doubled = Wavefunction(psi.q, 2.0 * psi.values)
        with pytest.raises(ConfigurationError, match="normalized"):
            wignerize(doubled, grid128)

    def test_nyquist_guard(self):
        g = make_grid(32, 32, (-8, 8), (-80, 80))
        psi = initial_state_library("coherent", g)
        with pytest.raises(ConfigurationError, match="Nyquist"):
            wignerize(psi, g)


class TestMarginals:
    def test_zero_state(self, grid64):
        w = WignerState(grid64, np.zeros((64, 64)))
        pos, mom = marginals(w)
        assert not pos.any() and not mom.any()

    def test_consistency(self, coherent_state):
        pos, mom = marginals(coherent_state)
        g = coherent_state.grid
        total = coherent_state.total_mass()
        assert abs(float(pos.sum() * g.dq) - total) < 1e-12
        assert abs(float(mom.sum() * g.dp) - total) < 1e-12


class TestOverlap:
    def test_purity_of_pure_state(self, ground_state):
        assert abs(overlap(ground_state, ground_state) - 1.0) < 1e-6

    def test_zero(self, ground_state):
        zero = ground_state.with_values(np.zeros_like(ground_state.values))
        assert overlap(ground_state, zero) == 0.0

    def test_displaced_gaussians(self, grid128):
        a = wignerize(initial_state_library("coherent", grid128, q0=3.0), grid128)
        b = wignerize(initial_state_library("coherent", grid128, q0=-3.0), grid128)
        assert abs(overlap(a, b) - np.exp(-18.0)) < 1e-12

    def test_symmetry_and_bilinearity(self, grid64, rng):
        w1 = WignerState(grid64, rng.standard_normal((64, 64)))
        w2 = WignerState(grid64, rng.standard_normal((64, 64)))
        w3 = WignerState(grid64, rng.standard_normal((64, 64)))
        assert overlap(w1, w2) == pytest.approx(overlap(w2, w1), abs=1e-15)
        combo = w1.with_values(2.0 * w1.values + 3.0 * w2.values)
        lhs = overlap(combo, w3)
        rhs = 2.0 * overlap(w1, w3) + 3.0 * overlap(w2, w3)
        assert lhs == pytest.approx(rhs, rel=1e-13)

    def test_grid_mismatch(self, grid64, grid128, ground_state):
        w = WignerState(grid64, np.zeros((64, 64)))
        with pytest.raises(DimensionError):
            overlap(w, ground_state)

    def test_hbar_mismatch(self, ground_state):
        other = WignerState(ground_state.grid, ground_state.values, hbar=2.0)
        with pytest.raises(DimensionError):
            overlap(ground_state, other)


class TestStateLibrary:
    def test_coherent_center(self, grid128):
        w = wignerize(initial_state_library("coherent", grid128, q0=1.0), grid128)
        g = grid128
        qc = float((w.values * g.q[:, None]).sum() * g.cell)
        pc = float((w.values * g.p[None, :]).sum() * g.cell)
        assert abs(qc - 1.0) < 1e-8 and abs(pc) < 1e-8

    def test_cat_normalized(self, grid128):
        psi = initial_state_library("cat", grid128, q0=3.0)
        assert abs(psi.norm_squared() - 1.0) < 1e-10

    def test_odd_cat(self, grid128):
        psi = initial_state_library("cat", grid128, q0=3.0, parity="odd")
        assert abs(psi.norm_squared() - 1.0) < 1e-10
        # odd parity vanishes at the origin
        i0 = np.argmin(np.abs(grid128.q))
        assert abs(psi.values[i0]) < 1e-12

    def test_thermal_purity(self, grid128):
        w = initial_state_library("thermal", grid128, purity=0.5)
        measured = 2.0 * np.pi * (w.values ** 2).sum() * grid128.cell
        assert abs(measured - 0.5) < 1e-3

    def test_squeezed_variance(self, grid128):
        psi = initial_state_library("squeezed", grid128, squeeze=0.5)
        dens = psi.density()
        var = float((dens * grid128.q ** 2).sum() * grid128.dq)
        assert abs(var - 0.5 * np.exp(-1.0)) < 1e-8

    def test_unknown_name(self, grid128):
        with pytest.raises(ConfigurationError, match="unknown initial state"):
            initial_state_library("plane_wave", grid128)

    def test_unused_params_rejected(self, grid128):
        with pytest.raises(ConfigurationError, match="unused"):
            initial_state_library("coherent", grid128, wobble=3)


class TestHierarchyTypes:
    def test_pair_product_mass(self, grid64):
        w = wignerize(initial_state_library("coherent", grid64), grid64)
        pair = pair_product(w, w)
        assert abs(pair.total_mass() - 1.0) < 1e-8

    def test_levels_validated(self, grid64):
        w = wignerize(initial_state_library("coherent", grid64), grid64)
        with pytest.raises(DimensionError):
            HierarchyState(1.0, (pair_product(w, w),))


class TestDumps:
    def test_wigr_roundtrip(self, tmp_path, coherent_state):
        path = tmp_path / "state.wigr"
        write_wigner(path, coherent_state)
        back = read_wigner(path)
        assert back.grid == coherent_state.grid
        assert np.array_equal(back.values, coherent_state.values)

    def test_wigr_header_layout(self, tmp_path, coherent_state):
        path = tmp_path / "state.wigr"
        write_wigner(path, coherent_state)
        raw = path.read_bytes()
        magic, version, n_q, n_p = struct.unpack_from("<4sIII", raw, 0)
        bounds = struct.unpack_from("<4d", raw, 16)
        assert magic == b"WIGR" and version == 1
        assert (n_q, n_p) == (128, 128)
        assert bounds == (-8.0, 8.0, -8.0, 8.0)
        assert len(raw) == 16 + 32 + 8 * 128 * 128
        first = struct.unpack_from("<d", raw, 48)[0]
        assert first == coherent_state.values[0, 0]

    def test_wigr_bad_magic(self, tmp_path):
        path = tmp_path / "junk.wigr"
        path.write_bytes(b"NOPE" + b"\0" * 60)
        with pytest.raises(ConfigurationError, match="magic"):
            read_wigner(path)

    def test_csv_export(self, tmp_path, grid64):
        w = wignerize(initial_state_library("coherent", grid64), grid64)
        path = tmp_path / "state.csv"
        write_wigner_csv(path, w)
        lines = path.read_text().splitlines()
        assert lines[0] == "q,p,W"
        assert len(lines) == 1 + 64 * 64
        q, p, val = (float(x) for x in lines[1].split(","))
        assert (q, p) == (-8.0, -8.0) and val == w.values[0, 0]
