#!/usr/bin/env python3
"""Regenerates the stored Gaussian Wigner field used as a regression input.

Run from the repository root:  python tests/data/make_regression.py
"""
from pathlib import Path

from waveleton.phasespace import initial_state_library, make_grid, wignerize, write_wigner

grid = make_grid(64, 64, (-8.0, 8.0), (-8.0, 8.0))
state = wignerize(initial_state_library("coherent", grid, q0=1.0, p0=0.5), grid)
write_wigner(Path(__file__).parent / "gaussian_wigner_64.wigr", state)
print("wrote gaussian_wigner_64.wigr")
