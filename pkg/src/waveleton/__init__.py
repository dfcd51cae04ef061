"""Phase-space quantum dynamics on wavelet multiresolution grids.

Evolves quasiprobability distributions of polynomial-Hamiltonian systems
(single states and s <= 2 hierarchies, closed or with friction/diffusion),
decomposes them across dyadic scales with compactly supported wavelets,
and classifies the emerging patterns (localized, interference-dominated,
decoherent).
"""

__version__ = "0.1.0"

from .errors import (
    ChecksumError,
    CflError,
    ConfigParseError,
    ConfigurationError,
    DimensionError,
    EngineError,
    InstabilityError,
    ResolutionError,
    UnsupportedConfigurationError,
)
from .phasespace import (
    HierarchyState,
    PairWignerState,
    PhaseGrid,
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
)
from .moyal import (
    HamiltonianSpec,
    MoyalOperator,
    OpenSystemSpec,
    Polynomial,
    classical_liouville_rhs,
    hamiltonian,
    moyal_rhs,
    open_system_rhs,
    poly_derivative,
    spectral_derivative,
)
from .mra import (
    MraDecomposition,
    PacketBasis,
    WaveletSpec,
    best_basis,
    daubechies_filters,
    dwt_forward,
    dwt_inverse,
    fock_norm,
    read_decomposition,
    refine_until,
    scale_truncate,
    write_decomposition,
)
from .solver import (
    EvolveConfig,
    Trajectory,
    cfl_bound,
    evolve,
    evolve_compressed,
    evolve_hierarchy,
    select_resolution,
    step,
)
from .diagnostics import (
    DiagnosticsRecord,
    ObservableSpec,
    PhasePolynomial,
    ScaleSpectrum,
    Thresholds,
    classify,
    compute_record,
    expectation,
    localization,
    negativity_volume,
    packet_entropy,
    purity,
    scale_spectrum,
)
from .oracle import schrodinger_oracle, split_operator_evolve
from .scenario import ScenarioConfig, load_scenario, parse_scenario, serialize_scenario
from .runner import analyze, classify_run, oracle_run, run_scenario, sweep
