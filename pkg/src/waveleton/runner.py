"""Scenario execution and offline analysis.

A run directory holds: manifest.json (config echo, run id, resolved
thresholds, snapshot checksums), NNNN.wigr grid dumps, diagnostics.csv,
optional heatmaps / compressed dumps, and report.txt. Everything written
is a pure function of the config text and the build, so repeated runs
are bitwise identical.
"""

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import backend_name
from .diagnostics import (
    Thresholds,
    classify,
    compute_record,
    format_record,
    read_diagnostics_csv,
    scale_spectrum,
    write_diagnostics_csv,
    write_pgm,
    write_ppm,
)
from .errors import (
    ChecksumError,
    ConfigurationError,
    EngineError,
    UnsupportedConfigurationError,
)
from .moyal import OpenSystemSpec, Polynomial, hamiltonian
from .mra import WaveletSpec, dwt_forward, write_decomposition
from .oracle import schrodinger_oracle
from .phasespace import (
    HierarchyState,
    Wavefunction,
    WignerState,
    initial_state_library,
    make_grid,
    pair_product,
    read_wigner,
    wavefunction_on_grid,
    wignerize,
    write_wigner,
    write_wigner_csv,
)
from .scenario import ScenarioConfig, load_scenario, parse_scenario, serialize_scenario
from .solver import (
    EvolveConfig,
    cfl_bound,
    check_cfl,
    evolve,
    evolve_hierarchy,
    select_resolution,
)

OUTPUT_ENV = "WAVELETON_OUTPUT_DIR"
_LADDER_CAP = 1024


def bundled_scenarios():
    root = Path(__file__).parent / "scenarios"
    return sorted(p.stem for p in root.glob("*.cfg"))


def resolve_config_path(name_or_path):
    """Accept a path to a scenario file or the name of a bundled one."""
    path = Path(name_or_path)
    if path.exists():
        return path
    bundled = Path(__file__).parent / "scenarios" / (str(name_or_path) + ".cfg")
    if bundled.exists():
        return bundled
    raise ConfigurationError(
        "no scenario %r (bundled: %s)" % (str(name_or_path), ", ".join(bundled_scenarios()))
    )


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _build_grid(cfg):
    return make_grid(
        cfg.grid.n_q, cfg.grid.n_p,
        (cfg.grid.q_min, cfg.grid.q_max),
        (cfg.grid.p_min, cfg.grid.p_max),
        cfg.grid.boundary,
    )


def _build_hamiltonian(cfg, level=1):
    coeffs = cfg.hamiltonian.potential
    if level == 2 and cfg.hamiltonian.potential_level2 is not None:
        coeffs = cfg.hamiltonian.potential_level2
    return hamiltonian(cfg.hamiltonian.mass, coeffs, cfg.hamiltonian.label)


def _build_initial(cfg, grid):
    hbar = cfg.hamiltonian.hbar
    mass = cfg.hamiltonian.mass
    ini = cfg.initial_state
    if ini.file is not None:
        values = np.load(ini.file)
        psi = wavefunction_on_grid(grid, values).normalize()
        return wignerize(psi, grid, hbar=hbar, mass=mass), psi
    params = {"q0": ini.q0, "p0": ini.p0}
    if ini.name == "coherent" and ini.sigma is not None:
        params["sigma"] = ini.sigma
    if ini.name == "squeezed" and ini.squeeze is not None:
        params["squeeze"] = ini.squeeze
    if ini.name == "cat":
        params["parity"] = ini.parity
        if ini.sigma is not None:
            params["sigma"] = ini.sigma
    if ini.name == "thermal":
        params["purity"] = ini.purity
    state = initial_state_library(ini.name, grid, hbar=hbar, mass=mass, **params)
    if isinstance(state, Wavefunction):
        return wignerize(state, grid, hbar=hbar, mass=mass), state
    return state, None


def _build_thresholds(cfg, grid):
    d = cfg.diagnostics
    count = grid.n_q * grid.n_p
    overrides = dict(
        loc_hi=d.loc_hi, loc_lo=d.loc_lo,
        purity_hi=d.purity_hi, purity_lo=d.purity_lo,
        neg_hi=d.neg_hi, neg_lo=d.neg_lo,
    )
    if d.entropy_lo is not None:
        overrides["entropy_lo"] = d.entropy_lo
    if d.entropy_hi is not None:
        overrides["entropy_hi"] = d.entropy_hi
    return Thresholds.for_count(count, **overrides)


def _resolve_dt(cfg, grid, ham, open_spec):
    if cfg.evolve.dt is not None:
        return cfg.evolve.dt
    return 0.8 * cfl_bound(grid, ham, open_spec)


def _run_directory(cfg, config_text, output_dir):
    if output_dir is not None:
        return Path(output_dir)
    if cfg.output.directory is not None:
        return Path(cfg.output.directory)
    run_id = hashlib.sha256(config_text.encode()).hexdigest()[:12]
    root = Path(os.environ.get(OUTPUT_ENV, "runs"))
    return root / ("%s-%s" % (cfg.hamiltonian.label, run_id))


def _write_snapshots(run_dir, snapshots, formats, wavelet):
    names = []
    for index, (_, state) in enumerate(snapshots):
        stem = "%04d" % index
        if "wigr" in formats:
            write_wigner(run_dir / (stem + ".wigr"), state)
            names.append(stem + ".wigr")
        if "csv" in formats and index == len(snapshots) - 1:
            write_wigner_csv(run_dir / (stem + ".csv"), state)
        if "ppm" in formats:
            write_ppm(run_dir / (stem + ".ppm"), state)
        if "pgm" in formats:
            write_pgm(run_dir / (stem + ".pgm"), state)
        if "mrad" in formats:
            write_decomposition(run_dir / (stem + ".mrad"),
                                dwt_forward(state.values, wavelet))
    return names


def _manifest(run_dir, payload):
    with open(run_dir / "manifest.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _threshold_dict(t):
    return {
        "loc_hi": t.loc_hi, "loc_lo": t.loc_lo,
        "entropy_lo": t.entropy_lo, "entropy_hi": t.entropy_hi,
        "purity_hi": t.purity_hi, "purity_lo": t.purity_lo,
        "neg_hi": t.neg_hi, "neg_lo": t.neg_lo,
    }


def run_scenario(config, output_dir=None, epsilon_override=None, seed=None,
                 threads=1):
    """Execute one scenario; returns the run directory path."""
    if isinstance(config, (str, Path)):
        config = load_scenario(resolve_config_path(config))
    config_text = serialize_scenario(config)
    run_id = hashlib.sha256(config_text.encode()).hexdigest()[:12]

    grid = _build_grid(config)
    ham = _build_hamiltonian(config)
    open_spec = OpenSystemSpec(config.open_system.gamma,
                               config.open_system.diffusion)
    wavelet = WaveletSpec(vanishing_moments=config.diagnostics.vanishing_moments)
    thresholds = _build_thresholds(config, grid)
    dt = _resolve_dt(config, grid, ham, open_spec)
    resolution_note = None

    epsilon = (epsilon_override if epsilon_override is not None
               else config.evolve.resolution_epsilon)
    if epsilon is not None:
        base_count = grid.n_q * grid.n_p
        ladder = [grid]
        while ladder[-1].n_q * 2 <= _LADDER_CAP and len(ladder) < 3:
            ladder.append(ladder[-1].refine())

        def run_on(g):
            state0, _ = _build_initial(config, g)
            cfg_g = EvolveConfig(
                dt=dt, t_final=config.evolve.t_final, integrator=config.evolve.integrator,
                snapshot_stride=10 ** 9,
            )
            t_g = _build_thresholds(config, g).scaled_for_grid(
                g.n_q * g.n_p, base_count)
            return evolve(state0, ham, open_spec, cfg_g, thresholds=t_g,
                          wavelet=wavelet,
                          packet_depth=config.diagnostics.packet_depth).final()

        selection = select_resolution(run_on, epsilon, ladder)
        resolution_note = {
            "epsilon": epsilon,
            "residuals": selection.residuals,
            "converged": selection.converged,
            "chosen_n_q": selection.grid.n_q,
        }
        thresholds = thresholds.scaled_for_grid(
            selection.grid.n_q * selection.grid.n_p, base_count)
        grid = selection.grid

    cfg_evolve = EvolveConfig(
        dt=dt,
        t_final=config.evolve.t_final,
        integrator=config.evolve.integrator,
        snapshot_stride=config.evolve.snapshot_stride,
        compression_epsilon=config.evolve.compression_epsilon,
    )
    check_cfl(grid, ham, dt, open_spec)

    run_dir = _run_directory(config, config_text, output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "scenario.cfg", "w") as fh:
        fh.write(config_text)

    payload = {
        "kind": "run",
        "run_id": run_id,
        "package_version": __version__,
        "kernel_backend": backend_name(),
        "hbar": config.hamiltonian.hbar,
        "mass": config.hamiltonian.mass,
        "wavelet_moments": wavelet.vanishing_moments,
        "packet_depth": config.diagnostics.packet_depth,
        "thresholds": _threshold_dict(thresholds),
        "dt": dt,
        "seed": seed,
        "resolution_selection": resolution_note,
    }

    if config.hierarchy.levels >= 1:
        payload.update(_run_hierarchy(config, grid, ham, open_spec, cfg_evolve,
                                      thresholds, wavelet, run_dir))
    else:
        state0, _ = _build_initial(config, grid)
        traj = evolve(state0, ham, open_spec, cfg_evolve, thresholds=thresholds,
                      wavelet=wavelet, packet_depth=config.diagnostics.packet_depth)
        names = _write_snapshots(run_dir, traj.snapshots, config.output.formats,
                                 wavelet)
        write_diagnostics_csv(run_dir / "diagnostics.csv", traj.records)
        payload["snapshot_times"] = [t for t, _ in traj.snapshots]
        payload["snapshots"] = names
        payload["warnings"] = traj.warnings
        if traj.compression_ratios is not None:
            payload["compression_ratios"] = traj.compression_ratios
        _write_report(run_dir, traj.records)

    checksums = {}
    for name in payload.get("snapshots", []):
        checksums[name] = _sha256(run_dir / name)
    checksums["diagnostics.csv"] = _sha256(run_dir / "diagnostics.csv")
    payload["checksums"] = checksums
    _manifest(run_dir, payload)
    return run_dir


def _run_hierarchy(config, grid, ham, open_spec, cfg_evolve, thresholds,
                   wavelet, run_dir):
    state1, _ = _build_initial(config, grid)
    if not isinstance(state1, WignerState):
        raise UnsupportedConfigurationError("hierarchy needs a Wigner level 1")
    levels = [state1]
    if config.hierarchy.levels >= 2:
        h = config.hierarchy
        pair_grid = make_grid(h.pair_n, h.pair_n,
                              (h.pair_q_min, h.pair_q_max),
                              (h.pair_p_min, h.pair_p_max))
        base, _ = _build_initial(config, pair_grid)
        levels.append(pair_product(base, base))
    hierarchy = HierarchyState(config.hierarchy.w0, tuple(levels))
    hams = [_build_hamiltonian(config, level=s + 1) for s in range(len(levels))]
    traj = evolve_hierarchy(hierarchy, hams, open_spec, cfg_evolve,
                            thresholds=thresholds, wavelet=wavelet,
                            packet_depth=config.diagnostics.packet_depth)
    snaps = [(t, h.levels[0]) for t, h in traj.snapshots]
    names = _write_snapshots(run_dir, snaps, config.output.formats, wavelet)
    write_diagnostics_csv(run_dir / "diagnostics.csv", traj.records)
    with open(run_dir / "fock_norm.csv", "w") as fh:
        fh.write("t,fock_norm\n")
        for (t, _), fn in zip(traj.snapshots, traj.fock_norms):
            fh.write("%r,%r\n" % (t, fn))
    _write_report(run_dir, traj.records)
    return {
        "snapshot_times": [t for t, _ in traj.snapshots],
        "snapshots": names,
        "warnings": traj.warnings,
        "hierarchy_levels": len(levels),
        "fock_norms": traj.fock_norms,
    }


def _write_report(run_dir, records):
    with open(run_dir / "report.txt", "w") as fh:
        first, last = records[0], records[-1]
        fh.write("snapshots: %d\n" % len(records))
        fh.write("label path: %s -> %s\n" % (first.label, last.label))
        fh.write("final: t=%r norm=%r purity=%r negativity=%r entropy=%r "
                 "localization=%r label=%s\n"
                 % (last.time, last.norm, last.purity, last.negativity_volume,
                    last.shannon_entropy, last.localization, last.label))


def oracle_run(config, output_dir=None):
    """Split-operator cross-validation run with matching timestamps."""
    if isinstance(config, (str, Path)):
        config = load_scenario(resolve_config_path(config))
    if config.open_system.gamma != 0.0 or config.open_system.diffusion != 0.0:
        raise UnsupportedConfigurationError(
            "the Schrodinger oracle only covers closed systems"
        )
    config_text = serialize_scenario(config)
    grid = _build_grid(config)
    ham = _build_hamiltonian(config)
    _, psi = _build_initial(config, grid)
    if psi is None:
        raise UnsupportedConfigurationError(
            "the Schrodinger oracle needs a pure initial state"
        )
    dt = _resolve_dt(config, grid, ham, OpenSystemSpec())
    n_steps = max(1, int(round(config.evolve.t_final / dt)))
    snaps = schrodinger_oracle(
        psi, ham, grid, hbar=config.hamiltonian.hbar, dt=dt, n_steps=n_steps,
        snapshot_stride=config.evolve.snapshot_stride,
    )
    wavelet = WaveletSpec(vanishing_moments=config.diagnostics.vanishing_moments)
    thresholds = _build_thresholds(config, grid)
    records = [
        compute_record(state, thresholds, wavelet, config.diagnostics.packet_depth)
        for _, state in snaps
    ]
    run_dir = _run_directory(config, config_text + "#oracle", output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    names = _write_snapshots(run_dir, snaps, config.output.formats, wavelet)
    write_diagnostics_csv(run_dir / "diagnostics.csv", records)
    checksums = {name: _sha256(run_dir / name) for name in names}
    checksums["diagnostics.csv"] = _sha256(run_dir / "diagnostics.csv")
    _manifest(run_dir, {
        "kind": "oracle",
        "run_id": hashlib.sha256(config_text.encode()).hexdigest()[:12],
        "package_version": __version__,
        "kernel_backend": backend_name(),
        "hbar": config.hamiltonian.hbar,
        "mass": config.hamiltonian.mass,
        "wavelet_moments": wavelet.vanishing_moments,
        "packet_depth": config.diagnostics.packet_depth,
        "thresholds": _threshold_dict(thresholds),
        "dt": dt,
        "snapshot_times": [t for t, _ in snaps],
        "snapshots": names,
        "checksums": checksums,
    })
    return run_dir


def load_manifest(run_dir):
    path = Path(run_dir) / "manifest.json"
    if not path.exists():
        raise ConfigurationError("no manifest.json under %s" % run_dir)
    with open(path) as fh:
        return json.load(fh)


def analyze(run_dir, thresholds_override=None):
    """Recompute diagnostics from the stored dumps and verify determinism.

    Returns a report dict; raises ChecksumError for corrupted dumps and
    EngineError when the regenerated CSV does not match the stored one
    (only checked without a thresholds override, which may relabel).
    """
    run_dir = Path(run_dir)
    manifest = load_manifest(run_dir)
    names = manifest.get("snapshots", [])
    times = manifest.get("snapshot_times", [])
    for index, name in enumerate(names):
        path = run_dir / name
        if not path.exists():
            raise EngineError("snapshot %04d missing (%s)" % (index, name))
        recorded = manifest["checksums"].get(name)
        if recorded and _sha256(path) != recorded:
            raise ChecksumError("checksum mismatch for %s" % name)

    tvals = manifest["thresholds"]
    if thresholds_override:
        tvals = dict(tvals, **thresholds_override)
    thresholds = Thresholds(**tvals)
    wavelet = WaveletSpec(vanishing_moments=manifest["wavelet_moments"])
    depth = manifest["packet_depth"]

    records = []
    for name, time in zip(names, times):
        state = read_wigner(run_dir / name, hbar=manifest["hbar"],
                            mass=manifest["mass"], time=time)
        records.append(compute_record(state, thresholds, wavelet, depth))
        spectrum = scale_spectrum(state.values, wavelet)
        stem = name.split(".")[0]
        with open(run_dir / ("spectrum_%s.csv" % stem), "w") as fh:
            fh.write("scale,frequency,energy\n")
            fh.write("approx,0,%r\n" % spectrum.approx_energy)
            for j in sorted(spectrum.energies):
                fh.write("%d,%r,%r\n" % (j, spectrum.frequencies[j],
                                         spectrum.energies[j]))

    write_diagnostics_csv(run_dir / "diagnostics_regen.csv", records)
    report = {"snapshots": len(records), "labels": [r.label for r in records]}
    if not thresholds_override:
        stored = (run_dir / "diagnostics.csv").read_bytes()
        regen = (run_dir / "diagnostics_regen.csv").read_bytes()
        report["bitwise_match"] = stored == regen
        if not report["bitwise_match"]:
            raise EngineError("regenerated diagnostics.csv differs from the stored one")
    return report


def classify_run(run_dir, thresholds_override=None):
    """Relabel the stored numeric diagnostics; bitwise pure in the numbers."""
    run_dir = Path(run_dir)
    manifest = load_manifest(run_dir)
    tvals = manifest["thresholds"]
    if thresholds_override:
        tvals = dict(tvals, **thresholds_override)
    thresholds = Thresholds(**tvals)
    records = read_diagnostics_csv(run_dir / "diagnostics.csv")
    return [(r.time, classify(r, thresholds)) for r in records]


def _sweep_worker(args):
    text, output_dir = args
    return str(run_scenario(parse_scenario(text), output_dir=output_dir))


def sweep(config, param, values, output_root=None, threads=1):
    """Run the scenario once per parameter value, optionally in parallel."""
    if isinstance(config, (str, Path)):
        config = load_scenario(resolve_config_path(config))
    root = Path(output_root) if output_root else Path(
        os.environ.get(OUTPUT_ENV, "runs")) / "sweep"
    jobs = []
    for raw in values:
        variant = config.with_value(param, raw)
        sub = root / ("%s=%s" % (param.replace(".", "_"), raw))
        jobs.append((serialize_scenario(variant), str(sub)))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_sweep_worker, jobs))
    return [_sweep_worker(job) for job in jobs]
