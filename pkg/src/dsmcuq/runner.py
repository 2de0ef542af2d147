"""Configuration, time loop, record/replay plumbing and CSV emission.

A run is fully determined by (config, seed): the sampling draws do not
depend on M, the collision draws are consumed in a pinned order (sround,
permutation, per-pair angles, per-pair rejections), and wall times go only
to the manifest, so CSV outputs are byte-identical across repeats. The
convergence studies lean on that: record the collision tree once at the
reference M, then replay it at every lower M so the error is pure gPC
truncation with no statistical noise in the difference.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import __version__
from .collision import (AffineGamma, CollisionTree, Indicator, KacKernel,
                        MaxwellKernel, Sigmoid, SigmoidThermalized, TreeCursor,
                        VHSKernel, step, vhs_sigma_bound)
from .diagnostics import (DensityGrid, MomentSeries, _entry_from_nodal,
                          density_reconstruct, l2_error_vs_reference, moment,
                          stress_tensor, write_convergence_csv,
                          write_density_csv, write_metrics_csv,
                          write_moment_csv, write_nodal_csv)
from .ensemble import (Ensemble, KacSquaredGaussian, Maxwell2D, TwoGaussians2D,
                       sample_initial)
from .exact import (KacExactParams, Maxwell2DExactParams, kac_exact_density,
                    kac_exact_moment, maxwell2d_exact_marginal,
                    maxwell2d_exact_moment)
from .random_space import build_basis
from .rng import make_streams

TESTS = ("Kac", "Maxwell2D", "VHS", "VHSBivariate")
MODES = ("indicator", "sigmoid", "thermalized")
DENSITY_TIMES = (0.0, 1.0, 5.0)


@dataclass
class SimulationConfig:
    test: str = "Kac"
    n: int = 10_000
    m: int = 5
    h: int | None = None          # defaults to m
    dt: float = 0.1
    t_max: float = 5.0
    seed: int = 0
    kappa: float = 0.25           # Kac / Maxwell2D / univariate VHS
    kappa1: float = 0.5           # bivariate: temperature coordinate z1
    kappa2: float = 0.0           # bivariate: kernel exponent coordinate z2
    gamma: float = 0.0            # constant VHS exponent (univariate)
    c_gamma: float = 1.0 / (2.0 * np.pi)
    mode: str = "indicator"
    beta: float = 10.0
    bounds_lo: float = -5.0
    bounds_hi: float = 5.0
    n_v: int = 100
    coupling: str = "scaling"
    out: str = "out"
    record_tree: bool = False
    replay_tree: str | None = None

    def __post_init__(self):
        if self.test not in TESTS:
            raise ValueError(f"unknown test {self.test!r}; choose from {TESTS}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_max < 0:
            raise ValueError("t_max must be nonnegative")
        if self.n < 2:
            raise ValueError("need at least two particles")
        if self.h is None:
            self.h = self.m

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    @property
    def dims(self) -> int:
        return 2 if self.test == "VHSBivariate" else 1

    def kv_items(self):
        for f in fields(self):
            yield f.name, getattr(self, f.name)


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def config_from_mapping(d: dict) -> SimulationConfig:
    kwargs = {}
    typed = {f.name: f for f in fields(SimulationConfig)}
    for key, raw in d.items():
        key = key.strip().lower().replace("-", "_")
        if key == "tmax":
            key = "t_max"
        if key not in typed:
            raise ValueError(f"unknown config key {key!r}")
        if isinstance(raw, str):
            raw = raw.strip()
            if key in ("n", "m", "h", "seed", "n_v"):
                raw = int(raw)
            elif key in ("dt", "t_max", "kappa", "kappa1", "kappa2", "gamma",
                         "c_gamma", "beta", "bounds_lo", "bounds_hi"):
                raw = float(raw)
            elif key == "record_tree":
                raw = _BOOL[raw.lower()]
        kwargs[key] = raw
    return SimulationConfig(**kwargs)


def config_from_file(path) -> SimulationConfig:
    """Flat key = value text; # and ; start comments, blank lines skipped."""
    d = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].split(";", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = text.split("=", 1)
            d[key] = val
    return config_from_mapping(d)


# ---------------------------------------------------------------------------
# assembling the pieces a config describes

def _make_density(config: SimulationConfig):
    if config.test == "Kac":
        return KacSquaredGaussian(config.kappa)
    if config.test == "Maxwell2D":
        return Maxwell2D(config.kappa)
    if config.test == "VHS":
        return TwoGaussians2D(config.kappa)
    return TwoGaussians2D(config.kappa1)


def _make_kernel(config: SimulationConfig):
    if config.test == "Kac":
        return KacKernel()
    if config.test == "Maxwell2D":
        return MaxwellKernel()
    if config.test == "VHS":
        return VHSKernel(c_gamma=config.c_gamma, gamma=float(config.gamma))
    return VHSKernel(c_gamma=config.c_gamma,
                     gamma=AffineGamma(config.kappa2, coord=1))


def _make_mode(config: SimulationConfig):
    if config.mode == "indicator":
        return Indicator()
    if config.mode == "sigmoid":
        return Sigmoid(beta=config.beta)
    return SigmoidThermalized(beta=config.beta)


@dataclass
class RunManifest:
    config: SimulationConfig
    version: str
    stream_names: tuple
    walltimes: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"version = {self.version}\n")
            fh.write(f"streams = {','.join(self.stream_names)}\n")
            for key, val in self.config.kv_items():
                fh.write(f"{key} = {val}\n")
            for name in self.outputs:
                fh.write(f"output = {name}\n")
            for i, w in enumerate(self.walltimes):
                fh.write(f"walltime_{i:04d} = {w!r}\n")


@dataclass
class RunResult:
    config: SimulationConfig
    basis: object
    times: np.ndarray
    series: dict
    grids: dict
    energy: np.ndarray
    max_pair_energy_dev: float
    ensemble: Ensemble
    tree: CollisionTree | None
    out_files: list


def _observe(series: dict, t: float, ens: Ensemble, test: str) -> None:
    if test == "Kac":
        for name, k in (("m1", 1), ("m2", 2), ("m4", 4)):
            series.setdefault(name, MomentSeries()).append(t, moment(ens, k))
    elif test == "Maxwell2D":
        for name, k in (("m2", 2), ("m4", 4)):
            series.setdefault(name, MomentSeries()).append(t, moment(ens, k))
    else:
        p = stress_tensor(ens)
        basis = ens.basis
        for name, nodal in (("p11", p[0, 0]), ("p22", p[1, 1]), ("p12", p[0, 1]),
                            ("trace", p[0, 0] + p[1, 1])):
            series.setdefault(name, MomentSeries()).append(
                t, _entry_from_nodal(nodal, basis))


def _density_due(t: float, dt: float, taken: set) -> float | None:
    for target in DENSITY_TIMES:
        if target not in taken and abs(t - target) < dt / 2:
            taken.add(target)
            return target
    return None


def run(config: SimulationConfig, write_outputs: bool = True,
        audit: bool = False) -> RunResult:
    """Simulate one configuration end to end and emit its diagnostics."""
    basis = build_basis(config.dims, config.m, config.h)
    streams = make_streams(config.seed)
    density = _make_density(config)
    kernel = _make_kernel(config)
    mode = _make_mode(config) if config.test.startswith("VHS") else None
    ens = sample_initial(density, config.n, basis, streams.sampling,
                         coupling=config.coupling)

    is_vhs = config.test.startswith("VHS")
    mu0 = vhs_sigma_bound(ens, kernel) * 2.0 * np.pi if is_vhs else kernel.mu
    if mu0 * config.dt > 1.0:
        raise ValueError(
            f"mu*dt = {mu0 * config.dt:.6g} > 1 at t=0: forward Euler "
            "probabilistic interpretation violated")

    cursor = None
    if config.replay_tree is not None:
        tree_in = CollisionTree.load(config.replay_tree)
        if tree_in.n != config.n:
            raise ValueError(f"replay mismatch: tree N={tree_in.n}, config N={config.n}")
        if tree_in.dt != config.dt:
            raise ValueError(f"replay mismatch: tree dt={tree_in.dt}, config dt={config.dt}")
        if tree_in.n_steps != config.n_steps:
            raise ValueError(f"replay mismatch: tree has {tree_in.n_steps} steps, "
                             f"run needs {config.n_steps}")
        if tree_in.has_xi != is_vhs:
            raise ValueError("replay mismatch: tree kernel family differs")
        cursor = TreeCursor(tree_in)
    recorder = None
    if config.record_tree:
        recorder = CollisionTree(seed=config.seed, n=config.n, dt=config.dt,
                                 has_xi=is_vhs)

    series: dict = {}
    grids: dict = {}
    taken: set = set()
    energy = [float(np.sum(ens.coeffs**2))]
    walltimes = []
    max_dev = 0.0

    _observe(series, 0.0, ens, config.test)
    due = _density_due(0.0, config.dt, taken)
    if due is not None:
        grids[due] = density_reconstruct(ens, (config.bounds_lo, config.bounds_hi),
                                         config.n_v)
    for k in range(config.n_steps):
        tic = time.perf_counter()
        stats = step(ens, kernel, mode, config.dt, streams,
                     recorder=recorder, replay=cursor, audit=audit)
        walltimes.append(time.perf_counter() - tic)
        max_dev = max(max_dev, stats.max_pair_energy_dev)
        t = (k + 1) * config.dt
        _observe(series, t, ens, config.test)
        energy.append(float(np.sum(ens.coeffs**2)))
        due = _density_due(t, config.dt, taken)
        if due is not None and due <= config.t_max + 1e-12:
            grids[due] = density_reconstruct(
                ens, (config.bounds_lo, config.bounds_hi), config.n_v)

    times = np.arange(config.n_steps + 1) * config.dt
    out_files = []
    if write_outputs:
        os.makedirs(config.out, exist_ok=True)
        for name in sorted(series):
            path = os.path.join(config.out, f"{name}.csv")
            write_moment_csv(path, times, series[name].e, series[name].var)
            out_files.append(path)
        nodal_name = "m4" if config.test in ("Kac", "Maxwell2D") else "p11"
        path = os.path.join(config.out, f"{nodal_name}_nodal.csv")
        write_nodal_csv(path, times, series[nodal_name].nodal)
        out_files.append(path)
        path = os.path.join(config.out, "energy.csv")
        write_moment_csv(path, times, energy, np.zeros(len(energy)))
        out_files.append(path)
        for target in sorted(grids):
            path = os.path.join(config.out, f"density_t{target:g}.csv")
            write_density_csv(path, grids[target])
            out_files.append(path)
        tree_path = None
        if recorder is not None:
            tree_path = os.path.join(config.out, "collision_tree.ctr")
            recorder.save(tree_path)
            out_files.append(tree_path)
        manifest = RunManifest(config=config, version=__version__,
                               stream_names=("sampling", "sround", "pairing",
                                             "angles", "rejection"),
                               walltimes=walltimes, outputs=list(out_files))
        manifest_path = os.path.join(config.out, "manifest.txt")
        manifest.write(manifest_path)
        out_files.append(manifest_path)

    return RunResult(config=config, basis=basis, times=times, series=series,
                     grids=grids, energy=np.array(energy),
                     max_pair_energy_dev=max_dev, ensemble=ens,
                     tree=recorder, out_files=out_files)


# ---------------------------------------------------------------------------
# convergence study: reference tree replayed at lower M

def _observable_nodal(ens: Ensemble, test: str, table: np.ndarray) -> np.ndarray:
    """M4 (Kac/Maxwell2D) or P11 (VHS) evaluated on an explicit node table."""
    nodal = ens.coeffs @ table
    if test == "Kac":
        return np.mean(nodal[:, 0, :] ** 4, axis=0)
    if test == "Maxwell2D":
        return np.mean((nodal[:, 0, :] ** 2 + nodal[:, 1, :] ** 2) ** 2, axis=0)
    c1 = nodal[:, 0, :] - nodal[:, 0, :].mean(axis=0)
    return np.mean(c1**2, axis=0)


@dataclass
class ConvergenceResult:
    m_list: list
    m_ref: int
    times: np.ndarray
    errors: dict          # M -> (n_times,) array of L2(Omega) errors
    energy: dict          # M -> (n_times,) total coefficient energy
    max_pair_energy_dev: dict
    reference: RunResult
    csv_path: str | None


def convergence_study(config: SimulationConfig, m_list, m_ref: int,
                      write_outputs: bool = True,
                      audit: bool = False) -> ConvergenceResult:
    m_list = [int(m) for m in m_list]
    if m_ref < max(m_list):
        raise ValueError("M_ref must be at least max(M_list)")
    ref_cfg = replace(config, m=m_ref, h=m_ref, record_tree=True,
                      replay_tree=None)
    ref = run(ref_cfg, write_outputs=False, audit=audit)
    ref_basis = ref.basis
    tree = ref.tree

    # per-time reference observable on its own nodes
    obs_name = "m4" if config.test in ("Kac", "Maxwell2D") else "p11"
    ref_obs = ref.series[obs_name].nodal                  # (T, Hn_ref)

    errors, energy, devs = {}, {}, {}
    for m in m_list:
        basis_m = build_basis(config.dims, m, m)
        streams = make_streams(config.seed)
        ens = sample_initial(_make_density(config), config.n, basis_m,
                             streams.sampling, coupling=config.coupling)
        kernel = _make_kernel(config)
        mode = _make_mode(config) if config.test.startswith("VHS") else None
        cursor = TreeCursor(tree)
        table = basis_m.eval_at(ref_basis.nodes)          # (K_m, Hn_ref)
        errs = [l2_error_vs_reference(_observable_nodal(ens, config.test, table),
                                      ref_obs[0], ref_basis)]
        en = [float(np.sum(ens.coeffs**2))]
        dev = 0.0
        for k in range(config.n_steps):
            stats = step(ens, kernel, mode, config.dt, streams,
                         replay=cursor, audit=audit)
            dev = max(dev, stats.max_pair_energy_dev)
            errs.append(l2_error_vs_reference(
                _observable_nodal(ens, config.test, table), ref_obs[k + 1],
                ref_basis))
            en.append(float(np.sum(ens.coeffs**2)))
        errors[m] = np.array(errs)
        energy[m] = np.array(en)
        devs[m] = dev

    csv_path = None
    if write_outputs:
        os.makedirs(config.out, exist_ok=True)
        csv_path = os.path.join(config.out, "convergence.csv")
        rows = [(m, t, errors[m][i]) for m in m_list
                for i, t in enumerate(ref.times)]
        write_convergence_csv(csv_path, rows)
    return ConvergenceResult(m_list=m_list, m_ref=m_ref, times=ref.times,
                             errors=errors, energy=energy,
                             max_pair_energy_dev=devs, reference=ref,
                             csv_path=csv_path)


# ---------------------------------------------------------------------------
# comparison against the exact oracles

def _grid_l1_linf(sim: np.ndarray, exact: np.ndarray, width: float) -> tuple:
    vol = width ** (sim.ndim)
    return (float(np.sum(np.abs(sim - exact)) * vol),
            float(np.max(np.abs(sim - exact))))


@dataclass
class CompareResult:
    run: RunResult
    metrics: list         # rows (t, name, value)
    csv_path: str | None


def compare_exact(config: SimulationConfig, write_outputs: bool = True) -> CompareResult:
    if config.test == "VHSBivariate" or (config.test == "VHS" and config.gamma != 0.0):
        raise ValueError("no exact solution for VHS with gamma > 0")
    res = run(config, write_outputs=write_outputs)
    basis = res.basis
    nodes = basis.nodes[:, 0]
    w = basis.weights
    rows = []

    if config.test == "Kac":
        params = KacExactParams(kappa=config.kappa)
        mass = np.sqrt(np.pi) / 2.0
        for t in sorted(res.grids):
            grid = res.grids[t]
            width = grid.edges[1] - grid.edges[0]
            c = grid.centers
            fe_nodes = np.array([kac_exact_density(z, c, t, params) for z in nodes])
            e_exact = np.sum(w[:, None] * fe_nodes, axis=0)
            var_exact = np.maximum(np.sum(w[:, None] * fe_nodes**2, axis=0)
                                   - e_exact**2, 0.0)
            l1, linf = _grid_l1_linf(grid.e * mass, e_exact, width)
            rows += [(t, "ef_l1", l1), (t, "ef_linf", linf)]
            l1, linf = _grid_l1_linf(grid.var * mass**2, var_exact, width)
            rows += [(t, "varf_l1", l1), (t, "varf_linf", linf)]
        for i, t in enumerate(res.times):
            for k in (2, 4):
                ex = np.sum(w * np.array(
                    [kac_exact_moment(z, t, k, params, normalized=True)
                     for z in nodes]))
                sim = res.series[f"m{k}"].e[i]
                rows.append((t, f"m{k}_rel_err", abs(sim - ex) / abs(ex)))

    elif config.test == "Maxwell2D":
        params = Maxwell2DExactParams(kappa=config.kappa)
        for t in sorted(res.grids):
            grid = res.grids[t]
            width = grid.edges[1] - grid.edges[0]
            c = grid.centers
            marg_sim = grid.hist.sum(axis=2) * width      # (Hn, n_v) in vx
            g_nodes = np.array([maxwell2d_exact_marginal(z, c, t, params)
                                for z in nodes])
            e_sim = np.sum(w[:, None] * marg_sim, axis=0)
            var_sim = np.maximum(np.sum(w[:, None] * marg_sim**2, axis=0)
                                 - e_sim**2, 0.0)
            e_exact = np.sum(w[:, None] * g_nodes, axis=0)
            var_exact = np.maximum(np.sum(w[:, None] * g_nodes**2, axis=0)
                                   - e_exact**2, 0.0)
            l1, linf = _grid_l1_linf(e_sim, e_exact, width)
            rows += [(t, "marginal_ef_l1", l1), (t, "marginal_ef_linf", linf)]
            l1, linf = _grid_l1_linf(var_sim, var_exact, width)
            rows += [(t, "marginal_varf_l1", l1), (t, "marginal_varf_linf", linf)]
        for i, t in enumerate(res.times):
            for k in (2, 4):
                ex = np.sum(w * np.array(
                    [maxwell2d_exact_moment(z, t, k, params) for z in nodes]))
                sim = res.series[f"m{k}"].e[i]
                rows.append((t, f"m{k}_rel_err", abs(sim - ex) / abs(ex)))

    else:  # VHS, gamma = 0: stress relaxation w(t) = w0 exp(-t/2)
        p11_minus_t = 0.5 * (res.series["p11"].e - res.series["p22"].e)
        for i, t in enumerate(res.times):
            rows.append((t, "p11_minus_T", p11_minus_t[i]))
            rows.append((t, "trace_rel_drift",
                         res.series["trace"].e[i] / res.series["trace"].e[0] - 1.0))
        good = p11_minus_t > 0
        slope = float(np.polyfit(res.times[good], np.log(p11_minus_t[good]), 1)[0])
        rows.append((res.times[-1], "p11_minus_T_fitted_rate", slope))

    csv_path = None
    if write_outputs:
        os.makedirs(config.out, exist_ok=True)
        csv_path = os.path.join(config.out, "compare_exact.csv")
        write_metrics_csv(csv_path, rows)
    return CompareResult(run=res, metrics=rows, csv_path=csv_path)
