"""Moments, stress tensor, density reconstruction and error functionals.

Everything here is read-only over the ensemble. Quantities come in three
layers: nodal values Q(z_h), their quadrature expectation/variance over the
random space, and the gPC coefficients of Q. CSV emission lives here too so
the runner and the plotting scripts share one column contract:
moment series are `t,E,Var`, nodal series are `t,z_index,value`, density
grids are `v,E,Var` (1D) or `vx,vy,E,Var` (2D), all floats printed with
full round-trip precision.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .ensemble import Ensemble, InitialDensity
from .random_space import RandomBasis


@dataclass
class MomentEntry:
    nodal: np.ndarray   # (n_nodes,)
    e: float
    var: float
    coeffs: np.ndarray  # (n_modes,)


@dataclass
class MomentSeries:
    times: list = field(default_factory=list)
    entries: list = field(default_factory=list)

    def append(self, t: float, entry: MomentEntry) -> None:
        self.times.append(float(t))
        self.entries.append(entry)

    @property
    def e(self) -> np.ndarray:
        return np.array([en.e for en in self.entries])

    @property
    def var(self) -> np.ndarray:
        return np.array([en.var for en in self.entries])

    @property
    def nodal(self) -> np.ndarray:
        return np.array([en.nodal for en in self.entries])


def _entry_from_nodal(nodal: np.ndarray, basis: RandomBasis) -> MomentEntry:
    e = float(np.sum(basis.weights * nodal))
    var = float(np.sum(basis.weights * nodal**2) - e * e)
    return MomentEntry(nodal=nodal, e=e, var=max(var, 0.0) if var > -1e-12 else var,
                       coeffs=basis.proj_table @ nodal)


def moment(ensemble: Ensemble, k: int, component: int | None = None) -> MomentEntry:
    """k-th velocity moment per node: (1/N) sum_i v_i(z_h)^k.

    For d_v=2 the default contraction is radial, |v|^k for even k (so k=2 is
    the energy and k=4 its square); pass component=0/1 for a single
    component's moment instead.
    """
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    if ensemble.n == 0:
        raise ValueError("empty ensemble")
    nodal_v = ensemble.nodal_values()              # (N, d_v, Hn)
    if ensemble.d_v == 1:
        vals = nodal_v[:, 0, :] ** k
    elif component is not None:
        vals = nodal_v[:, component, :] ** k
    elif k % 2 == 0:
        vals = (nodal_v[:, 0, :] ** 2 + nodal_v[:, 1, :] ** 2) ** (k // 2)
    else:
        raise ValueError("odd radial moments in 2D need a component selector")
    return _entry_from_nodal(vals.mean(axis=0), ensemble.basis)


def stress_tensor(ensemble: Ensemble) -> np.ndarray:
    """P_ij(z_h) = (1/N) sum (v_i - u_i)(v_j - u_j); returns (2, 2, n_nodes)."""
    if ensemble.d_v != 2:
        raise ValueError("stress tensor is defined for d_v = 2")
    nodal = ensemble.nodal_values()
    c = nodal - nodal.mean(axis=0, keepdims=True)
    p = np.einsum("nih,njh->ijh", c, c) / ensemble.n
    return p


@dataclass
class DensityGrid:
    d_v: int
    bounds: tuple        # (lo, hi), same on every axis
    n_v: int
    edges: np.ndarray    # (n_v + 1,)
    hist: np.ndarray     # (n_nodes, n_v) or (n_nodes, n_v, n_v)
    e: np.ndarray        # E[f] over z
    var: np.ndarray      # Var(f) over z
    mass_scale: float
    n_dropped: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def density_reconstruct(ensemble: Ensemble, bounds=(-5.0, 5.0), n_v: int = 100,
                        mass_scale: float = 1.0) -> DensityGrid:
    """Per-node histogram density on a fixed window, left-closed bins.

    Out-of-range samples (including v = hi exactly) are dropped and counted;
    each nodal histogram is normalized over the kept samples so it
    integrates to mass_scale.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not hi > lo:
        raise ValueError("degenerate reconstruction bounds")
    if n_v < 2:
        raise ValueError("need at least 2 bins")
    nodal = ensemble.nodal_values()                # (N, d_v, Hn)
    n, d_v, hn = nodal.shape
    width = (hi - lo) / n_v
    idx = np.floor((nodal - lo) / width).astype(np.int64)
    ok = np.all((idx >= 0) & (idx < n_v), axis=1)  # (N, Hn)
    dropped = int(n * hn - ok.sum())
    if dropped:
        warnings.warn(f"density_reconstruct dropped {dropped} out-of-range samples")

    shape = (hn,) + (n_v,) * d_v
    hist = np.zeros(shape)
    edges = lo + width * np.arange(n_v + 1)
    vol = width**d_v
    for h in range(hn):
        keep = ok[:, h]
        kept = int(keep.sum())
        if kept == 0:
            continue
        if d_v == 1:
            counts = np.bincount(idx[keep, 0, h], minlength=n_v).astype(float)
        else:
            flat = idx[keep, 0, h] * n_v + idx[keep, 1, h]
            counts = np.bincount(flat, minlength=n_v * n_v).astype(float).reshape(n_v, n_v)
        hist[h] = counts * (mass_scale / (kept * vol))

    w = ensemble.basis.weights.reshape((hn,) + (1,) * d_v)
    e = np.sum(w * hist, axis=0)
    var = np.maximum(np.sum(w * hist**2, axis=0) - e**2, 0.0)
    return DensityGrid(d_v=d_v, bounds=(lo, hi), n_v=n_v, edges=edges, hist=hist,
                       e=e, var=var, mass_scale=mass_scale, n_dropped=dropped)


def l2_error_vs_reference(values_m: np.ndarray, values_ref: np.ndarray,
                          ref_basis: RandomBasis) -> np.ndarray:
    """L2(Omega) distance by quadrature on the reference rule.

    Both arrays hold nodal values on the *reference* basis's nodes, shape
    (..., n_nodes); the lower-M quantity is evaluated there from its gPC
    coefficients before calling this. Returns the (...) array of norms.
    """
    values_m = np.asarray(values_m, dtype=float)
    values_ref = np.asarray(values_ref, dtype=float)
    if values_m.shape != values_ref.shape or values_m.shape[-1] != ref_basis.n_nodes:
        raise ValueError("nodal series do not share the reference nodes")
    diff2 = (values_m - values_ref) ** 2
    return np.sqrt(np.sum(ref_basis.weights * diff2, axis=-1))


@dataclass
class RmseScaling:
    slope: float
    n_values: np.ndarray
    rmse: np.ndarray


def rmse_scaling_check(density: InitialDensity, phi, n_list, trials: int,
                       rng: np.random.Generator, z=None,
                       truth: float | None = None) -> RmseScaling:
    """Monte Carlo consistency: RMSE of the sample mean of phi(v) vs N.

    Samples the initial density at a fixed z (default: the center of the
    random domain), estimates E[phi] with N particles, and fits the log-log
    slope of the RMSE over `trials` repetitions. Expect about -1/2.
    """
    n_list = [int(n) for n in n_list]
    if len(n_list) < 3:
        raise ValueError("need at least 3 ensemble sizes to fit a slope")
    if z is None:
        z = np.zeros(1)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    factor = float(density.scale_factor(z)[0])
    if truth is None:
        big = density.sample_unit(20 * max(n_list), rng) * factor
        truth = float(np.mean(phi(big)))
    rmse = []
    for n in n_list:
        errs = np.empty(trials)
        for t in range(trials):
            v = density.sample_unit(n, rng) * factor
            errs[t] = np.mean(phi(v)) - truth
        rmse.append(np.sqrt(np.mean(errs**2)))
    rmse = np.array(rmse)
    pos = rmse > 0
    if pos.sum() >= 2:
        slope = float(np.polyfit(np.log(np.array(n_list))[pos], np.log(rmse[pos]), 1)[0])
    else:
        slope = 0.0  # constant phi: zero RMSE everywhere, nothing to fit
    return RmseScaling(slope=slope, n_values=np.array(n_list, dtype=float), rmse=rmse)


# ---------------------------------------------------------------------------
# CSV emission (shared column contract with the plotting scripts)

def _fmt(x) -> str:
    return repr(float(x))


def write_moment_csv(path, times, e, var) -> None:
    with open(path, "w") as fh:
        fh.write("t,E,Var\n")
        for t, a, b in zip(times, e, var):
            fh.write(f"{_fmt(t)},{_fmt(a)},{_fmt(b)}\n")


def write_nodal_csv(path, times, nodal) -> None:
    nodal = np.asarray(nodal)
    with open(path, "w") as fh:
        fh.write("t,z_index,value\n")
        for t, row in zip(times, nodal):
            for j, v in enumerate(row):
                fh.write(f"{_fmt(t)},{j},{_fmt(v)}\n")


def write_density_csv(path, grid: DensityGrid) -> None:
    c = grid.centers
    with open(path, "w") as fh:
        if grid.d_v == 1:
            fh.write("v,E,Var\n")
            for i in range(grid.n_v):
                fh.write(f"{_fmt(c[i])},{_fmt(grid.e[i])},{_fmt(grid.var[i])}\n")
        else:
            fh.write("vx,vy,E,Var\n")
            for i in range(grid.n_v):
                for j in range(grid.n_v):
                    fh.write(f"{_fmt(c[i])},{_fmt(c[j])},"
                             f"{_fmt(grid.e[i, j])},{_fmt(grid.var[i, j])}\n")


def write_convergence_csv(path, rows) -> None:
    """rows: iterable of (M, t, error)."""
    with open(path, "w") as fh:
        fh.write("M,t,error\n")
        for m, t, err in rows:
            fh.write(f"{int(m)},{_fmt(t)},{_fmt(err)}\n")


def write_metrics_csv(path, rows) -> None:
    """rows: iterable of (t, metric-name, value)."""
    with open(path, "w") as fh:
        fh.write("t,metric,value\n")
        for t, name, val in rows:
            fh.write(f"{_fmt(t)},{name},{_fmt(val)}\n")
