"""Moments, stress, density reconstruction, error functionals, CSV contract."""
import csv
import io

import numpy as np
import pytest

from dsmcuq import (Ensemble, KacSquaredGaussian, Maxwell2D, TwoGaussians2D,
                    build_basis, density_reconstruct, l2_error_vs_reference,
                    make_streams, moment, rmse_scaling_check, sample_initial,
                    stress_tensor, write_convergence_csv, write_density_csv,
                    write_metrics_csv, write_moment_csv, write_nodal_csv)
from dsmcuq.ensemble import LAMBDA


def _kac_ens(n=50_000, m=4, kappa=0.25, seed=0):
    basis = build_basis(1, m, m)
    streams = make_streams(seed)
    return sample_initial(KacSquaredGaussian(kappa), n, basis, streams.sampling), basis


def _max_ens(n=50_000, m=4, kappa=0.25, seed=0):
    basis = build_basis(1, m, m)
    streams = make_streams(seed)
    return sample_initial(Maxwell2D(kappa), n, basis, streams.sampling), basis


# --- moments -------------------------------------------------------------------

def test_moment_zeroth_is_one():
    ens, _ = _kac_ens(n=100)
    ent = moment(ens, 0)
    assert abs(ent.e - 1.0) < 1e-14
    assert abs(ent.var) < 1e-13


def test_moment_first_centered():
    ens, basis = _kac_ens()
    ent = moment(ens, 1)
    # symmetric density: sd of the mean is sqrt(E[v^2]/N)
    band = 4 * np.sqrt(3.0 / (2 * 2.0) / ens.n)
    assert abs(ent.e) < band


def test_moment_second_against_quadrature_oracle():
    ens, basis = _kac_ens()
    ent = moment(ens, 2)
    alpha = 2.0 + 0.25 * basis.nodes[:, 0]
    want = 3.0 / (2.0 * alpha)
    # nodal estimates are tightly coupled by the scaling construction;
    # per-node MC sd of mean(v^2) is sqrt(3/2)/alpha/sqrt(N)
    band = 4 * np.sqrt(1.5) / alpha / np.sqrt(ens.n)
    assert np.all(np.abs(ent.nodal - want) < band)
    assert abs(ent.e - np.sum(basis.weights * want)) < 4 * np.max(band)


def test_moment_2d_components_sum_to_radial():
    ens, _ = _max_ens(n=2_000)
    radial = moment(ens, 2)
    c0 = moment(ens, 2, component=0)
    c1 = moment(ens, 2, component=1)
    assert np.max(np.abs(radial.nodal - c0.nodal - c1.nodal)) < 1e-12


def test_moment_2d_isotropy():
    ens, basis = _max_ens()
    c0 = moment(ens, 2, component=0)
    alpha = 2.0 + 0.25 * basis.nodes[:, 0]
    want = 1.0 / alpha  # half of E[|v|^2] = 2/alpha
    assert np.all(np.abs(c0.nodal - want) < 0.02)


def test_moment_validation():
    ens, basis = _max_ens(n=100)
    with pytest.raises(ValueError):
        moment(ens, 3)  # odd radial moment in 2D
    with pytest.raises(ValueError):
        moment(ens, -1)
    empty = Ensemble(np.zeros((0, 2, basis.n_modes)), basis)
    with pytest.raises(ValueError):
        moment(empty, 2)


# --- stress tensor ---------------------------------------------------------------

def test_stress_two_gaussians_oracle():
    basis = build_basis(1, 3, 3)
    streams = make_streams(1)
    ens = sample_initial(TwoGaussians2D(0.0), 200_000, basis, streams.sampling)
    p = stress_tensor(ens)
    sig = LAMBDA * np.pi / 6.0
    # kappa1 = 0: every node sees the same mixture, P = diag(5, 1) sigma^2
    assert np.max(np.abs(p[0, 0] - 5 * sig**2)) < 0.02
    assert np.max(np.abs(p[1, 1] - sig**2)) < 0.01
    assert np.max(np.abs(p[0, 1])) < 0.01
    assert np.max(np.abs(p[0, 1] - p[1, 0])) < 1e-15


def test_stress_requires_2d():
    ens, _ = _kac_ens(n=50)
    with pytest.raises(ValueError):
        stress_tensor(ens)


def test_stress_trace_invariant_under_thermalized_collisions():
    from dsmcuq import SigmoidThermalized, VHSKernel, step
    basis = build_basis(1, 4, 4)
    streams = make_streams(2)
    ens = sample_initial(TwoGaussians2D(0.5), 5_000, basis, streams.sampling)
    kern = VHSKernel(c_gamma=1.0 / (2 * np.pi), gamma=1.0)
    tr0 = stress_tensor(ens)[0, 0] + stress_tensor(ens)[1, 1]
    mom0 = ens.coeffs.mean(axis=0)
    for _ in range(10):
        step(ens, kern, SigmoidThermalized(10.0), 0.05, streams)
    p = stress_tensor(ens)
    tr = p[0, 0] + p[1, 1]
    # momentum is conserved pairwise, so trace P tracks the conserved energy
    assert np.max(np.abs(ens.coeffs.mean(axis=0) - mom0)) < 1e-12
    assert np.max(np.abs(tr - tr0)) < 1e-10


# --- density reconstruction -------------------------------------------------------

def _const_ens(values, basis):
    # one constant-in-z velocity per particle (mode 0 is the constant 1)
    values = np.asarray(values, dtype=float)
    coeffs = np.zeros((len(values), 1, basis.n_modes))
    coeffs[:, 0, 0] = values
    return Ensemble(coeffs, basis)


def test_density_single_bin():
    basis = build_basis(1, 2, 2)
    ens = _const_ens([1.3] * 50, basis)
    grid = density_reconstruct(ens, bounds=(-5, 5), n_v=100)
    width = 0.1
    k = int(np.floor((1.3 + 5) / width))
    assert abs(grid.e[k] - 1.0 / width) < 1e-12
    assert abs(grid.e.sum() * width - 1.0) < 1e-12
    assert np.max(grid.var) < 1e-12
    assert grid.n_dropped == 0


def test_density_zero_variance_when_kappa_zero():
    basis = build_basis(1, 3, 3)
    streams = make_streams(3)
    ens = sample_initial(KacSquaredGaussian(0.0), 5_000, basis, streams.sampling)
    grid = density_reconstruct(ens, bounds=(-5, 5), n_v=50)
    # identical nodal histograms; only E[f^2]-E[f]^2 cancellation noise remains
    assert np.max(grid.var) < 1e-12


def test_density_mass_normalization_1d_and_2d():
    ens, _ = _kac_ens(n=20_000)
    grid = density_reconstruct(ens, bounds=(-6, 6), n_v=80, mass_scale=2.5)
    width = 12.0 / 80
    assert grid.n_dropped == 0
    assert abs(grid.e.sum() * width - 2.5) < 1e-10
    ens2, _ = _max_ens(n=20_000)
    g2 = density_reconstruct(ens2, bounds=(-5, 5), n_v=40)
    vol = (10.0 / 40) ** 2
    assert g2.n_dropped == 0
    assert abs(g2.e.sum() * vol - 1.0) < 1e-10


def test_density_left_closed_bins_and_drops():
    basis = build_basis(1, 2, 2)
    ens = _const_ens([-5.0, 5.0, 0.0], basis)
    with pytest.warns(UserWarning, match="dropped"):
        grid = density_reconstruct(ens, bounds=(-5, 5), n_v=10)
    # v = hi falls outside the last left-closed bin and is dropped per node
    assert grid.n_dropped == basis.n_nodes
    # v = lo lands in bin 0
    assert grid.hist[0, 0] > 0
    width = 1.0
    assert abs(grid.e.sum() * width - 1.0) < 1e-12  # renormalized over kept


def test_density_validation():
    ens, _ = _kac_ens(n=50)
    with pytest.raises(ValueError):
        density_reconstruct(ens, bounds=(2.0, 2.0))
    with pytest.raises(ValueError):
        density_reconstruct(ens, n_v=1)


# --- L2(Omega) error --------------------------------------------------------------

def test_l2_error_zero_iff_equal():
    basis = build_basis(1, 6, 6)
    rng = np.random.default_rng(5)
    a = rng.normal(size=(3, basis.n_nodes))
    assert np.max(l2_error_vs_reference(a, a, basis)) == 0.0
    b = a + 1e-3
    assert np.all(l2_error_vs_reference(a, b, basis) > 0)


def test_l2_error_known_value():
    basis = build_basis(1, 8, 8)
    z = basis.nodes[:, 0]
    err = l2_error_vs_reference(z, np.zeros_like(z), basis)
    assert abs(err - np.sqrt(1.0 / 3.0)) < 1e-13


def test_l2_error_shape_mismatch():
    basis = build_basis(1, 4, 4)
    with pytest.raises(ValueError):
        l2_error_vs_reference(np.zeros(3), np.zeros(3), basis)


# --- MC consistency ----------------------------------------------------------------

def test_rmse_scaling_half_order():
    rng = np.random.default_rng(11)
    res = rmse_scaling_check(KacSquaredGaussian(0.0), lambda v: v**2,
                             [1_000, 10_000, 100_000], trials=20, rng=rng,
                             truth=3.0 / 4.0)
    assert -0.65 < res.slope < -0.35
    assert np.all(np.diff(res.rmse) < 0)


def test_rmse_scaling_constant_phi():
    rng = np.random.default_rng(12)
    res = rmse_scaling_check(KacSquaredGaussian(0.0), lambda v: np.ones_like(v),
                             [100, 200, 400], trials=5, rng=rng, truth=1.0)
    assert res.slope == 0.0
    assert np.max(res.rmse) == 0.0


def test_rmse_scaling_needs_three_sizes():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        rmse_scaling_check(KacSquaredGaussian(0.0), lambda v: v, [10, 20],
                           trials=2, rng=rng)


# --- CSV contract -------------------------------------------------------------------

def _read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_moment_csv_roundtrip(tmp_path):
    p = tmp_path / "m.csv"
    times = [0.0, 0.1]
    e = [1.23456789012345e-3, 2.0]
    var = [0.5, np.pi]
    write_moment_csv(p, times, e, var)
    rows = _read_csv(p)
    assert rows[0] == ["t", "E", "Var"]
    assert float(rows[1][1]) == e[0]      # repr round-trips exactly
    assert float(rows[2][2]) == var[1]


def test_nodal_csv_layout(tmp_path):
    p = tmp_path / "n.csv"
    write_nodal_csv(p, [0.0], np.array([[1.0, 2.0, 3.0]]))
    rows = _read_csv(p)
    assert rows[0] == ["t", "z_index", "value"]
    assert [r[1] for r in rows[1:]] == ["0", "1", "2"]


def test_density_csv_1d_and_2d(tmp_path):
    ens, _ = _kac_ens(n=200)
    grid = density_reconstruct(ens, bounds=(-5, 5), n_v=8)
    p = tmp_path / "d1.csv"
    write_density_csv(p, grid)
    rows = _read_csv(p)
    assert rows[0] == ["v", "E", "Var"]
    assert len(rows) == 1 + 8

    ens2, _ = _max_ens(n=200)
    g2 = density_reconstruct(ens2, bounds=(-5, 5), n_v=6)
    p2 = tmp_path / "d2.csv"
    write_density_csv(p2, g2)
    rows2 = _read_csv(p2)
    assert rows2[0] == ["vx", "vy", "E", "Var"]
    assert len(rows2) == 1 + 36


def test_convergence_and_metrics_csv(tmp_path):
    p = tmp_path / "c.csv"
    write_convergence_csv(p, [(2, 0.5, 1e-3), (4, 0.5, 1e-5)])
    rows = _read_csv(p)
    assert rows[0] == ["M", "t", "error"]
    assert rows[1][0] == "2" and float(rows[2][2]) == 1e-5

    q = tmp_path / "x.csv"
    write_metrics_csv(q, [(0.0, "m2_rel_err", 1e-4)])
    rows = _read_csv(q)
    assert rows[0] == ["t", "metric", "value"]
    assert rows[1][1] == "m2_rel_err"
