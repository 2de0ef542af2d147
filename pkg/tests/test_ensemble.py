"""Initial densities, sampling couplings, ensemble plumbing."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsmcuq import (Ensemble, GpcVelocity, KacSquaredGaussian, Maxwell2D,
                    TwoGaussians2D, build_basis, sample_initial,
                    sample_kac_density, sample_maxwell2d_density,
                    sort_couple_1d)
from dsmcuq.ensemble import LAMBDA


def test_kac_sampler_moments():
    rng = np.random.default_rng(11)
    alpha = 1.7
    v = sample_kac_density(alpha, rng, 400_000)
    # normalized moments of the squared Gaussian: m2 = 3/(2a), m4 = 15/(4a^2)
    assert abs(np.mean(v)) < 0.005
    assert abs(np.mean(v**2) - 3 / (2 * alpha)) < 0.01
    assert abs(np.mean(v**4) - 15 / (4 * alpha**2)) < 0.05


def test_maxwell2d_sampler_moments():
    rng = np.random.default_rng(12)
    alpha = 2.25
    v = sample_maxwell2d_density(alpha, rng, 400_000)
    assert v.shape == (400_000, 2)
    assert np.max(np.abs(v.mean(axis=0))) < 0.005
    # m2 = E|v|^2 = 2/alpha, m4 = 8 s (2 - alpha s)/alpha at s = 1/(2 alpha)
    assert abs(np.mean(np.sum(v**2, axis=1)) - 2 / alpha) < 0.01
    s0 = 1 / (2 * alpha)
    m4 = 8 * s0 * (2 - alpha * s0) / alpha
    assert abs(np.mean(np.sum(v**2, axis=1) ** 2) - m4) < 0.05


def test_two_gaussians_expected_stress():
    rng = np.random.default_rng(13)
    d = TwoGaussians2D(0.0)
    sigma = d.sigma(np.zeros(1))[0]
    assert abs(sigma - LAMBDA * np.pi / 6) < 1e-14
    v = d.sample_unit(300_000, rng) * sigma
    p11 = np.var(v[:, 0])
    p22 = np.var(v[:, 1])
    # bumps at +-2 scaled by sigma: P11 = 5 sigma^2, P22 = sigma^2
    assert abs(p11 - 5 * sigma**2) < 0.01
    assert abs(p22 - sigma**2) < 0.005


def test_alpha_validation():
    with pytest.raises(ValueError):
        KacSquaredGaussian(2.0)
    with pytest.raises(ValueError):
        Maxwell2D(-2.5)
    with pytest.raises(ValueError):
        TwoGaussians2D(1.0)


def test_scaling_coupling_is_pathwise_temperature_rescale():
    basis = build_basis(1, 4, 4)
    rng = np.random.default_rng(3)
    d = KacSquaredGaussian(0.5)
    ens = sample_initial(d, 500, basis, rng)
    nodal = ens.nodal_values()[:, 0, :]
    fac = d.scale_factor(basis.nodes)
    # v_i(z_h)/factor(z_h) identical across nodes for every particle
    ratio = nodal / fac[None, :]
    assert np.max(np.abs(ratio - ratio[:, :1])) < 1e-10


def test_sort_coupling_monotone_and_marginal_preserving():
    basis = build_basis(1, 3, 3)
    rng = np.random.default_rng(4)
    d = KacSquaredGaussian(0.25)
    ens = sample_initial(d, 20_000, basis, rng, coupling="sort")
    nodal = ens.nodal_values()[:, 0, :]
    # per-node marginals keep the right temperature after coupling
    alpha = d.alpha(basis.nodes[:, 0])
    m2 = np.mean(nodal**2, axis=0)
    assert np.max(np.abs(m2 - 3 / (2 * alpha))) < 0.03
    # coupled nodal vectors are comonotone: sorting by one node sorts all
    order = np.argsort(nodal[:, 0])
    sorted_vals = nodal[order]
    assert np.all(np.diff(sorted_vals, axis=0) >= -1e-12)


def test_sort_coupling_rejects_2d():
    basis = build_basis(1, 3, 3)
    rng = np.random.default_rng(5)
    with pytest.raises(ValueError):
        sample_initial(Maxwell2D(0.25), 100, basis, rng, coupling="sort")


def test_unknown_coupling():
    basis = build_basis(1, 3, 3)
    with pytest.raises(ValueError):
        sample_initial(KacSquaredGaussian(0.25), 100, basis,
                       np.random.default_rng(0), coupling="fancy")


def test_sample_requires_two_particles():
    basis = build_basis(1, 3, 3)
    with pytest.raises(ValueError):
        sample_initial(KacSquaredGaussian(0.25), 1, basis,
                       np.random.default_rng(0))


def test_sort_couple_1d_order_statistics():
    rng = np.random.default_rng(6)
    sets = rng.normal(size=(3, 50))
    out = sort_couple_1d(sets)
    assert out.shape == (50, 3)
    for j in range(3):
        assert np.array_equal(out[:, j], np.sort(sets[j]))


def test_sort_couple_identical_sets_give_z_independent_particles():
    vals = np.random.default_rng(7).normal(size=100)
    sets = np.stack([vals, vals, vals])
    out = sort_couple_1d(sets)
    assert np.max(np.abs(out - out[:, :1])) < 1e-15


def test_ensemble_shape_validation():
    basis = build_basis(1, 3, 3)
    with pytest.raises(ValueError):
        Ensemble(np.zeros((10, 1, 7)), basis)  # wrong n_modes


def test_gpc_velocity_evaluate():
    basis = build_basis(1, 4, 4)
    coeffs = np.zeros((1, basis.n_modes))
    coeffs[0, 0] = 2.0
    p = GpcVelocity(coeffs)
    assert p.d_v == 1
    vals = p.evaluate(basis, basis.nodes)
    assert np.max(np.abs(vals - 2.0)) < 1e-14


def test_nodal_values_shape_and_projection_consistency():
    basis = build_basis(1, 5, 5)
    rng = np.random.default_rng(8)
    ens = sample_initial(Maxwell2D(0.3), 50, basis, rng)
    nodal = ens.nodal_values()
    assert nodal.shape == (50, 2, basis.n_nodes)
    # H = M: projecting nodal values back recovers the coefficients
    back = nodal @ basis.proj_table.T
    assert np.max(np.abs(back - ens.coeffs)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=-1.9, max_value=1.9), st.integers(0, 100))
def test_kac_sample_sign_symmetric(kappa, seed):
    d = KacSquaredGaussian(kappa)
    v = d.sample_unit(2_000, np.random.default_rng(seed))
    assert v.shape == (2_000, 1)
    assert np.all(np.isfinite(v))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000))
def test_kac_density_sampler_matches_cdf(seed):
    # KS-style check at loose tolerance: P(|v| <= x) for the squared Gaussian
    rng = np.random.default_rng(seed)
    v = sample_kac_density(2.0, rng, 5_000)
    # E v^2 = 3/(2 alpha) = 0.75
    assert abs(np.mean(v**2) - 0.75) < 0.08
