"""Basis construction, quadrature exactness, projection round trips."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsmcuq import (build_basis, evaluate_expansion, expectation,
                    l2_omega_norm, project, variance)


def test_gram_identity_up_to_25():
    for m in (1, 3, 10, 25):
        basis = build_basis(1, m, m)
        g = basis.gram()
        assert np.max(np.abs(g - np.eye(basis.n_modes))) < 1e-12


def test_gram_identity_bivariate():
    basis = build_basis(2, 6, 6)
    g = basis.gram()
    assert np.max(np.abs(g - np.eye(basis.n_modes))) < 1e-12


def test_mode_count():
    assert build_basis(1, 5, 5).n_modes == 6
    # total degree in two dims: (M+1)(M+2)/2
    assert build_basis(2, 5, 5).n_modes == 21
    assert build_basis(2, 5, 5).n_nodes == 36


def test_quadrature_exact_for_polynomials():
    basis = build_basis(1, 4, 4)
    z = basis.nodes[:, 0]
    # degree 2H+1 = 9 is integrated exactly against the uniform density
    vals = z**9 + 2 * z**8 - z**3
    exact = 2.0 / 9.0  # int of z^8 is 1/9, odd powers vanish
    assert abs(np.sum(basis.weights * vals) - exact) < 1e-14


def test_project_evaluate_roundtrip():
    basis = build_basis(1, 6, 6)
    rng = np.random.default_rng(0)
    coeffs = rng.normal(size=basis.n_modes)
    nodal = evaluate_expansion(basis, coeffs, basis.nodes)
    back = project(basis, nodal)
    assert np.max(np.abs(back - coeffs)) < 1e-12


def test_projection_of_polynomial_is_exact():
    basis = build_basis(1, 3, 8)
    z = basis.nodes[:, 0]
    coeffs = project(basis, z**3)
    recon = evaluate_expansion(basis, coeffs, basis.nodes)
    assert np.max(np.abs(recon - z**3)) < 1e-13


def test_expectation_variance_of_linear():
    basis = build_basis(1, 4, 4)
    nodal = basis.nodes[:, 0]  # Q(z) = z sampled at the nodes
    assert abs(expectation(basis, nodal)) < 1e-14
    assert abs(variance(basis, nodal) - 1.0 / 3.0) < 1e-14
    assert abs(l2_omega_norm(basis, nodal) - np.sqrt(1.0 / 3.0)) < 1e-14


def test_eval_at_checks_domain():
    basis = build_basis(1, 3, 3)
    with pytest.raises(ValueError):
        basis.eval_at(np.array([[1.5]]))


def test_eval_at_matches_eval_table():
    basis = build_basis(2, 4, 4)
    table = basis.eval_at(basis.nodes)
    assert np.max(np.abs(table - basis.eval_table)) < 1e-14


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=10))
def test_weights_sum_to_one(m):
    basis = build_basis(1, m, m)
    assert abs(np.sum(basis.weights) - 1.0) < 1e-13


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=40))
def test_parseval_on_random_expansions(m, seed):
    basis = build_basis(1, m, m)
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=basis.n_modes)
    nodal = evaluate_expansion(basis, coeffs, basis.nodes)
    quad_norm2 = float(np.sum(basis.weights * nodal**2))
    assert abs(quad_norm2 - float(np.sum(coeffs**2))) < 1e-10 * max(1.0, quad_norm2)
