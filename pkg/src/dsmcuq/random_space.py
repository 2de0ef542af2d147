"""Orthonormal polynomial bases and Gauss quadrature over the random domain.

The random parameter z lives on Omega = [-1,1]^d_z with a product density
p(z). Quadrature weights absorb p(z), so plain weighted sums over the nodes
compute expectations directly: sum_h w_h g(z_h) ~ E[g(z)].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Distribution(Enum):
    UNIFORM_MINUS1_TO_1 = "uniform[-1,1]"
    # extension point for other Wiener-Askey families


@dataclass(frozen=True)
class RandomDimension:
    """One coordinate of the random space: its distribution family."""

    distribution: Distribution = Distribution.UNIFORM_MINUS1_TO_1


@dataclass(frozen=True)
class RandomBasis:
    """Orthonormal polynomial family plus a Gauss rule on Omega.

    eval_table[m, h] = Phi_m(z_h). Weights sum to 1 and the Gram matrix
    sum_h w_h Phi_m(z_h) Phi_n(z_h) is the identity to 1e-12 for m,n <= M.
    Phi_0 is identically 1. Immutable; safe to share across threads.
    """

    dims: tuple[RandomDimension, ...]
    degree: int                      # M: total polynomial degree
    quad_order: int                  # H: (H+1)-point Gauss rule per dimension
    nodes: np.ndarray                # (n_nodes, d_z)
    weights: np.ndarray              # (n_nodes,), sums to 1
    eval_table: np.ndarray           # (n_modes, n_nodes)
    mode_indices: np.ndarray         # (n_modes, d_z) multi-indices, graded order
    # projection matrix (n_modes, n_nodes): project = values @ proj_table.T
    proj_table: np.ndarray = field(repr=False, default=None)

    @property
    def d_z(self) -> int:
        return len(self.dims)

    @property
    def n_modes(self) -> int:
        return self.eval_table.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def eval_at(self, z) -> np.ndarray:
        """Phi_m at arbitrary points: returns (n_modes, k) for k points.

        Accepts a scalar (d_z=1), a (k,) array (d_z=1), a (d_z,) point or a
        (k, d_z) array. Points must lie in Omega.
        """
        pts = _as_points(z, self.d_z)
        if np.any(np.abs(pts) > 1.0 + 1e-12):
            raise ValueError("evaluation point outside the random domain [-1,1]^d")
        vander = [_legendre_orthonormal(pts[:, j], self.degree) for j in range(self.d_z)]
        out = np.ones((self.n_modes, pts.shape[0]))
        for j in range(self.d_z):
            out *= vander[j][self.mode_indices[:, j], :]
        return out

    def gram(self) -> np.ndarray:
        """Quadrature Gram matrix sum_h w_h Phi_m Phi_n; identity if orthonormal."""
        return (self.eval_table * self.weights) @ self.eval_table.T


def _as_points(z, d_z: int) -> np.ndarray:
    pts = np.atleast_1d(np.asarray(z, dtype=float))
    if d_z == 1:
        if pts.ndim == 1:
            pts = pts[:, None]
    else:
        if pts.ndim == 1:
            if pts.shape[0] != d_z:
                raise ValueError(f"expected a point with {d_z} coordinates")
            pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != d_z:
        raise ValueError(f"points must have shape (k, {d_z})")
    return pts


def _legendre_orthonormal(x: np.ndarray, degree: int) -> np.ndarray:
    """Values of the orthonormal Legendre family on [-1,1] with p(z)=1/2.

    Returns (degree+1, len(x)): row k is sqrt(2k+1) * P_k(x), which satisfies
    int_{-1}^{1} Phi_j Phi_k p dz = delta_jk.
    """
    vander = np.polynomial.legendre.legvander(x, degree)  # (len(x), degree+1)
    scale = np.sqrt(2.0 * np.arange(degree + 1) + 1.0)
    return (vander * scale).T


def _total_degree_indices(d_z: int, degree: int) -> np.ndarray:
    """Multi-indices with |m| <= degree in graded lexicographic order."""
    if d_z == 1:
        return np.arange(degree + 1, dtype=np.int64)[:, None]
    out = []
    for total in range(degree + 1):
        for m1 in range(total, -1, -1):
            rest = _total_degree_indices(d_z - 1, total - m1)
            keep = rest[rest.sum(axis=1) == total - m1]
            for r in keep:
                out.append([m1, *r])
    return np.asarray(out, dtype=np.int64)


def build_basis(dims, M: int, H: int | None = None) -> RandomBasis:
    """Build the orthonormal basis and Gauss rule for the given dimensions.

    dims may be a list of RandomDimension or an integer dimension count (all
    uniform). H defaults to M; the (H+1)-point per-dimension Gauss rule is
    exact for polynomials of degree <= 2H+1. For d_z > 1 the rule is the full
    tensor product and the basis uses total-degree truncation |m| <= M.
    """
    if isinstance(dims, int):
        dims = [RandomDimension() for _ in range(dims)]
    dims = tuple(dims)
    if len(dims) < 1:
        raise ValueError("need at least one random dimension")
    for d in dims:
        if d.distribution is not Distribution.UNIFORM_MINUS1_TO_1:
            raise ValueError(f"unsupported distribution: {d.distribution}")
    if M < 0:
        raise ValueError("degree M must be >= 0")
    if H is None:
        H = M
    if H < M:
        raise ValueError(f"quadrature order H={H} must be >= degree M={M}")

    x1, w1 = np.polynomial.legendre.leggauss(H + 1)
    w1 = w1 / 2.0  # absorb p(z) = 1/2 so weights sum to 1

    d_z = len(dims)
    if d_z == 1:
        nodes = x1[:, None]
        weights = w1.copy()
    else:
        grids = np.meshgrid(*([x1] * d_z), indexing="ij")
        nodes = np.stack([g.ravel() for g in grids], axis=1)
        wgrids = np.meshgrid(*([w1] * d_z), indexing="ij")
        weights = np.ones(nodes.shape[0])
        for wg in wgrids:
            weights *= wg.ravel()

    mode_indices = _total_degree_indices(d_z, M)
    vander = [_legendre_orthonormal(nodes[:, j], M) for j in range(d_z)]
    eval_table = np.ones((mode_indices.shape[0], nodes.shape[0]))
    for j in range(d_z):
        eval_table *= vander[j][mode_indices[:, j], :]

    return RandomBasis(
        dims=dims,
        degree=M,
        quad_order=H,
        nodes=nodes,
        weights=weights,
        eval_table=eval_table,
        mode_indices=mode_indices,
        proj_table=eval_table * weights,
    )


def evaluate_expansion(basis: RandomBasis, coeffs, z):
    """Evaluate sum_m coeffs[..., m] Phi_m(z) at one or more points.

    coeffs has n_modes entries along its last axis. Returns an array with the
    coefficient batch shape plus a trailing point axis; scalars collapse.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[-1] != basis.n_modes:
        raise ValueError(
            f"expected {basis.n_modes} coefficients, got {coeffs.shape[-1]}"
        )
    table = basis.eval_at(z)  # (n_modes, k)
    out = coeffs @ table
    # collapse the point axis for scalar z of a 1D random space
    if np.ndim(z) == 0 and basis.d_z == 1:
        out = out[..., 0]
    return out if out.ndim else float(out)


def project(basis: RandomBasis, node_values, m: int | None = None):
    """Galerkin projection by quadrature: sum_h w_h values_h Phi_m(z_h).

    node_values is aligned with basis.nodes along its last axis. With m given,
    returns that single coefficient; with m=None, all n_modes coefficients.
    """
    values = np.asarray(node_values, dtype=float)
    if values.shape[-1] != basis.n_nodes:
        raise ValueError(
            f"expected {basis.n_nodes} node values, got {values.shape[-1]}"
        )
    if m is None:
        return values @ basis.proj_table.T
    if not 0 <= m < basis.n_modes:
        raise ValueError(f"mode index {m} out of range")
    return values @ basis.proj_table[m]


def expectation(basis: RandomBasis, node_values):
    """E[g] = sum_h w_h g(z_h) over the last axis."""
    values = np.asarray(node_values, dtype=float)
    if values.shape[-1] != basis.n_nodes:
        raise ValueError("node value length mismatch")
    return values @ basis.weights


def variance(basis: RandomBasis, node_values):
    """Var(g) = E[g^2] - E[g]^2 by quadrature."""
    values = np.asarray(node_values, dtype=float)
    if values.shape[-1] != basis.n_nodes:
        raise ValueError("node value length mismatch")
    mean = values @ basis.weights
    return (values * values) @ basis.weights - mean * mean


def l2_omega_norm(basis: RandomBasis, node_values):
    """L2(Omega) norm sqrt(sum_h w_h g(z_h)^2)."""
    values = np.asarray(node_values, dtype=float)
    if values.shape[-1] != basis.n_nodes:
        raise ValueError("node value length mismatch")
    return np.sqrt((values * values) @ basis.weights)
