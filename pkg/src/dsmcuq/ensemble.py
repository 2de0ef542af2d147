"""Particle ensembles whose velocities are polynomial-chaos expansions.

Each particle i carries a coefficient matrix vhat[i] of shape
(d_v, n_modes); its velocity at a parameter value z is
v_i(z) = sum_m vhat[i,:,m] Phi_m(z). Coefficients are the canonical state;
nodal values are recomputed on demand.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .random_space import RandomBasis, project

# scale of the two-Gaussian benchmark density: sigma(z1) = LAMBDA*pi/6*(1+kappa1*z1)
LAMBDA = 2.0 / (3.0 + np.sqrt(2.0))


@dataclass
class GpcVelocity:
    """One particle's coefficient matrix, shape (d_v, n_modes)."""

    coeffs: np.ndarray

    @property
    def d_v(self) -> int:
        return self.coeffs.shape[0]

    def evaluate(self, basis: RandomBasis, z) -> np.ndarray:
        return self.coeffs @ basis.eval_at(z)


class Ensemble:
    """N particles sharing one random basis.

    coeffs has shape (N, d_v, n_modes). The collision engine mutates it in
    place between diagnostic reads.
    """

    def __init__(self, coeffs: np.ndarray, basis: RandomBasis):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 3:
            raise ValueError("coeffs must have shape (N, d_v, n_modes)")
        if coeffs.shape[2] != basis.n_modes:
            raise ValueError("coefficient count does not match the basis")
        self.coeffs = coeffs
        self.basis = basis

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def d_v(self) -> int:
        return self.coeffs.shape[1]

    def particle(self, i: int) -> GpcVelocity:
        return GpcVelocity(self.coeffs[i])

    @property
    def particles(self) -> list[GpcVelocity]:
        return [GpcVelocity(c) for c in self.coeffs]

    def nodal_values(self, eval_table: np.ndarray | None = None) -> np.ndarray:
        """Velocities at the quadrature nodes, shape (N, d_v, n_points).

        Pass a (n_modes, k) evaluation table to evaluate at other points
        (e.g. a reference basis's nodes).
        """
        table = self.basis.eval_table if eval_table is None else eval_table
        return self.coeffs @ table


class InitialDensity:
    """Base for the uncertain initial velocity densities.

    Subclasses expose d_v, a per-node deterministic scale factor
    sqrt(T(z)/T_unit), and a unit-scale sampler. Particles are drawn once at
    unit scale and propagated to every node by the temperature scaling, so
    the raw draws do not depend on the basis.
    """

    d_v: int

    def validate(self) -> None:
        raise NotImplementedError

    def scale_factor(self, nodes: np.ndarray) -> np.ndarray:
        """sqrt(T(z)/T_unit) at each node; nodes shape (n_nodes, d_z)."""
        raise NotImplementedError

    def sample_unit(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """(n, d_v) samples from the unit-temperature member of the family."""
        raise NotImplementedError


@dataclass
class KacSquaredGaussian(InitialDensity):
    """1D density proportional to v^2 exp(-alpha(z) v^2), alpha(z) = 2 + kappa z.

    The unnormalized form has mass sqrt(pi)/2; particles sample the
    normalized density (2 alpha^{3/2}/sqrt(pi)) v^2 exp(-alpha v^2), whose
    second moment is 3/(2 alpha). Temperature scales like 1/alpha.
    """

    kappa: float
    d_v = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if abs(self.kappa) >= 2.0:
            raise ValueError("alpha(z) = 2 + kappa z must stay positive: |kappa| < 2")

    def alpha(self, z):
        return 2.0 + self.kappa * np.asarray(z, dtype=float)

    def scale_factor(self, nodes: np.ndarray) -> np.ndarray:
        return 1.0 / np.sqrt(self.alpha(nodes[:, 0]))

    def sample_unit(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return sample_kac_density(1.0, rng, n).reshape(n, 1)


@dataclass
class Maxwell2D(InitialDensity):
    """2D density (alpha^2/pi) |v|^2 exp(-alpha(z) |v|^2), alpha(z) = 2 + kappa z.

    Probability density with E[|v|^2] = 2/alpha; temperature scales like
    1/alpha.
    """

    kappa: float
    d_v = 2

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if abs(self.kappa) >= 2.0:
            raise ValueError("alpha(z) = 2 + kappa z must stay positive: |kappa| < 2")

    def alpha(self, z):
        return 2.0 + self.kappa * np.asarray(z, dtype=float)

    def scale_factor(self, nodes: np.ndarray) -> np.ndarray:
        return 1.0 / np.sqrt(self.alpha(nodes[:, 0]))

    def sample_unit(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return sample_maxwell2d_density(1.0, rng, n)


@dataclass
class TwoGaussians2D(InitialDensity):
    """Even mixture of two 2D Gaussians N(+-2 sigma e1, sigma^2 I).

    sigma(z1) = LAMBDA*pi/6*(1 + kappa1 z1). Both the component means and the
    spread are proportional to sigma, so one per-node scale factor sigma(z1)
    reproduces the whole family. Stress at t=0: P11 = 5 sigma^2,
    P22 = sigma^2.
    """

    kappa1: float
    d_v = 2

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if abs(self.kappa1) >= 1.0:
            raise ValueError("sigma(z1) must stay positive: |kappa1| < 1")

    def sigma(self, z1):
        return LAMBDA * np.pi / 6.0 * (1.0 + self.kappa1 * np.asarray(z1, dtype=float))

    def scale_factor(self, nodes: np.ndarray) -> np.ndarray:
        return self.sigma(nodes[:, 0])

    def sample_unit(self, n: int, rng: np.random.Generator) -> np.ndarray:
        # fair coin for the component, then a standard normal around +-2 e1
        signs = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        v = rng.standard_normal((n, 2))
        v[:, 0] += 2.0 * signs
        return v


def sample_kac_density(alpha_value: float, rng: np.random.Generator, n: int = 1):
    """Draw from the normalized 1D density (2 a^{3/2}/sqrt(pi)) v^2 e^{-a v^2}.

    |v| = sqrt(u) with u ~ Gamma(shape 3/2, rate alpha), sign fair.
    Returns an (n,) array.
    """
    if alpha_value <= 0:
        raise ValueError("alpha must be positive")
    u = rng.gamma(1.5, 1.0 / alpha_value, size=n)
    signs = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    return signs * np.sqrt(u)


def sample_maxwell2d_density(alpha_value: float, rng: np.random.Generator, n: int = 1):
    """Draw from the normalized 2D density (a^2/pi) |v|^2 e^{-a |v|^2}.

    Speed r = sqrt(u) with u ~ Gamma(shape 2, rate alpha); angle uniform.
    Returns (n, 2).
    """
    if alpha_value <= 0:
        raise ValueError("alpha must be positive")
    u = rng.gamma(2.0, 1.0 / alpha_value, size=n)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    r = np.sqrt(u)
    return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)


def sort_couple_1d(node_sample_sets: np.ndarray) -> np.ndarray:
    """Couple independent per-node sample sets by sorting (1D only).

    Input: (n_nodes, N) i.i.d. samples per node. Each set is sorted
    ascending and particle i takes the i-th order statistic of every node,
    giving comonotone nodal values. Returns (N, n_nodes).
    """
    sets = np.asarray(node_sample_sets, dtype=float)
    if sets.ndim != 2:
        raise ValueError("expected one 1D sample set per node: shape (n_nodes, N)")
    return np.sort(sets, axis=1).T


def sample_initial(
    density: InitialDensity,
    n: int,
    basis: RandomBasis,
    rng: np.random.Generator,
    coupling: str = "scaling",
) -> Ensemble:
    """Sample N particles from the uncertain initial density.

    coupling="scaling" (default): draw each particle once at unit
    temperature and set v_i(z_h) = sqrt(T(z_h)/T_unit) * v_i; the draws are
    independent of the basis, and the realized nodal samples satisfy
    v_i(z_h) = sqrt(T(z_h)/T(z_0)) * v_i(z_0) exactly for any reference
    node z_0.

    coupling="sort" (1D only): draw an independent set per node and couple
    by order statistics.
    """
    density.validate()
    if n < 2:
        raise ValueError("need at least 2 particles")

    if coupling == "scaling":
        raw = density.sample_unit(n, rng)                # (N, d_v)
        factor = density.scale_factor(basis.nodes)       # (n_nodes,)
        nodal = raw[:, :, None] * factor[None, None, :]  # (N, d_v, n_nodes)
    elif coupling == "sort":
        if density.d_v != 1:
            raise ValueError("sort coupling is only defined for 1D velocities")
        factor = density.scale_factor(basis.nodes)
        sets = np.empty((basis.n_nodes, n))
        for h in range(basis.n_nodes):
            sets[h] = density.sample_unit(n, rng)[:, 0] * factor[h]
        nodal = sort_couple_1d(sets)[:, None, :]         # (N, 1, n_nodes)
    else:
        raise ValueError(f"unknown coupling: {coupling!r}")

    coeffs = project(basis, nodal)
    return Ensemble(coeffs, basis)
