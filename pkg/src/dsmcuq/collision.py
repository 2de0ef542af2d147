"""DSMC collision engines acting on gPC coefficient ensembles.

Three engines share the Nanbu-Babovski step structure (stochastically
rounded pair count, disjoint pairs from a random permutation, one scattering
angle per pair):

* Kac (d_v=1): the rotation rule is linear in (v, v*) with z-independent
  coefficients, so it acts exactly on the gPC coefficients.
* Maxwell (d_v=2): the |v-v*| factor is nonlinear in z, so the relative
  speed is evaluated at the quadrature nodes, projected onto the basis, and
  recombined with the exact coefficient mean.
* VHS (d_v=2): dummy-collision acceptance-rejection against the per-step
  kernel bound Sigma. The acceptance factor is evaluated per node, which
  makes the post-collision state piecewise in z; the indicator factor can be
  replaced by a sigmoid ramp (optionally followed by a thermalization that
  restores the pair's nodal energy).

Randomness discipline: within a step the engine consumes, in this order,
one uniform for the stochastic rounding (sround stream), one permutation
(pairing stream), N_c angles in pair order (angles stream), and for VHS
N_c rejection uniforms in pair order (rejection stream). Streams are
independent generators, so replacing the kernel changes no other stream's
sequence. A CollisionTree records (Sigma, N_c, pairs, angles, rejections)
per step; replaying a tree consumes no randomness at all, which is what
allows re-running one trajectory at a different gPC order M.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .ensemble import Ensemble, GpcVelocity
from .random_space import RandomBasis

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# kernels and regularization modes

@dataclass(frozen=True)
class KacKernel:
    """1D rotation kernel; collision frequency fixed at 1."""

    d_v = 1

    @property
    def mu(self) -> float:
        return 1.0


@dataclass(frozen=True)
class MaxwellKernel:
    """Constant kernel B=1 in 2D; mu = 2^{d_v-1} pi unless overridden."""

    mu: float = TWO_PI
    d_v = 2

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be positive")


@dataclass(frozen=True)
class AffineGamma:
    """gamma(z) = kappa2 * (1 + z_c) on the coordinate with index coord."""

    kappa2: float
    coord: int = -1

    def __post_init__(self):
        if self.kappa2 < 0:
            raise ValueError("kappa2 < 0 makes gamma negative somewhere on [-1,1]")

    def at(self, nodes: np.ndarray) -> np.ndarray:
        return self.kappa2 * (1.0 + nodes[:, self.coord])


@dataclass(frozen=True)
class VHSKernel:
    """B(z, r) = C_gamma * r^{gamma(z)}; gamma constant or affine in one z."""

    c_gamma: float
    gamma: float | AffineGamma = 1.0
    d_v = 2

    def __post_init__(self):
        if self.c_gamma <= 0:
            raise ValueError("C_gamma must be positive")
        if isinstance(self.gamma, float) and self.gamma < 0:
            raise ValueError("gamma must be nonnegative")

    def gamma_at(self, nodes: np.ndarray) -> np.ndarray:
        if isinstance(self.gamma, AffineGamma):
            return self.gamma.at(nodes)
        return np.full(nodes.shape[0], float(self.gamma))


@dataclass(frozen=True)
class Indicator:
    pass


@dataclass(frozen=True)
class Sigmoid:
    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class SigmoidThermalized:
    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")


# ---------------------------------------------------------------------------
# collision tree (record / replay)

_MAGIC = b"CTR1"


@dataclass
class StepRecord:
    sigma: float
    n_c: int
    pairs: np.ndarray   # (n_c, 2) int64
    thetas: np.ndarray  # (n_c,) float64
    xis: np.ndarray | None  # (n_c,) float64 for VHS, else None


@dataclass
class CollisionTree:
    """Full record of one run's collision randomness.

    Stores the realized pair count (the observable outcome of the sround
    draw) and, for VHS, the per-step kernel bound Sigma: a replay at a
    different M would otherwise recompute a slightly different bound and
    shift every acceptance threshold.
    """

    seed: int
    n: int
    dt: float
    has_xi: bool
    steps: list[StepRecord] = field(default_factory=list)

    def append_step(self, sigma, n_c, pairs, thetas, xis) -> None:
        if self.has_xi != (xis is not None):
            raise ValueError("xi presence does not match tree header")
        self.steps.append(StepRecord(float(sigma), int(n_c),
                                     np.asarray(pairs, dtype=np.int64).reshape(-1, 2),
                                     np.asarray(thetas, dtype=np.float64),
                                     None if xis is None else np.asarray(xis, dtype=np.float64)))

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<Bqqdq", int(self.has_xi), self.seed, self.n,
                                 self.dt, len(self.steps)))
            for rec in self.steps:
                fh.write(struct.pack("<dq", rec.sigma, rec.n_c))
                fh.write(rec.pairs.astype("<i8").tobytes())
                fh.write(rec.thetas.astype("<f8").tobytes())
                if self.has_xi:
                    fh.write(rec.xis.astype("<f8").tobytes())

    @classmethod
    def load(cls, path) -> "CollisionTree":
        with open(path, "rb") as fh:
            raw = fh.read()
        if raw[:4] != _MAGIC:
            raise ValueError("not a collision tree file")
        off = 4
        has_xi, seed, n, dt, n_steps = struct.unpack_from("<Bqqdq", raw, off)
        off += struct.calcsize("<Bqqdq")
        tree = cls(seed=seed, n=n, dt=dt, has_xi=bool(has_xi))
        for _ in range(n_steps):
            sigma, n_c = struct.unpack_from("<dq", raw, off)
            off += struct.calcsize("<dq")
            pairs = np.frombuffer(raw, dtype="<i8", count=2 * n_c, offset=off).reshape(n_c, 2)
            off += 16 * n_c
            thetas = np.frombuffer(raw, dtype="<f8", count=n_c, offset=off)
            off += 8 * n_c
            xis = None
            if has_xi:
                xis = np.frombuffer(raw, dtype="<f8", count=n_c, offset=off)
                off += 8 * n_c
            tree.steps.append(StepRecord(sigma, n_c, pairs.copy(), thetas.copy(),
                                         None if xis is None else xis.copy()))
        if off != len(raw):
            raise ValueError("trailing bytes in collision tree file")
        return tree


class TreeCursor:
    """Sequential reader over a CollisionTree's steps."""

    def __init__(self, tree: CollisionTree):
        self.tree = tree
        self.index = 0

    @property
    def exhausted(self) -> bool:
        return self.index >= len(self.tree.steps)

    def next_step(self) -> StepRecord:
        if self.exhausted:
            raise ValueError("collision tree exhausted: run has more steps than the tree")
        rec = self.tree.steps[self.index]
        self.index += 1
        return rec


# ---------------------------------------------------------------------------
# elementary operations

def sround(x: float, rng: np.random.Generator) -> int:
    """Unbiased stochastic rounding; always consumes exactly one uniform."""
    if x < 0:
        raise ValueError("sround requires a nonnegative argument")
    base = int(np.floor(x))
    return base + int(rng.random() < x - base)


def select_pairs(n: int, n_c: int, rng: np.random.Generator) -> np.ndarray:
    """n_c disjoint index pairs: consecutive entries of a random permutation."""
    if 2 * n_c > n:
        raise ValueError("cannot select more disjoint pairs than N/2")
    perm = rng.permutation(n)
    return perm[: 2 * n_c].astype(np.int64).reshape(n_c, 2)


def _unit_vectors(thetas: np.ndarray) -> np.ndarray:
    return np.stack([np.cos(thetas), np.sin(thetas)], axis=1)


# ---------------------------------------------------------------------------
# Kac engine

def _kac_rotate(coeffs: np.ndarray, pairs: np.ndarray, thetas: np.ndarray) -> None:
    ci = coeffs[pairs[:, 0]]
    cj = coeffs[pairs[:, 1]]
    c = np.cos(thetas)[:, None, None]
    s = np.sin(thetas)[:, None, None]
    coeffs[pairs[:, 0]] = ci * c - cj * s
    coeffs[pairs[:, 1]] = ci * s + cj * c


def kac_collide(p_i: GpcVelocity, p_j: GpcVelocity, theta: float):
    """Rotate one pair in coefficient space (exact for the Kac rule)."""
    if p_i.coeffs.shape[0] != 1 or p_j.coeffs.shape[0] != 1:
        raise ValueError("Kac collisions are defined for d_v = 1")
    batch = np.stack([p_i.coeffs, p_j.coeffs]).copy()
    _kac_rotate(batch, np.array([[0, 1]]), np.array([float(theta)]))
    return GpcVelocity(batch[0]), GpcVelocity(batch[1])


# ---------------------------------------------------------------------------
# Maxwell engine

def _stacked_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(P, d, K) @ (K, H) as one flat GEMM; numpy's 3D matmul loops over P."""
    p, d, k = a.shape
    return (np.ascontiguousarray(a).reshape(p * d, k) @ b).reshape(p, d, -1)


def _maxwell_batch(coeffs: np.ndarray, basis: RandomBasis, pairs: np.ndarray,
                   thetas: np.ndarray) -> None:
    ci = coeffs[pairs[:, 0]]                       # (P, 2, K)
    cj = coeffs[pairs[:, 1]]
    d = _stacked_matmul(ci - cj, basis.eval_table)  # (P, 2, Hn)
    dmod = np.sqrt(d[:, 0, :] ** 2 + d[:, 1, :] ** 2)
    vhat = dmod @ basis.proj_table.T               # (P, K) modes of |v_i - v_j|
    mean = 0.5 * (ci + cj)
    omega = _unit_vectors(thetas)                  # (P, 2)
    delta = 0.5 * omega[:, :, None] * vhat[:, None, :]
    coeffs[pairs[:, 0]] = mean + delta
    coeffs[pairs[:, 1]] = mean - delta


def maxwell_collide(p_i: GpcVelocity, p_j: GpcVelocity, omega, basis: RandomBasis):
    """Collide one pair with a fixed unit scattering vector omega."""
    omega = np.asarray(omega, dtype=float)
    if abs(np.hypot(omega[0], omega[1]) - 1.0) > 1e-9:
        raise ValueError("omega must be a unit vector")
    if p_i.coeffs.shape[0] != 2:
        raise ValueError("Maxwell collisions are defined for d_v = 2")
    theta = np.arctan2(omega[1], omega[0])
    batch = np.stack([p_i.coeffs, p_j.coeffs]).copy()
    _maxwell_batch(batch, basis, np.array([[0, 1]]), np.array([theta]))
    return GpcVelocity(batch[0]), GpcVelocity(batch[1])


def maxwell_bessel_gap(p_i: GpcVelocity, p_j: GpcVelocity, basis: RandomBasis) -> float:
    """Quadrature energy lost by projecting |v_i - v_j|: sum_h w_h |d_h|^2 - sum_m V_m^2.

    The pair's nodal energy drops by exactly half this per collision; it is
    zero when H = M (square evaluation matrix) and spectrally small in M
    otherwise.
    """
    d = (p_i.coeffs - p_j.coeffs) @ basis.eval_table
    dmod = np.sqrt(d[0] ** 2 + d[1] ** 2)
    vhat = basis.proj_table @ dmod
    return float(np.sum(basis.weights * dmod**2) - np.sum(vhat**2))


# ---------------------------------------------------------------------------
# VHS engine

def vhs_sigma_bound(ensemble: Ensemble, kernel: VHSKernel) -> float:
    """Per-step kernel bound Sigma = max_h B(z_h, 2 max_i |v_i(z_h) - vbar(z_h)|)."""
    if ensemble.n == 0:
        raise ValueError("empty ensemble")
    basis = ensemble.basis
    nodal = ensemble.nodal_values()                # (N, 2, Hn)
    dev = nodal - nodal.mean(axis=0, keepdims=True)
    mod = np.sqrt(dev[:, 0, :] ** 2 + dev[:, 1, :] ** 2)
    two_dv = 2.0 * mod.max(axis=0)                 # (Hn,)
    b = kernel.c_gamma * two_dv ** kernel.gamma_at(basis.nodes)
    return float(b.max())


def _vhs_batch(coeffs: np.ndarray, basis: RandomBasis, pairs: np.ndarray,
               thetas: np.ndarray, xis: np.ndarray, kernel: VHSKernel,
               mode, sigma: float, audit: bool = False) -> float:
    """Apply regularized VHS collisions; returns the worst nodal pair-energy
    deviation across the batch when audit is set (else 0)."""
    ci = coeffs[pairs[:, 0]]
    cj = coeffs[pairs[:, 1]]
    vi = _stacked_matmul(ci, basis.eval_table)     # (P, 2, Hn)
    vj = _stacked_matmul(cj, basis.eval_table)
    d = vi - vj
    dmod = np.sqrt(d[:, 0, :] ** 2 + d[:, 1, :] ** 2)

    gam = kernel.gamma_at(basis.nodes)[None, :]
    b = kernel.c_gamma * dmod**gam
    np.minimum(b, sigma, out=b)                    # defensive: bound never exceeded
    thresh = sigma * xis[:, None]
    if isinstance(mode, Indicator):
        a = (thresh < b).astype(float)
    else:
        a = 0.5 * (np.tanh(mode.beta * (b - thresh)) + 1.0)

    omega = _unit_vectors(thetas)
    dd = d - dmod[:, None, :] * omega[:, :, None]  # (v_i - v_j) - |v_i - v_j| omega
    shift = 0.5 * a[:, None, :] * dd
    vi_post = vi - shift
    vj_post = vj + shift

    if isinstance(mode, SigmoidThermalized):
        dp = vi_post - vj_post
        dpmod = np.sqrt(dp[:, 0, :] ** 2 + dp[:, 1, :] ** 2)
        ratio = np.where(dpmod > 0.0, dmod / np.where(dpmod > 0.0, dpmod, 1.0), 1.0)
        u = 0.5 * (vi + vj)
        vi_post = u + 0.5 * ratio[:, None, :] * dp
        vj_post = u - 0.5 * ratio[:, None, :] * dp

    dev = 0.0
    if audit:
        pre = np.sum(vi**2 + vj**2, axis=1)
        post = np.sum(vi_post**2 + vj_post**2, axis=1)
        dev = float(np.max(np.abs(post - pre))) if pre.size else 0.0

    coeffs[pairs[:, 0]] = _stacked_matmul(vi_post, basis.proj_table.T)
    coeffs[pairs[:, 1]] = _stacked_matmul(vj_post, basis.proj_table.T)
    return dev


def vhs_collide(p_i: GpcVelocity, p_j: GpcVelocity, omega, xi: float,
                kernel: VHSKernel, mode, basis: RandomBasis, sigma: float):
    """Collide one pair through the dummy-collision acceptance step."""
    if sigma <= 0:
        raise ValueError("sigma bound must be positive")
    omega = np.asarray(omega, dtype=float)
    if abs(np.hypot(omega[0], omega[1]) - 1.0) > 1e-9:
        raise ValueError("omega must be a unit vector")
    theta = np.arctan2(omega[1], omega[0])
    batch = np.stack([p_i.coeffs, p_j.coeffs]).copy()
    _vhs_batch(batch, basis, np.array([[0, 1]]), np.array([theta]),
               np.array([float(xi)]), kernel, mode, sigma)
    return GpcVelocity(batch[0]), GpcVelocity(batch[1])


# ---------------------------------------------------------------------------
# time step

@dataclass
class StepStats:
    n_c: int
    mu: float
    sigma: float
    max_pair_energy_dev: float = 0.0


def step(ensemble: Ensemble, kernel, mode, dt: float, streams,
         recorder: CollisionTree | None = None,
         replay: TreeCursor | None = None,
         audit: bool = False) -> StepStats:
    """One forward-Euler DSMC step; see the module docstring for the draw order.

    `streams` carries the named generators (sround, pairing, angles,
    rejection). With `replay` set, every choice comes from the tree and no
    generator is touched. With `recorder` set, the realized choices are
    appended to it.
    """
    n = ensemble.n
    coeffs = ensemble.coeffs
    basis = ensemble.basis
    is_vhs = isinstance(kernel, VHSKernel)

    if replay is not None:
        rec = replay.next_step()
        sigma, n_c, pairs, thetas, xis = rec.sigma, rec.n_c, rec.pairs, rec.thetas, rec.xis
        if is_vhs != (xis is not None):
            raise ValueError("collision tree kernel type does not match the run")
        if n_c and pairs.max() >= n:
            raise ValueError("collision tree pair index out of range: N mismatch")
        mu = 2.0 ** (kernel.d_v - 1) * np.pi * sigma if is_vhs else kernel.mu
    else:
        if is_vhs:
            sigma = vhs_sigma_bound(ensemble, kernel)
            mu = 2.0 ** (kernel.d_v - 1) * np.pi * sigma
        else:
            sigma = 0.0
            mu = kernel.mu
        if mu * dt > 1.0:
            raise ValueError(
                f"mu*dt = {mu * dt:.6g} > 1: forward Euler probabilistic "
                "interpretation violated")
        n_c = min(sround(mu * n * dt / 2.0, streams.sround), n // 2)
        pairs = select_pairs(n, n_c, streams.pairing)
        thetas = streams.angles.uniform(0.0, TWO_PI, n_c)
        xis = streams.rejection.random(n_c) if is_vhs else None

    dev = 0.0
    if n_c:
        if isinstance(kernel, KacKernel):
            _kac_rotate(coeffs, pairs, thetas)
        elif isinstance(kernel, MaxwellKernel):
            _maxwell_batch(coeffs, basis, pairs, thetas)
        elif is_vhs:
            dev = _vhs_batch(coeffs, basis, pairs, thetas, xis, kernel, mode,
                             sigma, audit=audit)
        else:
            raise TypeError(f"unknown kernel: {kernel!r}")

    if recorder is not None and replay is None:
        recorder.append_step(sigma, n_c, pairs, thetas, xis)
    return StepStats(n_c=int(n_c), mu=float(mu), sigma=float(sigma),
                     max_pair_energy_dev=dev)
