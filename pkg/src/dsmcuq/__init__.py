"""Particle DSMC solver for kinetic equations with random inputs.

Each particle carries a gPC expansion of its velocity over the random
space; collisions act on the expansions (exactly where the rule is linear,
through quadrature projection where it is not). See the module docstrings
for the numerical contracts.
"""

__version__ = "0.1.0"

from .collision import (AffineGamma, CollisionTree, Indicator, KacKernel,
                        MaxwellKernel, Sigmoid, SigmoidThermalized, StepStats,
                        TreeCursor, VHSKernel, kac_collide, maxwell_bessel_gap,
                        maxwell_collide, select_pairs, sround, step,
                        vhs_collide, vhs_sigma_bound)
from .diagnostics import (DensityGrid, MomentEntry, MomentSeries,
                          density_reconstruct, l2_error_vs_reference, moment,
                          rmse_scaling_check, stress_tensor,
                          write_convergence_csv, write_density_csv,
                          write_metrics_csv, write_moment_csv, write_nodal_csv)
from .ensemble import (Ensemble, GpcVelocity, KacSquaredGaussian, Maxwell2D,
                       TwoGaussians2D, sample_initial, sample_kac_density,
                       sample_maxwell2d_density, sort_couple_1d)
from .exact import (KacExactParams, Maxwell2DExactParams, StressExactParams,
                    kac_exact_density, kac_exact_moment,
                    maxwell2d_exact_density, maxwell2d_exact_marginal,
                    maxwell2d_exact_moment, stress_exact)
from .random_space import (RandomBasis, build_basis, evaluate_expansion,
                           expectation, l2_omega_norm, project, variance)
from .rng import RngStreams, make_streams
from .runner import (CompareResult, ConvergenceResult, RunManifest, RunResult,
                     SimulationConfig, compare_exact, config_from_file,
                     config_from_mapping, convergence_study, run)

__all__ = [name for name in dir() if not name.startswith("_")]
