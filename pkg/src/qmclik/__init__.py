"""Truncated Monte Carlo and quasi-Monte Carlo estimation of likelihood integrals.

Point sets, exact star discrepancy, posterior models with closed-form oracles,
the truncated estimator, evaluators for the MC and QMC error bounds, grouped
marginal likelihoods and the Gaussian simulation study.
"""
from .bounds import (BoundReport, bell_number, crossover, hk_variation_bound, kh_error_bound,
                     l2_truncation_bound, lipschitz_constant, mc_error_rate, mc_tail_bound,
                     mc_tail_report, qmc_error_rate, truncation_error_bound)
from .discrepancy import (DiscrepancyReport, WorkBudgetExceeded, halton_bound_asymptotic,
                          halton_bound_explicit, local_discrepancy, prime_bounds_check,
                          star_discrepancy_1d, star_discrepancy_exact)
from .experiments import ExperimentConfig, TableRow, reproduce_tables, trend_checks
from .integrate import (EstimateReport, ReplicateStats, TruncationRegion, default_t,
                        estimate_normalizer, make_region, relative_error, run_mc_replicates,
                        truncation_radius)
from .marginal import (GroupedModel, MarginalEval, MMLEResult, lmm_gls_estimate,
                       lmm_marginal_oracle, marginal_loglik, mixed_model_radius, mmle,
                       random_intercept_lmm, simulate_lmm)
from .model import (CurvatureMeta, PosteriorModel, find_mode, gaussian_conjugate,
                    gaussian_log_normalizer, truncated_normalizer_oracle)
from .sequences import PointSet, derive_seed, halton, nth_prime, radical_inverse, uniform_grid

__version__ = "0.1.0"
