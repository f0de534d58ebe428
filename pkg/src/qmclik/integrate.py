"""Truncated MC / QMC estimation of mode-relative normalizing constants."""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import CurvatureMeta, PosteriorModel, find_mode
from .sequences import PointSet, derive_seed, scale_to_box, uniform_grid

__all__ = [
    "TruncationRegion",
    "EstimateReport",
    "ReplicateStats",
    "default_t",
    "truncation_radius",
    "make_region",
    "estimate_normalizer",
    "relative_error",
    "run_mc_replicates",
    "log_sum_exp",
]

POLICIES = ("fixed_p", "high_dim", "custom")


def default_t(n: float, meta: CurvatureMeta) -> float:
    """Default inflation ``t(n) = sqrt(eta2 log(n) / eta1)``."""
    return math.sqrt(meta.eta2 * math.log(n) / meta.eta1)


def truncation_radius(n: float, p: int, meta: CurvatureMeta, policy: str = "fixed_p",
                      t: Optional[float] = None) -> float:
    """Half-width of the truncation cube.

    ``fixed_p`` gives ``gamma = sqrt(t / (eta2 * n))``; ``high_dim`` inflates it
    by ``sqrt(p)``.  ``t`` defaults to :func:`default_t`.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 so that log(n) > 0, got n={n}")
    if policy not in ("fixed_p", "high_dim"):
        raise ValueError(f"unknown policy {policy!r}; expected 'fixed_p' or 'high_dim'")
    t = default_t(n, meta) if t is None else float(t)
    if not t > 0:
        raise ValueError("t(n) must be positive")
    gamma = math.sqrt(t / (meta.eta2 * n))
    return gamma * math.sqrt(p) if policy == "high_dim" else gamma


@dataclass(frozen=True, eq=False)
class TruncationRegion:
    center: np.ndarray
    radius: float
    policy: str
    t_value: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float)).copy()
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")

    @property
    def p(self) -> int:
        return self.center.size

    def log_volume(self) -> float:
        """Log volume of the cube."""
        return self.p * math.log(2 * self.radius)

    def log_inscribed_ball_volume(self) -> float:
        """Log volume of the L2 ball of the same radius (the ball the truncation bound controls)."""
        p = self.p
        return 0.5 * p * math.log(math.pi) - math.lgamma(p / 2 + 1) + p * math.log(self.radius)

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "radius": self.radius, "policy": self.policy,
                "t_value": self.t_value, "log_volume": self.log_volume(),
                "log_ball_volume": self.log_inscribed_ball_volume()}


def make_region(model: PosteriorModel, policy: str = "high_dim", t: Optional[float] = None,
                meta: Optional[CurvatureMeta] = None, radius: Optional[float] = None,
                tol: float = 1e-10) -> TruncationRegion:
    """Truncation cube around the model's mode.

    Uses ``model.mode`` when the model carries it, otherwise runs
    :func:`find_mode` from the origin.  ``radius`` with ``policy='custom'``
    bypasses the radius recipe.
    """
    if model.mode is not None:
        center = np.asarray(model.mode, dtype=float)
    else:
        res = find_mode(model, np.zeros(model.p), tol=tol)
        if not res.converged:
            raise RuntimeError(f"mode search did not converge (|grad| = {res.grad_norm:.3g})")
        center = res.theta_hat
    meta = meta or model.meta
    if policy == "custom":
        if radius is None:
            raise ValueError("policy='custom' requires an explicit radius")
        return TruncationRegion(center, float(radius), "custom", float("nan") if t is None else float(t))
    t_val = default_t(model.n, meta) if t is None else float(t)
    r = truncation_radius(model.n, model.p, meta, policy, t_val)
    return TruncationRegion(center, r, policy, t_val)


def log_sum_exp(values: np.ndarray) -> float:
    """Stable ``log(sum(exp(values)))``; returns ``-inf`` when every term underflows."""
    v = np.asarray(values, dtype=float)
    top = np.max(v)
    if not np.isfinite(top):
        return float(top)
    # np.sum uses pairwise summation
    return float(top + np.log(np.sum(np.exp(v - top))))


@dataclass(frozen=True, eq=False)
class EstimateReport:
    log_estimate: float
    grid: dict
    region: TruncationRegion
    rel_error: Optional[float] = None
    wall_time: float = 0.0
    diagnostic: Optional[str] = None

    def to_dict(self, timing: bool = False) -> dict:
        out = {"log_estimate": self.log_estimate, "grid": self.grid,
               "region": self.region.to_dict(), "rel_error": self.rel_error}
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        if timing:
            out["wall_time"] = self.wall_time
        return out


def _shifted_log_values(model: PosteriorModel, region: TruncationRegion, ps: PointSet) -> np.ndarray:
    ref = float(model.log_post(region.center))
    if not math.isfinite(ref):
        # nothing to measure against; every summand counts as lost
        return np.full(ps.m, -np.inf)
    theta = scale_to_box(ps, region.center, region.radius)
    lp = np.asarray(model.log_post(theta), dtype=float).reshape(-1)
    return lp - ref


def estimate_normalizer(model: PosteriorModel, region: TruncationRegion, ps: PointSet) -> EstimateReport:
    """Truncated estimator ``(2γ)^p / m * sum_i exp(l(θ_i) - l(θ̂))`` on the log scale.

    ``θ_i`` are the grid points mapped onto the region.  ``rel_error`` is filled
    in against ``model.oracle_log_normalizer`` when the model has one.
    """
    if ps.p != model.p:
        raise ValueError(f"point set has p={ps.p}, model has p={model.p}")
    if region.p != model.p:
        raise ValueError("region dimension does not match the model")
    start = time.perf_counter()
    vals = _shifted_log_values(model, region, ps)
    lse = log_sum_exp(vals)
    diagnostic = None
    if lse == -math.inf:
        log_est = -math.inf
        diagnostic = "every summand underflowed; the region misses the posterior mass"
    else:
        log_est = region.log_volume() - math.log(ps.m) + lse
    rel = None
    if model.oracle_log_normalizer is not None and math.isfinite(log_est):
        rel = relative_error(log_est, model.oracle_log_normalizer)
    elif model.oracle_log_normalizer is not None:
        rel = -1.0
    return EstimateReport(log_est, ps.describe(), region, rel, time.perf_counter() - start, diagnostic)


def relative_error(report, oracle_log: float) -> float:
    """``exp(log_estimate - oracle_log) - 1``; accepts a report or a bare log estimate."""
    log_est = report.log_estimate if isinstance(report, EstimateReport) else float(report)
    if not (math.isfinite(log_est) and math.isfinite(oracle_log)):
        raise ValueError("relative_error needs finite log values")
    diff = log_est - oracle_log
    return math.expm1(diff) if diff < 709.0 else math.inf


@dataclass(frozen=True)
class ReplicateStats:
    """Summary of MC replicates.

    Quantiles use linear interpolation between order statistics (Hyndman-Fan type 7).
    When the model has no oracle the statistics are over log estimates and
    ``over_log_estimates`` is set.
    """

    mean_rel_error: float
    q025: float
    q975: float
    n_replicates: int
    per_replicate_seeds: list
    values: tuple = ()
    over_log_estimates: bool = False

    def to_dict(self) -> dict:
        return {"mean_rel_error": self.mean_rel_error, "q025": self.q025, "q975": self.q975,
                "n_replicates": self.n_replicates, "per_replicate_seeds": list(self.per_replicate_seeds),
                "over_log_estimates": self.over_log_estimates}


def summarize(values) -> tuple:
    v = np.asarray(values, dtype=float)
    q025, q975 = np.quantile(v, [0.025, 0.975], method="linear")
    return float(np.mean(v)), float(q025), float(q975)


def run_mc_replicates(model: PosteriorModel, region: TruncationRegion, m: int, R: int,
                      seed: int, threads: int = 1) -> ReplicateStats:
    """``R`` uniform-grid estimates with seeds ``derive_seed(seed, r)``.

    Results do not depend on ``threads``.
    """
    if R < 1:
        raise ValueError("need at least one replicate")
    seeds = [derive_seed(seed, r) for r in range(R)]
    has_oracle = model.oracle_log_normalizer is not None

    def one(s):
        rep = estimate_normalizer(model, region, uniform_grid(m, model.p, s))
        return rep.rel_error if has_oracle else rep.log_estimate

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            vals = list(pool.map(one, seeds))
    else:
        vals = [one(s) for s in seeds]
    mean, q025, q975 = summarize(vals)
    return ReplicateStats(mean, q025, q975, R, seeds, tuple(vals), not has_oracle)
