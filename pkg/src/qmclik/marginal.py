"""Marginal likelihoods of grouped models as sums of per-group truncated integrals."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .integrate import TruncationRegion, estimate_normalizer
from .model import CurvatureMeta, PosteriorModel, find_mode
from .sequences import derive_seed, halton, uniform_grid

__all__ = [
    "GroupedModel",
    "MarginalEval",
    "MMLEResult",
    "mixed_model_radius",
    "random_intercept_lmm",
    "simulate_lmm",
    "marginal_loglik",
    "lmm_marginal_oracle",
    "lmm_gls_estimate",
    "golden_section_max",
    "mmle",
]


def mixed_model_radius(n_i: int, p: int, meta: CurvatureMeta, policy: str = "high_dim") -> float:
    """Per-group half-width ``sqrt(eta1 log(n_i) / eta2)``, times ``sqrt(p)`` for ``high_dim``.

    Unlike the single-posterior radius this does not shrink with ``n_i``, which
    keeps the per-group truncation loss small at the group sizes typical of
    mixed models.
    """
    if n_i < 2:
        raise ValueError(f"group size must be >= 2 for the default radius, got {n_i}")
    g2 = meta.eta1 * math.log(n_i) / meta.eta2
    if policy == "high_dim":
        g2 *= p
    elif policy != "fixed_p":
        raise ValueError(f"unknown policy {policy!r}")
    return math.sqrt(g2)


@dataclass(frozen=True, eq=False)
class GroupedModel:
    """``k`` independent groups, each contributing ``∫ exp(l_i(θ, u)) du``.

    ``per_group_posterior(theta, i)`` returns a :class:`PosteriorModel` in the
    random effect ``u_i`` whose ``log_post`` is the full joint log density of
    group ``i`` (constants included), so that the mode value plus the
    mode-relative integral is the group's log marginal.
    """

    groups: tuple
    p: int
    q: int
    per_group_posterior: Callable
    policy: str = "high_dim"
    radius_rule: Callable = mixed_model_radius
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.groups) < 1:
            raise ValueError("need at least one group")
        if any(len(g) == 0 for g in self.groups):
            raise ValueError("groups must be nonempty")

    @property
    def k(self) -> int:
        return len(self.groups)

    def permuted(self, order: Sequence[int]) -> "GroupedModel":
        order = list(order)
        groups = tuple(self.groups[i] for i in order)
        pgp = self.per_group_posterior
        return GroupedModel(groups, self.p, self.q, lambda th, i: pgp(th, order[i]),
                            self.policy, self.radius_rule, dict(self.info))


@dataclass(frozen=True)
class MarginalEval:
    theta: np.ndarray
    log_marginal: float
    per_group_logs: np.ndarray
    method: str
    m: int
    seed: Optional[int] = None
    failed_group: Optional[int] = None


def random_intercept_lmm(groups, sigma: float, tau: float) -> GroupedModel:
    """``y_ij = theta + u_i + e_ij`` with ``u_i ~ N(0, tau^2)``, ``e_ij ~ N(0, sigma^2)``.

    ``tau = 0`` is accepted for the closed-form oracle only; integrating needs ``tau > 0``.
    """
    if sigma <= 0 or tau < 0:
        raise ValueError("need sigma > 0 and tau >= 0")
    groups = tuple(np.asarray(g, dtype=float).ravel() for g in groups)
    s2, t2 = sigma ** 2, tau ** 2

    def per_group(theta, i):
        if t2 == 0:
            raise ValueError("tau = 0 leaves no random effect to integrate")
        y = groups[i]
        th = float(np.atleast_1d(theta)[0])
        r = y - th
        ni = y.size
        prec = ni / s2 + 1 / t2
        const = -0.5 * ni * math.log(2 * math.pi * s2) - 0.5 * math.log(2 * math.pi * t2)
        rs, rss = float(r.sum()), float(r @ r)

        def log_post(u):
            u = np.asarray(u, dtype=float)
            uu = u[..., 0] if u.ndim else u
            return const - (rss - 2 * uu * rs + ni * uu ** 2) / (2 * s2) - uu ** 2 / (2 * t2)

        def grad(u):
            uu = float(np.atleast_1d(u)[0])
            return np.array([(rs - ni * uu) / s2 - uu / t2])

        def hess(u):
            return np.array([[-prec]])

        eta = prec / ni
        meta = CurvatureMeta(eta1=eta, eta2=eta, deriv_bound_D=eta, epsilon=1.0)
        mode = np.array([rs / s2 / prec])
        return PosteriorModel(1, ni, log_post, grad, hess, meta, mode, None, {"group": i})

    return GroupedModel(groups, 1, 1, per_group, info={"family": "lmm", "sigma": sigma, "tau": tau})


def simulate_lmm(k: int, ni: int, sigma: float, tau: float, theta0: float, seed: int) -> GroupedModel:
    """Draw a balanced random-intercept data set and wrap it as a :class:`GroupedModel`."""
    rng = np.random.default_rng(seed)
    u = rng.normal(0.0, tau, size=k)
    groups = [theta0 + u[i] + rng.normal(0.0, sigma, size=ni) for i in range(k)]
    gm = random_intercept_lmm(groups, sigma, tau)
    gm.info.update({"theta0": theta0, "seed": seed})
    return gm


def _group_log(gm, theta, i, method, m, seed, start_index):
    model = gm.per_group_posterior(theta, i)
    if model.mode is not None:
        center = np.asarray(model.mode, dtype=float)
    else:
        res = find_mode(model, np.zeros(model.p), tol=1e-10)
        if not res.converged:
            return -math.inf
        center = res.theta_hat
    radius = gm.radius_rule(model.n, model.p, model.meta, gm.policy)
    region = TruncationRegion(center, radius, "custom", math.nan)
    if method == "qmc":
        ps = halton(m, model.p, start_index)
    else:
        ps = uniform_grid(m, model.p, derive_seed(seed, i))
    rep = estimate_normalizer(model, region, ps)
    return float(model.log_post(center)) + rep.log_estimate


def marginal_loglik(gm: GroupedModel, theta, method: str = "qmc", m: int = 1024,
                    seed: Optional[int] = None, start_index: int = 0,
                    threads: int = 1) -> MarginalEval:
    """Approximate log marginal likelihood at ``theta``.

    Each group is integrated on its own truncation cube around the group mode
    and the logs are summed.  For ``method='mc'`` group ``i`` uses the seed
    ``derive_seed(seed, i)``.
    """
    if method not in ("qmc", "mc"):
        raise ValueError(f"method must be 'qmc' or 'mc', got {method!r}")
    if m < 1:
        raise ValueError("m must be >= 1")
    if method == "mc" and seed is None:
        raise ValueError("method='mc' needs a seed")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    job = lambda i: _group_log(gm, theta, i, method, m, seed, start_index)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            logs = np.array(list(pool.map(job, range(gm.k))))
    else:
        logs = np.array([job(i) for i in range(gm.k)])
    bad = np.flatnonzero(~np.isfinite(logs))
    if bad.size:
        return MarginalEval(theta, -math.inf, logs, method, m, seed, int(bad[0]))
    # fsum is exactly rounded, so group order cannot change the result
    return MarginalEval(theta, float(math.fsum(logs)), logs, method, m, seed)


def lmm_marginal_oracle(gm: GroupedModel, theta) -> float:
    """Exact log marginal likelihood of the random-intercept LMM.

    Each group is ``N(theta 1, sigma^2 I + tau^2 J)``; the compound-symmetric
    covariance has determinant ``sigma^{2(n-1)} (sigma^2 + n tau^2)`` and an
    explicit inverse.
    """
    if gm.info.get("family") != "lmm":
        raise TypeError("oracle requires a random_intercept_lmm model")
    s2, t2 = gm.info["sigma"] ** 2, gm.info["tau"] ** 2
    if s2 <= 0 or t2 < 0:
        raise ValueError("covariance is not positive definite")
    th = float(np.atleast_1d(theta)[0])
    total = []
    for y in gm.groups:
        n = y.size
        r = y - th
        big = s2 + n * t2
        logdet = (n - 1) * math.log(s2) + math.log(big)
        quad = (float(r @ r) - t2 * float(r.sum()) ** 2 / big) / s2
        total.append(-0.5 * (n * math.log(2 * math.pi) + logdet + quad))
    return math.fsum(total)


def lmm_gls_estimate(gm: GroupedModel) -> float:
    """Closed-form maximizer of :func:`lmm_marginal_oracle` (the GLS mean)."""
    s2, t2 = gm.info["sigma"] ** 2, gm.info["tau"] ** 2
    num = sum(float(y.sum()) / (s2 + y.size * t2) for y in gm.groups)
    den = sum(y.size / (s2 + y.size * t2) for y in gm.groups)
    return num / den


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-8,
                       max_iter: int = 200):
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x), iterations, trace)``."""
    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    trace = []
    it = 0
    while abs(b - a) > tol and it < max_iter:
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        trace.append((a, b))
    x = 0.5 * (a + b)
    return x, f(x), it, trace


@dataclass(frozen=True)
class MMLEResult:
    theta_tilde: np.ndarray
    log_marginal_at_opt: float
    converged: bool
    iterations: int
    trace: list = field(default_factory=list)


def mmle(gm: GroupedModel, method: str = "qmc", m: int = 1024, seed: Optional[int] = None,
         bracket=None, tol: float = 1e-6, objective: Optional[Callable] = None,
         start_index: int = 0, threads: int = 1) -> MMLEResult:
    """Maximize the approximate marginal likelihood over the fixed effects.

    For ``q = 1`` golden-section search runs over ``bracket`` (default: the
    range of the pooled responses); for ``q > 1`` Nelder-Mead starts at the
    bracket centre.  MC objectives keep one seed for every evaluation so the
    objective is deterministic.  ``objective`` replaces the approximation, e.g.
    with :func:`lmm_marginal_oracle`.
    """
    if objective is None:
        objective = lambda th: marginal_loglik(gm, th, method, m, seed, start_index, threads).log_marginal
    if bracket is None:
        pooled = np.concatenate([np.asarray(g).ravel() for g in gm.groups])
        bracket = (float(pooled.min()), float(pooled.max()))
    if gm.q == 1:
        a, b = float(bracket[0]), float(bracket[1])
        if not a < b:
            raise ValueError("bracket must satisfy a < b")
        x, fx, it, trace = golden_section_max(lambda v: objective(np.array([v])), a, b, tol)
        converged = abs(trace[-1][1] - trace[-1][0]) <= tol if trace else True
        return MMLEResult(np.array([x]), fx, converged, it, trace)
    lo, hi = np.asarray(bracket[0], float), np.asarray(bracket[1], float)
    res = minimize(lambda th: -objective(th), 0.5 * (lo + hi), method="Nelder-Mead",
                   options={"xatol": tol, "fatol": 1e-12, "maxiter": 2000 * gm.q})
    return MMLEResult(res.x, -float(res.fun), bool(res.success), int(res.nit), [res.message])
