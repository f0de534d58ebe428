"""Posterior models: log-posterior with derivatives, curvature metadata, oracles.

All normalizing constants here are mode-relative: the quantity of interest is
``log ∫ exp(l_n(θ) - l_n(θ̂)) dθ``, which stays O(1) on the log scale for any n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import erf

__all__ = [
    "CurvatureMeta",
    "PosteriorModel",
    "ModeResult",
    "gaussian_conjugate",
    "gaussian_log_normalizer",
    "truncated_normalizer_oracle",
    "find_mode",
    "finite_diff_check",
]


@dataclass(frozen=True)
class CurvatureMeta:
    """Per-observation curvature and smoothness constants of a log-posterior.

    eta1, eta2
        The negative Hessian has eigenvalues in ``[eta1 * n, eta2 * n]`` near the mode.
    deriv_bound_D
        Partial derivatives up to order p are bounded by ``D * n`` on the truncation cube.
    epsilon
        Outside the locality radius the log-likelihood drops by at least ``n**epsilon``.
    delta_np
        Locality radius; ``inf`` for globally log-concave models.
    """

    eta1: float
    eta2: float
    deriv_bound_D: float = 1.0
    epsilon: float = 1.0
    delta_np: float = math.inf

    def __post_init__(self):
        if not (0 < self.eta1 <= self.eta2):
            raise ValueError(f"need 0 < eta1 <= eta2, got eta1={self.eta1}, eta2={self.eta2}")
        for name in ("deriv_bound_D", "epsilon", "delta_np"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True, eq=False)
class PosteriorModel:
    """Log-posterior ``l_n = L_n + log prior`` in ``p`` dimensions.

    ``log_post`` must accept either a single ``p``-vector or an ``(m, p)`` array
    of parameter rows, returning a scalar or an ``m``-vector.  ``grad`` and
    ``hess`` take a single ``p``-vector.  Callables must be reentrant.
    """

    p: int
    n: int
    log_post: Callable
    grad: Callable
    hess: Callable
    meta: CurvatureMeta
    mode: Optional[np.ndarray] = None
    oracle_log_normalizer: Optional[float] = None
    info: dict = field(default_factory=dict)

    def shifted(self, c: float) -> "PosteriorModel":
        """Same model with ``c`` added to the log-posterior."""
        lp = self.log_post
        return PosteriorModel(self.p, self.n, lambda th: lp(th) + c, self.grad, self.hess,
                              self.meta, self.mode, self.oracle_log_normalizer, dict(self.info))


def gaussian_conjugate(data, sigma: float = 1.0, sigma_p: float = 1.0) -> PosteriorModel:
    """Isotropic Gaussian mean model with a ``N(0, sigma_p^2 I)`` prior.

    ``data`` is ``n x p``.  The posterior precision is ``n/sigma^2 + 1/sigma_p^2``
    in every coordinate, so the mode, Hessian and normalizer are all closed form.
    Curvature metadata is set so the Hessian bounds hold with equality; the
    derivative bound uses the same value since all derivatives above order two
    vanish.
    """
    y = np.atleast_2d(np.asarray(data, dtype=float))
    if y.ndim != 2 or y.shape[0] < 1:
        raise ValueError("data must be an n x p array with n >= 1")
    if not np.all(np.isfinite(y)):
        raise ValueError("data must be finite")
    if sigma <= 0 or sigma_p <= 0:
        raise ValueError("sigma and sigma_p must be positive")
    n, p = y.shape
    s2, sp2 = float(sigma) ** 2, float(sigma_p) ** 2
    prec = n / s2 + 1.0 / sp2
    total = y.sum(axis=0)
    # centred sum of squares so log_post stays well scaled for large n
    ybar = total / n
    ss = float(np.sum((y - ybar) ** 2))

    def log_post(theta):
        th = np.asarray(theta, dtype=float)
        d2 = np.sum((th - ybar) ** 2, axis=-1)
        return -(ss + n * d2) / (2 * s2) - np.sum(th ** 2, axis=-1) / (2 * sp2)

    def grad(theta):
        th = np.asarray(theta, dtype=float)
        return (total - n * th) / s2 - th / sp2

    def hess(theta):
        return -prec * np.eye(p)

    mode = total / s2 / prec
    eta = prec / n
    meta = CurvatureMeta(eta1=eta, eta2=eta, deriv_bound_D=eta, epsilon=1.0)
    info = {"family": "gaussian", "sigma": float(sigma), "sigma_p": float(sigma_p),
            "posterior_variance": 1.0 / prec}
    model = PosteriorModel(p, n, log_post, grad, hess, meta, mode, None, info)
    object.__setattr__(model, "oracle_log_normalizer", gaussian_log_normalizer(model))
    return model


def _gaussian_variance(model: PosteriorModel) -> float:
    if model.info.get("family") != "gaussian":
        raise TypeError("closed-form oracle is only available for gaussian_conjugate models")
    return model.info["posterior_variance"]


def gaussian_log_normalizer(model: PosteriorModel) -> float:
    """``log ∫ exp(l_n(μ) - l_n(μ̂)) dμ = (p/2) log(2π v)`` with ``v`` the posterior variance."""
    v = _gaussian_variance(model)
    return 0.5 * model.p * math.log(2 * math.pi * v)


def truncated_normalizer_oracle(model: PosteriorModel, region) -> float:
    """Exact mode-relative log integral over the cube ``[θ̂ - γ, θ̂ + γ]^p``.

    Each coordinate contributes ``sqrt(2πv) * (2Φ(γ/√v) - 1)``.
    """
    v = _gaussian_variance(model)
    if not np.allclose(region.center, model.mode, rtol=0, atol=1e-9 * (1 + np.abs(model.mode).max())):
        raise ValueError("truncation region must be centred at the exact posterior mode")
    mass = float(erf(region.radius / math.sqrt(2 * v)))
    return model.p * (0.5 * math.log(2 * math.pi * v) + math.log(mass))


@dataclass(frozen=True)
class ModeResult:
    theta_hat: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool


def find_mode(model: PosteriorModel, init, tol: float = 1e-8, max_iter: int = 100,
              damping: float = 1e-2) -> ModeResult:
    """Newton ascent on ``log_post`` with step halving.

    When the Hessian is singular or not negative definite, a damped gradient
    step is taken instead.  Non-convergence is reported, not raised.
    """
    theta = np.atleast_1d(np.asarray(init, dtype=float)).copy()
    if not np.all(np.isfinite(theta)):
        raise ValueError("init must be finite")
    g = np.asarray(model.grad(theta), dtype=float)
    f = float(model.log_post(theta))
    it = 0
    while np.linalg.norm(g) > tol and it < max_iter:
        it += 1
        H = np.asarray(model.hess(theta), dtype=float)
        try:
            step = -np.linalg.solve(H, g)
            if not np.all(np.isfinite(step)) or step @ g <= 0:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = damping * g
        t = 1.0
        for _ in range(60):
            cand = theta + t * step
            fc = float(model.log_post(cand))
            if np.isfinite(fc) and fc >= f:
                break
            t *= 0.5
        else:
            break
        theta, f = cand, fc
        g = np.asarray(model.grad(theta), dtype=float)
    gn = float(np.linalg.norm(g))
    return ModeResult(theta, gn, it, gn <= tol)


def finite_diff_check(model: PosteriorModel, theta, h: float = 1e-4) -> float:
    """Worst absolute gap between analytic and central-difference derivatives."""
    if h <= 0:
        raise ValueError("step must be positive")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    p = theta.size
    f = lambda t: float(model.log_post(t))
    eye = np.eye(p) * h
    fd_grad = np.array([(f(theta + e) - f(theta - e)) / (2 * h) for e in eye])
    fd_hess = np.empty((p, p))
    gp = [np.asarray(model.grad(theta + e)) for e in eye]
    gm = [np.asarray(model.grad(theta - e)) for e in eye]
    for i in range(p):
        fd_hess[i] = (gp[i] - gm[i]) / (2 * h)
    dev_g = np.max(np.abs(fd_grad - np.asarray(model.grad(theta))))
    dev_h = np.max(np.abs(fd_hess - np.asarray(model.hess(theta))))
    return float(max(dev_g, dev_h))
