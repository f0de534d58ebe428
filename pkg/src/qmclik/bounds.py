"""Evaluators for the MC and QMC error bounds.

Envelopes stated only up to a constant are evaluated with constant 1 and carry
the ``rate_only`` flag; bounds with explicit constants use them as given.
Everything is computed on the log scale, since terms such as ``n^{p(p-1)}``
overflow double precision for moderate ``p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .discrepancy import DiscrepancyReport
from .integrate import default_t
from .model import CurvatureMeta

__all__ = [
    "BoundReport",
    "truncation_error_bound",
    "mc_tail_bound",
    "mc_tail_report",
    "mc_error_rate",
    "bell_number",
    "hk_variation_bound",
    "kh_error_bound",
    "qmc_error_rate",
    "crossover",
    "lipschitz_constant",
    "l2_truncation_bound",
]

KINDS = ("truncation_abs", "truncation_rel", "mc_tail_abs", "mc_tail_rel", "mc_rate_abs",
         "mc_rate_rel", "qmc_rate_abs", "qmc_rate_rel", "hk_variation", "kh_product", "crossover")
REGIMES = ("fixed_p", "high_dim", "gaussian_special", "classical")

LOG2PI_OVER_4 = math.log(2 * math.pi / 4)


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


@dataclass(frozen=True)
class BoundReport:
    """An evaluated bound.

    ``components`` maps each named sub-term to its natural log, so that
    ``log_value`` is their log-sum (or, for products, their sum) as
    documented by each evaluator.
    """

    kind: str
    log_value: float
    components: dict
    regime: str
    flags: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown bound kind {self.kind!r}")
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")

    @property
    def value(self) -> float:
        return _exp(self.log_value)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value, "log_value": self.log_value,
                "components": dict(self.components), "regime": self.regime,
                "flags": list(self.flags)}


def _t(n, meta, t):
    return default_t(n, meta) if t is None else float(t)


def _check_regime(regime, allowed):
    if regime not in allowed:
        raise ValueError(f"regime must be one of {allowed}, got {regime!r}")


def truncation_error_bound(n: float, p: int, meta: CurvatureMeta, t: Optional[float] = None,
                           relative: bool = True) -> BoundReport:
    """Mass outside the truncation ball: ``exp(-min(n^eps, p t/2))``, times ``n^{-p/2}`` if absolute."""
    if n < 2:
        raise ValueError("need n >= 2")
    t = _t(n, meta, t)
    log_rel = -min(n ** meta.epsilon, p * t / 2)
    comps = {"log_decay": log_rel}
    if relative:
        return BoundReport("truncation_rel", log_rel, comps, "fixed_p", ("rate_only",))
    comps["log_scale"] = -0.5 * p * math.log(n)
    return BoundReport("truncation_abs", log_rel + comps["log_scale"], comps, "fixed_p", ("rate_only",))


def _mc_tail_log_exponent(zeta, n, m, p, meta, t, relative, regime):
    e1, e2 = meta.eta1, meta.eta2
    log_pfac = math.log(p) if regime == "fixed_p" else (p + 2) * math.log(p)
    if relative:
        return (math.log(0.25) + p * LOG2PI_OVER_4 + math.log(e1) + (2 * p - 2) * math.log(e2)
                + math.log(m) + 2 * math.log(zeta) - (p + 1) * math.log(t) - math.log(n) - log_pfac)
    return (math.log(e1) + (p - 2) * math.log(e2) + math.log(m) + (p - 1) * math.log(n)
            + 2 * math.log(zeta) - p * math.log(4) - (p + 1) * math.log(t) - log_pfac)


def mc_tail_bound(zeta: float, n: float, m: float, p: int, meta: CurvatureMeta,
                  t: Optional[float] = None, relative: bool = False,
                  regime: str = "fixed_p") -> float:
    """Concentration bound on ``P(error > zeta)`` for a uniform random grid.

    Absolute error::

        2 exp(-eta1 eta2^{p-2} m n^{p-1} zeta^2 / (4^p t^{p+1} P))

    relative error::

        2 exp(-(1/4) (2 pi/4)^p eta1 eta2^{2p-2} m zeta^2 / (t^{p+1} n P))

    with ``P = p`` for ``fixed_p`` and ``P = p^{p+2}`` for ``high_dim``.  The
    additive probability that the curvature assumption fails has no
    constructive form and is left out.  The result is clamped to ``[0, 1]``.
    """
    _check_regime(regime, ("fixed_p", "high_dim"))
    if zeta <= 0:
        return 1.0
    if math.isinf(zeta):
        return 0.0
    t = _t(n, meta, t)
    log_x = _mc_tail_log_exponent(zeta, n, m, p, meta, t, relative, regime)
    x = _exp(log_x)
    return min(1.0, 2.0 * math.exp(-x)) if x < math.inf else 0.0


def mc_tail_report(zeta, n, m, p, meta, t=None, relative=False, regime="fixed_p") -> BoundReport:
    t_val = _t(n, meta, t)
    log_x = _mc_tail_log_exponent(zeta, n, m, p, meta, t_val, relative, regime)
    comps = {"log_exponent": log_x}
    kind = "mc_tail_rel" if relative else "mc_tail_abs"
    log_prob = min(0.0, math.log(2) - _exp(log_x))
    return BoundReport(kind, log_prob, comps, regime, ("excludes_h_term",))


def mc_error_rate(n: float, m: float, p: int, meta: CurvatureMeta, regime: str = "fixed_p",
                  relative: bool = True) -> BoundReport:
    """High-probability MC error rate with the explicit constants.

    Relative::

        2 P (4/(2 pi))^{p/2} (eta2/eta1)^{3/2} sqrt(n log(n)^{p+1} log(m) / m) + n^{-p/2}

    absolute::

        2^p P (eta2/eta1)^{3/2} sqrt(log(n)^{p+1} log(m) / (n^{p-1} m)) + n^{-p}

    where ``P = sqrt(p)`` (fixed_p) or ``p^{p/2+1}`` (high_dim).  The trailing
    truncation term has unit constant.  Holds with probability ``1 - 2/m``
    (minus the assumption-failure probability).
    """
    _check_regime(regime, ("fixed_p", "high_dim"))
    if m < 3 or n < 3:
        raise ValueError("need m >= 3 and n >= 3")
    log_pfac = 0.5 * math.log(p) if regime == "fixed_p" else (p / 2 + 1) * math.log(p)
    log_eta = 1.5 * math.log(meta.eta2 / meta.eta1)
    ln, lm = math.log(n), math.log(m)
    core = (p + 1) * math.log(ln) + math.log(lm) - lm
    if relative:
        main = math.log(2) + log_pfac - 0.5 * p * LOG2PI_OVER_4 + log_eta + 0.5 * (ln + core)
        trunc = -0.5 * p * ln
        kind = "mc_rate_rel"
    else:
        main = p * math.log(2) + log_pfac + log_eta + 0.5 * (core - (p - 1) * ln)
        trunc = -p * ln
        kind = "mc_rate_abs"
    comps = {"main": main, "truncation": trunc, "log_failure_probability": math.log(2.0 / m)}
    return BoundReport(kind, float(np.logaddexp(main, trunc)), comps, regime,
                       ("truncation_rate_only", "excludes_h_term"))


@lru_cache(maxsize=None)
def _bell(k: int) -> int:
    # Bell triangle: each row starts with the last entry of the previous row
    row = [1]
    for _ in range(k):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def bell_number(k: int) -> int:
    """Exact Bell number ``B_k`` (number of partitions of a k-set), ``0 <= k <= 25``."""
    if int(k) != k or not 0 <= k <= 25:
        raise ValueError(f"bell_number supports 0 <= k <= 25, got {k}")
    return _bell(int(k))


def _log_falling_block(p: int) -> float:
    # prod_{i=floor(p/2)}^{p} i, starting at 1 so p = 1 does not collapse to zero
    return sum(math.log(i) for i in range(max(1, p // 2), p + 1))


def hk_variation_bound(n: float, p: int, meta: CurvatureMeta, gamma_prime: float,
                       bell_on_full_term: bool = True) -> BoundReport:
    """Hardy-Krause variation bound for the truncated, rescaled likelihood.

    ``(2 gamma')^p * (first_order + mixed + full)`` with

    * first_order ``= D sqrt(eta2 p^3 log n) / n^{p(p-1) - 1/2}``
    * mixed ``= B_p D^{p-1} (eta2 pi p)^{(p+2)/2} / (2^{(p-1)/2} n)``, only for ``p >= 3``
    * full ``= B_p (D sqrt(pi))^p prod_{i=floor(p/2)}^{p} i``

    ``bell_on_full_term=False`` drops ``B_p`` from the last term.
    """
    if n < 2 or p < 1 or gamma_prime <= 0:
        raise ValueError("need n >= 2, p >= 1 and a positive radius")
    D, e2 = meta.deriv_bound_D, meta.eta2
    ln = math.log(n)
    log_bell = math.log(_bell(p))
    comps = {"first_order": math.log(D) + 0.5 * math.log(e2 * p ** 3 * ln) - (p * (p - 1) - 0.5) * ln}
    flags = []
    if p >= 3:
        comps["mixed"] = (log_bell + (p - 1) * math.log(D) + (p + 2) / 2 * math.log(e2 * math.pi * p)
                          - (p - 1) / 2 * math.log(2) - ln)
    else:
        flags.append("mixed_term_empty_p_lt_3")
    comps["full"] = ((log_bell if bell_on_full_term else 0.0) + p * math.log(D * math.sqrt(math.pi))
                     + _log_falling_block(p))
    comps["scale"] = p * math.log(2 * gamma_prime)
    inner = float(logsumexp([v for k, v in comps.items() if k != "scale"]))
    return BoundReport("hk_variation", comps["scale"] + inner, comps, "fixed_p", tuple(flags))


def kh_error_bound(hk: BoundReport, dstar: DiscrepancyReport) -> BoundReport:
    """Koksma-Hlawka product ``D* x V_HK``."""
    if dstar.value < 0 or hk.value < 0:
        raise ValueError("inputs must be nonnegative")
    log_d = math.log(dstar.value) if dstar.value > 0 else -math.inf
    comps = {"star_discrepancy": log_d, "hk_variation": hk.log_value}
    return BoundReport("kh_product", log_d + hk.log_value, comps, hk.regime, hk.flags)


def qmc_error_rate(n: float, m: float, p: int, regime: str = "fixed_p", relative: bool = True,
                   C: float = 1.0, sigma: float = 1.0) -> BoundReport:
    """QMC error envelopes (rate-only, unit constants unless ``C`` is given).

    fixed_p
        relative ``log(m)^p log(n)^{p/2} / m``; absolute adds ``n^{-p/2}``.
    high_dim
        relative ``C^p log(m)^p p^{(3p+5)/2} log(n)^{p/2} / (m log(p+1)^{p-1} n)``;
        absolute replaces ``log(n)^{p/2} / n`` with ``n^{-(p/2+1)}``.
    gaussian_special
        relative ``(8e)^p log(m)^p log(p) p^{p/2+3/2} log(n)^{p/2} / (m n)
        * (1 + sqrt(p pi) / (sqrt(2) sigma^3))^p``; there is no absolute form.
    """
    _check_regime(regime, ("fixed_p", "high_dim", "gaussian_special"))
    if m < 3 or n < 3:
        raise ValueError("need m >= 3 and n >= 3")
    lm, ln = math.log(m), math.log(n)
    grid = p * math.log(lm) - lm
    comps = {"grid": grid}
    if regime == "fixed_p":
        comps["data"] = 0.5 * p * math.log(ln) if relative else -0.5 * p * ln
    else:
        if p < 2:
            raise ValueError(f"regime {regime} needs p >= 2")
        if regime == "high_dim":
            comps["dimension"] = (p * math.log(C) + (3 * p + 5) / 2 * math.log(p)
                                  - (p - 1) * math.log(math.log(p + 1)))
            comps["data"] = (0.5 * p * math.log(ln) - ln) if relative else -(p / 2 + 1) * ln
        else:
            if not relative:
                raise ValueError("gaussian_special has only a relative-error form")
            comps["dimension"] = (p * math.log(8 * math.e) + math.log(math.log(p))
                                  + (p / 2 + 1.5) * math.log(p))
            comps["data"] = 0.5 * p * math.log(ln) - ln
            comps["curvature"] = p * math.log1p(math.sqrt(p * math.pi) / (math.sqrt(2) * sigma ** 3))
    kind = "qmc_rate_rel" if relative else "qmc_rate_abs"
    return BoundReport(kind, sum(comps.values()), comps, regime, ("rate_only",))


def crossover(n: float, m: float, p: int, regime: str = "fixed_p", C: float = 1.0) -> dict:
    """Ratio of the QMC rate to the MC rate; QMC wins when it is below 1.

    classical ``log(m)^p / sqrt(m)``; fixed_p ``log(m)^{p-1/2} / sqrt(m n log n)``;
    high_dim ``C^p log(m)^{p-1/2} p^{p+2} / (sqrt(m) log(p+1)^p sqrt(log n) n^{3/2})``.
    """
    _check_regime(regime, ("classical", "fixed_p", "high_dim"))
    if m < 3 or n < 3:
        raise ValueError("need m >= 3 and n >= 3")
    lm, ln = math.log(m), math.log(n)
    if regime == "classical":
        log_ratio = p * math.log(lm) - 0.5 * lm
    elif regime == "fixed_p":
        log_ratio = (p - 0.5) * math.log(lm) - 0.5 * (lm + ln + math.log(ln))
    else:
        log_ratio = (p * math.log(C) + (p - 0.5) * math.log(lm) - 0.5 * lm + (p + 2) * math.log(p)
                     - p * math.log(math.log(p + 1)) - 0.5 * math.log(ln) - 1.5 * ln)
    return {"qmc_wins": log_ratio < 0, "ratio": _exp(log_ratio), "log_ratio": log_ratio, "regime": regime}


def lipschitz_constant(n: float, p: int, meta: CurvatureMeta, t: Optional[float] = None,
                       policy: str = "fixed_p") -> float:
    """Lipschitz constant of ``exp(l_n(θ) - l_n(θ̂))`` on the truncation cube.

    ``eta2 sqrt(t p n / eta1)`` for the fixed-p radius and
    ``p eta2 sqrt(t n / eta1)`` for the inflated radius.
    """
    if policy not in ("fixed_p", "high_dim"):
        raise ValueError(f"unknown policy {policy!r}")
    t = _t(n, meta, t) if n >= 2 or t is not None else 0.0
    base = meta.eta2 * math.sqrt(t * n / meta.eta1)
    return base * (math.sqrt(p) if policy == "fixed_p" else p)


def l2_truncation_bound(n: float, p: int, meta: CurvatureMeta, t: Optional[float] = None,
                        policy: str = "fixed_p", eps: float = 0.1,
                        relative: bool = True) -> BoundReport:
    """Mass in the L2 shell between the truncation radius and the locality radius.

    Relative ``exp(-p t / (2 + eps))``, with an extra ``(eta1/eta2)^p`` for the
    inflated radius; absolute multiplies by ``n^{-p/2}``.  Rate-only.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if policy not in ("fixed_p", "high_dim"):
        raise ValueError(f"unknown policy {policy!r}")
    t = _t(n, meta, t)
    comps = {"log_decay": -p * t / (2 + eps)}
    regime = "fixed_p"
    if policy == "high_dim":
        regime = "high_dim"
        if relative:
            comps["curvature_ratio"] = p * math.log(meta.eta1 / meta.eta2)
    if not relative:
        comps["log_scale"] = -0.5 * p * math.log(n)
    kind = "truncation_rel" if relative else "truncation_abs"
    return BoundReport(kind, sum(comps.values()), comps, regime, ("rate_only", "l2_ball"))
