"""Local and star discrepancy, plus explicit and asymptotic Halton bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln, logsumexp

from .sequences import PointSet, nth_prime

__all__ = [
    "DiscrepancyReport",
    "WorkBudgetExceeded",
    "local_discrepancy",
    "star_discrepancy_exact",
    "star_discrepancy_1d",
    "halton_bound_explicit",
    "halton_bound_asymptotic",
    "prime_bounds_check",
    "DEFAULT_WORK_BUDGET",
]

DEFAULT_WORK_BUDGET = 10 ** 8

EXACT_METHODS = ("exact_brute_force", "exact_1d")


class WorkBudgetExceeded(RuntimeError):
    """Raised when an exact discrepancy computation would exceed its work budget."""

    def __init__(self, required, budget):
        self.required = required
        self.budget = budget
        super().__init__(
            f"exact star discrepancy needs about {required:.3g} elementary operations "
            f"(m^p * m * p), above the budget of {budget:.3g}; raise work_budget to proceed"
        )


@dataclass(frozen=True)
class DiscrepancyReport:
    value: float
    method: str
    m: int
    p: int
    witness: Optional[tuple] = None

    def __post_init__(self):
        exact = self.method in EXACT_METHODS
        if exact != (self.witness is not None):
            raise ValueError("witness must be present exactly for exact methods")
        if self.value < 0 or (exact and self.value > 1.0 + 1e-12):
            raise ValueError(f"invalid discrepancy value {self.value} for {self.method}")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "m": self.m,
            "p": self.p,
            "witness": None if self.witness is None else list(self.witness),
        }


def _as_points(ps) -> np.ndarray:
    x = ps.points if isinstance(ps, PointSet) else np.asarray(ps, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return x


def local_discrepancy(ps, a) -> float:
    """Fraction of points in the anchored box ``[0, a)`` minus the box volume."""
    x = _as_points(ps)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.shape != (x.shape[1],):
        raise ValueError(f"anchor has length {a.size}, expected {x.shape[1]}")
    if np.any(a <= 0) or np.any(a > 1):
        raise ValueError("anchor coordinates must lie in (0, 1]")
    inside = np.all(x < a, axis=1)
    return float(inside.mean() - np.prod(a))


def star_discrepancy_1d(ps) -> DiscrepancyReport:
    """Closed-form star discrepancy of a one-dimensional point set."""
    x = _as_points(ps)
    if x.shape[1] != 1:
        raise ValueError(f"star_discrepancy_1d needs p = 1, got p = {x.shape[1]}")
    xs = np.sort(x[:, 0])
    m = xs.size
    i = np.arange(1, m + 1)
    upper = i / m - xs
    lower = xs - (i - 1) / m
    k_up, k_lo = int(np.argmax(upper)), int(np.argmax(lower))
    if upper[k_up] >= lower[k_lo]:
        value, witness = upper[k_up], xs[k_up]
    else:
        value, witness = lower[k_lo], xs[k_lo]
    return DiscrepancyReport(float(value), "exact_1d", m, 1, (float(witness),))


def star_discrepancy_exact(ps, work_budget: float = DEFAULT_WORK_BUDGET) -> DiscrepancyReport:
    """Exact star discrepancy ``sup_a |local_discrepancy(a)|`` over anchored boxes.

    The supremum is attained on the critical grid whose coordinates in each
    dimension are the distinct point coordinates together with 1.  Two counts
    are evaluated on that grid:

    * closed counts ``#{x <= a}`` against the volume give the positive
      deviation (the limit of open boxes shrinking onto ``a`` from above);
    * strict counts ``#{x < a}`` give the negative deviation.

    Counts come from a cumulative sum over a rank histogram, one slab of the
    first axis at a time, so memory stays at ``(m + 1)^(p - 1)``.

    Parameters
    ----------
    ps : PointSet or array
    work_budget : float
        Refuse when ``m^p * m * p`` exceeds this.

    Returns
    -------
    DiscrepancyReport
        ``witness`` is a maximizing anchor; coordinates equal to 0 stand for the
        one-sided limit ``a_j -> 0+``.
    """
    x = _as_points(ps)
    m, p = x.shape
    required = float(m) ** p * m * p
    if required > work_budget:
        raise WorkBudgetExceeded(required, work_budget)

    grids, ranks = [], []
    for j in range(p):
        u = np.unique(x[:, j])
        if u[-1] < 1.0:
            u = np.append(u, 1.0)
        grids.append(u)
        ranks.append(np.searchsorted(u, x[:, j]))
    shape = tuple(len(g) for g in grids)

    # histogram of points on the rank grid
    hist = np.zeros(shape, dtype=np.int64)
    np.add.at(hist, tuple(ranks), 1)

    rest_shape = shape[1:]
    rest_vol = np.ones(rest_shape)
    for j, g in enumerate(grids[1:]):
        rest_vol = rest_vol * g.reshape((1,) * j + (-1,) + (1,) * (p - 2 - j))

    running = np.zeros(rest_shape, dtype=np.int64)  # closed counts through slab k
    best = -1.0
    best_idx = None
    for k, a0 in enumerate(grids[0]):
        slab = hist[k]
        for ax in range(p - 1):
            slab = np.cumsum(slab, axis=ax)
        prev_closed = running
        running = running + slab
        vol = a0 * rest_vol

        closed = running / m - vol
        # strict count: below in every coordinate, i.e. closed count one step back on each axis
        strict = prev_closed
        for ax in range(p - 1):
            pad = [(0, 0)] * (p - 1)
            pad[ax] = (1, 0)
            strict = np.pad(strict, pad)[tuple(slice(0, n) for n in rest_shape)]
        opened = vol - strict / m

        for cand in (closed, opened):
            idx = np.unravel_index(int(np.argmax(cand)), rest_shape) if p > 1 else ()
            val = float(cand[idx]) if p > 1 else float(cand)
            full = (k,) + tuple(int(i) for i in idx)
            if val > best + 1e-15 or (abs(val - best) <= 1e-15 and (best_idx is None or full < best_idx)):
                best, best_idx = val, full

    witness = tuple(float(grids[j][best_idx[j]]) for j in range(p))
    value = min(max(best, 0.0), 1.0)
    return DiscrepancyReport(value, "exact_brute_force", m, p, witness)


def _log_explicit_terms(m: int, p: int) -> tuple:
    c = [nth_prime(i) for i in range(1, p + 1)]
    logm = math.log(m)
    first = p * math.log(2) - gammaln(p + 1) + sum(
        math.log((ci - 1) * logm / (2 * math.log(ci)) + p) for ci in c
    )
    parts = [math.log(c[0])]
    for k in range(1, p):
        prod = sum(math.log((ci // 2) * logm / math.log(ci) + k) for ci in c[:k])
        parts.append(math.log(c[k]) - gammaln(k + 1) + prod)
    second = p * math.log(2) + float(logsumexp(parts))
    return first, second


def halton_bound_explicit(m: int, p: int) -> DiscrepancyReport:
    """Explicit upper bound on the star discrepancy of the first ``m`` Halton points.

    Evaluates the Atanassov-type inequality with the true prime bases::

        m D* <= 2^p/p! prod_i ((c_i - 1) log m / (2 log c_i) + p)
                + 2^p (c_1 + sum_{k<p} c_{k+1}/k! prod_{i<=k} (floor(c_i/2) log m / log c_i + k))

    Both terms are accumulated in log space.
    """
    if m < 2 or p < 1:
        raise ValueError(f"need m >= 2 and p >= 1, got m={m}, p={p}")
    first, second = _log_explicit_terms(m, p)
    log_value = float(np.logaddexp(first, second)) - math.log(m)
    return DiscrepancyReport(math.exp(log_value), "atanassov_bound", m, p)


def halton_bound_asymptotic(m: float, p: int) -> float:
    """Rate envelope ``(4e)^p p^{3/2} log(p) log(m)^p / m`` with unit constant."""
    if m < 3 or p < 2:
        raise ValueError(f"need m >= 3 and p >= 2, got m={m}, p={p}")
    logv = (p * math.log(4 * math.e) + 1.5 * math.log(p) + math.log(math.log(p))
            + p * math.log(math.log(m)) - math.log(m))
    return math.exp(logv)


def prime_bounds_check(j: int) -> bool:
    """Check ``j log j <= c_j`` and, for ``j >= 3``, ``c_j <= j log j + j log log j + 2``."""
    if j < 1:
        raise ValueError("prime index must be >= 1")
    c = nth_prime(j)
    lower_ok = j * math.log(j) <= c
    if j < 3:
        return lower_ok
    return lower_ok and c <= j * math.log(j) + j * math.log(math.log(j)) + 2
