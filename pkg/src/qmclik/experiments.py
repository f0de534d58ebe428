"""Simulation study: relative errors of truncated MC and QMC on the Gaussian model.

For each cell ``(p, n, m)`` every replicate draws ``n`` observations from
``N(0, I_p)``, builds the conjugate posterior and records the relative error
of one uniform-grid estimate and one Halton estimate against the exact
normalizer.  Seeds are derived from ``(base_seed, p, n, m, replicate)``, so a
cell rerun on its own reproduces the row of a full run.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Iterable, List, Optional

import numpy as np

from .integrate import estimate_normalizer, make_region, summarize
from .model import CurvatureMeta, gaussian_conjugate
from .sequences import derive_seed, halton, uniform_grid

__all__ = [
    "ExperimentConfig",
    "TableRow",
    "reproduce_tables",
    "run_cell",
    "trend_checks",
    "rows_to_csv",
    "rows_from_csv",
    "CSV_HEADER",
]

CSV_HEADER = ("p", "n", "m", "mean_mc", "q025_mc", "q975_mc", "mean_qmc")

T_SPECS = {
    "log_n": lambda n, meta: math.log(n),
    "sqrt_log_n": lambda n, meta: math.sqrt(math.log(n)),
    "default": lambda n, meta: math.sqrt(meta.eta2 * math.log(n) / meta.eta1),
}


@dataclass
class ExperimentConfig:
    """Grid of the simulation study and the truncation recipe.

    ``t_spec='log_n'`` with ``curvature='likelihood'`` (eta1 = eta2 = 1/sigma^2)
    gives the half-width ``sqrt(p log(n) / n)`` for ``sigma = 1``; the QMC grid
    skips the origin (``start_index=1``).
    """

    p_list: List[int] = field(default_factory=lambda: [1, 2, 4, 8])
    n_list: List[int] = field(default_factory=lambda: [8, 16, 32, 64])
    m_list: List[int] = field(default_factory=lambda: [400, 800, 1600, 3200])
    replicates: int = 1000
    base_seed: int = 20240101
    sigma: float = 1.0
    sigma_p: float = 1.0
    t_spec: str = "log_n"
    curvature: str = "likelihood"
    policy: str = "high_dim"
    start_index: int = 1

    def __post_init__(self):
        for name in ("p_list", "n_list", "m_list"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.t_spec not in T_SPECS:
            raise ValueError(f"t_spec must be one of {sorted(T_SPECS)}")
        if self.curvature not in ("likelihood", "posterior"):
            raise ValueError("curvature must be 'likelihood' or 'posterior'")
        if self.policy not in ("fixed_p", "high_dim"):
            raise ValueError("policy must be 'fixed_p' or 'high_dim'")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class TableRow:
    p: int
    n: int
    m: int
    mean_mc: float
    q025_mc: float
    q975_mc: float
    mean_qmc: float
    diagnostic: Optional[str] = None

    @property
    def width_mc(self) -> float:
        return self.q975_mc - self.q025_mc


def _meta_for(model, cfg: ExperimentConfig) -> CurvatureMeta:
    if cfg.curvature == "posterior":
        return model.meta
    eta = 1.0 / cfg.sigma ** 2
    return CurvatureMeta(eta1=eta, eta2=eta, deriv_bound_D=eta, epsilon=1.0)


def run_cell(cfg: ExperimentConfig, p: int, n: int, m: int) -> TableRow:
    """One row of the table; failures come back as a NaN row with a diagnostic."""
    try:
        cell_seed = derive_seed(cfg.base_seed, p, n, m)
        grid = halton(m, p, cfg.start_index)
        mc, qmc = np.empty(cfg.replicates), np.empty(cfg.replicates)
        for r in range(cfg.replicates):
            rng = np.random.default_rng(derive_seed(cell_seed, r, 0))
            model = gaussian_conjugate(rng.standard_normal((n, p)), cfg.sigma, cfg.sigma_p)
            meta = _meta_for(model, cfg)
            region = make_region(model, cfg.policy, t=T_SPECS[cfg.t_spec](n, meta), meta=meta)
            mc[r] = estimate_normalizer(model, region, uniform_grid(m, p, derive_seed(cell_seed, r, 1))).rel_error
            qmc[r] = estimate_normalizer(model, region, grid).rel_error
        mean_mc, q025, q975 = summarize(mc)
        return TableRow(p, n, m, mean_mc, q025, q975, float(np.mean(qmc)))
    except Exception as exc:  # keep the sweep going
        nan = math.nan
        return TableRow(p, n, m, nan, nan, nan, nan, f"{type(exc).__name__}: {exc}")


def reproduce_tables(cfg: Optional[ExperimentConfig] = None, threads: int = 1) -> List[TableRow]:
    """Run every cell; rows come back ordered by p, then n, then m."""
    cfg = cfg or ExperimentConfig()
    cells = [(p, n, m) for p in cfg.p_list for n in cfg.n_list for m in cfg.m_list]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(lambda c: run_cell(cfg, *c), cells))
    return [run_cell(cfg, *c) for c in cells]


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.6f}"


def rows_to_csv(rows: Iterable[TableRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.p, r.n, r.m] + [_fmt(getattr(r, k)) for k in CSV_HEADER[3:]])
    return buf.getvalue()


def rows_from_csv(text: str) -> List[TableRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [TableRow(int(d["p"]), int(d["n"]), int(d["m"]),
                     *(float(d[k]) for k in CSV_HEADER[3:])) for d in reader]


def trend_checks(rows: Iterable[TableRow]) -> dict:
    """Qualitative checks on a table.

    a. for p in {1, 2}, ``|mean_qmc|`` does not increase with n at fixed m
    b. for p <= 4, the MC interval narrows as m grows at fixed (p, n)
    c. for p <= 2, ``mean_qmc < 0`` (truncation only removes mass)
    d. the MC interval widens as p grows at fixed (n, m)

    Checks with no applicable rows pass vacuously.  Each entry maps to
    ``{"passed": bool, "failures": [...]}``.
    """
    rows = list(rows)
    by = {(r.p, r.n, r.m): r for r in rows}
    ps = sorted({r.p for r in rows})
    ns = sorted({r.n for r in rows})
    ms = sorted({r.m for r in rows})
    out = {}

    fails = []
    for p in (q for q in ps if q <= 2):
        for m in ms:
            seq = [by[(p, n, m)] for n in ns if (p, n, m) in by]
            for a, b in zip(seq, seq[1:]):
                if abs(b.mean_qmc) > abs(a.mean_qmc):
                    fails.append(f"p={p} m={m}: n={a.n}->{b.n}")
    out["a"] = {"passed": not fails, "failures": fails}

    fails = []
    for p in (q for q in ps if q <= 4):
        for n in ns:
            seq = [by[(p, n, m)] for m in ms if (p, n, m) in by]
            for a, b in zip(seq, seq[1:]):
                if not b.width_mc < a.width_mc:
                    fails.append(f"p={p} n={n}: m={a.m}->{b.m}")
    out["b"] = {"passed": not fails, "failures": fails}

    fails = [f"p={r.p} n={r.n} m={r.m}" for r in rows if r.p <= 2 and not r.mean_qmc < 0]
    out["c"] = {"passed": not fails, "failures": fails}

    fails = []
    for n in ns:
        for m in ms:
            seq = [by[(p, n, m)] for p in ps if (p, n, m) in by]
            for a, b in zip(seq, seq[1:]):
                if not b.width_mc > a.width_mc:
                    fails.append(f"n={n} m={m}: p={a.p}->{b.p}")
    out["d"] = {"passed": not fails, "failures": fails}
    out["all_passed"] = all(v["passed"] for v in out.values() if isinstance(v, dict))
    return out
