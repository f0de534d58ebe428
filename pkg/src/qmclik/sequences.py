"""Point sets on the unit hypercube: Halton sequences and seeded uniform draws.

Halton coordinates are computed with integer arithmetic, so every value is the
correctly rounded double of the exact digit-reversed fraction.  Uniform sets use
numpy's counter-based Philox generator keyed by the seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "PointSet",
    "radical_inverse",
    "halton",
    "uniform_grid",
    "nth_prime",
    "primes_up_to",
    "scale_to_box",
    "unscale_from_box",
    "derive_seed",
]

_PRIME_TABLE = np.array([2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
                         53, 59, 61, 67, 71, 73, 79, 83, 89, 97], dtype=np.int64)


def primes_up_to(limit: int) -> np.ndarray:
    """All primes ``<= limit`` by the sieve of Eratosthenes."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for k in range(2, int(limit ** 0.5) + 1):
        if sieve[k]:
            sieve[k * k::k] = False
    return np.flatnonzero(sieve).astype(np.int64)


def _ensure_primes(count: int) -> None:
    global _PRIME_TABLE
    if count <= len(_PRIME_TABLE):
        return
    limit = 2 * int(_PRIME_TABLE[-1])
    while True:
        table = primes_up_to(limit)
        if len(table) >= count:
            _PRIME_TABLE = table
            return
        limit *= 2


def nth_prime(j: int) -> int:
    """Return the j-th prime, with ``nth_prime(1) == 2``.

    The internal table grows on demand.
    """
    if int(j) != j or j < 1:
        raise ValueError(f"prime index must be a positive integer, got {j!r}")
    _ensure_primes(int(j))
    return int(_PRIME_TABLE[j - 1])


def radical_inverse(i: int, b: int) -> float:
    """Base-``b`` radical inverse of the nonnegative integer ``i``.

    The base-b digits of ``i`` are mirrored about the radix point, so
    ``i = sum_k d_k b**k`` maps to ``sum_k d_k b**(-k-1)``.

    Examples
    --------
    >>> radical_inverse(3, 2)
    0.75
    >>> radical_inverse(5, 3) == 7 / 9
    True
    """
    if b < 2:
        raise ValueError(f"base must be >= 2, got {b}")
    if i < 0:
        raise ValueError(f"index must be nonnegative, got {i}")
    i, b = int(i), int(b)
    num, den = 0, 1
    while i > 0:
        i, d = divmod(i, b)
        num = num * b + d
        den *= b
    # int / int is correctly rounded in Python
    return num / den


def _radical_inverse_vec(idx: np.ndarray, b: int) -> np.ndarray:
    idx = idx.astype(np.int64).copy()
    num = np.zeros_like(idx)
    den = np.ones_like(idx)
    active = idx > 0
    while active.any():
        d = idx % b
        num = np.where(active, num * b + d, num)
        den = np.where(active, den * b, den)
        idx //= b
        active = idx > 0
    # exact while den < 2**53, which holds for any index below ~2**44
    return num.astype(np.float64) / den.astype(np.float64)


@dataclass(frozen=True, eq=False)
class PointSet:
    """``m`` points in ``[0, 1)^p`` together with how they were produced.

    ``bases`` holds the per-column prime bases for Halton sets; ``seed`` is set
    only for uniform sets and ``start_index`` only matters for Halton sets.
    """

    points: np.ndarray
    kind: str
    seed: Optional[int] = None
    start_index: int = 0
    bases: tuple = field(default=())

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"points must be a non-empty m x p array, got shape {pts.shape}")
        if self.kind not in ("halton", "uniform"):
            raise ValueError(f"unknown point-set kind {self.kind!r}")
        if self.kind == "halton" and self.seed is not None:
            raise ValueError("halton point sets carry no seed")
        if self.kind == "uniform" and self.seed is None:
            raise ValueError("uniform point sets require a seed")
        if not (np.all(pts >= 0.0) and np.all(pts < 1.0)):
            raise ValueError("coordinates must lie in [0, 1)")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def p(self) -> int:
        return self.points.shape[1]

    def describe(self) -> dict:
        """JSON-friendly descriptor (no coordinates)."""
        out = {"kind": self.kind, "m": self.m, "p": self.p}
        if self.kind == "halton":
            out["start_index"] = self.start_index
        else:
            out["seed"] = self.seed
        return out


def halton(m: int, p: int, start_index: int = 0) -> PointSet:
    """First ``m`` points of the ``p``-dimensional Halton sequence.

    Row ``i`` has coordinate ``j`` equal to ``radical_inverse(i + start_index,
    nth_prime(j + 1))``.  With ``start_index=0`` the first point is the origin;
    pass ``start_index=1`` to skip it.
    """
    if m < 1 or p < 1:
        raise ValueError(f"need m >= 1 and p >= 1, got m={m}, p={p}")
    if start_index < 0:
        raise ValueError("start_index must be nonnegative")
    _ensure_primes(p)
    bases = tuple(int(b) for b in _PRIME_TABLE[:p])
    idx = np.arange(start_index, start_index + m, dtype=np.int64)
    pts = np.column_stack([_radical_inverse_vec(idx, b) for b in bases])
    return PointSet(pts, "halton", start_index=int(start_index), bases=bases)


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed for ``(seed, *keys)``; independent of call order."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def uniform_grid(m: int, p: int, seed: int) -> PointSet:
    """``m`` i.i.d. uniform points on ``[0, 1)^p`` from a Philox stream keyed by ``seed``."""
    if m < 1 or p < 1:
        raise ValueError(f"need m >= 1 and p >= 1, got m={m}, p={p}")
    if int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    return PointSet(rng.random((m, p)), "uniform", seed=int(seed))


def scale_to_box(ps, center, radius) -> np.ndarray:
    """Map unit-cube points onto ``[center - radius, center + radius]^p``.

    Accepts a :class:`PointSet` or a raw ``m x p`` array.
    """
    x = ps.points if isinstance(ps, PointSet) else np.atleast_2d(np.asarray(ps, dtype=float))
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.shape != (x.shape[1],):
        raise ValueError(f"center has length {center.size}, expected {x.shape[1]}")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return 2.0 * radius * (x - 0.5) + center


def unscale_from_box(theta, center, radius) -> np.ndarray:
    """Inverse of :func:`scale_to_box`."""
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    center = np.atleast_1d(np.asarray(center, dtype=float))
    return (theta - center) / (2.0 * radius) + 0.5
