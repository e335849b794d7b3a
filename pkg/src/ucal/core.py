"""Simplex geometry, outcome encoding, count accumulation, and seeded RNG streams.

Forecasts are probability vectors over ``k`` outcomes, outcomes are vertex
indices in ``[0, k)``, and histories are integer count vectors.  Everything
downstream (losses, forecasters, the experiment engine) builds on the three
helpers here plus the reproducible-stream contract of :class:`RngStream`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIMPLEX_TOL = 1e-12


def validate_simplex(v, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Check that ``v`` is a probability vector and return it renormalized.

    Entries must be nonnegative and sum to 1, both within ``tol``.  Tiny
    negative entries (within tolerance) are clipped to 0 and the vector is
    rescaled so the returned entries sum to 1.

    Raises ``ValueError`` if an entry is negative beyond ``tol`` or the sum
    deviates from 1 beyond ``tol``.
    """
    p = np.asarray(v, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError(f"expected a 1-d probability vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("probability vector has non-finite entries")
    low = p.min()
    if low < -tol:
        raise ValueError(f"negative probability entry {low} (tol {tol})")
    total = p.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"probabilities sum to {total}, expected 1 (tol {tol})")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def uniform_point(k: int) -> np.ndarray:
    """The barycenter (1/k, ..., 1/k) of the simplex over ``k`` outcomes."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return np.full(k, 1.0 / k)


def one_hot(index: int, k: int) -> np.ndarray:
    """Vertex e_index of the simplex over ``k`` outcomes."""
    validate_outcome(index, k)
    v = np.zeros(k)
    v[index] = 1.0
    return v


def validate_outcome(index: int, k: int) -> int:
    """Check that ``index`` encodes one of ``k`` outcomes and return it as int."""
    i = int(index)
    if i != index:
        raise ValueError(f"outcome index must be an integer, got {index!r}")
    if not 0 <= i < k:
        raise ValueError(f"outcome index {i} out of range [0, {k})")
    return i


def validate_counts(counts) -> np.ndarray:
    """Check that ``counts`` is a vector of nonnegative integers."""
    c = np.asarray(counts)
    if c.ndim != 1 or c.size < 1:
        raise ValueError(f"expected a 1-d count vector, got shape {c.shape}")
    if not np.issubdtype(c.dtype, np.integer):
        rounded = np.rint(c)
        if not np.all(c == rounded):
            raise ValueError("counts must be integers")
        c = rounded.astype(np.int64)
    if c.min() < 0:
        raise ValueError("counts must be nonnegative")
    return c.astype(np.int64)


def mean_of_counts(counts) -> np.ndarray:
    """Empirical distribution counts / total.

    This is the benchmark point: the average of the observed one-hot
    outcomes, which minimizes cumulative loss over fixed forecasts for every
    proper loss simultaneously.

    Raises ``ValueError("empty history")`` when the total count is zero.
    """
    c = validate_counts(counts)
    total = int(c.sum())
    if total == 0:
        raise ValueError("empty history")
    return c / total


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    Identical ``(seed, stream_id)`` pairs always reproduce identical draw
    sequences; distinct pairs give statistically independent streams.  Monte
    Carlo trials use ``(base_seed, trial_index)`` so each trial is
    independently reproducible regardless of execution order.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        # SeedSequence wants nonnegative entropy words; wrap to unsigned 64-bit.
        words = [self.seed & 0xFFFFFFFFFFFFFFFF, self.stream_id & 0xFFFFFFFFFFFFFFFF]
        return np.random.default_rng(np.random.SeedSequence(words))
