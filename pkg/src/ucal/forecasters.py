"""Online forecasters for the sequential outcome-prediction protocol.

Each forecaster owns K, a horizon T, the running outcome counts, and the
1-based round index t.  A game round calls ``predict`` (which may consume
randomness) and then ``observe`` with the revealed outcome.  States are
cheap mutable values; use one instance per game.

``FollowTheLeader``        forecasts the running mean of past outcomes, the
                           simultaneous empirical risk minimizer for every
                           proper loss.  Deterministic.
``PerturbedLeaderGeometric``  adds fresh geometric hallucinated counts with
                           success probability q = min(1, sqrt(K/T)) before
                           normalizing.  The geometric support {1, 2, ...}
                           guarantees a positive denominator every round.
``PerturbedLeaderUniform`` adds uniform integer noise on {0, ..., floor(sqrt(T))},
                           falling back to the uniform forecast if all counts
                           and noise are zero.
``StaticForecaster``       always forecasts a fixed point (testing aid).
"""

from __future__ import annotations

import math

import numpy as np

from .core import uniform_point, validate_outcome, validate_simplex


def sample_geometric(q: float, rng: np.random.Generator, size=None):
    """Geometric draw(s) on {1, 2, ...} with P(m = k) = q (1-q)^(k-1).

    Inverse transform ceil(ln(U) / ln(1-q)) for U uniform on (0, 1); the
    degenerate q = 1 always returns 1.  Mean is 1/q.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"geometric parameter must lie in (0, 1], got {q}")
    if q == 1.0:
        return 1 if size is None else np.ones(size, dtype=np.int64)
    u = 1.0 - rng.random(size)  # in (0, 1]
    draws = np.ceil(np.log(u) / math.log1p(-q)).astype(np.int64)
    draws = np.maximum(draws, 1)  # guard the measure-zero u == 1 case
    if size is None:
        return int(draws)
    return draws


class Forecaster:
    """Shared count/round bookkeeping for online forecasters."""

    name = "forecaster"

    def __init__(self, k: int, horizon: int):
        if k < 2:
            raise ValueError("need at least 2 outcomes")
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        self.k = int(k)
        self.horizon = int(horizon)
        self.counts = np.zeros(self.k, dtype=np.int64)
        self.t = 1  # 1-based round about to be played

    def predict(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def observe(self, y: int) -> None:
        """Record the revealed outcome of the current round."""
        if self.t > self.horizon:
            raise ValueError("horizon exceeded")
        self.counts[validate_outcome(y, self.k)] += 1
        self.t += 1


class FollowTheLeader(Forecaster):
    """Forecast the empirical mean of past outcomes (uniform on round 1)."""

    name = "ftl"

    def predict(self, rng: np.random.Generator = None) -> np.ndarray:
        if self.t == 1:
            return uniform_point(self.k)
        return self.counts / (self.t - 1)


class _BlockNoiseForecaster(Forecaster):
    """Perturbed leader with per-round noise drawn from the rng in blocks.

    Each round consumes one fresh row of hallucinated counts; batching the
    draws only changes how many values are pulled from the generator at
    once, not the noise distribution or the per-stream reproducibility.
    """

    _block = 256

    def __init__(self, k: int, horizon: int):
        super().__init__(k, horizon)
        self._cache = None
        self._pos = 0

    def _draw_block(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def _next_noise(self, rng: np.random.Generator) -> np.ndarray:
        if self._cache is None or self._pos >= len(self._cache):
            self._cache = self._draw_block(rng)
            self._pos = 0
        row = self._cache[self._pos]
        self._pos += 1
        return row


class PerturbedLeaderGeometric(_BlockNoiseForecaster):
    """Leader over true counts plus fresh geometric hallucinated counts.

    q is clipped to 1 when T < K, which makes the noise deterministically 1
    per outcome and the first forecast uniform.  The geometric support
    starts at 1, so the normalizer is at least K every round.
    """

    name = "ftpl-geometric"

    def __init__(self, k: int, horizon: int):
        super().__init__(k, horizon)
        self.q = min(1.0, math.sqrt(self.k / self.horizon))

    def _draw_block(self, rng):
        return sample_geometric(self.q, rng, size=(self._block, self.k))

    def predict(self, rng: np.random.Generator) -> np.ndarray:
        totals = self.counts + self._next_noise(rng)
        return totals / totals.sum()


class PerturbedLeaderUniform(_BlockNoiseForecaster):
    """Leader over true counts plus uniform noise on {0, ..., floor(sqrt(T))}."""

    name = "ftpl-uniform"

    def __init__(self, k: int, horizon: int):
        super().__init__(k, horizon)
        self.noise_max = int(math.isqrt(self.horizon))

    def _draw_block(self, rng):
        return rng.integers(0, self.noise_max + 1, size=(self._block, self.k))

    def predict(self, rng: np.random.Generator) -> np.ndarray:
        totals = self.counts + self._next_noise(rng)
        denom = totals.sum()
        if denom == 0:
            return uniform_point(self.k)
        return totals / denom


class StaticForecaster(Forecaster):
    """Always forecast the same point."""

    def __init__(self, point, horizon: int):
        point = validate_simplex(point)
        super().__init__(len(point), horizon)
        self.point = point
        self.name = "static:" + ",".join(f"{x:g}" for x in point)

    def predict(self, rng: np.random.Generator = None) -> np.ndarray:
        return self.point.copy()
