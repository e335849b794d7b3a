"""Outcome-sequence generators for the forecasting protocol.

An adversary produces the outcome of round t given the round index, the
forecasts of rounds 1..t-1, and a random generator.  Oblivious adversaries
(fixed sequences, i.i.d. draws, alternation) ignore the past forecasts;
``GreedyAdaptive`` is the one adaptive stress-tester and reads them.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import uniform_point, validate_outcome
from .losses import ProperLoss


class Adversary:
    name = "adversary"

    def __init__(self, k: int):
        if k < 2:
            raise ValueError("need at least 2 outcomes")
        self.k = int(k)

    def next_outcome(self, t: int, past_forecasts, rng: np.random.Generator) -> int:
        raise NotImplementedError


class FixedSequence(Adversary):
    """Replays a predetermined outcome sequence; errors when exhausted."""

    name = "fixed"

    def __init__(self, k: int, sequence):
        super().__init__(k)
        self.sequence = [validate_outcome(y, k) for y in sequence]

    @classmethod
    def from_file(cls, k: int, path) -> "FixedSequence":
        """Load a sequence of whitespace-separated 1-based outcome indices."""
        tokens = Path(path).read_text().split()
        indices = []
        for tok in tokens:
            value = int(tok)
            if not 1 <= value <= k:
                raise ValueError(f"outcome {value} in {path} out of range [1, {k}]")
            indices.append(value - 1)
        return cls(k, indices)

    def next_outcome(self, t, past_forecasts, rng=None) -> int:
        if not 1 <= t <= len(self.sequence):
            raise ValueError(f"fixed sequence of length {len(self.sequence)} exhausted at round {t}")
        return self.sequence[t - 1]


class IidUniform(Adversary):
    """Independent uniform draws over the k outcomes."""

    name = "iid-uniform"

    def next_outcome(self, t, past_forecasts, rng: np.random.Generator) -> int:
        return int(rng.integers(0, self.k))


class Alternating(Adversary):
    """Outcome 0 on odd rounds, outcome 1 on even rounds."""

    name = "alternating"

    def next_outcome(self, t, past_forecasts, rng=None) -> int:
        return 0 if t % 2 == 1 else 1


class GreedyAdaptive(Adversary):
    """Picks the outcome that was worst for the previous forecast.

    The protocol reveals the outcome simultaneously with the forecast, so a
    legal adaptive adversary cannot best-respond to the current forecast;
    this one uses the previous forecast as a proxy (the barycenter before
    any forecast exists).  Ties break toward the lowest index so runs are
    reproducible.
    """

    name = "greedy"

    def __init__(self, k: int, loss: ProperLoss):
        super().__init__(k)
        self.loss = loss

    def next_outcome(self, t, past_forecasts, rng=None) -> int:
        if len(past_forecasts) == 0:
            proxy = uniform_point(self.k)
        else:
            proxy = np.asarray(past_forecasts[-1], dtype=float)
        scores = self.loss.bivariate(proxy, np.arange(self.k))
        return int(np.argmax(scores))
