"""Exact minimax regret of the binary squared-loss forecasting game.

With loss ||p - y||^2 over two outcomes, the optimal worst-case regret of a
deterministic forecaster admits an exact backward induction over count
states.  Let V[n1, n2, r] be the optimal remaining regret when the past
holds n1 outcomes of class 1 and n2 of class 2 with r rounds left
(n1 + n2 + r = T).  The base layer is

    V[n, T-n, 0] = 2T * (n/T) * (n/T - 1)   (= -2 * n1 * n2 / T),

and one backward step maximizes over the adversary's mixing weight q:

    sup_{q in [0,1]}  V2 + (V1 - V2) q - 2 (q^2 - q)
        = V2                                    if V1 - V2 < -2
        = (V1-V2)^2 / 8 + (V1+V2)/2 + 1/2       if -2 <= V1 - V2 <= 2
        = V1                                    if V1 - V2 > 2

with V1 = V[n1+1, n2, r-1] and V2 = V[n1, n2+1, r-1].  The DP evaluates all
three branches so that "the middle branch always applies" is verified at
runtime (``max_abs_gap <= 2``) rather than assumed.

The table also collapses to closed-form sequences: with

    u[0] = v[0] = 0,
    u[r+1] = u[r] + (u[r] + 1/T)^2,
    v[r+1] = u[r]/2 + v[r] + (r+1)/T - 1/2,

every entry satisfies V[n1, n2, r] = (n1-n2)^2/2 * u[r] - 2 n1 n2 / T + v[r],
and the game value is v[T] = 1/2 * sum_r a[r] where a[r] = u[r] + 1/T obeys
a[r+1] = a[r] + a[r]^2 from a[0] = 1/T.  The increments are sandwiched as

    1 / (T - r + log T)  <=  a[r]  <=  1 / (T - r),

which pins the value between logarithmic bounds; ``check_a_bounds`` measures
any violation of the sandwich and ``value_lower_bound`` gives the resulting
floor (1/2) * log(T / (log T + 1) + 1) on the game value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DP_MAX_HORIZON = 4096


@dataclass
class MinimaxTable:
    """Backward-induction result; layer r holds V[n1, T-r-n1, r] indexed by n1."""

    horizon: int
    value: float
    max_abs_gap: float        # max |V1 - V2| seen across all backward steps
    outer_branch_states: int  # states where a clamped branch applied (0 expected)
    layers: list | None = None

    def value_at(self, n1: int, n2: int, r: int) -> float:
        if self.layers is None:
            raise ValueError("table was computed without keep_layers=True")
        if n1 < 0 or n2 < 0 or n1 + n2 + r != self.horizon:
            raise ValueError("state must satisfy n1 + n2 + r = T with n1, n2 >= 0")
        return float(self.layers[r][n1])


def dp_value(horizon: int, keep_layers: bool = False) -> MinimaxTable:
    """Compute the game value by backward induction over O(T^2) states."""
    if not 1 <= horizon <= DP_MAX_HORIZON:
        raise ValueError(f"horizon must lie in [1, {DP_MAX_HORIZON}]")
    t = horizon
    n = np.arange(t + 1, dtype=float)
    layer = 2.0 * t * (n / t) * (n / t - 1.0)  # base: -2 n1 n2 / T
    layers = [layer] if keep_layers else None
    max_gap = 0.0
    outer = 0
    for r in range(1, t + 1):
        v1 = layer[1:]   # outcome-1 child
        v2 = layer[:-1]  # outcome-2 child
        d = v1 - v2
        max_gap = max(max_gap, float(np.abs(d).max()))
        middle = d * d / 8.0 + (v1 + v2) / 2.0 + 0.5
        layer = np.where(d < -2.0, v2, np.where(d > 2.0, v1, middle))
        outer += int(np.sum(d < -2.0) + np.sum(d > 2.0))
        if keep_layers:
            layers.append(layer)
    return MinimaxTable(horizon=t, value=float(layer[0]), max_abs_gap=max_gap,
                        outer_branch_states=outer, layers=layers)


def optimal_q(v1: float, v2: float) -> float:
    """The adversary's optimal mixing weight given the two child values."""
    return float(np.clip((v1 - v2 + 2.0) / 4.0, 0.0, 1.0))


@dataclass
class ClosedFormSequences:
    """The sequences u, v (length T+1) and a = u + 1/T (length T); value = v[T]."""

    horizon: int
    u: np.ndarray
    v: np.ndarray
    a: np.ndarray
    value: float


def closed_form(horizon: int) -> ClosedFormSequences:
    """O(T) evaluation of the game value via the u/v recurrences."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    t = horizon
    inv_t = 1.0 / t
    u = np.empty(t + 1)
    v = np.empty(t + 1)
    u_r = 0.0
    u[0] = v[0] = 0.0
    # v unrolls to v_m = (1/2) sum_{s<m} u_s + m(m+1-T)/(2T); taking the
    # linear part as one exact-integer ratio and the u part with Kahan
    # compensation keeps every entry accurate to a few ulps even at T = 10^6,
    # where naive per-round accumulation drifts by ~1e-9.
    sum_u = 0.0
    comp = 0.0
    for r in range(t):
        a_r = u_r + inv_t
        y = u_r - comp
        tot = sum_u + y
        comp = (tot - sum_u) - y
        sum_u = tot
        m = r + 1
        v[m] = 0.5 * sum_u + float(m * (m + 1 - t)) / (2.0 * t)
        u_r = u_r + a_r * a_r
        u[m] = u_r
    a = u[:t] + inv_t
    return ClosedFormSequences(horizon=t, u=u, v=v, a=a, value=float(v[t]))


def check_a_bounds(horizon: int) -> tuple[float, float]:
    """Worst violation of 1/(T-r+log T) <= a[r] <= 1/(T-r) over r in [0, T).

    Returns (max_upper_violation, max_lower_violation), each clipped at 0;
    both are expected to vanish.
    """
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    t = horizon
    a = closed_form(t).a
    r = np.arange(t, dtype=float)
    upper = 1.0 / (t - r)
    lower = 1.0 / (t - r + math.log(t))
    max_upper = float(np.max(a - upper, initial=0.0))
    max_lower = float(np.max(lower - a, initial=0.0))
    return max(max_upper, 0.0), max(max_lower, 0.0)


def value_lower_bound(horizon: int) -> float:
    """(1/2) * log(T / (log T + 1) + 1), implied by the sandwich lower bound."""
    t = horizon
    return 0.5 * math.log(t / (math.log(t) + 1.0) + 1.0)


def structural_identity_error(table: MinimaxTable) -> float:
    """Max over all states of |V[n1,n2,r] - ((n1-n2)^2/2 u[r] - 2 n1 n2/T + v[r])|."""
    if table.layers is None:
        raise ValueError("needs a table computed with keep_layers=True")
    t = table.horizon
    seqs = closed_form(t)
    worst = 0.0
    for r, layer in enumerate(table.layers):
        n1 = np.arange(t - r + 1, dtype=float)
        n2 = (t - r) - n1
        predicted = (n1 - n2) ** 2 / 2.0 * seqs.u[r] - 2.0 * n1 * n2 / t + seqs.v[r]
        worst = max(worst, float(np.abs(layer - predicted).max()))
    return worst
