"""Solvability and regret analysis for two-machine TOW dynamics.

Conventions: machine A is the better one (``mu_a > mu_b``) and ``N_B`` counts
plays of the worse machine.

The cheater draws both machines every step and plays the leader of the
running sums ``S_A`` and ``S_B``. ``S = S_A - S_B`` is Gaussian with mean
``(mu_a - mu_b) N`` and variance ``(sigma_a**2 + sigma_b**2) N``. The
probability of playing B after N draws is ``Q(phi * sqrt(N))``, and the
Chernoff bound caps the expected number of wrong plays at ``1/2 + 1/phi**2``.
Redoing this with K-adjusted sums gives ``phi_T = (mu_a - mu_b) / (2 sigma)``
for TOW dynamics at ``K = K0`` with equal variances.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence

from .env import BanditEnvironment

_SQRT1_2 = 1.0 / math.sqrt(2.0)


def q_function(x: float) -> float:
    """Standard normal upper-tail probability P(Z > x).

    Uses ``erfc``, which stays accurate deep in the tail where ``1 - Phi(x)``
    would cancel.
    """
    return 0.5 * math.erfc(x * _SQRT1_2)


def chernoff_bound(x: float) -> float:
    """Upper bound ``exp(-x**2 / 2) / 2`` on ``q_function(x)`` for ``x >= 0``."""
    if x < 0:
        raise ValueError(f"the Chernoff bound is stated for x >= 0, got {x}")
    return 0.5 * math.exp(-0.5 * x * x)


@dataclass(frozen=True)
class BoundParams:
    mu_a: float
    mu_b: float
    sigma_a: float
    sigma_b: float
    k: float

    def __post_init__(self):
        if self.mu_a < self.mu_b:
            raise ValueError(f"machine A must be the better one: mu_a={self.mu_a} < mu_b={self.mu_b}")
        if self.sigma_a < 0 or self.sigma_b < 0:
            raise ValueError("standard deviations must be non-negative")

    @property
    def k0(self) -> float:
        return (self.mu_a + self.mu_b) / 2.0

    @property
    def k_in_window(self) -> bool:
        """Whether ``mu_b < K < mu_a``, the range in which the walk can separate the machines."""
        return self.mu_b < self.k < self.mu_a


def phi(params: BoundParams) -> float:
    spread = math.sqrt(params.sigma_a ** 2 + params.sigma_b ** 2)
    if spread == 0.0:
        raise ValueError("phi is undefined when both standard deviations are zero")
    return (params.mu_a - params.mu_b) / spread


def phi_t(mu_a: float, mu_b: float, sigma: float) -> float:
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    return (mu_a - mu_b) / (2.0 * sigma)


def cheater_stats(params: BoundParams, n: int) -> tuple[float, float]:
    """Mean and variance of ``S = S_A - S_B`` for the cheater after ``n`` draws."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return ((params.mu_a - params.mu_b) * n,
            (params.sigma_a ** 2 + params.sigma_b ** 2) * n)


def tow_stats(params: BoundParams, n: int, d: int) -> tuple[float, float]:
    """Mean and variance of the K-adjusted ``S`` given ``N = n`` and ``D = N_A - N_B = d``."""
    if abs(d) > n:
        raise ValueError(f"|d| must not exceed n (d={d}, n={n})")
    mean = 0.5 * (params.mu_a - params.mu_b) * n + (params.k0 - params.k) * d
    var = 0.5 * (params.sigma_a ** 2 + params.sigma_b ** 2) * n \
        + 0.5 * (params.sigma_a ** 2 - params.sigma_b ** 2) * d
    return mean, var


def wrong_play_probability(phi_value: float, t: int) -> float:
    """Probability that the worse machine is played after ``t`` draws."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return q_function(phi_value * math.sqrt(t))


def expected_wrong_plays(phi_value: float, n: int) -> float:
    """``E(N_B) = sum_{t=0}^{n-1} Q(phi * sqrt(t))``."""
    return math.fsum(wrong_play_probability(phi_value, t) for t in range(n))


def wrong_plays_bound(phi_value: float, n: int) -> float:
    """Closed-form Chernoff/integral bound on E(N_B) over ``n`` plays.

    ``1/2 - (exp(-phi**2 (n-1) / 2) - 1) / phi**2``, increasing in ``n`` towards
    ``1/2 + 1/phi**2``.
    """
    if not phi_value > 0:
        raise ValueError(f"phi must be > 0, got {phi_value}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    p2 = phi_value * phi_value
    return 0.5 - math.expm1(-0.5 * p2 * (n - 1)) / p2


def wrong_plays_limit(phi_value: float) -> float:
    if not phi_value > 0:
        raise ValueError(f"phi must be > 0, got {phi_value}")
    return 0.5 + 1.0 / (phi_value * phi_value)


def regret_value(mu_a: float, mu_b: float, expected_n_b: float) -> float:
    return (mu_a - mu_b) * expected_n_b


def tow_difference(sum_ra: float, sum_rb: float, n_a: int, n_b: int, k: float) -> float:
    """``Q_A - Q_B`` of the learning rule, written in terms of reward sums and counts."""
    return (sum_ra - sum_rb) - k * (n_a - n_b)


def imaginary_difference(sum_ra: float, sum_rb: float, n_a: int, n_b: int, gamma: float) -> float:
    """Difference of the halved estimates of a player who knows ``gamma = mu_a + mu_b``.

    Each play of A also informs B's estimate through ``gamma - mean_A`` (and vice
    versa). Halving both estimates and subtracting leaves
    ``(sum_ra - sum_rb) - gamma/2 * (n_a - n_b)``, which is :func:`tow_difference`
    with ``K = gamma/2``.
    """
    return (sum_ra - sum_rb) - (gamma / 2.0) * (n_a - n_b)


def imaginary_estimates(sum_ra: float, sum_rb: float, n_a: int, n_b: int,
                        gamma: float) -> tuple[float, float]:
    """Count-weighted estimates ``(Q'_A, Q'_B)`` before halving."""
    q_a = sum_ra - sum_rb + gamma * n_b
    q_b = sum_rb - sum_ra + gamma * n_a
    return q_a, q_b


@dataclass
class CheaterState:
    """Running sums of every machine's draws; ``sums[0]`` is S_A, ``sums[1]`` is S_B."""

    sums: list[float]
    n: int = 0

    @classmethod
    def new(cls, machines: int = 2) -> "CheaterState":
        return cls(sums=[0.0] * machines)

    @property
    def s_a(self) -> float:
        return self.sums[0]

    @property
    def s_b(self) -> float:
        return self.sums[1]


def cheater_select(state: CheaterState, rng: random.Random) -> int:
    """Leader of the running sums; ties are broken uniformly at random."""
    best = max(state.sums)
    leaders = [k for k, s in enumerate(state.sums) if s == best]
    if len(leaders) == 1:
        return leaders[0]
    return leaders[rng.randrange(len(leaders))]


def cheater_advance(state: CheaterState, env: BanditEnvironment, rng: random.Random,
                    k_adjust: float = 0.0) -> list[float]:
    """Draw one reward from every machine and add ``reward - k_adjust`` to its sum.

    ``k_adjust = 0`` is the plain cheater. A non-zero value gives the
    K-adjusted sums used to analyse TOW dynamics; since every machine is drawn
    every step, each sum loses ``k_adjust`` per step. Returns the raw draws.
    """
    draws = [m.sample(rng) for m in env.machines]
    for k, r in enumerate(draws):
        state.sums[k] += r - k_adjust
    state.n += 1
    return draws


@dataclass(frozen=True)
class RegretReport:
    n_b_expected: float
    regret: float
    bound_n_b: float
    bound_regret: float
    bound_n_b_limit: float
    bound_regret_limit: float

    def __post_init__(self):
        if self.regret < 0:
            raise ValueError("regret must be non-negative")


def regret_report(mu_a: float, mu_b: float, phi_value: float, n: int) -> RegretReport:
    """Expected wrong plays, their Chernoff bounds, and the matching regrets for ``phi_value``."""
    expected = expected_wrong_plays(phi_value, n)
    bound = wrong_plays_bound(phi_value, n)
    limit = wrong_plays_limit(phi_value)
    return RegretReport(
        n_b_expected=expected,
        regret=regret_value(mu_a, mu_b, expected),
        bound_n_b=bound,
        bound_regret=regret_value(mu_a, mu_b, bound),
        bound_n_b_limit=limit,
        bound_regret_limit=regret_value(mu_a, mu_b, limit),
    )


def sorted_pair(means: Sequence[float], sigmas: Sequence[float]) -> tuple[float, float, float, float]:
    """``(mu_a, mu_b, sigma_a, sigma_b)`` with A as the better of the top two machines."""
    order = sorted(range(len(means)), key=lambda i: means[i], reverse=True)
    a, b = order[0], order[1]
    return means[a], means[b], sigmas[a], sigmas[b]
