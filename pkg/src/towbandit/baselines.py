"""SOFTMAX (Boltzmann) selection with a linearly growing inverse temperature."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Sequence


@dataclass
class SoftmaxState:
    tau: float
    sum_r: list[float] = field(default_factory=lambda: [0.0, 0.0])
    n: list[int] = field(default_factory=lambda: [0, 0])
    t: int = 0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")

    @classmethod
    def new(cls, tau: float, machines: int = 2) -> "SoftmaxState":
        return cls(tau=tau, sum_r=[0.0] * machines, n=[0] * machines)

    def estimates(self) -> list[float]:
        # unplayed machines estimate 0
        return [s / n if n > 0 else 0.0 for s, n in zip(self.sum_r, self.n)]


def beta_schedule(t: int, tau: float) -> float:
    return tau * t


def boltzmann(q: Sequence[float], beta: float) -> list[float]:
    """Selection probabilities proportional to exp(beta * q), max-shifted."""
    scaled = [beta * v for v in q]
    top = max(scaled)
    w = [math.exp(s - top) for s in scaled]
    total = math.fsum(w)
    return [x / total for x in w]


def softmax_probabilities(q_a: float, q_b: float, beta: float) -> tuple[float, float]:
    # logistic form keeps P_A + P_B == 1 and avoids overflow
    z = beta * (q_b - q_a)
    if z >= 0:
        e = math.exp(-z)
        p_a = e / (1.0 + e)
        return p_a, 1.0 / (1.0 + e)
    e = math.exp(z)
    p_b = e / (1.0 + e)
    return 1.0 / (1.0 + e), p_b


def softmax_select(state: SoftmaxState, rng: random.Random) -> int:
    beta = beta_schedule(state.t, state.tau)
    q = state.estimates()
    u = rng.random()
    if len(q) == 2:
        p_a, _ = softmax_probabilities(q[0], q[1], beta)
        return 0 if u < p_a else 1
    acc = 0.0
    probs = boltzmann(q, beta)
    for k, p in enumerate(probs):
        acc += p
        if u < acc:
            return k
    return len(probs) - 1


def softmax_update(state: SoftmaxState, machine: int, reward: float) -> SoftmaxState:
    state.sum_r[machine] += reward
    state.n[machine] += 1
    state.t += 1
    return state
