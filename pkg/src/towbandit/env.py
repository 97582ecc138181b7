"""Slot machines and the seeded random streams the decision makers play against.

Random streams are :class:`random.Random` instances. Gaussian rewards are drawn
with :meth:`random.Random.gauss`, a Box-Muller transform that produces values in
pairs and caches the second one on the stream. The method is fixed: traces are
bit-identical for a given (seed, draw order) and changing it would break that.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

BERNOULLI = "bernoulli"
GAUSSIAN = "gaussian"

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    z = x & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_run_seed(master_seed: int, run_index: int) -> int:
    """Child seed for run ``run_index``.

    ``splitmix64(master_seed + (run_index + 1) * 0x9E3779B97F4A7C15 mod 2**64)``.
    The multiplier is odd, so distinct run indices below 2**64 map to distinct
    pre-images, and the finalizer is a bijection: child seeds never collide
    within one master seed. This function is part of the reproducibility
    contract and must not change.
    """
    if not 0 <= master_seed <= _MASK64:
        raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
    if run_index < 0:
        raise ValueError(f"run_index must be >= 0, got {run_index}")
    return splitmix64(master_seed + (run_index + 1) * _GOLDEN_GAMMA)


def make_stream(seed: int) -> random.Random:
    return random.Random(seed)


@dataclass(frozen=True)
class RewardDistribution:
    """Reward law of one machine: Bernoulli(p) or Gaussian(mu, sigma**2)."""

    kind: str
    p: float = 0.0
    mu: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind == BERNOULLI:
            if not 0.0 <= self.p <= 1.0:
                raise ValueError(f"Bernoulli p must lie in [0, 1], got {self.p}")
        elif self.kind == GAUSSIAN:
            if not self.sigma >= 0.0:
                raise ValueError(f"Gaussian sigma must be >= 0, got {self.sigma}")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    @classmethod
    def bernoulli(cls, p: float) -> "RewardDistribution":
        return cls(BERNOULLI, p=float(p))

    @classmethod
    def gaussian(cls, mu: float, sigma: float) -> "RewardDistribution":
        return cls(GAUSSIAN, mu=float(mu), sigma=float(sigma))

    def mean(self) -> float:
        return self.p if self.kind == BERNOULLI else self.mu

    def variance(self) -> float:
        if self.kind == BERNOULLI:
            return self.p * (1.0 - self.p)
        return self.sigma * self.sigma

    def sample(self, rng: random.Random) -> float:
        # one stream draw per reward for either kind
        if self.kind == BERNOULLI:
            return 1.0 if rng.random() < self.p else 0.0
        return rng.gauss(self.mu, self.sigma)

    def to_dict(self) -> dict:
        if self.kind == BERNOULLI:
            return {"kind": BERNOULLI, "p": self.p}
        return {"kind": GAUSSIAN, "mu": self.mu, "sigma": self.sigma}

    @classmethod
    def from_dict(cls, data: dict) -> "RewardDistribution":
        kind = str(data.get("kind", "")).lower()
        if kind == BERNOULLI:
            return cls.bernoulli(data["p"])
        if kind == GAUSSIAN:
            return cls.gaussian(data["mu"], data["sigma"])
        raise ValueError(f"unknown distribution kind {data.get('kind')!r}")


def machine_mean(dist: RewardDistribution) -> float:
    return dist.mean()


def machine_variance(dist: RewardDistribution) -> float:
    return dist.variance()


@dataclass(frozen=True)
class BanditEnvironment:
    """An ordered set of machines (index 0 is A, index 1 is B) plus the master seed."""

    machines: tuple[RewardDistribution, ...]
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "machines", tuple(self.machines))
        if len(self.machines) < 2:
            raise ValueError("a bandit environment needs at least two machines")
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")

    @property
    def size(self) -> int:
        return len(self.machines)

    def means(self) -> list[float]:
        return [m.mean() for m in self.machines]

    def suboptimal(self) -> list[bool]:
        """Flags for machines whose mean is strictly below the best mean."""
        means = self.means()
        best = max(means)
        return [mu < best for mu in means]

    def stream(self, run_index: int) -> random.Random:
        return make_stream(derive_run_seed(self.master_seed, run_index))


def sample_reward(env: BanditEnvironment, machine: int, rng: random.Random) -> float:
    if not 0 <= machine < len(env.machines):
        raise IndexError(f"machine index {machine} out of range for {len(env.machines)} machines")
    return env.machines[machine].sample(rng)


def gaussian_pair(mu_a: float, mu_b: float, sigma: float, master_seed: int = 0,
                  sigma_b: float | None = None) -> BanditEnvironment:
    """Two Gaussian machines A and B."""
    return BanditEnvironment(
        (RewardDistribution.gaussian(mu_a, sigma),
         RewardDistribution.gaussian(mu_b, sigma if sigma_b is None else sigma_b)),
        master_seed,
    )


def environment_from_specs(specs: Sequence[dict], master_seed: int = 0) -> BanditEnvironment:
    return BanditEnvironment(tuple(RewardDistribution.from_dict(s) for s in specs), master_seed)
