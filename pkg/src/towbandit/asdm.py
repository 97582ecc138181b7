"""Atomic-switch decision maker driven by tug-of-war (TOW) dynamics.

Two electrodes share a fixed volume of precipitated Ag. Each play of machine
``k`` adds ``reward - K`` to the accumulator ``Q_k``, and the displacement of
electrode A from the base height is

    X_A(t) = Q_A - Q_B + delta(t),    X_B = -X_A,

so the two heights ``x0 + X_A`` and ``x0 + X_B`` always sum to ``2 * x0``.
Machine ``k`` is played when its height exceeds the threshold ``th`` (this
stands in for the switch current exceeding its threshold).

For ``M > 2`` machines the displacement generalizes to
``X_k = Q_k - mean_{j != k}(Q_j) + delta_k(t)`` with phase-shifted fluctuations
that sum to zero, so the displacements still sum to zero. This is an
extension; the two-machine case is the reference model.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .env import BanditEnvironment

ALTERNATING = "alternating"
NO_FLUCTUATION = "none"
CUSTOM = "custom"

FIXED = "fixed"
ORACLE = "oracle"
ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class FluctuationSpec:
    """Fluctuation delta(t) applied to the displacement.

    ``alternating`` is ``amplitude * sin(pi/2 + pi*t)``, evaluated exactly as
    ``+amplitude`` on even steps and ``-amplitude`` on odd steps. ``custom``
    calls ``func(t)``.
    """

    kind: str = ALTERNATING
    amplitude: float = 1.0
    func: Optional[Callable[[int], float]] = None

    def __post_init__(self):
        if self.kind not in (ALTERNATING, NO_FLUCTUATION, CUSTOM):
            raise ValueError(f"unknown fluctuation kind {self.kind!r}")
        if self.kind == CUSTOM and self.func is None:
            raise ValueError("custom fluctuation needs a func")


@dataclass(frozen=True)
class KPolicy:
    """How the learning parameter K is chosen.

    ``fixed`` uses ``k_fixed``. ``oracle`` uses the true means to compute
    ``(mu_(m) + mu_(m+1)) / 2``. ``adaptive`` plugs in empirical means instead and
    falls back to ``k_fixed`` until every machine has been played.
    """

    mode: str = FIXED
    k_fixed: float = 0.0
    m: int = 1

    def __post_init__(self):
        if self.mode not in (FIXED, ORACLE, ADAPTIVE):
            raise ValueError(f"unknown K policy {self.mode!r}")
        if self.m < 1:
            raise ValueError(f"rank m must be >= 1, got {self.m}")


@dataclass(frozen=True)
class TowConfig:
    x0: float = 1.0
    th: Optional[float] = None  # None means th = x0
    k_policy: KPolicy = field(default_factory=KPolicy)
    v0: float = 1.0
    fluctuation: FluctuationSpec = field(default_factory=FluctuationSpec)

    @property
    def threshold(self) -> float:
        return self.x0 if self.th is None else self.th


@dataclass
class TowState:
    q: list[float]
    n: list[int]
    config: TowConfig
    k: float = 0.0  # resolved K for fixed/oracle policies
    reward_sums: list[float] = field(default_factory=list)
    t: int = 0

    @classmethod
    def new(cls, config: TowConfig, machines: int = 2,
            means: Optional[Sequence[float]] = None) -> "TowState":
        policy = config.k_policy
        if policy.mode == ORACLE:
            if means is None:
                raise ValueError("oracle K policy needs the true machine means")
            k = k0_oracle(means, policy.m)
        else:
            k = policy.k_fixed
        return cls(q=[0.0] * machines, n=[0] * machines, config=config, k=k,
                   reward_sums=[0.0] * machines)

    @property
    def machines(self) -> int:
        return len(self.q)


def delta_v(reward: float, k: float) -> float:
    """Added voltage for one play: ``reward - k``."""
    return reward - k


def applied_voltage(delta_v: float, v0: float) -> float:
    return -(v0 + delta_v)


def fluctuation_value(spec: FluctuationSpec, t: int) -> float:
    if spec.kind == ALTERNATING:
        return spec.amplitude if t % 2 == 0 else -spec.amplitude
    if spec.kind == NO_FLUCTUATION:
        return 0.0
    return float(spec.func(t))


def _fluctuations(spec: FluctuationSpec, t: int, machines: int) -> list[float]:
    if machines == 2:
        d = fluctuation_value(spec, t)
        return [d, -d]
    if spec.kind == NO_FLUCTUATION:
        return [0.0] * machines
    # delta_k(t) = delta-scale * cos(2*pi*(t + k)/M); sums to zero over k
    scale = spec.amplitude if spec.kind == ALTERNATING else float(spec.func(t))
    return [scale * math.cos(2.0 * math.pi * ((t + k) % machines) / machines)
            for k in range(machines)]


def tow_displacement(state: TowState, t: int) -> float:
    """X_A = Q_A - Q_B + delta(t) for a two-machine state."""
    if state.machines != 2:
        raise ValueError("tow_displacement is defined for two machines; use displacements()")
    return state.q[0] - state.q[1] + fluctuation_value(state.config.fluctuation, t)


def displacements(state: TowState, t: int) -> list[float]:
    """Displacement of every electrode; sums to zero."""
    if state.machines == 2:
        x_a = tow_displacement(state, t)
        return [x_a, -x_a]
    m = state.machines
    total = sum(state.q)
    deltas = _fluctuations(state.config.fluctuation, t, m)
    return [state.q[k] - (total - state.q[k]) / (m - 1) + deltas[k] for k in range(m)]


def electrode_heights(state: TowState, t: int) -> tuple[Fraction, Fraction]:
    """Heights ``(x0 + X_A, x0 - X_A)`` of the two electrodes.

    Returned as exact rationals of the float inputs: in binary floating point
    ``(x0 + a) + (x0 - a)`` is not always ``2 * x0``, and the volume has to be
    conserved exactly. Use ``float()`` for plotting.
    """
    x_a = Fraction(tow_displacement(state, t))
    x0 = Fraction(state.config.x0)
    return x0 + x_a, x0 - x_a


def current_k(state: TowState) -> float:
    if state.config.k_policy.mode == ADAPTIVE:
        return k_adaptive(state)
    return state.k


def tow_select(state: TowState, t: int, rng: random.Random) -> list[int]:
    """Machines whose height exceeds the threshold at step ``t``.

    If no height exceeds it (this covers the exact tie at ``th = x0``), one
    machine is picked uniformly at random from ``rng``.
    """
    x0 = state.config.x0
    th = state.config.threshold
    chosen = [k for k, x in enumerate(displacements(state, t)) if x0 + x > th]
    if not chosen:
        chosen = [rng.randrange(state.machines)]
    return chosen


def tow_update(state: TowState, machine: int, reward: float) -> TowState:
    """Learning rule: ``Q_machine += reward - K``.

    K is evaluated before this play is counted. The step counter is advanced
    separately by :func:`tow_step` once all plays of a step are applied.
    """
    state.q[machine] += delta_v(reward, current_k(state))
    state.n[machine] += 1
    state.reward_sums[machine] += reward
    return state


@dataclass(frozen=True)
class Play:
    t: int
    machine: int
    reward: float
    delta_v: float
    voltage: float
    x_a: float


def tow_step(state: TowState, env: BanditEnvironment, rng: random.Random) -> list[Play]:
    """Run one step: select, draw a reward per selected machine, update, advance t."""
    t = state.t
    x_a = displacements(state, t)[0]
    plays = []
    for machine in tow_select(state, t, rng):
        reward = env.machines[machine].sample(rng)
        dv = delta_v(reward, current_k(state))
        tow_update(state, machine, reward)
        plays.append(Play(t, machine, reward, dv, applied_voltage(dv, state.config.v0), x_a))
    state.t += 1
    return plays


def k0_oracle(means: Sequence[float], m: int = 1) -> float:
    """Midpoint between the m-th and (m+1)-th largest means."""
    if not means:
        raise ValueError("means must be non-empty")
    if not 1 <= m <= len(means) - 1:
        raise ValueError(f"rank m must lie in [1, {len(means) - 1}], got {m}")
    ordered = sorted(means, reverse=True)
    return (ordered[m - 1] + ordered[m]) / 2.0


def k_adaptive(state: TowState) -> float:
    """K from the two empirical means bracketing rank m; fallback until all are played."""
    if any(n == 0 for n in state.n):
        return state.config.k_policy.k_fixed
    means = [s / n for s, n in zip(state.reward_sums, state.n)]
    m = min(state.config.k_policy.m, len(means) - 1)
    return k0_oracle(means, m)
