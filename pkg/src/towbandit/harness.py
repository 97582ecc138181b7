"""Experiment configuration, seeded runs and Monte Carlo aggregation.

Every run ``i`` draws from its own stream seeded with
``derive_run_seed(master_seed, i)``. Runs may execute in worker processes, but
the reduction always adds per-run curves in run-index order. That makes
aggregates bit-identical for any worker count.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analysis
from .asdm import (ADAPTIVE, ALTERNATING, FIXED, NO_FLUCTUATION, ORACLE, FluctuationSpec, KPolicy,
                   TowConfig, TowState, applied_voltage, current_k, delta_v, displacements,
                   tow_select, tow_update)
from .baselines import SoftmaxState, softmax_select, softmax_update
from .env import BanditEnvironment, RewardDistribution, derive_run_seed
from .errors import ConfigError

ASDM = "asdm"
SOFTMAX = "softmax"
CHEATER = "cheater"
ALGORITHMS = (ASDM, SOFTMAX, CHEATER)

OUTPUT_KINDS = ("curve", "trace", "voltage", "plot_script", "figure")
THREADS_ENV = "TOW_BANDIT_THREADS"


@dataclass(frozen=True)
class AlgorithmSpec:
    """Algorithm name plus its parameters.

    ASDM uses ``k`` (or ``k_policy`` = oracle/adaptive with rank ``m``), ``th``,
    ``x0``, ``v0``, ``fluctuation`` and ``fluctuation_amplitude``. SOFTMAX uses
    ``tau``. The cheater uses ``k_adjust``.
    """

    name: str
    k: Optional[float] = None
    k_policy: str = FIXED
    m: int = 1
    tau: Optional[float] = None
    th: Optional[float] = None
    x0: float = 1.0
    v0: float = 1.0
    fluctuation: str = ALTERNATING
    fluctuation_amplitude: float = 1.0
    k_adjust: float = 0.0
    label: Optional[str] = None

    @property
    def display_name(self) -> str:
        return self.label or self.name

    def tow_config(self) -> TowConfig:
        return TowConfig(
            x0=self.x0,
            th=self.th,
            k_policy=KPolicy(self.k_policy, 0.0 if self.k is None else self.k, self.m),
            v0=self.v0,
            fluctuation=FluctuationSpec(self.fluctuation, self.fluctuation_amplitude),
        )

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None:
                out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AlgorithmSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown algorithm keys: {sorted(unknown)}")
        if "name" not in data:
            raise ConfigError("algorithm needs a name")
        data = dict(data)
        data["name"] = str(data["name"]).lower()
        return cls(**data)


@dataclass(frozen=True)
class ExperimentConfig:
    machines: tuple[RewardDistribution, ...]
    algorithm: AlgorithmSpec
    plays: int = 1000
    samples: int = 1000
    master_seed: int = 0
    outputs: tuple[str, ...] = ("curve",)

    def __post_init__(self):
        object.__setattr__(self, "machines", tuple(self.machines))
        object.__setattr__(self, "outputs", tuple(self.outputs))

    @property
    def env(self) -> BanditEnvironment:
        return BanditEnvironment(self.machines, self.master_seed)

    def to_dict(self) -> dict:
        return {
            "machines": [m.to_dict() for m in self.machines],
            "algorithm": self.algorithm.to_dict(),
            "plays": self.plays,
            "samples": self.samples,
            "master_seed": self.master_seed,
            "outputs": list(self.outputs),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            machines = tuple(RewardDistribution.from_dict(m) for m in data["machines"])
            algorithm = data["algorithm"]
            if not isinstance(algorithm, dict):
                raise ConfigError("'algorithm' must be an object; use 'algorithms' for a list")
            config = cls(
                machines=machines,
                algorithm=AlgorithmSpec.from_dict(algorithm),
                plays=int(data.get("plays", 1000)),
                samples=int(data.get("samples", 1000)),
                master_seed=int(data.get("master_seed", 0)),
                outputs=tuple(data.get("outputs", ("curve",))),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc
        validate(config)
        return config


def load_configs(path: str | os.PathLike) -> list[ExperimentConfig]:
    """Read a JSON config; an ``algorithms`` list expands to one config per entry."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    if "algorithms" in data:
        base = {k: v for k, v in data.items() if k != "algorithms"}
        return [ExperimentConfig.from_dict({**base, "algorithm": a}) for a in data["algorithms"]]
    return [ExperimentConfig.from_dict(data)]


def validate(config: ExperimentConfig) -> None:
    """Raise :class:`ConfigError` for anything that would fail mid-run."""
    if config.plays < 1:
        raise ConfigError(f"plays must be >= 1, got {config.plays}")
    if config.samples < 1:
        raise ConfigError(f"samples must be >= 1, got {config.samples}")
    if len(config.machines) < 2:
        raise ConfigError("at least two machines are required")
    if not 0 <= config.master_seed < 2 ** 64:
        raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {config.master_seed}")
    bad = [o for o in config.outputs if o not in OUTPUT_KINDS]
    if bad:
        raise ConfigError(f"unknown outputs {bad}; choose from {list(OUTPUT_KINDS)}")
    alg = config.algorithm
    if alg.name not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {alg.name!r}; choose from {list(ALGORITHMS)}")
    if alg.name == SOFTMAX:
        if alg.tau is None or not alg.tau > 0:
            raise ConfigError(f"softmax needs tau > 0, got {alg.tau}")
    elif alg.name == ASDM:
        if alg.k_policy not in (FIXED, ORACLE, ADAPTIVE):
            raise ConfigError(f"unknown k_policy {alg.k_policy!r}")
        if alg.k_policy == FIXED and alg.k is None:
            raise ConfigError("asdm with a fixed K policy needs k")
        if not 1 <= alg.m <= len(config.machines) - 1:
            raise ConfigError(f"rank m must lie in [1, {len(config.machines) - 1}]")
        if alg.fluctuation not in (ALTERNATING, NO_FLUCTUATION):
            raise ConfigError(f"fluctuation must be {ALTERNATING!r} or {NO_FLUCTUATION!r}")
        for name in ("k", "x0", "v0", "fluctuation_amplitude"):
            value = getattr(alg, name)
            if value is not None and not math.isfinite(value):
                raise ConfigError(f"{name} must be finite")


@dataclass(frozen=True)
class TraceRow:
    t: int
    machine: int
    reward: float
    cum_reward: float
    n_a: int
    n_b: int
    x_a: float


@dataclass(frozen=True)
class VoltageRow:
    t: int
    machine: int
    reward: float
    delta_v: float
    voltage: float


@dataclass
class RunTrace:
    """One run. ``rows`` has one entry per play; the per-step arrays one entry per step.

    ``x_a`` is the A-minus-B signal the algorithm selected on: the displacement
    for ASDM, the difference of running means for SOFTMAX, ``S_A - S_B`` for
    the cheater.
    """

    cum_reward: np.ndarray
    n_suboptimal: np.ndarray
    rows: list[TraceRow] = field(default_factory=list)
    voltages: list[VoltageRow] = field(default_factory=list)


@dataclass
class AggregateCurve:
    mean_cumulative_reward: np.ndarray
    mean_n_b: np.ndarray
    samples: int
    label: str = ""

    @property
    def plays(self) -> int:
        return len(self.mean_cumulative_reward)

    def at(self, play: int) -> tuple[float, float]:
        """Means after ``play`` plays (1-based)."""
        return float(self.mean_cumulative_reward[play - 1]), float(self.mean_n_b[play - 1])


def _run_asdm(config: ExperimentConfig, rng, record: bool) -> RunTrace:
    alg = config.algorithm
    env = config.env
    machines = env.machines
    state = TowState.new(alg.tow_config(), len(machines), env.means())
    worse = env.suboptimal()
    v0 = alg.v0
    plays = config.plays
    cum_out = np.empty(plays)
    sub_out = np.empty(plays)
    rows, volts = [], []
    cum = 0.0
    n_sub = 0
    for t in range(plays):
        state.t = t
        if record:
            x_a = displacements(state, t)[0]
        for k in tow_select(state, t, rng):
            reward = machines[k].sample(rng)
            if record:
                dv = delta_v(reward, current_k(state))
            tow_update(state, k, reward)
            cum += reward
            n_sub += worse[k]
            if record:
                rows.append(TraceRow(t, k, reward, cum, state.n[0], state.n[1], x_a))
                volts.append(VoltageRow(t, k, reward, dv, applied_voltage(dv, v0)))
        cum_out[t] = cum
        sub_out[t] = n_sub
    state.t = plays
    return RunTrace(cum_out, sub_out, rows, volts)


def _run_softmax(config: ExperimentConfig, rng, record: bool) -> RunTrace:
    env = config.env
    machines = env.machines
    state = SoftmaxState.new(config.algorithm.tau, len(machines))
    worse = env.suboptimal()
    plays = config.plays
    cum_out = np.empty(plays)
    sub_out = np.empty(plays)
    rows = []
    cum = 0.0
    n_sub = 0
    for t in range(plays):
        if record:
            q = state.estimates()
            x_a = q[0] - q[1]
        k = softmax_select(state, rng)
        reward = machines[k].sample(rng)
        softmax_update(state, k, reward)
        cum += reward
        n_sub += worse[k]
        cum_out[t] = cum
        sub_out[t] = n_sub
        if record:
            rows.append(TraceRow(t, k, reward, cum, state.n[0], state.n[1], x_a))
    return RunTrace(cum_out, sub_out, rows)


def _run_cheater(config: ExperimentConfig, rng, record: bool) -> RunTrace:
    env = config.env
    state = analysis.CheaterState.new(env.size)
    worse = env.suboptimal()
    k_adjust = config.algorithm.k_adjust
    plays = config.plays
    cum_out = np.empty(plays)
    sub_out = np.empty(plays)
    counts = [0] * env.size
    rows = []
    cum = 0.0
    n_sub = 0
    for t in range(plays):
        x_a = state.s_a - state.s_b
        k = analysis.cheater_select(state, rng)
        draws = analysis.cheater_advance(state, env, rng, k_adjust)
        reward = draws[k]
        counts[k] += 1
        cum += reward
        n_sub += worse[k]
        cum_out[t] = cum
        sub_out[t] = n_sub
        if record:
            rows.append(TraceRow(t, k, reward, cum, counts[0], counts[1], x_a))
    return RunTrace(cum_out, sub_out, rows)


_RUNNERS = {ASDM: _run_asdm, SOFTMAX: _run_softmax, CHEATER: _run_cheater}


def run_single(config: ExperimentConfig, run_index: int, record: bool = True) -> RunTrace:
    """Play one seeded run. Deterministic in ``(config, run_index)``."""
    validate(config)
    rng = config.env.stream(run_index)
    return _RUNNERS[config.algorithm.name](config, rng, record)


def _run_block(config: ExperimentConfig, indices: Sequence[int]) -> list[tuple[np.ndarray, np.ndarray]]:
    runner = _RUNNERS[config.algorithm.name]
    env = config.env
    out = []
    for i in indices:
        trace = runner(config, env.stream(i), False)
        out.append((trace.cum_reward, trace.n_suboptimal))
    return out


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if value < 1:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return value
    return os.cpu_count() or 1


def _per_run(config: ExperimentConfig, workers: int):
    """Yield per-run (cum_reward, n_suboptimal) arrays in run-index order."""
    n = config.samples
    if workers <= 1 or n < 2:
        yield from _run_block(config, range(n))
        return
    chunk = max(1, math.ceil(n / (workers * 4)))
    blocks = [range(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order, whatever order the workers finish in
        for result in pool.map(_run_block, [config] * len(blocks), blocks):
            yield from result


def monte_carlo(config: ExperimentConfig, workers: Optional[int] = None) -> AggregateCurve:
    """Mean cumulative reward and mean suboptimal-play count per play over all samples."""
    validate(config)
    workers = default_workers() if workers is None else workers
    cum_total = np.zeros(config.plays)
    sub_total = np.zeros(config.plays)
    for cum, sub in _per_run(config, workers):
        cum_total += cum
        sub_total += sub
    return AggregateCurve(cum_total / config.samples, sub_total / config.samples,
                          config.samples, config.algorithm.display_name)


@dataclass
class ComparisonTable:
    labels: list[str]
    curves: list[AggregateCurve]

    @property
    def plays(self) -> int:
        return self.curves[0].plays if self.curves else 0


def _unique_labels(names: Sequence[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for name in names:
        count = seen.get(name, 0)
        seen[name] = count + 1
        out.append(name if count == 0 else f"{name}_{count + 1}")
    return out


def compare(configs: Sequence[ExperimentConfig], workers: Optional[int] = None) -> ComparisonTable:
    """Run every config and line the curves up by play."""
    if not configs:
        raise ConfigError("compare needs at least one config")
    first = configs[0]
    for c in configs[1:]:
        if c.machines != first.machines:
            raise ConfigError("all compared configs must share the same machines")
        if c.plays != first.plays or c.samples != first.samples:
            raise ConfigError("all compared configs must share plays and samples")
    labels = _unique_labels([c.algorithm.display_name for c in configs])
    curves = []
    for label, c in zip(labels, configs):
        curve = monte_carlo(c, workers)
        curve.label = label
        curves.append(curve)
    return ComparisonTable(labels, curves)


SWEEP_PARAMS = ("k", "tau", "k_adjust", "th", "fluctuation_amplitude")


def sweep(config: ExperimentConfig, param: str, values: Sequence[float],
          workers: Optional[int] = None) -> list[tuple[float, AggregateCurve]]:
    """Monte Carlo curve for each value of one algorithm parameter."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"cannot sweep {param!r}; choose from {list(SWEEP_PARAMS)}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    out = []
    for v in values:
        alg = replace(config.algorithm, **{param: float(v)})
        c = replace(config, algorithm=alg)
        validate(c)
        curve = monte_carlo(c, workers)
        curve.label = f"{param}={v:g}"
        out.append((float(v), curve))
    return out


@dataclass(frozen=True)
class BoundsReport:
    params: analysis.BoundParams
    plays: int
    phi: float
    phi_t: float
    cheater: analysis.RegretReport
    tow: analysis.RegretReport

    def lines(self) -> list[str]:
        p = self.params
        items = [
            ("mu_a", p.mu_a), ("mu_b", p.mu_b), ("sigma_a", p.sigma_a), ("sigma_b", p.sigma_b),
            ("k", p.k), ("k0", p.k0), ("k_in_window", p.k_in_window), ("plays", self.plays),
            ("phi", self.phi), ("phi_t", self.phi_t),
        ]
        for prefix, rep in (("cheater", self.cheater), ("tow", self.tow)):
            items += [
                (f"{prefix}_n_b_expected", rep.n_b_expected),
                (f"{prefix}_regret", rep.regret),
                (f"{prefix}_bound_n_b", rep.bound_n_b),
                (f"{prefix}_bound_regret", rep.bound_regret),
                (f"{prefix}_bound_n_b_limit", rep.bound_n_b_limit),
                (f"{prefix}_bound_regret_limit", rep.bound_regret_limit),
            ]
        return [f"{key}={_fmt(value)}" for key, value in items]

    def to_text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return format(value, ".12g")


def bounds_report(params: analysis.BoundParams, n: int) -> BoundsReport:
    """Regret figures for the cheater (``phi``) and for TOW dynamics (``phi_T``).

    With unequal standard deviations the TOW ratio is taken at ``D = 0``, where
    it equals ``phi / sqrt(2)``; with equal ones this is exactly ``phi_T``.
    """
    if n < 1:
        raise ConfigError(f"plays must be >= 1, got {n}")
    try:
        phi = analysis.phi(params)
        if params.sigma_a == params.sigma_b:
            phi_t = analysis.phi_t(params.mu_a, params.mu_b, params.sigma_a)
        else:
            phi_t = phi / math.sqrt(2.0)
        cheater = analysis.regret_report(params.mu_a, params.mu_b, phi, n)
        tow = analysis.regret_report(params.mu_a, params.mu_b, phi_t, n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return BoundsReport(params, n, phi, phi_t, cheater, tow)

