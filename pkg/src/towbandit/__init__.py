"""Tug-of-war dynamics for two-armed (and M-armed) bandit problems."""
from .env import BanditEnvironment, RewardDistribution, derive_run_seed, machine_mean, machine_variance, sample_reward
from .errors import ConfigError
from .harness import (AggregateCurve, AlgorithmSpec, ExperimentConfig, RunTrace, bounds_report, compare,
                      load_configs, monte_carlo, run_single, sweep)

__version__ = "0.1.0"
