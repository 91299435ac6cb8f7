"""Value-combination strategies: turn profits and affinities into the
objective coefficients of one cycle's assignment problem.

Five strategies are supported:

  * ``fop``  -- profit only (the rotation-unaware baseline),
  * ``foa``  -- affinity only,
  * ``os``   -- objective switch: profits while ``gamma > max AP``, affinities
    otherwise (equality falls to the affinity branch),
  * ``pc``   -- product combination ``p**alpha * a**beta`` (default 1/1);
    ``pc`` with beta=0 equals ``fop``, with alpha=0 equals ``foa``,
  * ``wpp``  -- weighted partial profits: per-task self-adaptive blend of
    max-normalized profits and affinities.

All strategies are pure functions of (config, profits, affinities,
availability) and are fixed for an entire run.
"""

from dataclasses import dataclass

import numpy as np

from .affinity import AffinityState, max_affinity_pressure
from .domain import Instance

STRATEGY_KINDS = ("fop", "foa", "os", "pc", "wpp")


class ConfigError(ValueError):
    """Invalid strategy or experiment configuration."""


@dataclass(frozen=True)
class StrategyConfig:
    """Which strategy to run and its parameters (gamma for os; alpha/beta
    exponents for pc)."""

    kind: str
    gamma: float | None = None
    alpha: float = 1.0
    beta: float = 1.0

    def validate(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise ConfigError(f"unknown strategy kind {self.kind!r}")
        if self.kind == "os":
            if self.gamma is None:
                raise ConfigError("strategy os requires gamma")
            if not self.gamma > 0:
                raise ConfigError(f"gamma must be > 0, got {self.gamma}")
        elif self.gamma is not None:
            raise ConfigError(f"gamma is only valid for os, not {self.kind}")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("alpha and beta must be >= 0")

    @property
    def label(self) -> str:
        """Canonical report label, e.g. ``os/10`` or ``pc``."""
        if self.kind == "os":
            g = self.gamma
            text = f"{g:g}" if g != int(g) else f"{int(g)}"
            return f"os/{text}"
        if self.kind == "pc" and (self.alpha, self.beta) != (1.0, 1.0):
            return f"pc/{self.alpha:g}/{self.beta:g}"
        return self.kind

    @property
    def file_label(self) -> str:
        return self.label.replace("/", "-")

    @classmethod
    def parse(cls, text: str) -> "StrategyConfig":
        """Parse CLI/config syntax: ``fop``, ``os:10``, ``pc``, ``pc:2:0.5``,
        ``wpp``."""
        parts = text.strip().lower().split(":")
        kind, args = parts[0], parts[1:]
        try:
            if kind == "os":
                if len(args) != 1:
                    raise ConfigError("os takes exactly one parameter, e.g. os:10")
                config = cls(kind="os", gamma=float(args[0]))
            elif kind == "pc" and args:
                if len(args) != 2:
                    raise ConfigError("pc takes zero or two parameters, e.g. pc:2:0.5")
                config = cls(kind="pc", alpha=float(args[0]), beta=float(args[1]))
            elif args:
                raise ConfigError(f"strategy {kind} takes no parameters")
            else:
                config = cls(kind=kind)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad strategy spec {text!r}: {exc}") from exc
        config.validate()
        return config


@dataclass(eq=False)
class ValueMatrix:
    """Dense m x n objective coefficients for one cycle; zero on incompatible
    or unavailable pairs, finite and non-negative everywhere."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if not np.isfinite(values).all():
            raise ValueError("value matrix contains non-finite entries")
        if (values < 0).any():
            raise ValueError("value matrix contains negative entries")
        self.values = values


def os_values(gamma: float, profits: np.ndarray, affinities: np.ndarray,
              mask: np.ndarray, max_ap: float) -> ValueMatrix:
    """Objective switch: the profit matrix while ``gamma > max_ap``, the
    affinity matrix otherwise."""
    source = profits if gamma > max_ap else affinities
    return ValueMatrix(np.where(mask, source, 0).astype(np.float64))


def pc_values(alpha: float, beta: float, profits: np.ndarray,
              affinities: np.ndarray, mask: np.ndarray) -> ValueMatrix:
    """Product combination ``p**alpha * a**beta`` elementwise; 0**0 == 1 so
    the fop/foa special cases hold entrywise."""
    v = np.power(profits.astype(np.float64), alpha) \
        * np.power(affinities.astype(np.float64), beta)
    return ValueMatrix(np.where(mask, v, 0.0))


def wpp_values(profits: np.ndarray, affinities: np.ndarray,
               mask: np.ndarray) -> ValueMatrix:
    """Weighted partial profits.

    With c_j available compatible agents for task j, the blend weight is

        lambda_j = (c_j * (c_j + 1) / 2) / sum_i a[i, j]

    over the same agents, and the value is
    ``lambda_j * p/max_p + (1 - lambda_j) * a/max_a`` with global maxima over
    all available pairs.  lambda is used unclamped, so early cycles (all
    affinities 1) can push entries negative; those are clamped to 0 to keep
    the solver's non-negativity contract.
    """
    if not mask.any():
        return ValueMatrix(np.zeros_like(profits, dtype=np.float64))
    max_p = int(profits[mask].max())
    max_a = int(affinities[mask].max())
    if max_p <= 0 or max_a <= 0:
        raise ValueError(
            f"wpp needs positive profit and affinity maxima over available "
            f"pairs (got max profit {max_p}, max affinity {max_a})")
    counts = mask.sum(axis=0).astype(np.float64)
    sums = np.where(mask, affinities, 0).sum(axis=0).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(sums > 0, (counts * (counts + 1) / 2.0) / sums, 0.0)
    v = lam[None, :] * (profits / max_p) + (1.0 - lam[None, :]) * (affinities / max_a)
    v = np.where(mask, np.maximum(v, 0.0), 0.0)
    return ValueMatrix(v)


def compute_values(config: StrategyConfig, instance: Instance,
                   state: AffinityState, available_agents, available_tasks,
                   profits: np.ndarray | None = None) -> ValueMatrix:
    """Dispatch to the configured strategy for one cycle.

    ``profits`` optionally overrides the instance's profit matrix (index
    space, m x n) for scenarios whose priorities are redrawn each cycle; it
    must match ``state``'s instance layout.
    """
    config.validate()
    mats = state.mats
    agent_mask = mats.agent_row_mask(available_agents)
    task_mask = mats.task_col_mask(available_tasks)
    mask = mats.compat & agent_mask[:, None] & task_mask[None, :]
    p = mats.profits if profits is None else np.asarray(profits, dtype=np.int64)
    a = state.affinities

    if config.kind == "fop":
        return ValueMatrix(np.where(mask, p, 0).astype(np.float64))
    if config.kind == "foa":
        return ValueMatrix(np.where(mask, a, 0).astype(np.float64))
    if config.kind == "os":
        max_ap = max_affinity_pressure(state, available_tasks, available_agents)
        return os_values(config.gamma, p, a, mask, max_ap)
    if config.kind == "pc":
        return pc_values(config.alpha, config.beta, p, a, mask)
    if config.kind == "wpp":
        return wpp_values(p, a, mask)
    raise ConfigError(f"unknown strategy kind {config.kind!r}")
