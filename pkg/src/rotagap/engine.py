"""Multi-cycle execution: run one strategy over one availability trace,
cycle by cycle, and collect rotation and profit metrics.

Each cycle is solved independently: the strategy combines the cycle's
profits and affinities into a value matrix, the solver picks a feasible
assignment under the work budget, and the affinity state advances from the
observed assignment.  Profit accounting always sums raw profits (never
strategy values), so every strategy's total is directly comparable to the
profit-only baseline.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .affinity import AffinityState, init_affinities, max_affinity_pressure, \
    update_affinities
from .domain import Instance, InstanceMatrices, ScenarioTrace
from .solver import Assignment, GapProblem, SolverBudget, solve
from .strategies import StrategyConfig, compute_values

log = logging.getLogger(__name__)

PriorityHook = Callable[[int], Mapping[str, int]]


@dataclass(frozen=True)
class CycleReport:
    """Per-cycle outcome.  ``profit`` sums raw profits of the assigned pairs;
    ``objective`` is the strategy-value objective; ``max_ap`` is the maximum
    affinity pressure before this cycle's assignment."""

    cycle: int
    profit: int
    objective: float
    max_ap: float
    assigned_count: int
    budget_exhausted: bool


@dataclass(eq=False)
class RunReport:
    """One (strategy, trace) run: totals, rotation metrics, per-cycle series,
    final per-pair assignment counts, and seed provenance for baseline
    comparisons."""

    strategy: StrategyConfig
    total_profit: int
    full_rotations: int
    avg_rotations_per_task: float
    per_cycle: list[CycleReport]
    final_counts: np.ndarray
    provenance: dict


def build_gap_problem(mats: InstanceMatrices, values: np.ndarray,
                      available_agents: Iterable[str],
                      available_tasks: Iterable[str]) -> GapProblem:
    """Restrict the instance to the cycle's available compatible pairs."""
    agent_mask = mats.agent_row_mask(available_agents)
    task_mask = mats.task_col_mask(available_tasks)
    feasible = mats.compat & agent_mask[:, None] & task_mask[None, :]
    return GapProblem(
        agent_ids=tuple(mats.agent_ids),
        task_ids=tuple(mats.task_ids),
        agent_capacities=mats.capacities,
        weights=mats.weights,
        values=values,
        feasible_pairs=feasible,
    )


def _profit_matrix(mats: InstanceMatrices,
                   overrides: Mapping[str, int] | None) -> np.ndarray:
    if not overrides:
        return mats.profits
    profits = mats.profits.copy()
    values = np.full(mats.n, -1, dtype=np.int64)
    for task_id, p in overrides.items():
        values[mats.task_index[task_id]] = int(p)
    cols = values >= 0
    profits[:, cols] = np.where(mats.compat[:, cols], values[cols][None, :], 0)
    return profits


def run_cycle(instance: Instance, entry: tuple[Iterable[str], Iterable[str]],
              state: AffinityState, strategy: StrategyConfig,
              budget: SolverBudget,
              profit_overrides: Mapping[str, int] | None = None,
              ) -> tuple[Assignment, AffinityState, CycleReport]:
    """Execute one cycle: measure max AP, derive values, solve the cycle's
    assignment problem, and advance the affinity state."""
    available_agents, available_tasks = entry
    mats = state.mats
    profits = _profit_matrix(mats, profit_overrides)
    max_ap = max_affinity_pressure(state, available_tasks, available_agents)
    values = compute_values(strategy, instance, state, available_agents,
                            available_tasks, profits=profits)
    problem = build_gap_problem(mats, values.values, available_agents,
                                available_tasks)
    assignment = solve(problem, budget)

    profit = 0
    for agent_id, task_id in assignment.pairs:
        profit += int(profits[mats.agent_index[agent_id], mats.task_index[task_id]])

    next_state = update_affinities(state, available_agents, available_tasks,
                                   assignment)
    report = CycleReport(
        cycle=state.cycle,
        profit=profit,
        objective=assignment.objective,
        max_ap=max_ap,
        assigned_count=len(assignment.pairs),
        budget_exhausted=assignment.budget_exhausted,
    )
    log.info("cycle %d strategy=%s assigned=%d profit=%d max_ap=%.3f",
             report.cycle, strategy.label, report.assigned_count,
             report.profit, report.max_ap)
    if log.isEnabledFor(logging.DEBUG):
        log.debug("cycle %d post-update max_ap=%.3f", report.cycle,
                  max_affinity_pressure(next_state, available_tasks,
                                        available_agents))
    return assignment, next_state, report


def rotation_metrics(final_counts: np.ndarray,
                     compatibility: np.ndarray) -> tuple[int, float]:
    """Rotation achieved over a run.

    A task's rotation count is the minimum assignment count over its
    compatible agents (coverage with multiplicity); ``full_rotations`` is the
    minimum over tasks, ``avg_rotations_per_task`` the mean.
    """
    counts = np.asarray(final_counts)
    compat = np.asarray(compatibility, dtype=bool)
    per_task = np.where(compat, counts, np.iinfo(np.int64).max).min(axis=0)
    return int(per_task.min()), float(per_task.mean())


def run_scenario(instance: Instance, trace: ScenarioTrace,
                 strategy: StrategyConfig, budget: SolverBudget,
                 priority_hook: PriorityHook | None = None) -> RunReport:
    """Fold :func:`run_cycle` over the whole trace, starting from the initial
    affinity state.  The strategy is fixed for the entire run."""
    strategy.validate()
    state = init_affinities(instance)
    mats = state.mats
    reports: list[CycleReport] = []
    total_profit = 0
    for k in range(1, trace.cycles + 1):
        entry = trace.entry(k)
        overrides = priority_hook(k) if priority_hook is not None else None
        _, state, report = run_cycle(instance, entry, state, strategy, budget,
                                     profit_overrides=overrides)
        reports.append(report)
        total_profit += report.profit
    full, avg = rotation_metrics(state.assignment_counts, mats.compat)
    provenance = {
        "instance_metadata": dict(instance.metadata),
        "agents": mats.m,
        "tasks": mats.n,
        "trace_seed": trace.seed,
        "cycles": trace.cycles,
        "priorities": "per-cycle" if priority_hook is not None else "static",
    }
    return RunReport(
        strategy=strategy,
        total_profit=total_profit,
        full_rotations=full,
        avg_rotations_per_task=avg,
        per_cycle=reports,
        final_counts=state.assignment_counts,
        provenance=provenance,
    )


def compare_to_baseline(run: RunReport, baseline: RunReport) -> float:
    """Profit as a percentage of the baseline run (typically fop).  Both runs
    must come from the identical instance and trace."""
    if run.provenance != baseline.provenance:
        raise ValueError("runs were produced from different instances/traces")
    if baseline.total_profit <= 0:
        raise ValueError("baseline profit is zero; percentage undefined")
    return 100.0 * run.total_profit / baseline.total_profit
