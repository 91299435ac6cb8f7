"""Affinity counting across cycles and the affinity pressure diagnostic.

The affinity ``a[i, j]`` counts the cycles since task j was last assigned to
agent i.  It is 0 exactly for incompatible pairs, resets to 1 on assignment,
increments while both sides were available but the pair went unassigned, and
freezes while either side was unavailable.

Affinity pressure (AP) compares a task's actual affinity sum against the
ideal rotation, in which the affinities over c available compatible agents
form {1, ..., c} and sum to the triangular number c*(c+1)/2:

    AP = sum(a) / c - (c + 1) / 2

AP is 0 under perfect rotation, negative during the first c cycles, and
positive when assignments are overdue.  Only agents available in the current
cycle enter the sum and the count, so adding or removing other tasks/agents
leaves a task's AP unchanged.
"""

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .domain import Instance, InstanceMatrices


@dataclass(eq=False)
class AffinityState:
    """Evolving affinity matrix plus per-pair assignment counts for one run."""

    mats: InstanceMatrices
    affinities: np.ndarray        # int64, m x n
    assignment_counts: np.ndarray  # int64, m x n
    cycle: int

    @property
    def instance(self) -> Instance:
        return self.mats.instance


def init_affinities(instance: Instance | InstanceMatrices) -> AffinityState:
    """State for cycle 1: affinity 1 on every compatible pair, 0 elsewhere."""
    mats = instance if isinstance(instance, InstanceMatrices) else InstanceMatrices(instance)
    return AffinityState(
        mats=mats,
        affinities=mats.compat.astype(np.int64),
        assignment_counts=np.zeros((mats.m, mats.n), dtype=np.int64),
        cycle=1,
    )


def _assignment_pairs(assignment) -> Iterable[tuple[str, str]]:
    return getattr(assignment, "pairs", assignment)


def update_affinities(state: AffinityState,
                      prev_available_agents: Iterable[str],
                      prev_available_tasks: Iterable[str],
                      prev_assignment) -> AffinityState:
    """Advance the state one cycle, given the previous cycle's availability
    and its solved assignment.

    Assigned pairs reset to 1; pairs available on both sides but unassigned
    increment by 1; pairs with an unavailable side keep their value;
    incompatible pairs stay 0.  Raises ``ValueError`` for an assignment that
    references an incompatible or unavailable pair, or assigns a task twice.
    ``prev_assignment`` may be any iterable of ``(agent_id, task_id)`` pairs
    or an object exposing them as ``.pairs``.
    """
    mats = state.mats
    agent_mask = mats.agent_row_mask(prev_available_agents)
    task_mask = mats.task_col_mask(prev_available_tasks)

    pairs = list(_assignment_pairs(prev_assignment))
    seen_tasks: set[str] = set()
    rows, cols = [], []
    for agent_id, task_id in pairs:
        i = mats.agent_index[agent_id]
        j = mats.task_index[task_id]
        if not mats.compat[i, j]:
            raise ValueError(f"assignment pair ({agent_id}, {task_id}) is incompatible")
        if not (agent_mask[i] and task_mask[j]):
            raise ValueError(f"assignment pair ({agent_id}, {task_id}) was unavailable")
        if task_id in seen_tasks:
            raise ValueError(f"task {task_id} assigned more than once")
        seen_tasks.add(task_id)
        rows.append(i)
        cols.append(j)

    affinities = state.affinities.copy()
    counting = mats.compat & agent_mask[:, None] & task_mask[None, :]
    affinities[counting] += 1
    counts = state.assignment_counts.copy()
    if rows:
        affinities[rows, cols] = 1
        counts[rows, cols] += 1

    return AffinityState(mats=mats, affinities=affinities,
                         assignment_counts=counts, cycle=state.cycle + 1)


def affinity_pressure(state: AffinityState, task: str,
                      available_compatible_agents: Iterable[str]) -> float:
    """AP of one task over the given available compatible agents."""
    mats = state.mats
    j = mats.task_index[task]
    agents = list(available_compatible_agents)
    if not agents:
        raise ValueError(f"task {task}: no available compatible agents")
    rows = []
    for agent_id in agents:
        i = mats.agent_index[agent_id]
        if not mats.compat[i, j]:
            raise ValueError(f"agent {agent_id} is not compatible with task {task}")
        rows.append(i)
    c = len(rows)
    total = int(state.affinities[rows, j].sum())
    return total / c - (c + 1) / 2


def max_affinity_pressure(state: AffinityState,
                          available_tasks: Iterable[str],
                          available_agents: Iterable[str]) -> float:
    """Maximum AP over the available tasks, each restricted to its available
    compatible agents.

    Tasks whose compatible agents are all unavailable are skipped (their AP
    is undefined this cycle); if every task is skipped the result is 0.0.
    """
    mats = state.mats
    agent_mask = mats.agent_row_mask(available_agents)
    task_mask = mats.task_col_mask(available_tasks)
    eligible = mats.compat & agent_mask[:, None]
    counts = eligible.sum(axis=0)
    usable = task_mask & (counts > 0)
    if not usable.any():
        return 0.0
    sums = np.where(eligible, state.affinities, 0).sum(axis=0)
    c = counts[usable].astype(np.float64)
    ap = sums[usable] / c - (c + 1.0) / 2.0
    return float(ap.max())
