import random

import numpy as np
import pytest

from rotagap.domain import AgentSpec, Instance, TaskSpec
from rotagap.solver import GapProblem


def make_instance(agents: dict[str, int], tasks: dict[str, tuple[int, int, set[str]]],
                  metadata: dict | None = None) -> Instance:
    """Terse instance builder: tasks map id -> (profit, weight, compatible)."""
    return Instance(
        agents=tuple(AgentSpec(id=a, capacity=c) for a, c in agents.items()),
        tasks=tuple(TaskSpec.uniform(t, profit=p, weight=w, compatible=compat)
                    for t, (p, w, compat) in tasks.items()),
        metadata=metadata or {},
    )


def random_gap_problem(rng: random.Random, max_agents: int = 3,
                       max_tasks: int = 10) -> GapProblem:
    """Small random problem with integer-valued objectives so float sums are
    exact and oracle comparisons can assert equality."""
    m = rng.randint(1, max_agents)
    n = rng.randint(1, max_tasks)
    # capacities hold several tasks each, so the feasible trees are deep
    caps = np.array([rng.randint(0, 30) for _ in range(m)], dtype=np.int64)
    weights = np.array([[rng.randint(1, 10) for _ in range(n)] for _ in range(m)],
                       dtype=np.int64)
    values = np.array([[float(rng.randint(0, 50)) for _ in range(n)] for _ in range(m)])
    feasible = np.array([[rng.random() < 0.85 for _ in range(n)] for _ in range(m)])
    return GapProblem(
        agent_ids=tuple(f"a{i:02d}" for i in range(m)),
        task_ids=tuple(f"t{j:02d}" for j in range(n)),
        agent_capacities=caps, weights=weights, values=values,
        feasible_pairs=feasible,
    )


def assert_feasible(problem: GapProblem, assignment) -> None:
    """Independent feasibility re-check used by solver tests (does not rely
    on the solver's own verifier)."""
    loads = {a: 0 for a in problem.agent_ids}
    tasks_seen = set()
    agent_index = {a: i for i, a in enumerate(problem.agent_ids)}
    task_index = {t: j for j, t in enumerate(problem.task_ids)}
    for agent_id, task_id in assignment.pairs:
        i, j = agent_index[agent_id], task_index[task_id]
        assert problem.feasible_pairs[i, j], (agent_id, task_id)
        assert task_id not in tasks_seen
        tasks_seen.add(task_id)
        loads[agent_id] += int(problem.weights[i, j])
    for agent_id, load in loads.items():
        assert load <= int(problem.agent_capacities[agent_index[agent_id]])
    recomputed = sum(float(problem.values[agent_index[a], task_index[t]])
                     for a, t in assignment.pairs)
    assert assignment.objective == pytest.approx(recomputed, rel=1e-9, abs=1e-12)
