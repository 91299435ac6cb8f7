import random

import numpy as np
import pytest

from rotagap.affinity import init_affinities, update_affinities
from rotagap.domain import worked_example_fixture
from rotagap.solver import GapProblem, brute_force_oracle
from rotagap.strategies import (ConfigError, StrategyConfig, ValueMatrix,
                                compute_values, os_values, pc_values,
                                wpp_values)

from conftest import make_instance


def full_mask(shape):
    return np.ones(shape, dtype=bool)


def test_config_parse_and_labels():
    assert StrategyConfig.parse("fop") == StrategyConfig(kind="fop")
    assert StrategyConfig.parse("os:10").gamma == 10.0
    assert StrategyConfig.parse("pc:2:0.5") == StrategyConfig(kind="pc", alpha=2.0,
                                                              beta=0.5)
    assert StrategyConfig.parse("os:10").label == "os/10"
    assert StrategyConfig.parse("os:10").file_label == "os-10"
    assert StrategyConfig.parse("pc").label == "pc"
    assert StrategyConfig.parse("pc:2:0.5").label == "pc/2/0.5"


@pytest.mark.parametrize("spec", ["nope", "os", "os:0", "os:-3", "pc:1",
                                  "fop:2", "pc:-1:1"])
def test_config_rejects_bad_specs(spec):
    with pytest.raises(ConfigError):
        StrategyConfig.parse(spec)


def test_gamma_only_valid_for_os():
    with pytest.raises(ConfigError):
        StrategyConfig(kind="fop", gamma=10.0).validate()
    with pytest.raises(ConfigError):
        StrategyConfig(kind="os").validate()


def test_value_matrix_rejects_bad_entries():
    with pytest.raises(ValueError):
        ValueMatrix(np.array([[-1.0]]))
    with pytest.raises(ValueError):
        ValueMatrix(np.array([[np.inf]]))


@pytest.fixture
def walkthrough_state():
    instance, _ = worked_example_fixture()
    return instance, init_affinities(instance)


def test_fop_values_are_profits(walkthrough_state):
    instance, state = walkthrough_state
    vm = compute_values(StrategyConfig(kind="fop"), instance, state,
                        "ABC", instance.task_ids)
    assert np.array_equal(vm.values, state.mats.profits.astype(float))


def test_foa_values_are_affinities(walkthrough_state):
    instance, state = walkthrough_state
    vm = compute_values(StrategyConfig(kind="foa"), instance, state,
                        "ABC", instance.task_ids)
    assert np.array_equal(vm.values, state.affinities.astype(float))


def test_unavailable_rows_and_columns_are_zero(walkthrough_state):
    instance, state = walkthrough_state
    vm = compute_values(StrategyConfig(kind="fop"), instance, state,
                        {"A", "B"}, {"T1", "T2"})
    mats = state.mats
    assert vm.values[mats.agent_index["C"], :].sum() == 0
    assert vm.values[:, mats.task_index["T3"]].sum() == 0


def test_pc_arithmetic():
    p = np.array([[5]])
    a = np.array([[3]])
    assert pc_values(1, 1, p, a, full_mask((1, 1))).values[0, 0] == 15.0
    assert pc_values(2, 0, p, a, full_mask((1, 1))).values[0, 0] == 25.0
    assert pc_values(1, 1, p, np.array([[0]]), full_mask((1, 1))).values[0, 0] == 0.0
    # 0**0 == 1 keeps the special-case equivalences continuous
    assert pc_values(0, 1, np.array([[0]]), a, full_mask((1, 1))).values[0, 0] == 3.0


def test_pc_special_cases_match_fixed_objectives(walkthrough_state):
    instance, state = walkthrough_state
    state = update_affinities(state, "ABC", instance.task_ids,
                              [("A", "T1"), ("B", "T2")])
    agents, tasks = "ABC", instance.task_ids
    fop = compute_values(StrategyConfig(kind="fop"), instance, state, agents, tasks)
    foa = compute_values(StrategyConfig(kind="foa"), instance, state, agents, tasks)
    pc_b0 = compute_values(StrategyConfig(kind="pc", beta=0.0), instance, state,
                           agents, tasks)
    pc_a0 = compute_values(StrategyConfig(kind="pc", alpha=0.0), instance, state,
                           agents, tasks)
    assert np.array_equal(pc_b0.values, fop.values)
    assert np.array_equal(pc_a0.values, foa.values)


def test_os_switches_on_threshold():
    p = np.array([[7, 2], [1, 9]])
    a = np.array([[1, 4], [2, 1]])
    mask = full_mask((2, 2))
    assert np.array_equal(os_values(10.0, p, a, mask, max_ap=-1.0).values,
                          p.astype(float))
    # equality falls to the affinity branch
    assert np.array_equal(os_values(10.0, p, a, mask, max_ap=10.0).values,
                          a.astype(float))


@pytest.mark.parametrize("gamma", [10.0, 20.0, 30.0, 40.0])
def test_os_experiment_grid_gammas_accepted(gamma):
    config = StrategyConfig(kind="os", gamma=gamma)
    config.validate()
    assert config.label == f"os/{int(gamma)}"


def test_os_dichotomy_equals_fop_or_foa(walkthrough_state):
    instance, state = walkthrough_state
    rng = random.Random(5)
    agents, tasks = frozenset("ABC"), frozenset(instance.task_ids)
    for cycle in range(6):
        for gamma in (0.25, 1.0, 3.0):
            os_m = compute_values(StrategyConfig(kind="os", gamma=gamma),
                                  instance, state, agents, tasks)
            fop = compute_values(StrategyConfig(kind="fop"), instance, state,
                                 agents, tasks)
            foa = compute_values(StrategyConfig(kind="foa"), instance, state,
                                 agents, tasks)
            assert (np.array_equal(os_m.values, fop.values)
                    or np.array_equal(os_m.values, foa.values))
        pairs = [(rng.choice(sorted(t.compatible)), t.id)
                 for t in instance.tasks if rng.random() < 0.7]
        state = update_affinities(state, agents, tasks, pairs)


def test_wpp_ideal_rotation_reduces_to_normalized_profits():
    # affinities {1..4} hit the triangular ideal, so lambda == 1 exactly
    agents = {f"A{i}": 1 for i in range(4)}
    instance = make_instance(agents, {"T1": (8, 1, set(agents))})
    state = init_affinities(instance)
    for i, agent in enumerate(sorted(agents)):
        state.affinities[state.mats.agent_index[agent], 0] = i + 1
    vm = compute_values(StrategyConfig(kind="wpp"), instance, state,
                        set(agents), {"T1"})
    assert np.allclose(vm.values[:, 0], state.mats.profits[:, 0] / 8.0)


def test_wpp_first_cycle_blend():
    # |C| = 3 and all affinities 1: lambda = 6/3 = 2, v = clamp(2*p_hat - a_hat)
    instance = make_instance({"A": 1, "B": 1, "C": 1}, {"T1": (10, 1, {"A", "B", "C"}),
                                                        "T2": (4, 1, {"A", "B", "C"})})
    state = init_affinities(instance)
    vm = compute_values(StrategyConfig(kind="wpp"), instance, state,
                        {"A", "B", "C"}, {"T1", "T2"})
    p_hat = state.mats.profits / 10.0
    expected = np.maximum(2.0 * p_hat - 1.0, 0.0)
    assert np.allclose(vm.values, expected)


def test_wpp_double_ideal_weights_equally():
    agents = {f"A{i}": 1 for i in range(3)}
    instance = make_instance(agents, {"T1": (6, 1, set(agents))})
    state = init_affinities(instance)
    state.affinities[:, 0] = 4  # sum 12 == 2 * ideal(6) -> lambda 0.5
    vm = compute_values(StrategyConfig(kind="wpp"), instance, state,
                        set(agents), {"T1"})
    expected = 0.5 * (state.mats.profits[:, 0] / 6.0) + 0.5 * (4.0 / 4.0)
    assert np.allclose(vm.values[:, 0], expected)


def test_wpp_degenerate_inputs_error():
    instance = make_instance({"A": 1}, {"T1": (0, 1, {"A"})})
    state = init_affinities(instance)
    with pytest.raises(ValueError, match="wpp"):
        compute_values(StrategyConfig(kind="wpp"), instance, state, {"A"}, {"T1"})
    with pytest.raises(ValueError, match="wpp"):
        wpp_values(np.array([[5]]), np.array([[0]]), full_mask((1, 1)))


def test_all_strategies_handle_empty_availability_mask():
    instance = make_instance({"A": 1, "B": 1}, {"T1": (5, 1, {"A"})})
    state = init_affinities(instance)
    for spec in ("fop", "foa", "os:10", "pc", "wpp"):
        vm = compute_values(StrategyConfig.parse(spec), instance, state,
                            {"B"}, {"T1"})  # T1's only agent unavailable
        assert vm.values.sum() == 0.0


def test_strategies_are_pure(walkthrough_state):
    instance, state = walkthrough_state
    for spec in ("fop", "foa", "os:10", "pc", "pc:2:0.5", "wpp"):
        config = StrategyConfig.parse(spec)
        a = compute_values(config, instance, state, "ABC", instance.task_ids)
        b = compute_values(config, instance, state, "ABC", instance.task_ids)
        assert np.array_equal(a.values, b.values)


def test_positive_scaling_preserves_optimal_assignments():
    rng = random.Random(11)
    caps = np.array([6, 5], dtype=np.int64)
    weights = np.array([[rng.randint(1, 5) for _ in range(4)] for _ in range(2)],
                       dtype=np.int64)
    values = np.array([[float(rng.randint(1, 30)) for _ in range(4)]
                       for _ in range(2)])
    base = GapProblem(agent_ids=("X", "Y"), task_ids=tuple(f"t{j}" for j in range(4)),
                      agent_capacities=caps, weights=weights, values=values,
                      feasible_pairs=full_mask((2, 4)))
    # powers of two scale exactly in floating point, so tie structure survives
    for factor in (2.0, 0.5, 4.0):
        scaled = GapProblem(agent_ids=base.agent_ids, task_ids=base.task_ids,
                            agent_capacities=caps, weights=weights,
                            values=values * factor,
                            feasible_pairs=base.feasible_pairs)
        a, b = brute_force_oracle(base), brute_force_oracle(scaled)
        assert a.pairs == b.pairs
        assert b.objective == pytest.approx(a.objective * factor)
