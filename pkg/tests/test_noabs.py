import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

import config
from modules import noabs
from modules.errors import (
    BridgeContractError,
    DegenerateAnchorError,
    InfeasibleBridgeError,
    InvalidConfigError,
    InvalidInputError,
)
from modules.noabs import (
    Bridge,
    ColonyState,
    NoabsParams,
    assign_loads,
    available_foragers,
    benefit_rate_no_bridge,
    bridge_rate,
    check_stability,
    effective_foragers,
    form_bridge,
    forager_step,
    init_colony,
    pheromone_weights,
    propose_bridge,
    select_anchors,
    update_archive,
)
from modules.optimization import make_rng


def sphere(x):
    return float(np.sum((np.asarray(x) - 0.3) ** 2))


def colony_from(archive, params):
    archive = np.asarray(archive, dtype=float)
    return init_colony(archive, np.arange(len(archive), dtype=float), params)


# ==================== Economics ====================

def test_benefit_rate_no_bridge():
    assert benefit_rate_no_bridge(30, 10, 20) == 1.0
    assert benefit_rate_no_bridge(100, 25, 25) == 2.0
    with pytest.raises(ZeroDivisionError):
        benefit_rate_no_bridge(10, 0, 0)
    with pytest.raises(InvalidInputError):
        benefit_rate_no_bridge(10, -1, 5)


def test_effective_foragers_with_measured_alpha():
    assert_allclose(effective_foragers(40, 17.02, 17.02), 39.0, rtol=1e-12)
    assert effective_foragers(40, 0, 17.02) == 40
    assert available_foragers(40, 10) == 30
    with pytest.raises(InfeasibleBridgeError):
        effective_foragers(10, 20, 1.0)
    with pytest.raises(InfeasibleBridgeError):
        available_foragers(10, 10)


def test_bridge_rate():
    assert_allclose(bridge_rate(40, 17.02, 17.02, 13.0), 3.0, rtol=1e-12)
    with pytest.raises(ZeroDivisionError):
        bridge_rate(40, 5, 17.02, 0.0)


@pytest.mark.parametrize("call, expected", [
    (lambda: benefit_rate_no_bridge(10, 4, 1), 2.0),
    (lambda: benefit_rate_no_bridge(100, 3, 2), 20.0),
    (lambda: effective_foragers(100, 17, 17.02), 100 - 17 / 17.02),
    (lambda: effective_foragers(50, 17, 1), 33.0),
    (lambda: bridge_rate(100, 17, 17.02, 2), (100 - 17 / 17.02) / 2),
])
def test_economics_reference_values(call, expected):
    assert_allclose(call(), expected, rtol=1e-12)


def test_economics_reference_digits():
    assert abs(effective_foragers(100, 17, 17.02) - 99.001175) < 1e-6
    assert abs(bridge_rate(100, 17, 17.02, 2) - 49.5005875) < 1e-6


def test_rate_monotone_in_builders_and_alpha():
    rates = [bridge_rate(40, n_b, 17.02, 2.0) for n_b in range(0, 20)]
    assert all(b < a for a, b in zip(rates, rates[1:]))
    foragers = [effective_foragers(40, 10, alpha) for alpha in (1.0, 2.0, 17.02)]
    assert foragers == sorted(foragers)


# ==================== Bridge proposal ====================

def test_propose_bridge_sizes_from_span():
    params = NoabsParams()
    proposal = propose_bridge(np.zeros(10), np.full(10, 0.45), params, indices=(0, 3))
    assert proposal.n_b == 5
    assert_allclose(proposal.span, 0.45 * np.sqrt(10), rtol=1e-12)
    assert proposal.detour_length == 2.0 * proposal.span
    assert proposal.anchor_b == 3
    assert proposal.accepted
    assert proposal.rate_with > proposal.rate_without


def test_builder_count_is_capped():
    accepted = propose_bridge(np.zeros(4), np.ones(4), NoabsParams(span_per_ant=0.001, alpha=1.0))
    assert accepted.n_b == 20
    assert accepted.accepted

    rejected = propose_bridge(
        np.zeros(4), np.ones(4), NoabsParams(span_per_ant=0.001, alpha=1.0, detour_factor=0.2)
    )
    assert rejected.n_b == 20
    assert not rejected.accepted


def test_acceptance_is_scale_invariant():
    params = NoabsParams(span_per_ant=1e-6, detour_factor=0.5)
    a = np.zeros(3)
    b = np.array([0.01, 0.02, 0.005])
    near = propose_bridge(a, b, params)
    far = propose_bridge(a, 10 * b, params)
    assert near.n_b == far.n_b == 20
    assert near.accepted == far.accepted
    assert_allclose(near.rate_with / near.rate_without, far.rate_with / far.rate_without, rtol=1e-12)


def test_degenerate_anchors():
    with pytest.raises(DegenerateAnchorError):
        propose_bridge(np.full(3, 0.5), np.full(3, 0.5), NoabsParams())


def test_infeasible_bridge_is_rejected():
    params = NoabsParams(colony_size=4, archive_size=2, span_per_ant=0.001, alpha=0.1)
    proposal = propose_bridge(np.zeros(2), np.ones(2), params)
    assert proposal.rate_with == 0.0
    assert not proposal.accepted


# ==================== Bridge construction & stability ====================

def test_form_bridge_stations():
    params = NoabsParams(jitter_sigma=0.0)
    a, b = np.zeros(10), np.full(10, 0.45)
    proposal = propose_bridge(a, b, params)
    bridge = form_bridge(proposal, (a, b), make_rng(1), params)
    assert_allclose(bridge.stations, np.arange(1, 6) / 6)
    assert_allclose(bridge.members[2], (a + b) / 2)
    assert_allclose(bridge.members, a + bridge.stations[:, None] * (b - a))


def test_form_bridge_stays_in_box():
    params = NoabsParams(jitter_sigma=1.0)
    a, b = np.zeros(6), np.ones(6)
    bridge = form_bridge(propose_bridge(a, b, params), (a, b), make_rng(2), params)
    assert bridge.members.min() >= 0.0 and bridge.members.max() <= 1.0


def test_form_bridge_requires_accepted_proposal():
    params = NoabsParams(span_per_ant=0.001, alpha=1.0, detour_factor=0.2)
    proposal = propose_bridge(np.zeros(4), np.ones(4), params)
    with pytest.raises(BridgeContractError):
        form_bridge(proposal, (np.zeros(4), np.ones(4)), make_rng(0), params)


def test_assign_loads_by_rank():
    bridge = Bridge(members=np.zeros((3, 2)), stations=np.array([0.25, 0.5, 0.75]))
    loaded = assign_loads(bridge, [3.0, 1.0, 2.0])
    assert_allclose(loaded.loads, [1.0, 1 / 3, 2 / 3])
    with pytest.raises(InvalidInputError):
        assign_loads(bridge, [1.0, 2.0])


def test_beam_balance_for_random_loads():
    rng = np.random.default_rng(12)
    params = NoabsParams()
    for _ in range(1000):
        n = int(rng.integers(1, 20))
        bridge = Bridge(members=np.zeros((n, 2)), stations=np.sort(rng.random(n)), loads=rng.random(n))
        report = check_stability(bridge, params)
        assert report.sum_fy <= 1e-12
        assert report.sum_moment <= 1e-12
        assert report.sum_fx == 0.0
        assert report.stands


def test_symmetric_loads_give_equal_reactions():
    bridge = Bridge(members=np.zeros((3, 2)), stations=np.array([0.25, 0.5, 0.75]), loads=np.array([1.0, 0.5, 1.0]))
    report = check_stability(bridge, NoabsParams())
    assert report.reaction_a == report.reaction_b == 1.25
    assert_allclose(report.collapse_probability, 2.5 / 3 * 0.2)
    assert not report.overloaded


def test_overload_and_collapse_chance():
    bridge = Bridge(members=np.zeros((2, 2)), stations=np.array([1 / 3, 2 / 3]), loads=np.array([1.0, 1.0]))
    overloaded = check_stability(bridge, NoabsParams(capacity_fraction=0.5))
    assert overloaded.overloaded and not overloaded.stands

    certain = NoabsParams(collapse_rate=1.0)
    rng = make_rng(0)
    assert not any(check_stability(bridge, certain, rng).stands for _ in range(20))

    never = NoabsParams(collapse_rate=0.0)
    assert all(check_stability(bridge, never, rng).stands for _ in range(20))


def test_unloaded_bridge():
    with pytest.raises(InvalidInputError):
        check_stability(Bridge(members=np.zeros((2, 2)), stations=np.array([0.3, 0.6])), NoabsParams())


# ==================== Colony ====================

def test_pheromone_weights():
    weights = pheromone_weights(10, 0.3)
    assert_allclose(weights.sum(), 1.0)
    assert np.all(np.diff(weights) < 0)
    assert_allclose(weights[1] / weights[0], np.exp(-1 / 3))


def test_forager_step_is_seeded_and_bounded():
    params = NoabsParams(archive_size=5)
    rng = np.random.default_rng(0)
    archive = 0.4 + 0.2 * rng.random((5, 6))
    colony = colony_from(archive, params)

    first = forager_step(colony, 200, make_rng(9))
    second = forager_step(colony, 200, make_rng(9))
    assert_array_equal(first, second)

    spread = np.maximum(np.mean(np.abs(archive - archive.mean(axis=0)), axis=0), 1e-3)
    low = archive.min(axis=0) - 3 * spread
    high = archive.max(axis=0) + 3 * spread
    assert np.all(first >= low - 1e-12) and np.all(first <= high + 1e-12)


def test_forager_step_clamps_to_box():
    params = NoabsParams(archive_size=2)
    colony = colony_from([np.zeros(3), np.ones(3)], params)
    samples = forager_step(colony, 500, make_rng(4))
    assert samples.min() >= 0.0 and samples.max() <= 1.0


def test_forager_step_on_identical_archive():
    params = NoabsParams(archive_size=4)
    vector = np.array([0.25, 0.5, 0.0, 0.9995])
    colony = colony_from(np.tile(vector, (4, 1)), params)
    samples = forager_step(colony, 300, make_rng(12))
    assert samples.shape == (300, 4)
    assert np.all(np.abs(samples - vector) <= 3 * noabs.MIN_KERNEL_STD + 1e-12)
    assert samples.min() >= 0.0 and samples.max() <= 1.0


def test_update_archive_keeps_best():
    params = NoabsParams(archive_size=3)
    colony = colony_from(np.full((3, 2), 0.5), params)
    assert colony.gbest_fitness == 0.0
    update_archive(colony, np.array([[0.1, 0.1], [0.9, 0.9]]), np.array([-1.0, 5.0]))
    assert colony.gbest_fitness == -1.0
    assert_allclose(colony.gbest_vector, [0.1, 0.1])
    assert list(colony.archive_fitness) == [-1.0, 0.0, 1.0]
    update_archive(colony, np.array([[0.2, 0.2]]), np.array([3.0]))
    assert colony.gbest_fitness == -1.0


def test_longer_path_wins_a_tie():
    # every bridge is capped at 20 builders, so rho scales as 1 / D
    params = NoabsParams(span_per_ant=1e-4, archive_size=4)
    archive = [[0.0, 0.0], [0.5, 0.0], [0.505, 0.0], [0.6, 0.0]]
    proposal = select_anchors(colony_from(archive, params), params)
    assert (proposal.anchor_a, proposal.anchor_b) == (0, 2)

    strict = NoabsParams(span_per_ant=1e-4, archive_size=4, tie_epsilon=0.0)
    assert select_anchors(colony_from(archive, strict), strict).anchor_b == 1


def test_select_anchors_skips_duplicates():
    params = NoabsParams(archive_size=3)
    archive = [[0.2, 0.2], [0.2, 0.2], [0.7, 0.2]]
    assert select_anchors(colony_from(archive, params), params).anchor_b == 2
    assert select_anchors(colony_from(np.full((3, 2), 0.2), params), params) is None


def test_colony_state_records_seed():
    params = NoabsParams(archive_size=2, seed=17)
    colony = colony_from([[0.1], [0.2]], params)
    assert isinstance(colony, ColonyState)
    assert colony.seed == 17


# ==================== Optimizer ====================

def test_params_validation():
    with pytest.raises(InvalidConfigError) as exc:
        NoabsParams(colony_size=10, archive_size=20)
    assert exc.value.key == "archive_size"
    with pytest.raises(InvalidConfigError):
        NoabsParams(collapse_rate=2.0)
    with pytest.raises(InvalidInputError):
        make_rng(None)


def test_optimize_sphere(sequential):
    result = noabs.optimize(sphere, 5, NoabsParams(max_iterations=300, seed=1))
    assert result.best_fitness <= 1e-3
    assert np.all((result.best_vector >= 0) & (result.best_vector <= 1))


def test_optimize_sphere_ten_dimensions(sequential):
    target = np.linspace(0.1, 0.9, 10)

    def shifted(x):
        return float(np.sum((np.asarray(x) - target) ** 2))

    result = noabs.optimize(shifted, 10, NoabsParams(colony_size=40, max_iterations=200, seed=7))
    assert result.best_fitness <= 1e-3
    assert result.evaluation_count == 40 * 201
    assert len(result.history) == 201


def test_history_and_budget(sequential):
    params = NoabsParams(colony_size=20, archive_size=5, max_iterations=40, seed=3)
    result = noabs.optimize(sphere, 4, params)
    assert len(result.history) == 41
    assert all(b <= a for a, b in zip(result.history, result.history[1:]))
    assert result.history[-1] == result.best_fitness
    assert result.evaluation_count == 20 * 41

    stats = result.diagnostics
    assert stats["proposed"] + stats["skipped"] == 40
    assert stats["stood"] + stats["collapsed"] == stats["accepted"]


def test_diagnostics_report_capacity(sequential):
    params = NoabsParams(colony_size=20, archive_size=5, capacity=50.0, max_iterations=20, seed=3)
    stats = noabs.optimize(sphere, 4, params).diagnostics
    assert stats["capacity"] == 50.0
    assert stats["accepted"] > 0
    # the worst member carries a full load, so one support takes at least half of it
    assert 0.5 * 50.0 <= stats["peak_reaction"] <= (20 // 2) * 50.0


def test_every_candidate_is_evaluated_once_per_slot(sequential):
    calls = []

    def counting(x):
        calls.append(np.array(x))
        return sphere(x)

    result = noabs.optimize(counting, 3, NoabsParams(colony_size=12, archive_size=4, max_iterations=15, seed=5))
    assert len(calls) == result.evaluation_count == 12 * 16
    stacked = np.vstack(calls)
    assert stacked.min() >= 0.0 and stacked.max() <= 1.0


def test_optimize_is_deterministic(sequential):
    params = NoabsParams(colony_size=16, archive_size=4, max_iterations=30, seed=21)
    first = noabs.optimize(sphere, 4, params)
    second = noabs.optimize(sphere, 4, params)
    assert_array_equal(first.best_vector, second.best_vector)
    assert first.history == second.history
    assert first.diagnostics == second.diagnostics

    other = noabs.optimize(sphere, 4, NoabsParams(colony_size=16, archive_size=4, max_iterations=30, seed=22))
    assert not np.array_equal(first.best_vector, other.best_vector)


def test_threaded_evaluation_matches_sequential(monkeypatch):
    params = NoabsParams(colony_size=16, archive_size=4, max_iterations=10, seed=8)
    monkeypatch.setattr(config, "ENABLE_MULTITHREADING", False)
    sequential_result = noabs.optimize(sphere, 3, params)
    monkeypatch.setattr(config, "ENABLE_MULTITHREADING", True)
    monkeypatch.setattr(config, "PARALLEL_MIN_BATCH", 1)
    threaded_result = noabs.optimize(sphere, 3, params)
    assert_array_equal(sequential_result.best_vector, threaded_result.best_vector)
    assert sequential_result.history == threaded_result.history
