"""Environment behavior: resets, capacity resolution, rewards, observations."""

import math

import numpy as np
import pytest

from dtplace.deployment import LOCAL, brute_force_optimal, validate
from dtplace.env import DTEnv, EnvConfig, MB_BITS, discounted_return, reward
from dtplace.stin import MAX_TX_POWER_W


def small_config(**overrides):
    defaults = dict(num_users=4, num_end_nodes=2, episode_len=5)
    defaults.update(overrides)
    return EnvConfig(**defaults)


def static_config(**overrides):
    return small_config(mobility_sigma_m=0.0, shadowing_sigma_db=0.0, **overrides)


def test_observation_dim_default_scenario():
    cfg = EnvConfig()
    assert cfg.num_targets == 5
    # 3 task attrs + 3 end rates + 1 satellite rate + 4 residual capacities
    # + 5-way previous-action one-hot
    assert cfg.obs_dim == 16
    env = DTEnv(cfg)
    _, obs = env.reset(seed=0)
    assert obs.shape == (20, 16)


def test_reset_is_deterministic():
    cfg = small_config()
    env_a, env_b = DTEnv(cfg), DTEnv(cfg)
    _, obs_a = env_a.reset(seed=123)
    _, obs_b = env_b.reset(seed=123)
    assert np.array_equal(obs_a, obs_b)
    actions = np.array([0, 1, 2, 3])
    res_a = env_a.step(actions)
    res_b = env_b.step(actions)
    assert res_a.reward == res_b.reward
    assert np.array_equal(res_a.observations, res_b.observations)
    assert np.array_equal(res_a.per_user_delays, res_b.per_user_delays)


def test_different_seeds_differ():
    cfg = small_config()
    env = DTEnv(cfg)
    _, obs_a = env.reset(seed=1)
    _, obs_b = env.reset(seed=2)
    assert not np.array_equal(obs_a, obs_b)


def test_reset_draws_within_configured_ranges():
    cfg = EnvConfig()
    env = DTEnv(cfg)
    state, _ = env.reset(seed=7)
    for user in state.snapshot.users:
        assert cfg.data_size_mb_min * MB_BITS <= user.data_size_bits <= cfg.data_size_mb_max * MB_BITS
        assert cfg.workload_min <= user.workload_density <= cfg.workload_max
        assert cfg.cpu_ghz_min * 1e9 <= user.cpu_hz <= cfg.cpu_ghz_max * 1e9
        assert 0 < user.tx_power_w <= MAX_TX_POWER_W
        assert 0 <= user.position[0] <= cfg.area_m
        assert 0 <= user.position[1] <= cfg.area_m
    assert np.array_equal(
        state.matrix.assignment(), np.zeros(cfg.num_users, dtype=np.int64)
    )


def test_reward_frozen_value():
    cfg = EnvConfig(alpha=0.7, beta=0.3, phi=0.1)
    assert math.isclose(reward(2.0, 5, cfg), -1.55, rel_tol=1e-12)


def test_discounted_return_frozen_values():
    assert math.isclose(discounted_return([1.0, 1.0], 0.9), 1.9, rel_tol=1e-12)
    assert discounted_return([], 0.9) == 0.0


def test_all_local_step_reward_is_delay_only():
    cfg = small_config()
    env = DTEnv(cfg)
    state, _ = env.reset(seed=3)
    snapshot = state.snapshot
    result = env.step(np.zeros(cfg.num_users, dtype=np.int64))
    expected_l = sum(
        u.workload_density * u.data_size_bits / u.cpu_hz for u in snapshot.users
    )
    assert result.remote_count == 0
    assert math.isclose(result.l_sum, expected_l, rel_tol=1e-12)
    assert math.isclose(result.reward, -cfg.alpha * expected_l, rel_tol=1e-12)


def test_capacity_overflow_resolved_in_agent_order():
    cfg = small_config(end_node_capacity=1, num_end_nodes=1)
    env = DTEnv(cfg)
    env.reset(seed=5)
    # agents 0 and 2 both want the capacity-1 node; 0 wins, 2 goes local
    result = env.step(np.array([1, 0, 1, 2]))
    assert list(result.matrix.assignment()) == [1, 0, 0, 2]


def test_cloud_never_overflows():
    cfg = small_config()
    env = DTEnv(cfg)
    env.reset(seed=5)
    cloud = cfg.cloud_action
    result = env.step(np.full(cfg.num_users, cloud))
    assert list(result.matrix.assignment()) == [cloud] * cfg.num_users
    assert result.remote_count == cfg.num_users


def test_action_mask_tracks_occupancy():
    cfg = small_config(end_node_capacity=2, num_users=4, num_end_nodes=2)
    env = DTEnv(cfg)
    env.reset(seed=9)
    assert env.action_mask(0).tolist() == [True] * cfg.num_targets
    env.step(np.array([1, 1, 2, 0]))  # node 1 now full (capacity 2)
    mask = env.action_mask(0)
    assert mask[LOCAL] and mask[cfg.cloud_action]
    assert not mask[1]
    assert mask[2]  # node 2 holds one twin, still open
    masks = env.action_masks()
    assert masks.shape == (cfg.num_users, cfg.num_targets)
    assert np.array_equal(masks[0], masks[-1])


def test_observations_stay_in_unit_interval():
    cfg = small_config()
    env = DTEnv(cfg)
    rng = np.random.default_rng(0)
    _, obs = env.reset(seed=11)
    for _ in range(40):
        assert np.all(obs >= 0.0) and np.all(obs <= 1.0)
        actions = rng.integers(0, cfg.num_targets, cfg.num_users)
        result = env.step(actions)
        obs = result.observations
        if result.done:
            _, obs = env.reset(seed=int(rng.integers(1 << 30)))


def test_executed_matrix_always_valid():
    cfg = small_config(end_node_capacity=1)
    env = DTEnv(cfg)
    rng = np.random.default_rng(1)
    state, _ = env.reset(seed=13)
    for _ in range(60):
        snapshot = env.snapshot
        actions = rng.integers(0, cfg.num_targets, cfg.num_users)
        result = env.step(actions)
        assert validate(result.matrix, snapshot) == []
        if result.done:
            env.reset(seed=int(rng.integers(1 << 30)))


def test_mobility_keeps_users_in_area():
    cfg = small_config(mobility_sigma_m=80.0, episode_len=50)
    env = DTEnv(cfg)
    env.reset(seed=17)
    for _ in range(50):
        env.step(np.zeros(cfg.num_users, dtype=np.int64))
        for user in env.snapshot.users:
            assert 0.0 <= user.position[0] <= cfg.area_m
            assert 0.0 <= user.position[1] <= cfg.area_m


def test_static_config_freezes_the_channel():
    cfg = static_config()
    env = DTEnv(cfg)
    state, _ = env.reset(seed=19)
    gains_before = state.snapshot.end_gains.copy()
    env.step(np.zeros(cfg.num_users, dtype=np.int64))
    assert np.array_equal(env.snapshot.end_gains, gains_before)


def test_done_after_episode_len():
    cfg = small_config(episode_len=3)
    env = DTEnv(cfg)
    env.reset(seed=21)
    flags = [env.step(np.zeros(cfg.num_users, dtype=np.int64)).done for _ in range(3)]
    assert flags == [False, False, True]


def test_step_before_reset_raises():
    env = DTEnv(small_config())
    with pytest.raises(RuntimeError):
        env.step(np.zeros(4, dtype=np.int64))


def test_bad_actions_rejected():
    cfg = small_config()
    env = DTEnv(cfg)
    env.reset(seed=23)
    with pytest.raises(ValueError):
        env.step(np.array([0, 0, 0]))  # wrong length
    with pytest.raises(ValueError):
        env.step(np.array([0, 0, 0, cfg.num_targets]))  # out of range


def test_oracle_assignment_maximizes_static_reward():
    # with beta=0 and a frozen channel, the delay-optimal assignment from the
    # enumeration oracle is exactly the reward-maximizing joint action
    cfg = static_config(beta=0.0, alpha=1.0, episode_len=25)
    env = DTEnv(cfg)
    state, _ = env.reset(seed=29)
    best_matrix, best_delay = brute_force_optimal(state.snapshot)
    result = env.step(best_matrix.assignment())
    assert np.array_equal(result.matrix.assignment(), best_matrix.assignment())
    assert math.isclose(result.l_sum, best_delay, rel_tol=1e-9)
    # a handful of random alternatives never beat it
    rng = np.random.default_rng(31)
    env2 = DTEnv(cfg)
    env2.reset(seed=29)
    for _ in range(20):
        alt = env2.step(rng.integers(0, cfg.num_targets, cfg.num_users))
        assert alt.l_sum >= best_delay - 1e-9


def test_config_validation():
    with pytest.raises(ValueError):
        EnvConfig(num_users=0)
    with pytest.raises(ValueError):
        EnvConfig(gamma=0.0)
    with pytest.raises(ValueError):
        EnvConfig(alpha=0.0, beta=0.0)
    with pytest.raises(ValueError):
        EnvConfig(data_size_mb_min=2.0, data_size_mb_max=1.0)
    with pytest.raises(ValueError):
        EnvConfig(tx_power_w_max=0.5)
