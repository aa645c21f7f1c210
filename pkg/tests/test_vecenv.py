import numpy as np
import pytest

from color_rl.sim import DiversityRanges, EnvConfig, EpisodeTerminated, SimParams
from color_rl.sim.core import SimBatch
from color_rl.sim.gridmap import MapError
from color_rl.vecenv import VecEnv
from util import make_map


def ranges(frac=0.3):
    return DiversityRanges.around(SimParams(), frac)


def test_reset_shapes_and_determinism():
    maps = [make_map(40), make_map(40, blocks=((30, 8, 34, 20),))]
    env = VecEnv(maps, 16, ranges())
    s1 = env.reset_all(7)
    assert s1.shape == (16, 32) and s1.dtype == np.float32
    env2 = VecEnv(maps, 16, ranges())
    s2 = env2.reset_all(7)
    np.testing.assert_array_equal(s1, s2)
    s3 = VecEnv(maps, 16, ranges()).reset_all(8)
    assert not np.array_equal(s1, s3)


def test_n1_matches_single_env():
    m = make_map(40)
    vec = VecEnv([m], 1, ranges())
    sv = vec.reset_all(3)

    from color_rl.sim import RobotEnv
    env = RobotEnv(m, ranges())
    ss = env.reset(np.random.default_rng(np.random.SeedSequence(3).spawn(1)[0]))
    np.testing.assert_array_equal(sv[0], ss)
    b = vec.step_batch([2])
    out = env.step(2)
    np.testing.assert_array_equal(b.store_states[0], out.state)
    assert b.rewards[0] == out.reward


def test_lockstep_rows_bit_identical_to_standalone_lanes():
    # the vectorized run must reproduce width-1 runs with matched seeds exactly,
    # regardless of what other copies are doing
    maps = [make_map(40), make_map(40, blocks=((8, 22, 14, 30),))]
    n = 6
    cfg = EnvConfig(timeout_steps=25)
    vec = VecEnv(maps, n, ranges(), cfg)
    states = vec.reset_all(11)
    rng = np.random.default_rng(0)
    actions = rng.integers(0, 5, (40, n))
    vec_states, vec_rewards, vec_dones = [], [], []
    for a in actions:
        b = vec.step_batch(a)
        vec_states.append(b.store_states.copy())
        vec_rewards.append(b.rewards.copy())
        vec_dones.append(b.dones | b.truncated)

    streams = np.random.SeedSequence(11).spawn(n)
    for lane in range(n):
        solo = VecEnv([maps[lane % 2]], 1, ranges(), cfg, auto_reset=True)
        solo._batch.reset_lane(0, np.random.default_rng(streams[lane]))
        for t in range(len(actions)):
            b = solo.step_batch(actions[t, lane:lane + 1])
            np.testing.assert_array_equal(b.store_states[0], vec_states[t][lane],
                                          err_msg=f"lane {lane} step {t}")
            assert b.rewards[0] == vec_rewards[t][lane]


def test_auto_reset_reports_fresh_state_and_stores_terminal():
    cfg = EnvConfig(timeout_steps=4)
    env = VecEnv([make_map(40)], 3, ranges(0.0), cfg)
    env.reset_all(5)
    last = None
    for _ in range(4):
        last = env.step_batch([2, 2, 2])
    ended = last.dones | last.truncated
    assert ended.any()
    for i in np.flatnonzero(ended):
        assert not np.array_equal(last.states[i], last.store_states[i])
    snap = env.snapshot_stats()
    assert snap.episodes == int(ended.sum())


def test_auto_reset_off_requires_manual_reset():
    cfg = EnvConfig(timeout_steps=2)
    env = VecEnv([make_map(40)], 2, ranges(0.0), cfg, auto_reset=False)
    env.reset_all(6)
    env.step_batch([2, 2])
    env.step_batch([2, 2])  # both copies time out here
    with pytest.raises(EpisodeTerminated):
        env.step_batch([2, 2])


def test_shape_contract_under_terminal_pattern():
    cfg = EnvConfig(timeout_steps=3)
    env = VecEnv([make_map(40)], 5, ranges(0.0), cfg)
    env.reset_all(7)
    for _ in range(9):
        b = env.step_batch(np.full(5, 2))
        assert b.states.shape == (5, 32)
        assert b.rewards.shape == (5,)
        assert b.dones.shape == (5,)
        assert b.store_states.shape == (5, 32)


def test_episode_counter_conservation():
    cfg = EnvConfig(timeout_steps=6)
    env = VecEnv([make_map(40)], 4, ranges(0.0), cfg)
    env.reset_all(8)
    total_ended = 0
    for _ in range(30):
        b = env.step_batch(np.random.default_rng(1).integers(0, 5, 4))
        total_ended += int((b.dones | b.truncated).sum())
    assert env.snapshot_stats().episodes == total_ended


def test_per_copy_maps_encode_their_own_geometry():
    m0 = make_map(40)
    m1 = make_map(40, goal=(12.0, 30.0))
    env = VecEnv([m0, m1], 4, ranges(0.0))
    env.reset_all(9)
    np.testing.assert_array_equal(env.map_index, [0, 1, 0, 1])
    assert env.sim.goal_x[1] == 12.0 and env.sim.goal_x[0] == 28.0


def test_stats_snapshot_and_reset():
    cfg = EnvConfig(timeout_steps=3)
    env = VecEnv([make_map(40)], 2, ranges(0.0), cfg)
    env.reset_all(10)
    assert env.snapshot_stats().arrival_rate is None  # no episodes yet
    for _ in range(6):
        env.step_batch([2, 2])
    snap = env.snapshot_stats(reset=True)
    assert snap.episodes == 4  # 2 copies x 2 timeouts
    pooled = sum(c.arrivals for c in snap.per_copy)
    assert snap.arrivals == pooled
    assert env.snapshot_stats().episodes == 0


def test_pooled_rate_matches_raw_counters():
    cfg = EnvConfig(timeout_steps=2)
    env = VecEnv([make_map(40)], 3, ranges(0.0), cfg)
    env.reset_all(11)
    for _ in range(8):
        env.step_batch([0, 1, 2])
    snap = env.snapshot_stats()
    per_copy_eps = sum(c.episodes for c in snap.per_copy)
    per_copy_arr = sum(c.arrivals for c in snap.per_copy)
    assert snap.episodes == per_copy_eps
    assert (snap.arrival_rate or 0.0) == pytest.approx(
        per_copy_arr / per_copy_eps if per_copy_eps else 0.0)


def test_mismatched_action_length_rejected():
    env = VecEnv([make_map(40)], 3, ranges(0.0))
    env.reset_all(12)
    with pytest.raises(ValueError):
        env.step_batch([1, 2])


def test_mixed_grid_shapes_rejected():
    with pytest.raises(MapError):
        SimBatch([make_map(40), make_map(50)], [0, 1], [ranges(), ranges()])
