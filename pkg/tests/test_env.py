import numpy as np
import pytest

from color_rl.sim import (
    DiversityRanges,
    EnvConfig,
    EpisodeTerminated,
    Event,
    LidarConfig,
    RobotEnv,
    RobotState,
    SimParams,
    check_collision,
    lidar_scan,
)
from color_rl.sim.kinematics import wrap_angle
from util import make_map

NOMINAL = SimParams(k=0.6, control_interval_s=0.1, control_delay_steps=0,
                    v_linear_max_cm_s=18.0, v_angular_max_rad_s=1.0,
                    lidar_noise_std_cm=0.0)


def fixed_ranges(**overrides) -> DiversityRanges:
    p = {f: getattr(NOMINAL, f) for f in (
        "k", "control_interval_s", "control_delay_steps", "v_linear_max_cm_s",
        "v_angular_max_rad_s", "lidar_noise_std_cm")}
    p.update(overrides)
    return DiversityRanges(**{name: (v, v) for name, v in p.items()})


def make_env(n_cells=40, config=None, blocks=(), **param_overrides):
    m = make_map(n_cells, blocks=blocks)
    return RobotEnv(m, fixed_ranges(**param_overrides), config or EnvConfig())


def place(env, x, y, heading=0.0):
    """Pin the robot pose after reset (tests drive exact geometry)."""
    b = env._batch
    b.x[0], b.y[0], b.heading[0] = x, y, heading
    b.start_x[0], b.start_y[0] = x, y
    b._start_cos[0], b._start_sin[0] = np.cos(heading), np.sin(heading)


def test_straight_action_advances_18cm_per_sim_second():
    env = make_env(60, k=0.000001, control_interval_s=1.0)
    env.reset(0)
    place(env, 20.0, 20.0, 0.0)
    out = env.step(2)  # straight
    st = env.state
    assert st.x_cm == pytest.approx(20.0 + 18.0, abs=1e-3)
    assert st.y_cm == pytest.approx(20.0, abs=1e-9)
    assert st.heading_rad == pytest.approx(0.0)
    assert out.event is Event.NONE and not out.done


def test_action_table_targets():
    env = make_env(60, k=0.000001)
    env.reset(1)
    place(env, 20.0, 20.0, 0.0)
    env.step(0)
    st = env.state
    assert st.v_linear_cm_s == pytest.approx(0.36, rel=1e-5)
    assert st.v_angular_rad_s == pytest.approx(1.0, rel=1e-5)
    env2 = make_env(60, k=0.000001)
    env2.reset(1)
    place(env2, 20.0, 20.0, 0.0)
    env2.step(4)
    st2 = env2.state
    assert st2.v_linear_cm_s == pytest.approx(0.36, rel=1e-5)
    assert st2.v_angular_rad_s == pytest.approx(-1.0, rel=1e-5)


@pytest.mark.parametrize("delay", [0, 1, 3])
def test_control_delay_fidelity(delay):
    # with k ~ 0 the velocity response begins exactly `delay` steps late
    env = make_env(60, k=0.000001, control_delay_steps=delay)
    env.reset(2)
    place(env, 20.0, 20.0, 0.0)
    speeds = []
    for _ in range(delay + 2):
        env.step(2)
        speeds.append(env.state.v_linear_cm_s)
    for t in range(delay):
        assert speeds[t] == pytest.approx(0.0, abs=1e-9)
    assert speeds[delay] == pytest.approx(18.0, rel=1e-4)


def test_arrival_event_and_reward():
    env = make_env(40)
    env.reset(3)
    gx, gy = env.grid_map.goal_center
    place(env, gx - 1.0, gy, 0.0)
    out = env.step(2)
    assert out.event is Event.ARRIVAL
    assert out.done and not out.truncated
    assert out.reward == 75.0


def test_collision_event_and_reward():
    env = make_env(40, blocks=((20, 18, 22, 24),))
    env.reset(4)
    place(env, 15.0, 20.5, 0.0)  # wall face at x=20, radius 9 -> already close
    out = env.step(2)
    assert out.event is Event.COLLISION
    assert out.done and not out.truncated
    assert out.reward == -10.0


def test_timeout_truncates_without_done():
    cfg = EnvConfig(timeout_steps=5)
    env = make_env(60, config=cfg, k=0.000001)
    env.reset(5)
    place(env, 20.0, 20.0, np.pi / 2)
    outcomes = [env.step(0) for _ in range(5)]  # slow left turns, goes nowhere
    last = outcomes[-1]
    assert [o.event for o in outcomes[:-1]] == [Event.NONE] * 4
    assert last.event is Event.TIMEOUT
    assert last.truncated and not last.done
    # shaped reward, not a terminal constant
    assert -1.1 <= last.reward <= 1.1


def test_stepping_after_terminal_raises():
    cfg = EnvConfig(timeout_steps=2)
    env = make_env(60, config=cfg)
    env.reset(6)
    env.step(0)
    env.step(0)
    with pytest.raises(EpisodeTerminated):
        env.step(0)
    env.reset(7)
    out = env.step(0)
    assert out.event in (Event.NONE, Event.COLLISION)


def test_event_exclusivity_random_rollouts():
    env = make_env(50, blocks=((34, 10, 40, 30),))
    rng = np.random.default_rng(8)
    for ep in range(30):
        env.reset(int(rng.integers(1 << 31)))
        while True:
            out = env.step(int(rng.integers(5)))
            assert out.done == (out.event in (Event.COLLISION, Event.ARRIVAL))
            assert out.truncated == (out.event is Event.TIMEOUT)
            assert not (out.done and out.truncated)
            if out.done or out.truncated:
                break


def test_determinism_same_seed_bit_identical():
    actions = np.random.default_rng(1).integers(0, 5, 60)

    def rollout():
        env = make_env(40, lidar_noise_std_cm=1.0)
        states = [env.reset(123)]
        rewards = []
        for a in actions:
            out = env.step(int(a))
            states.append(out.state)
            rewards.append(out.reward)
            if out.done or out.truncated:
                env.reset(456)
        return np.stack(states), np.array(rewards)

    s1, r1 = rollout()
    s2, r2 = rollout()
    np.testing.assert_array_equal(s1, s2)
    np.testing.assert_array_equal(r1, r2)


# -- encoding -----------------------------------------------------------------


def test_encode_at_goal_zeros_and_full_range_lidar():
    env = make_env(40)
    env.reset(9)
    gx, gy = env.grid_map.goal_center
    place(env, gx, gy, 0.0)
    env._batch.v[0] = 0.0
    idx = np.array([0])
    env._batch.last_scan[0] = env._batch._scan(idx)[0]  # noise-free refresh
    s = env.encode_state()
    assert s[0] == pytest.approx(0.0, abs=1e-7)
    assert s[1] == pytest.approx(0.0, abs=1e-7)
    assert s[2] == pytest.approx(0.0, abs=1e-7)
    assert s[3] == s[4] == 0.0
    # interior of an empty 40 cm map: some beams reach walls well below range
    assert (s[5:] <= 1.0).all() and (s[5:] > 0.0).all()


def test_encode_dx_endpoint_is_one():
    cfg = EnvConfig(max_planning_dist_cm=100.0)
    env = make_env(200, config=cfg)
    env.reset(10)
    gx, gy = env.grid_map.goal_center
    place(env, gx - 100.0, gy, 0.0)  # goal 100 cm ahead along +x, heading 0
    s = env.encode_state()
    assert s[0] == pytest.approx(1.0, rel=1e-6)
    assert s[1] == pytest.approx(0.0, abs=1e-7)


def test_encode_matches_independent_recomputation():
    env = make_env(40, lidar_noise_std_cm=0.0)
    env.reset(11)
    for _ in range(10):
        out = env.step(1)
        if out.done or out.truncated:
            env.reset(12)
            continue
        b = env._batch
        st = env.state
        gx, gy = env.grid_map.goal_center
        d = env.config.planning_dist(env.grid_map)
        th0 = np.arctan2(b._start_sin[0], b._start_cos[0])
        rel = np.array([gx - st.x_cm, gy - st.y_cm])
        rot = np.array([[np.cos(th0), np.sin(th0)], [-np.sin(th0), np.cos(th0)]])
        dxdy = rot @ rel / d
        alpha = wrap_angle(np.arctan2(gy - st.y_cm, gx - st.x_cm) - st.heading_rad)
        expect = np.concatenate([
            dxdy, [alpha / np.pi, st.v_linear_cm_s / 18.0, st.v_angular_rad_s / 1.0],
            env.last_scan / 300.0])
        np.testing.assert_allclose(out.state, expect.astype(np.float32), atol=1e-6)


def test_state_bounds_within_planning_distance():
    env = make_env(40, lidar_noise_std_cm=1.0)
    rng = np.random.default_rng(13)
    for ep in range(15):
        s = env.reset(int(rng.integers(1 << 31)))
        assert (np.abs(s) <= 1.0).all()
        for _ in range(40):
            out = env.step(int(rng.integers(5)))
            assert (np.abs(out.state) <= 1.0 + 1e-6).all()
            if out.done or out.truncated:
                break


# -- reset ---------------------------------------------------------------------


def test_reset_zero_width_ranges_yield_nominals():
    env = make_env(40)
    env.reset(14)
    assert env.params == NOMINAL


def test_reset_resampling_stays_inside_intervals():
    m = make_map(40)
    ranges = DiversityRanges.around(SimParams(), 0.3)
    env = RobotEnv(m, ranges)
    rng = np.random.default_rng(15)
    seen = {f: [] for f in ("k", "control_interval_s", "control_delay_steps",
                            "v_linear_max_cm_s", "v_angular_max_rad_s",
                            "lidar_noise_std_cm")}
    n = 10_000
    for _ in range(n):
        env.reset(rng)
        p = env.params
        for f in seen:
            seen[f].append(getattr(p, f))
    for f, values in seen.items():
        lo, hi = getattr(ranges, f)
        arr = np.asarray(values)
        assert arr.min() >= lo and arr.max() <= hi
        # and actually spreads over the interval
        if hi > lo:
            assert arr.max() - arr.min() > 0.5 * (hi - lo)


def test_reset_spawns_inside_region_collision_free():
    env = make_env(40)
    rng = np.random.default_rng(16)
    x0, y0, x1, y1 = env.grid_map.spawn_region
    for _ in range(50):
        env.reset(rng)
        st = env.state
        assert x0 <= st.x_cm <= x1 and y0 <= st.y_cm <= y1
        assert not check_collision(env.grid_map, st)


def test_reset_clears_terminal_flag_and_velocity():
    cfg = EnvConfig(timeout_steps=3)
    env = make_env(40, config=cfg)
    env.reset(17)
    for _ in range(3):
        out = env.step(2)
        if out.done or out.truncated:
            break
    assert env.episode_over
    env.reset(18)
    assert not env.episode_over
    st = env.state
    assert st.v_linear_cm_s == 0.0 and st.v_angular_rad_s == 0.0
    assert env.steps_taken == 0


# -- standalone helpers ---------------------------------------------------------


def test_lidar_scan_empty_map_hits_max_range():
    m = make_map(30)
    cfg = LidarConfig(max_range_cm=10.0)
    pose = RobotState(15.0, 15.0, 0.3, 0, 0, 9.0)
    scan = lidar_scan(m, pose, cfg, noise_std=0.0)
    assert scan.shape == (27,)
    np.testing.assert_array_equal(scan, np.full(27, 10.0))


def test_lidar_scan_noise_is_clamped_and_seeded():
    m = make_map(30)
    pose = RobotState(15.0, 15.0, 0.0, 0, 0, 9.0)
    cfg = LidarConfig(max_range_cm=50.0)
    a = lidar_scan(m, pose, cfg, noise_std=5.0, rng=np.random.default_rng(1))
    b = lidar_scan(m, pose, cfg, noise_std=5.0, rng=np.random.default_rng(1))
    np.testing.assert_array_equal(a, b)
    assert (a >= 0).all() and (a <= 50.0).all()
    clean = lidar_scan(m, pose, cfg, noise_std=0.0)
    assert not np.array_equal(a, clean)


def test_check_collision_cases():
    m = make_map(100, blocks=((50, 50, 52, 52),))
    assert not check_collision(m, (25.0, 25.0), radius_cm=9.0)
    assert check_collision(m, (50.5, 50.5), radius_cm=1.0)  # centre on obstacle
    # 1 cm from the block face with a 9 cm radius
    assert check_collision(m, (41.0, 51.0), radius_cm=9.0)
    # near the border wall: implicit walls collide too
    assert check_collision(m, (5.0, 5.0), radius_cm=9.0)
