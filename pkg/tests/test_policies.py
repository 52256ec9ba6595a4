import math

import pytest

from swiptmec.environment import SwiptMecEnv
from swiptmec.policies import (
    SEEKER_CRUISE,
    HoverPolicy,
    RandomPolicy,
    SeekerPolicy,
    make_policy,
)
from swiptmec.scenario import ScenarioConfig

CFG = ScenarioConfig()


def seeded_env(seed=1, cfg=None):
    env = SwiptMecEnv(cfg or CFG)
    env.reset(seed)
    return env


class TestHover:
    def test_holds_still(self):
        env = seeded_env()
        policy = HoverPolicy()
        policy.reset(env)
        for _ in range(5):
            d = policy.decide(env)
            assert d.action.v == 0.0
            assert d.action.theta == 0.0


class TestRandom:
    def test_bounds_and_mean(self):
        env = SwiptMecEnv(CFG)
        policy = RandomPolicy(seed=123)
        total_v = 0.0
        n = 100_000
        for _ in range(n):
            a = policy.decide(env).action
            assert 0.0 <= a.v <= CFG.v_max
            assert 0.0 <= a.theta < 2.0 * math.pi
            total_v += a.v
        assert abs(total_v / n - CFG.v_max / 2.0) < 0.15

    def test_reset_replays_stream(self):
        env = SwiptMecEnv(CFG)
        policy = RandomPolicy(seed=7)
        first = [policy.decide(env).action for _ in range(10)]
        policy.reset(env)
        second = [policy.decide(env).action for _ in range(10)]
        assert first == second

    def test_seed_changes_stream(self):
        env = SwiptMecEnv(CFG)
        a = [RandomPolicy(seed=1).decide(env).action for _ in range(5)]
        b = [RandomPolicy(seed=2).decide(env).action for _ in range(5)]
        assert a != b


class TestSeeker:
    def place(self, env, positions, batteries):
        for t, pos, battery in zip(env.terminals, positions, batteries):
            t.position = pos
            t.battery = battery

    def test_flies_toward_neediest(self):
        env = seeded_env(cfg=ScenarioConfig(I=2))
        self.place(env, [(-10.0, 0.0), (5.0, 5.0)], [1000.0, 2000.0])
        d = SeekerPolicy().decide(env)
        assert d.action.theta == math.pi
        assert d.action.v == SEEKER_CRUISE

    def test_slows_to_land_on_target(self):
        env = seeded_env(cfg=ScenarioConfig(I=2))
        self.place(env, [(0.0, 3.0), (15.0, 0.0)], [1000.0, 2000.0])
        d = SeekerPolicy().decide(env)
        assert d.action.v == 3.0
        assert d.action.theta == pytest.approx(math.pi / 2.0, rel=1e-12)

    def test_holds_on_top(self):
        env = seeded_env(cfg=ScenarioConfig(I=2))
        self.place(env, [(0.0, 0.0), (15.0, 0.0)], [1000.0, 2000.0])
        d = SeekerPolicy().decide(env)
        assert d.action.v == 0.0

    def test_battery_tie_takes_lowest_id(self):
        env = seeded_env(cfg=ScenarioConfig(I=2))
        self.place(env, [(10.0, 0.0), (-10.0, 0.0)], [1500.0, 1500.0])
        d = SeekerPolicy().decide(env)
        assert d.action.theta == 0.0  # heads east toward terminal 0

    def test_heading_always_canonical(self):
        env = seeded_env(cfg=ScenarioConfig(I=2))
        self.place(env, [(-3.0, -4.0), (15.0, 0.0)], [1000.0, 2000.0])
        d = SeekerPolicy().decide(env)
        assert 0.0 <= d.action.theta < 2.0 * math.pi


class TestFactory:
    def test_known_names(self):
        assert isinstance(make_policy("hover"), HoverPolicy)
        assert isinstance(make_policy("random", seed=3), RandomPolicy)
        assert isinstance(make_policy("seeker"), SeekerPolicy)

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown policy"):
            make_policy("teleport")
