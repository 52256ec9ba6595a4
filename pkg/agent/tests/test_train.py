"""Training loop behavior: outputs on disk, warmup, exploration, recovery."""

import csv
import json
import math

import pytest
import torch

import sacsk.train as train_mod
from sacsk.envclient import EpisodeInterrupted
from sacsk.hyper import AgentHyperparams
from sacsk.train import (CURVE_COLUMNS, HeadingHoldSampler, TrainConfig,
                         train)


@pytest.fixture
def tiny_scenario(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"T": 4, "I": 2}))
    return str(path)


def tiny_hyper(**overrides):
    base = dict(
        total_iterations=6,
        batch_size=8,
        warmup_transitions=8,
        buffer_size=512,
        updates_per_step=1,
        explore_every=0,
    )
    base.update(overrides)
    return AgentHyperparams(**base)


def run_tiny(tmp_path, tiny_scenario, **hyper_overrides):
    tc = TrainConfig(agent="sac", scenario_config=tiny_scenario,
                     scenario_seed=1, agent_seed=0,
                     out_dir=str(tmp_path / "run"),
                     hyper=tiny_hyper(**hyper_overrides))
    return tc, train(tc)


class TestOutputs:
    def test_curve_csv_columns_and_rows(self, tmp_path, tiny_scenario):
        tc, result = run_tiny(tmp_path, tiny_scenario)
        with open(result.curve_path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == CURVE_COLUMNS
        assert len(rows) == 1 + tc.hyper.total_iterations
        for row in rows[1:]:
            iteration, ep_return, oob, r_char, alpha = row
            assert int(iteration) >= 1
            float(ep_return)
            assert int(oob) >= 0
            float(r_char)
            assert float(alpha) > 0.0

    def test_result_rows_match_csv(self, tmp_path, tiny_scenario):
        tc, result = run_tiny(tmp_path, tiny_scenario)
        assert [r["iteration"] for r in result.rows] == list(
            range(1, tc.hyper.total_iterations + 1))
        with open(result.curve_path) as fh:
            disk = list(csv.DictReader(fh))
        for mem, on_disk in zip(result.rows, disk):
            assert float(on_disk["return"]) == pytest.approx(mem["return"])

    def test_checkpoint_contents(self, tmp_path, tiny_scenario):
        tc, result = run_tiny(tmp_path, tiny_scenario)
        ck = torch.load(result.checkpoint_path, weights_only=False)
        assert ck["final_eval_return"] == result.final_eval_return
        assert ck["hyper"]["total_iterations"] == tc.hyper.total_iterations
        assert ck["train_config"]["agent"] == "sac"
        assert set(ck["agent"]) >= {"actor", "q1", "q2", "q1_target",
                                    "q2_target", "log_alpha"}

    def test_result_json(self, tmp_path, tiny_scenario):
        tc, result = run_tiny(tmp_path, tiny_scenario)
        with open(tmp_path / "run" / "result.json") as fh:
            summary = json.load(fh)
        assert summary["final_eval_return"] == result.final_eval_return
        assert summary["agent"] == "sac"
        assert summary["agent_seed"] == 0

    def test_invalid_agent_rejected(self, tmp_path, tiny_scenario):
        tc = TrainConfig(agent="dqn", scenario_config=tiny_scenario,
                         out_dir=str(tmp_path))
        with pytest.raises(ValueError, match="agent"):
            train(tc)


class TestWarmup:
    def test_no_updates_before_warmup(self, tmp_path, tiny_scenario,
                                      monkeypatch):
        """With warmup above the total transition count every update call
        must be a no-op, so the networks never move."""
        update_calls = []
        original = train_mod.SacAgent.update

        def spy(self, buffer):
            stats = original(self, buffer)
            update_calls.append(stats)
            return stats

        monkeypatch.setattr(train_mod.SacAgent, "update", spy)
        run_tiny(tmp_path, tiny_scenario, warmup_transitions=10_000)
        assert update_calls
        assert all(stats is None for stats in update_calls)

    def test_updates_start_after_warmup(self, tmp_path, tiny_scenario,
                                        monkeypatch):
        update_calls = []
        original = train_mod.SacAgent.update

        def spy(self, buffer):
            stats = original(self, buffer)
            update_calls.append(stats)
            return stats

        monkeypatch.setattr(train_mod.SacAgent, "update", spy)
        run_tiny(tmp_path, tiny_scenario)
        assert any(stats for stats in update_calls)


class TestExploration:
    def test_heading_hold_keeps_action_until_expiry(self):
        import numpy as np
        sampler = HeadingHoldSampler(np.random.default_rng(0), v_max=30.0,
                                     hold_min=3, hold_max=3)
        actions = [sampler.action(False) for _ in range(9)]
        for start in (0, 3, 6):
            assert actions[start] == actions[start + 1] == actions[start + 2]
        assert actions[0] != actions[3]

    def test_heading_hold_redraws_when_out_of_bounds(self):
        import numpy as np
        sampler = HeadingHoldSampler(np.random.default_rng(1), v_max=30.0,
                                     hold_min=5, hold_max=5)
        first = sampler.action(False)
        assert sampler.action(True) != first

    def test_heading_hold_respects_bounds(self):
        import numpy as np
        sampler = HeadingHoldSampler(np.random.default_rng(2), v_max=12.0)
        for k in range(200):
            v, theta = sampler.action(k % 7 == 0)
            assert 0.0 <= v <= 12.0
            assert 0.0 <= theta < 2.0 * math.pi

    def test_redraw_on_entering_a_service_area_only(self, monkeypatch):
        """An exploration episode starts a fresh held action right after the
        step that began charging a terminal, and keeps holding while the
        charging continues."""
        import numpy as np

        from sacsk.buffer import ReplayBuffer
        from sacsk.hyper import AgentHyperparams
        from sacsk.networks import make_networks
        from sacsk.sac import SacAgent

        class ChargeOnStepsThreeToFive:
            def __init__(self):
                self.t = 0

            def reset(self, seed):
                self.t = 0
                return [0.0, 0.0]

            def step(self, v, theta):
                self.t += 1
                charge = 5.0 if 3 <= self.t <= 5 else 0.0
                info = {"out_of_bounds": False,
                        "reward_parts": {"charge": charge}}
                return [0.0, 0.0], 1.0, False, info

        seen = []
        original = train_mod.HeadingHoldSampler.action

        def spy(self, redraw):
            seen.append(bool(redraw))
            return original(self, redraw)

        monkeypatch.setattr(train_mod.HeadingHoldSampler, "action", spy)
        hyper = AgentHyperparams(batch_size=4, warmup_transitions=10_000,
                                 explore_every=0)
        actor, q1, q2 = make_networks("sac", 2, 30.0)
        agent = SacAgent(actor, q1, q2, hyper, seed=0)
        buffer = ReplayBuffer(capacity=64, obs_dim=2, act_dim=2, seed=0)
        tc = TrainConfig(agent="sac", scenario_config="unused",
                         scenario_seed=1, agent_seed=0, out_dir="unused",
                         hyper=hyper)
        train_mod._run_episode(tc, hyper, ChargeOnStepsThreeToFive(), agent,
                               buffer, np.random.default_rng(0), horizon=7,
                               v_max=30.0, explore=True)
        assert seen == [False, False, False, True, False, False, False]

    def test_exploration_episodes_add_extra_transitions(self, tmp_path,
                                                        tiny_scenario,
                                                        monkeypatch):
        """With exploration on, iterations past warmup feed extra episodes
        into the buffer; the learning curve only records policy episodes."""
        modes = []
        original = train_mod._run_episode

        def spy(*args, **kwargs):
            modes.append(bool(kwargs["explore"]))
            return original(*args, **kwargs)

        monkeypatch.setattr(train_mod, "_run_episode", spy)
        tc = TrainConfig(agent="sac", scenario_config=tiny_scenario,
                         scenario_seed=1, agent_seed=0,
                         out_dir=str(tmp_path / "explore"),
                         hyper=tiny_hyper(explore_every=2,
                                          explore_until_frac=1.0))
        train(tc)
        assert modes.count(False) == 6
        assert modes.count(True) >= 1

    def test_curve_rows_are_policy_episodes_only(self, tmp_path,
                                                 tiny_scenario):
        tc = TrainConfig(agent="sac", scenario_config=tiny_scenario,
                         scenario_seed=1, agent_seed=0,
                         out_dir=str(tmp_path / "explore2"),
                         hyper=tiny_hyper(explore_every=1,
                                          explore_until_frac=1.0))
        result = train(tc)
        assert len(result.rows) == tc.hyper.total_iterations


class TestRecovery:
    def test_episode_interrupted_is_retried(self, tmp_path, tiny_scenario,
                                            monkeypatch):
        """A transport loss mid-episode must rerun that episode, not crash
        the run or leave a hole in the curve."""
        failures = {"remaining": 1}
        original = train_mod._run_episode

        def flaky(*args, **kwargs):
            if failures["remaining"] > 0:
                failures["remaining"] -= 1
                raise EpisodeInterrupted("connection lost mid-episode")
            return original(*args, **kwargs)

        monkeypatch.setattr(train_mod, "_run_episode", flaky)
        tc, result = None, None
        tc = TrainConfig(agent="sac", scenario_config=tiny_scenario,
                         scenario_seed=1, agent_seed=0,
                         out_dir=str(tmp_path / "retry"),
                         hyper=tiny_hyper())
        result = train(tc)
        assert failures["remaining"] == 0
        assert len(result.rows) == tc.hyper.total_iterations


class TestDeterminism:
    def test_same_seeds_same_run(self, tmp_path, tiny_scenario):
        _, first = run_tiny(tmp_path / "a", tiny_scenario)
        _, second = run_tiny(tmp_path / "b", tiny_scenario)
        assert first.final_eval_return == second.final_eval_return
        assert [r["return"] for r in first.rows] == [
            r["return"] for r in second.rows]


class TestEntropySchedule:
    def test_constant_without_final_value(self):
        h = AgentHyperparams(target_entropy=3.0, total_iterations=100)
        assert h.entropy_target_at(1) == 3.0
        assert h.entropy_target_at(100) == 3.0

    def test_linear_anneal_window(self):
        h = AgentHyperparams(target_entropy=4.0, target_entropy_final=2.0,
                             anneal_from_frac=0.5, anneal_to_frac=0.9,
                             total_iterations=100)
        assert h.entropy_target_at(1) == 4.0
        assert h.entropy_target_at(50) == 4.0
        assert h.entropy_target_at(70) == pytest.approx(3.0)
        assert h.entropy_target_at(90) == 2.0
        assert h.entropy_target_at(100) == 2.0

    def test_degenerate_window_holds_initial_value_until_end(self):
        h = AgentHyperparams(target_entropy=4.0, target_entropy_final=2.0,
                             anneal_from_frac=0.5, anneal_to_frac=0.5,
                             total_iterations=100)
        assert h.entropy_target_at(49) == 4.0
        assert h.entropy_target_at(51) == 2.0

    def test_window_order_validated(self):
        with pytest.raises(ValueError, match="anneal_to_frac"):
            AgentHyperparams(anneal_from_frac=0.8,
                             anneal_to_frac=0.2).validate()

    def test_agent_tracks_scheduled_target(self, tmp_path, tiny_scenario,
                                           monkeypatch):
        seen = []
        orig = train_mod.SacAgent.update

        def spy(self, buffer):
            seen.append(self.entropy_target)
            return orig(self, buffer)

        monkeypatch.setattr(train_mod.SacAgent, "update", spy)
        run_tiny(tmp_path, tiny_scenario, target_entropy=4.0,
                 target_entropy_final=2.0, anneal_from_frac=0.0,
                 anneal_to_frac=0.5)
        assert seen, "no updates ran"
        assert min(seen) == 2.0 and seen[-1] == 2.0
        assert max(seen) > 2.0


class TestValueGuidedExploration:
    def test_candidate_argmax_picks_critic_preferred_action(self):
        from types import SimpleNamespace

        import numpy as np

        from sacsk.networks import make_networks

        actor, _, _ = make_networks("sac", 2, 30.0)

        class PreferFast(torch.nn.Module):
            def forward(self, obs, action):
                return action[:, 0]

        agent = SimpleNamespace(actor=actor, q1=PreferFast(), q2=PreferFast(),
                                noise_rng=torch.Generator().manual_seed(0))
        rng = np.random.default_rng(0)
        obs_t = torch.zeros(1, 2)
        with torch.no_grad():
            mean, log_std, _ = actor(obs_t, None)
        v, theta = train_mod._value_guided_action(
            agent, obs_t, mean, log_std, 30.0, rng, n_candidates=64)
        assert v > 20.0, f"argmax under a speed-loving critic gave v={v}"
        assert 0.0 <= theta < 2.0 * math.pi

    def test_greedy_fraction_selects_mode(self, tmp_path, tiny_scenario,
                                          monkeypatch):
        calls = {"greedy": 0}
        orig = train_mod._value_guided_action

        def spy(*args, **kwargs):
            calls["greedy"] += 1
            return orig(*args, **kwargs)

        monkeypatch.setattr(train_mod, "_value_guided_action", spy)
        run_tiny(tmp_path, tiny_scenario, explore_every=1,
                 explore_until_frac=1.0, explore_greedy_frac=1.0)
        assert calls["greedy"] > 0

        calls["greedy"] = 0
        run_tiny(tmp_path, tiny_scenario, explore_every=1,
                 explore_until_frac=1.0, explore_greedy_frac=0.0)
        assert calls["greedy"] == 0
