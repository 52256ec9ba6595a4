import math

import numpy as np
import pytest

from swiptmec.channel import LinkGeometry, link_budget
from swiptmec.energy import local_compute_energy
from swiptmec.scenario import ScenarioConfig, Task, Terminal
from swiptmec.tasking import (
    build_schedule,
    generate_tasks,
    offload_energy_terms,
    resolve_local,
    select_target,
    spend_allowed,
)

CFG = ScenarioConfig()


def terminal(tid, pos, battery=2500.0, task=False):
    t = Terminal(id=tid, position=pos, battery=battery)
    if task:
        t.pending_task = Task(size_bits=CFG.D_p, gen_slot=0, density=CFG.C_i)
    return t


def budget_at(d, cfg=CFG):
    return link_budget(LinkGeometry(d, cfg.H), cfg)


class TestGenerateTasks:
    def test_empirical_rate(self):
        cfg = CFG
        terminals = [terminal(i, (0.0, 0.0)) for i in range(5)]
        rng = np.random.default_rng(0)
        hits = 0
        slots = 10_000
        for s in range(slots):
            generate_tasks(terminals, cfg, rng, s)
            hits += sum(t.pending_task is not None for t in terminals)
        rate = hits / (slots * len(terminals))
        assert abs(rate - cfg.p_arrival) < 0.02

    def test_all_or_nothing(self):
        always = ScenarioConfig(p_arrival=1.0)
        never = ScenarioConfig(p_arrival=0.0)
        terminals = [terminal(i, (0.0, 0.0)) for i in range(4)]
        generate_tasks(terminals, always, np.random.default_rng(0), 0)
        assert all(t.pending_task is not None for t in terminals)
        generate_tasks(terminals, never, np.random.default_rng(0), 1)
        assert all(t.pending_task is None for t in terminals)

    def test_overwrites_previous_slot(self):
        always = ScenarioConfig(p_arrival=1.0)
        terminals = [terminal(0, (0.0, 0.0))]
        rng = np.random.default_rng(0)
        generate_tasks(terminals, always, rng, 3)
        assert terminals[0].pending_task.gen_slot == 3
        generate_tasks(terminals, always, rng, 4)
        assert terminals[0].pending_task.gen_slot == 4

    def test_deterministic_stream(self):
        terminals_a = [terminal(i, (0.0, 0.0)) for i in range(5)]
        terminals_b = [terminal(i, (0.0, 0.0)) for i in range(5)]
        rng_a = np.random.default_rng([7, 1])
        rng_b = np.random.default_rng([7, 1])
        for s in range(20):
            generate_tasks(terminals_a, CFG, rng_a, s)
            generate_tasks(terminals_b, CFG, rng_b, s)
            got_a = [t.pending_task is not None for t in terminals_a]
            got_b = [t.pending_task is not None for t in terminals_b]
            assert got_a == got_b


class TestSelectTarget:
    def test_task_holder_beats_nearer_idle(self):
        ts = [terminal(0, (3.0, 0.0)), terminal(1, (4.0, 0.0), task=True)]
        assert select_target((0.0, 0.0), ts, CFG).id == 1

    def test_nearest_among_task_holders(self):
        ts = [terminal(0, (4.0, 0.0), task=True), terminal(1, (2.0, 0.0), task=True)]
        assert select_target((0.0, 0.0), ts, CFG).id == 1

    def test_idle_fallback(self):
        ts = [terminal(0, (3.0, 0.0)), terminal(1, (1.0, 0.0))]
        assert select_target((0.0, 0.0), ts, CFG).id == 1

    def test_idle_fallback_disabled(self):
        cfg = ScenarioConfig(serve_without_task=False)
        ts = [terminal(0, (3.0, 0.0))]
        assert select_target((0.0, 0.0), ts, cfg) is None

    def test_nobody_in_cone(self):
        ts = [terminal(0, (6.0, 0.0), task=True), terminal(1, (0.0, -9.0))]
        assert select_target((0.0, 0.0), ts, CFG) is None

    def test_cone_boundary_is_served(self):
        ts = [terminal(0, (5.0, 0.0), task=True)]
        assert select_target((0.0, 0.0), ts, CFG).id == 0

    def test_distance_tie_takes_lowest_id(self):
        ts = [terminal(0, (-3.0, 0.0), task=True), terminal(1, (3.0, 0.0), task=True)]
        assert select_target((0.0, 0.0), ts, CFG).id == 0
        ts = [terminal(0, (3.0, 0.0)), terminal(1, (-3.0, 0.0))]
        assert select_target((0.0, 0.0), ts, CFG).id == 0

    def test_measured_from_uav_position(self):
        ts = [terminal(0, (10.0, 0.0), task=True), terminal(1, (18.0, 0.0), task=True)]
        assert select_target((14.5, 0.0), ts, CFG).id == 1


class TestSpendAllowed:
    def test_strict_at_reserve(self):
        floor = CFG.E_min + CFG.delta_e
        assert not spend_allowed(floor + 10.0, 10.0, CFG)
        assert spend_allowed(floor + 10.0 + 1e-9, 10.0, CFG)

    def test_generous_battery(self):
        assert spend_allowed(2500.0, 10.0, CFG)


class TestBuildSchedule:
    def test_offload_accept(self):
        t = terminal(0, (0.0, 0.0), task=True)
        b = budget_at(0.0)
        schedule, needs_local = build_schedule(t, b, CFG)
        assert schedule.served_terminal == 0
        assert schedule.offload
        assert not needs_local
        assert schedule.tau_up == (CFG.D_p + CFG.delta_up) / b.rate_up
        assert schedule.t_uav_comp == pytest.approx(2e-5, rel=1e-12)
        # Battery far from full, so charging fills the post-uplink window.
        assert schedule.t_eh == CFG.tau - schedule.tau_up
        assert schedule.total_time() == pytest.approx(CFG.tau, rel=1e-12)
        assert schedule.total_time() <= CFG.tau + 1e-12

    def test_low_battery_blocks_offload(self):
        t = terminal(0, (0.0, 0.0), battery=CFG.E_min + CFG.delta_e, task=True)
        schedule, needs_local = build_schedule(t, budget_at(0.0), CFG)
        assert not schedule.offload
        assert needs_local
        assert schedule.served_terminal == 0
        assert schedule.tau_up == 0.0
        # The local route is barred by the same reserve floor.
        cost, dropped = resolve_local(t.pending_task, t.battery, CFG)
        assert dropped
        assert cost == 0.0

    def test_rate_floor_blocks_offload(self):
        cfg = ScenarioConfig(R_min=29e6)
        t = terminal(0, (0.0, 0.0), task=True)
        schedule, needs_local = build_schedule(t, budget_at(0.0, cfg), cfg)
        assert not schedule.offload
        assert needs_local

    def test_slot_overrun_blocks_offload(self):
        # A slow onboard CPU cannot return results inside the slot.
        cfg = ScenarioConfig(f_u=9e4)
        t = terminal(0, (0.0, 0.0), task=True)
        schedule, needs_local = build_schedule(t, budget_at(0.0, cfg), cfg)
        assert not schedule.offload
        assert needs_local

    def test_charging_only_service(self):
        t = terminal(0, (0.0, 0.0))
        b = budget_at(0.0)
        schedule, needs_local = build_schedule(t, b, CFG)
        assert schedule.served_terminal == 0
        assert not schedule.offload
        assert not needs_local
        assert schedule.tau_up == 0.0
        assert schedule.t_eh == CFG.tau
        assert schedule.t_id == (CFG.D_r + CFG.delta_down) / b.rate_down
        assert schedule.tau_s == max(schedule.t_eh, schedule.t_id)

    def test_full_battery_still_served(self):
        t = terminal(0, (0.0, 0.0), battery=CFG.E_max)
        schedule, _ = build_schedule(t, budget_at(0.0), CFG)
        assert schedule.served_terminal == 0
        assert schedule.t_eh == 0.0

    def test_no_target(self):
        schedule, needs_local = build_schedule(None, None, CFG)
        assert schedule.served_terminal is None
        assert not needs_local
        assert schedule.total_time() == 0.0

    def test_out_of_cone_budget(self):
        t = terminal(0, (8.0, 0.0), task=True)
        schedule, needs_local = build_schedule(t, budget_at(8.0), CFG)
        assert schedule.served_terminal is None
        assert not needs_local

    def test_slot_budget_always_respected(self):
        # Across batteries and distances, the schedule fits the slot.
        for battery in [CFG.E_min, 900.0, 2500.0, 4990.0, CFG.E_max]:
            for d in [0.0, 1.0, 3.0, 4.9, 5.0]:
                for has_task in (False, True):
                    t = terminal(0, (d, 0.0), battery=battery, task=has_task)
                    schedule, _ = build_schedule(t, budget_at(d), CFG)
                    assert schedule.total_time() <= CFG.tau + 1e-12


class TestLocalAndOffloadEnergy:
    def test_local_runs_when_affordable(self):
        task = Task(size_bits=CFG.D_p, gen_slot=0, density=CFG.C_i)
        cost, dropped = resolve_local(task, 2500.0, CFG)
        assert cost == 10.0
        assert not dropped

    def test_local_dropped_at_floor(self):
        task = Task(size_bits=CFG.D_p, gen_slot=0, density=CFG.C_i)
        cost, dropped = resolve_local(task, CFG.E_min + CFG.delta_e + 10.0, CFG)
        assert dropped
        assert cost == 0.0

    def test_offload_terms(self):
        t = terminal(0, (0.0, 0.0), task=True)
        schedule, _ = build_schedule(t, budget_at(0.0), CFG)
        uplink, onboard = offload_energy_terms(t.pending_task, schedule, CFG)
        assert uplink == CFG.P_i * schedule.tau_up * 1e6
        assert onboard == pytest.approx(2.5e-4, rel=1e-12)
        # Offloading must beat computing locally for the terminal.
        assert uplink < local_compute_energy(t.pending_task, CFG)
