"""Experiment runner and the reset/step wire service.

The runner drives scripted policies through full episodes and writes
machine-readable artifacts: one JSON trace and one per-slot CSV per
episode, plus a one-row-per-seed summary CSV. Outputs carry no
timestamps or machine identifiers, so reruns are byte-identical.

The wire service speaks line-delimited JSON over stdio or TCP. One
request, one response, in order. Requests:

    {"cmd": "reset", "seed": <int>}
    {"cmd": "step", "v": <float>, "theta": <float>}
    {"cmd": "config"}
    {"cmd": "close"}

Step and reset responses look like:

    {"ok": true, "obs": [x, y], "reward": <float>, "done": <bool>,
     "info": {"reward_parts": ..., "jain": ..., "batteries": ...,
              "out_of_bounds": ..., "position": ..., ...}}

Malformed input never kills the service; it answers
{"ok": false, "error": <text>} and keeps listening. Each connection
gets its own environment, so parallel clients never share state.
"""

from __future__ import annotations

import json
import logging
import os
import socket
import socketserver
import threading
from dataclasses import dataclass
from typing import Dict, IO, List, Optional, Tuple

from .environment import Action, EpisodeTrace, SwiptMecEnv
from .policies import make_policy
from .scenario import ScenarioConfig

log = logging.getLogger("swiptmec")

SUMMARY_COLUMNS = ["seed", "return", "E_total_J", "mean_F_energy_uJ",
                   "final_jain", "avg_retained_uJ", "dropped_tasks"]


@dataclass
class RunSpec:
    """One experiment: a config, a policy, and the seeds to run."""

    cfg: ScenarioConfig
    policy: str
    seeds: List[int]
    out_dir: str

    def validate(self) -> None:
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError(f"seeds must be distinct, got {self.seeds}")
        if any((not isinstance(s, int)) or s < 0 for s in self.seeds):
            raise ValueError(f"seeds must be non-negative integers, got {self.seeds}")


def run_episode(env: SwiptMecEnv, policy, seed: int) -> EpisodeTrace:
    """Roll one policy through one episode and fold the trace."""
    env.reset(seed)
    policy.reset(env)
    while not env.done:
        decision = policy.decide(env)
        env.step(decision.action)
    return env.finalize()


def summary_row(trace: EpisodeTrace) -> Dict[str, object]:
    t = trace.totals
    return {
        "seed": trace.seed,
        "return": t["return"],
        "E_total_J": t["e_total_J"],
        "mean_F_energy_uJ": t["mean_f_energy_uJ"],
        "final_jain": t["final_jain"],
        "avg_retained_uJ": t["avg_retained_uJ"],
        "dropped_tasks": t["dropped_tasks"],
    }


def run_experiment(spec: RunSpec) -> List[Dict[str, object]]:
    """Run every seed and write traces, slot tables, and the summary."""
    spec.validate()
    os.makedirs(spec.out_dir, exist_ok=True)
    env = SwiptMecEnv(spec.cfg)
    rows: List[Dict[str, object]] = []
    for seed in spec.seeds:
        policy = make_policy(spec.policy, seed=seed)
        trace = run_episode(env, policy, seed)
        base = os.path.join(spec.out_dir, f"episode_seed{seed}")
        with open(base + ".json", "w", encoding="utf-8") as fh:
            fh.write(trace.to_json())
            fh.write("\n")
        with open(base + ".csv", "w", encoding="utf-8", newline="") as fh:
            trace.write_csv(fh)
        row = summary_row(trace)
        rows.append(row)
        log.info("seed %d: return %.3f, E_total %.3f J",
                 seed, row["return"], row["E_total_J"])
    with open(os.path.join(spec.out_dir, "summary.csv"), "w",
              encoding="utf-8", newline="") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(str(row[c]) for c in SUMMARY_COLUMNS) + "\n")
    return rows


# -- wire protocol -----------------------------------------------------


def _encode(obj: dict) -> str:
    return json.dumps(obj, allow_nan=False, separators=(",", ":"))


class WireSession:
    """One client's environment and request dispatch."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.env = SwiptMecEnv(cfg)
        self._ready = False

    def handle_line(self, line: str) -> Tuple[dict, bool]:
        """Answer one request line. Returns (response, keep_open)."""
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return {"ok": False, "error": f"invalid JSON: {exc.msg}"}, True
        if not isinstance(msg, dict) or "cmd" not in msg:
            return {"ok": False, "error": "request must be an object with a cmd field"}, True
        cmd = msg["cmd"]
        if cmd == "reset":
            return self._do_reset(msg), True
        if cmd == "step":
            return self._do_step(msg), True
        if cmd == "config":
            return {"ok": True, "config": self.cfg.to_dict()}, True
        if cmd == "close":
            return {"ok": True}, False
        return {"ok": False, "error": f"unknown cmd {cmd!r}"}, True

    def _do_reset(self, msg: dict) -> dict:
        seed = msg.get("seed")
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            return {"ok": False, "error": "reset needs a non-negative integer seed"}
        obs = self.env.reset(seed)
        self._ready = True
        batteries = [t.battery for t in self.env.terminals]
        from .environment import jain_index
        return {
            "ok": True,
            "obs": obs,
            "reward": 0.0,
            "done": self.env.done,
            "info": {
                "reward_parts": {"obj_energy": 0.0, "obj_fair": 0.0,
                                 "penalty": 0.0, "bias": 0.0, "charge": 0.0},
                "jain": jain_index(batteries),
                "batteries": batteries,
                "out_of_bounds": False,
                "position": [self.env.position[0], self.env.position[1]],
                "served_terminal": None,
                "dropped_tasks": 0,
            },
        }

    def _do_step(self, msg: dict) -> dict:
        if not self._ready:
            return {"ok": False, "error": "step before reset"}
        if self.env.done:
            return {"ok": False, "error": "episode finished; send reset"}
        v = msg.get("v")
        theta = msg.get("theta")
        for name, val in (("v", v), ("theta", theta)):
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                return {"ok": False, "error": f"step needs numeric {name}"}
        obs, reward, done, report = self.env.step(Action(float(v), float(theta)))
        return {
            "ok": True,
            "obs": obs,
            "reward": reward,
            "done": done,
            "info": report.info_dict(),
        }


def serve_stdio(cfg: ScenarioConfig, stdin: IO[str], stdout: IO[str]) -> None:
    """Serve one session over text streams until EOF, close, or a dead pipe."""
    session = WireSession(cfg)
    try:
        for line in stdin:
            if not line.strip():
                continue
            response, keep_open = session.handle_line(line)
            stdout.write(_encode(response) + "\n")
            stdout.flush()
            if not keep_open:
                break
    except BrokenPipeError:
        log.info("client closed the output pipe; stopping")


class _WireHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        session = WireSession(self.server.cfg)  # type: ignore[attr-defined]
        log.info("client connected: %s", self.client_address)
        while True:
            raw = self.rfile.readline()
            if not raw:
                break
            line = raw.decode("utf-8", errors="replace")
            if not line.strip():
                continue
            response, keep_open = session.handle_line(line)
            self.wfile.write((_encode(response) + "\n").encode("utf-8"))
            if not keep_open:
                break
        log.info("client gone: %s", self.client_address)


class WireServer(socketserver.ThreadingTCPServer):
    """TCP front of the wire protocol; one environment per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, cfg: ScenarioConfig, host: str = "127.0.0.1", port: int = 0):
        self.cfg = cfg
        super().__init__((host, port), _WireHandler)

    @property
    def bound_port(self) -> int:
        return self.server_address[1]

    def serve_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


def serve_env(cfg: ScenarioConfig, port: Optional[int] = None,
              stdio: bool = False, stdin: Optional[IO[str]] = None,
              stdout: Optional[IO[str]] = None) -> None:
    """Entry point behind the serve command. Blocks until the client
    side finishes (stdio) or forever (TCP)."""
    if stdio:
        import sys
        serve_stdio(cfg, stdin or sys.stdin, stdout or sys.stdout)
        return
    server = WireServer(cfg, port=port or 0)
    # Announce the bound port on stdout so parents can parse it, then serve.
    import sys
    print(f"swiptmec-serve listening on 127.0.0.1:{server.bound_port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
