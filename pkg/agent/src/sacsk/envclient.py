"""Client for the swiptmec environment server.

Talks the line-delimited JSON reset/step protocol to a `swiptmec serve
--stdio` child process. This module is the package's only connection to
the simulator; nothing here imports simulator code.

Transport failures trigger a respawn with bounded exponential backoff.
A failure mid-episode cannot be resumed (the server keeps the episode
state), so after a successful respawn the client raises
EpisodeInterrupted and the caller restarts the episode; if the respawn
budget is exhausted EnvClientError propagates so the caller can save
state and abort.
"""

from __future__ import annotations

import json
import logging
import shutil
import subprocess
import sys
import time
from typing import Any, Dict, List, Optional, Tuple

log = logging.getLogger("sacsk.env")


class EnvClientError(RuntimeError):
    """The server is unreachable or rejected a request."""


class EpisodeInterrupted(RuntimeError):
    """Transport was lost mid-episode; the server was respawned."""


class _TransportLost(RuntimeError):
    pass


def _server_command(config_path: Optional[str]) -> List[str]:
    exe = shutil.which("swiptmec")
    cmd = [exe] if exe else [sys.executable, "-m", "swiptmec"]
    cmd += ["serve", "--stdio"]
    if config_path is not None:
        cmd += ["--config", config_path]
    return cmd


class WireEnvClient:
    def __init__(self, config_path: Optional[str] = None,
                 max_respawns: int = 3, backoff_s: float = 0.5):
        self.config_path = config_path
        self.max_respawns = max_respawns
        self.backoff_s = backoff_s
        self._proc: Optional[subprocess.Popen] = None
        self._spawn()

    # -- transport ---------------------------------------------------------

    def _spawn(self) -> None:
        cmd = _server_command(self.config_path)
        self._proc = subprocess.Popen(
            cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL, text=True, bufsize=1)
        log.debug("spawned env server: %s", cmd)

    def _respawn_with_backoff(self) -> None:
        delay = self.backoff_s
        for attempt in range(1, self.max_respawns + 1):
            time.sleep(delay)
            delay *= 2.0
            try:
                self._terminate()
                self._spawn()
                self._rpc_once({"cmd": "config"})
                log.warning("env server respawned on attempt %d", attempt)
                return
            except (_TransportLost, OSError):
                continue
        raise EnvClientError(
            f"env server unreachable after {self.max_respawns} respawn attempts")

    def _rpc_once(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        proc = self._proc
        if proc is None or proc.poll() is not None:
            raise _TransportLost("server process is not running")
        try:
            proc.stdin.write(json.dumps(payload) + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise _TransportLost(str(exc)) from exc
        if not line:
            raise _TransportLost("server closed the stream")
        response = json.loads(line)
        if not response.get("ok", False):
            raise EnvClientError(f"server error: {response.get('error')}")
        return response

    def _rpc(self, payload: Dict[str, Any], mid_episode: bool) -> Dict[str, Any]:
        try:
            return self._rpc_once(payload)
        except _TransportLost as exc:
            log.warning("transport lost (%s); respawning", exc)
            self._respawn_with_backoff()
            if mid_episode:
                raise EpisodeInterrupted(str(exc)) from exc
            return self._rpc_once(payload)

    def _terminate(self) -> None:
        if self._proc is None:
            return
        try:
            self._proc.kill()
            self._proc.wait(timeout=5)
        except OSError:
            pass
        self._proc = None

    # -- protocol ----------------------------------------------------------

    def config(self) -> Dict[str, Any]:
        return self._rpc({"cmd": "config"}, mid_episode=False)["config"]

    def reset(self, seed: int) -> List[float]:
        return self._rpc({"cmd": "reset", "seed": seed}, mid_episode=False)["obs"]

    def step(self, v: float, theta: float
             ) -> Tuple[List[float], float, bool, Dict[str, Any]]:
        r = self._rpc({"cmd": "step", "v": float(v), "theta": float(theta)},
                      mid_episode=True)
        return r["obs"], r["reward"], r["done"], r["info"]

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            try:
                self._rpc_once({"cmd": "close"})
            except (_TransportLost, EnvClientError):
                pass
        self._terminate()

    def __enter__(self) -> "WireEnvClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
