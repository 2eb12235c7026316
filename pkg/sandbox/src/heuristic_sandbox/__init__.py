"""Isolated execution of candidate heuristic source.

A worker process loads one function at a time into a namespace restricted
to a numeric allowlist and answers call requests over a JSON-lines stdio
protocol. The client owns wall-clock timeouts: a stuck worker is killed
and the session is dead until respawned.
"""

from .client import SandboxError, SandboxRunner, SandboxSession, worker_command

__all__ = ["SandboxError", "SandboxRunner", "SandboxSession", "worker_command"]
