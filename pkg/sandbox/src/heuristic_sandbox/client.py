"""Session client for the sandbox worker process.

One session owns one child process. Requests and responses are single
JSON lines over the child's stdio; the client enforces wall-clock
timeouts by killing the child, after which the session is dead and a new
one must be spawned. ``SandboxRunner`` wraps a session with automatic
respawn so evaluation loops survive timeouts and crashes.
"""

from __future__ import annotations

import json
import os
import select
import subprocess
import sys
import time


def worker_command(memory_mb: int = 1024, allow: str | None = None) -> list[str]:
    cmd = [sys.executable, "-m", "heuristic_sandbox.worker", "--memory-mb", str(memory_mb)]
    if allow:
        cmd += ["--allow", allow]
    return cmd


class SandboxError(Exception):
    """Structured failure: kind is one of syntax, missing_function,
    banned_import, runtime, shape, nonfinite, timeout, state, protocol,
    transport."""

    def __init__(self, kind: str, message: str):
        super().__init__(f"[{kind}] {message}")
        self.kind = kind
        self.message = message


class SandboxSession:
    IDLE, LOADED, DEAD = "idle", "loaded", "dead"

    def __init__(self, command: list[str] | None = None, timeout_seconds: float = 50.0):
        self.command = list(command) if command else worker_command()
        self.timeout_seconds = timeout_seconds
        self.state = self.IDLE
        self.loaded_fn = ""
        self._proc: subprocess.Popen | None = None
        self._buffer = b""

    # -- lifecycle ----------------------------------------------------------

    def _ensure_process(self) -> subprocess.Popen:
        if self.state == self.DEAD:
            raise SandboxError("state", "session is dead; spawn a new one")
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
            self._buffer = b""
        return self._proc

    def shutdown(self) -> None:
        """Terminate the worker; idempotent."""
        proc = self._proc
        if proc is not None and proc.poll() is None:
            try:
                proc.stdin.write(b'{"op": "shutdown"}\n')
                proc.stdin.flush()
            except (BrokenPipeError, OSError):
                pass
            try:
                proc.wait(timeout=1.0)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
        self._proc = None
        self.state = self.DEAD

    def _kill(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.kill()
            self._proc.wait()
        self._proc = None
        self.state = self.DEAD

    # -- protocol -----------------------------------------------------------

    def _read_line(self, deadline: float) -> bytes:
        proc = self._proc
        fd = proc.stdout.fileno()
        while b"\n" not in self._buffer:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise TimeoutError
            chunk = os.read(fd, 1 << 16)
            if not chunk:
                raise SandboxError("transport", "worker closed its stream")
            self._buffer += chunk
        line, _, self._buffer = self._buffer.partition(b"\n")
        return line

    def _request(self, payload: dict, timeout: float | None = None) -> dict:
        proc = self._ensure_process()
        budget = self.timeout_seconds if timeout is None else timeout
        deadline = time.monotonic() + budget
        try:
            proc.stdin.write(json.dumps(payload).encode("utf-8") + b"\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            self._kill()
            raise SandboxError("transport", f"worker unreachable: {exc}") from exc
        try:
            line = self._read_line(deadline)
        except TimeoutError:
            self._kill()
            raise SandboxError(
                "timeout", f"no response within {budget:.3f}s; worker killed"
            ) from None
        except SandboxError:
            self._kill()
            raise
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            self._kill()
            raise SandboxError("protocol", f"bad response line: {exc}") from exc
        if not response.get("ok", False):
            err = response.get("error", {})
            raise SandboxError(
                err.get("kind", "protocol"), err.get("message", "unknown failure")
            )
        return response.get("result")

    # -- operations ---------------------------------------------------------

    def ping(self, timeout: float | None = None) -> bool:
        return self._request({"op": "ping"}, timeout=timeout) == "pong"

    def load(self, source: str, fn_name: str, seed: int | None = 0) -> None:
        """Compile source in the worker and bind fn_name for calls."""
        self._request(
            {"op": "load", "fn": fn_name, "source": source, "seed": seed},
            timeout=self.timeout_seconds,
        )
        self.state = self.LOADED
        self.loaded_fn = fn_name

    def call(self, args: list, timeout: float | None = None):
        """Invoke the loaded function; arrays go in/out as nested lists."""
        if self.state != self.LOADED:
            raise SandboxError("state", "call before load")
        return self._request({"op": "call", "args": args}, timeout=timeout)


class SandboxRunner:
    """Session factory with automatic respawn after timeouts or crashes."""

    def __init__(self, command: list[str] | None = None, timeout_seconds: float = 50.0):
        self.command = command
        self.timeout_seconds = timeout_seconds
        self._session: SandboxSession | None = None
        self.respawns = 0

    def session(self) -> SandboxSession:
        if self._session is None or self._session.state == SandboxSession.DEAD:
            if self._session is not None:
                self.respawns += 1
            self._session = SandboxSession(self.command, self.timeout_seconds)
        return self._session

    def load(self, source: str, fn_name: str, seed: int | None = 0) -> None:
        self.session().load(source, fn_name, seed)

    def call(self, args: list, timeout: float | None = None):
        return self.session().call(args, timeout=timeout)

    def close(self) -> None:
        if self._session is not None:
            self._session.shutdown()
            self._session = None
