"""Protocol server: reads one JSON request per stdin line, answers one
JSON response per stdout line.

Requests: {"op": "load", "fn": ..., "source": ..., "seed": ...}
          {"op": "call", "args": [...]}
          {"op": "ping"} / {"op": "shutdown"}
Responses: {"ok": true, "result": ...}
           {"ok": false, "error": {"kind": ..., "message": ...}}

Arrays travel as (nested) lists of numbers, row-major. Heuristic code runs
with a guarded import (numeric allowlist only), a trimmed builtins table,
stdout rebound to stderr so prints cannot corrupt the protocol, and an
address-space cap applied at startup.
"""

from __future__ import annotations

import argparse
import builtins
import importlib
import json
import math
import sys

DEFAULT_ALLOWED_MODULES = (
    "numpy",
    "scipy",
    "torch",
    "math",
    "random",
    "itertools",
    "functools",
    "collections",
    "heapq",
    "bisect",
    "statistics",
    "operator",
)

_DENIED_BUILTINS = {
    "open",
    "input",
    "breakpoint",
    "exit",
    "quit",
    "compile",
    "eval",
    "exec",
    "globals",
    "locals",
    "vars",
    "copyright",
    "credits",
    "license",
    "help",
}


class BannedImportError(ImportError):
    pass


def _make_import_guard(allowed: frozenset[str]):
    def guarded_import(name, globals=None, locals=None, fromlist=(), level=0):
        root = name.split(".")[0]
        if level != 0 or root not in allowed:
            raise BannedImportError(f"import of {name!r} is not allowed")
        return importlib.__import__(name, globals, locals, fromlist, level)

    return guarded_import


def _restricted_builtins(allowed: frozenset[str]) -> dict:
    table = {
        name: getattr(builtins, name)
        for name in dir(builtins)
        if not name.startswith("_") and name not in _DENIED_BUILTINS
    }
    table["__import__"] = _make_import_guard(allowed)
    table["__build_class__"] = builtins.__build_class__
    table["__name__"] = "heuristic"
    return table


def _apply_memory_cap(megabytes: int) -> None:
    if megabytes <= 0:
        return
    try:
        import resource

        limit = megabytes << 20
        resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
    except (ImportError, ValueError, OSError):
        pass  # platform without setrlimit: timeout still applies


def _decode_args(raw_args):
    import numpy as np

    out = []
    for value in raw_args:
        if isinstance(value, list):
            # dtype inferred: index arrays (all ints on the wire) stay
            # integer so they remain usable as matrix subscripts
            out.append(np.asarray(value))
        else:
            out.append(value)
    return out


def _encode_result(value):
    """Nested lists / scalars for the wire; error on non-finite values."""
    import numpy as np

    if isinstance(value, (list, tuple)):
        value = np.asarray(value, dtype=float)
    if isinstance(value, np.ndarray):
        if value.ndim > 2:
            raise ValueError(f"arrays beyond 2-D unsupported, got {value.ndim}-D")
        arr = value.astype(float)
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError("result has non-finite values")
        return arr.tolist()
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise FloatingPointError("result is non-finite")
        return value
    raise TypeError(f"unsupported result type {type(value).__name__}")


class Worker:
    def __init__(self, allowed: frozenset[str]):
        self.allowed = allowed
        self.fn = None
        self.fn_name = ""

    def handle(self, request: dict) -> dict:
        op = request.get("op")
        if op == "ping":
            return {"ok": True, "result": "pong"}
        if op == "load":
            return self.load(request)
        if op == "call":
            return self.call(request)
        return _error("protocol", f"unknown op {op!r}")

    def load(self, request: dict) -> dict:
        source = request.get("source", "")
        fn_name = request.get("fn", "")
        seed = request.get("seed")
        namespace = {"__builtins__": _restricted_builtins(self.allowed)}
        try:
            code = compile(source, "<heuristic>", "exec")
        except SyntaxError as exc:
            return _error("syntax", str(exc))
        try:
            if seed is not None:
                import random as _random

                _random.seed(seed)
                import numpy as _np

                _np.random.seed(seed % (2**32))
            exec(code, namespace)
        except BannedImportError as exc:
            return _error("banned_import", str(exc))
        except BaseException as exc:
            return _error("runtime", f"{type(exc).__name__}: {exc}")
        fn = namespace.get(fn_name)
        if not callable(fn):
            return _error("missing_function", f"no function {fn_name!r} in source")
        self.fn = fn
        self.fn_name = fn_name
        return {"ok": True, "result": fn_name}

    def call(self, request: dict) -> dict:
        if self.fn is None:
            return _error("state", "no function loaded")
        try:
            args = _decode_args(request.get("args", []))
        except Exception as exc:
            return _error("protocol", f"bad arguments: {exc}")
        try:
            result = self.fn(*args)
        except BaseException as exc:
            return _error("runtime", f"{type(exc).__name__}: {exc}")
        try:
            return {"ok": True, "result": _encode_result(result)}
        except FloatingPointError as exc:
            return _error("nonfinite", str(exc))
        except (TypeError, ValueError) as exc:
            return _error("shape", str(exc))


def _error(kind: str, message: str) -> dict:
    return {"ok": False, "error": {"kind": kind, "message": message}}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--memory-mb", type=int, default=1024)
    parser.add_argument(
        "--allow",
        default=",".join(DEFAULT_ALLOWED_MODULES),
        help="comma-separated import allowlist",
    )
    args = parser.parse_args(argv)

    _apply_memory_cap(args.memory_mb)
    allowed = frozenset(m.strip() for m in args.allow.split(",") if m.strip())

    protocol_out = sys.stdout
    sys.stdout = sys.stderr  # heuristic prints must not touch the protocol

    worker = Worker(allowed)
    while True:
        line = sys.stdin.readline()
        if not line:
            break
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            response = _error("protocol", f"bad request JSON: {exc}")
        else:
            if request.get("op") == "shutdown":
                print(json.dumps({"ok": True, "result": "bye"}), file=protocol_out, flush=True)
                break
            response = worker.handle(request)
        print(json.dumps(response), file=protocol_out, flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
