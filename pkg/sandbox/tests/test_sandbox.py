import math
import time

import pytest

from heuristic_sandbox import SandboxError, SandboxRunner, SandboxSession

SEED_BPO = '''import numpy as np

def priority_v1(item: float, bins_remain_cap: np.ndarray) -> np.ndarray:
    """Trivial design: -log of the fill ratio."""
    ratios = item / bins_remain_cap
    log_ratios = np.log(ratios)
    priorities = -log_ratios
    return priorities
'''


@pytest.fixture
def session():
    s = SandboxSession(timeout_seconds=20.0)
    yield s
    s.shutdown()


def test_ping(session):
    assert session.ping()


def test_load_and_call_seed_heuristic(session):
    session.load(SEED_BPO, "priority_v1")
    result = session.call([50.0, [100.0, 60.0]])
    assert result == pytest.approx([math.log(2.0), math.log(60.0 / 50.0)], abs=1e-9)


def test_round_trip_scalars(session):
    session.load("def echo(x):\n    return x\n", "echo")
    for value in (0.0, -0.0, 1.5, -17, 1e308, 5e-324, 3):
        out = session.call([value])
        assert out == value
        if value == -0.0:
            assert math.copysign(1.0, out) == math.copysign(1.0, value)


def test_round_trip_1d_and_2d(session):
    session.load("def echo(x):\n    return x\n", "echo")
    one_d = [1.0, -2.5, 0.0, 1e100]
    assert session.call([one_d]) == one_d
    two_d = [[1.0, 2.0], [3.0, -4.0]]
    assert session.call([two_d]) == two_d


def test_syntax_error_leaves_session_usable(session):
    with pytest.raises(SandboxError) as err:
        session.load("def broken(:\n    pass\n", "broken")
    assert err.value.kind == "syntax"
    session.load("def ok():\n    return 1\n", "ok")
    assert session.call([]) == 1


def test_missing_function(session):
    with pytest.raises(SandboxError) as err:
        session.load("def other():\n    return 1\n", "wanted")
    assert err.value.kind == "missing_function"


def test_banned_import(session):
    with pytest.raises(SandboxError) as err:
        session.load("import socket\n\ndef f():\n    return 1\n", "f")
    assert err.value.kind == "banned_import"


def test_allowed_numeric_imports(session):
    src = "import numpy as np\nimport math\nimport random\n\ndef f():\n    return math.pi\n"
    session.load(src, "f")
    assert session.call([]) == pytest.approx(math.pi)


def test_runtime_error_kind(session):
    session.load("def f(x):\n    return x / 0\n", "f")
    with pytest.raises(SandboxError) as err:
        session.call([1.0])
    assert err.value.kind == "runtime"


def test_nonfinite_result_kind(session):
    session.load(
        "import numpy as np\n\ndef f(x):\n    return np.array([np.nan, 1.0])\n", "f"
    )
    with pytest.raises(SandboxError) as err:
        session.call([1.0])
    assert err.value.kind == "nonfinite"


def test_call_before_load_is_state_error(session):
    with pytest.raises(SandboxError) as err:
        session.call([1.0])
    assert err.value.kind == "state"


def test_timeout_kills_session():
    s = SandboxSession(timeout_seconds=20.0)
    try:
        s.load("def spin():\n    while True:\n        pass\n", "spin")
        started = time.monotonic()
        with pytest.raises(SandboxError) as err:
            s.call([], timeout=1.0)
        elapsed = time.monotonic() - started
        assert err.value.kind == "timeout"
        assert elapsed <= 2.0  # timeout + grace
        assert s.state == SandboxSession.DEAD
        # dead sessions refuse further work
        with pytest.raises(SandboxError) as err2:
            s.load("def f():\n    return 1\n", "f")
        assert err2.value.kind == "state"
    finally:
        s.shutdown()


def test_shutdown_idempotent(session):
    session.load("def f():\n    return 1\n", "f")
    session.shutdown()
    session.shutdown()  # no-op
    with pytest.raises(SandboxError):
        session.load("def f():\n    return 1\n", "f")


def test_runner_respawns_after_timeout():
    runner = SandboxRunner(timeout_seconds=20.0)
    try:
        runner.load("def spin():\n    while True:\n        pass\n", "spin")
        with pytest.raises(SandboxError):
            runner.call([], timeout=1.0)
        # a fresh session takes over transparently
        runner.load("def f(x):\n    return x + 1\n", "f")
        assert runner.call([1.0]) == 2.0
        assert runner.respawns == 1
    finally:
        runner.close()


def test_crash_isolated_from_engine():
    runner = SandboxRunner(timeout_seconds=20.0)
    try:
        crash = "import ctypes\n\ndef f():\n    return 1\n"
        with pytest.raises(SandboxError) as err:
            runner.load(crash, "f")
        assert err.value.kind == "banned_import"
        # engine-side process is unaffected; next load works
        runner.load("def f():\n    return 7\n", "f")
        assert runner.call([]) == 7
    finally:
        runner.close()


def test_heuristic_prints_do_not_corrupt_protocol(session):
    src = "def f(x):\n    print('chatter', x)\n    return x * 2\n"
    session.load(src, "f")
    assert session.call([4.0]) == 8.0


def test_rng_seeded_at_load(session):
    src = "import random\n\ndef f():\n    return random.random()\n"
    session.load(src, "f", seed=42)
    first = session.call([])
    session.load(src, "f", seed=42)
    assert session.call([]) == first
