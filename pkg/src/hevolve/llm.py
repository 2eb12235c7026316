"""Single point of contact with chat-completion backends.

Two backends share one ``chat`` entry point: an HTTP chat-completions
endpoint, and a deterministic scripted mock that replays files from a
directory (`generator/0000.txt`, `reflector/0000.txt`, ... in per-role
request order, with an optional hash-keyed override folder). The token
budget is checked before dispatch with a request-size estimate and
settled after with actual counts; exhaustion ends a run gracefully.
"""

from __future__ import annotations

import ast
import hashlib
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    BudgetExhaustedError,
    ExtractionError,
    MockScriptExhaustedError,
    RangeParseError,
    TransportError,
)

ROLE_KINDS = ("generator", "reflector")


@dataclass
class ChatRequest:
    role_kind: str
    system_prompt: str
    user_prompt: str
    temperature: float = 1.0

    def __post_init__(self):
        if self.role_kind not in ROLE_KINDS:
            raise ValueError(f"unknown role kind {self.role_kind!r}")


@dataclass
class TokenBudget:
    """Monotone token counter capped at ``max_tokens``.

    ``used_tokens`` never decreases and never exceeds the cap: a
    settlement that would overshoot is clamped and flips ``exhausted``,
    after which every further request raises BudgetExhaustedError.
    """

    max_tokens: int
    used_tokens: int = 0
    exhausted: bool = False

    def __post_init__(self):
        if self.max_tokens < 0:
            raise ValueError("max_tokens must be non-negative")

    @property
    def remaining(self) -> int:
        return self.max_tokens - self.used_tokens

    def check(self, estimate: int) -> None:
        if self.exhausted or self.used_tokens + estimate > self.max_tokens:
            raise BudgetExhaustedError(
                f"budget {self.max_tokens} cannot cover {estimate} more tokens "
                f"({self.used_tokens} already used)"
            )

    def settle(self, actual: int) -> None:
        if actual < 0:
            raise ValueError("token counts are non-negative")
        if self.used_tokens + actual >= self.max_tokens:
            self.used_tokens = self.max_tokens
            self.exhausted = True
        else:
            self.used_tokens += actual


def count_tokens(text: str) -> int:
    """Whitespace word count: the proxy used for estimates and for the
    scripted mock's usage reports."""
    return len(text.split())


@dataclass
class LlmBackend:
    """Backend selector: kind is "http_endpoint" or "scripted_mock"."""

    kind: str = "scripted_mock"
    endpoint: str = ""
    model: str = ""
    api_key: str = ""
    script_dir: str = ""
    retries: int = 3

    def __post_init__(self):
        if self.kind not in ("http_endpoint", "scripted_mock"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        self._mock_counters: dict[str, int] = {}

    @classmethod
    def from_env(cls) -> "LlmBackend":
        return cls(
            kind="http_endpoint",
            endpoint=os.environ.get("LLM_ENDPOINT", ""),
            model=os.environ.get("LLM_MODEL", ""),
            api_key=os.environ.get("LLM_API_KEY", ""),
        )

    @classmethod
    def mock(cls, script_dir: str | Path) -> "LlmBackend":
        return cls(kind="scripted_mock", script_dir=str(script_dir))


def chat(req: ChatRequest, backend: LlmBackend, budget: TokenBudget) -> tuple[str, int]:
    """Send one single-shot request; returns (reply text, tokens charged).

    The budget must cover at least the estimated prompt size up front.
    """
    estimate = count_tokens(req.system_prompt) + count_tokens(req.user_prompt)
    budget.check(estimate)
    if backend.kind == "scripted_mock":
        text, tokens = _mock_reply(req, backend, estimate)
    else:
        text, tokens = _http_reply(req, backend, estimate)
    budget.settle(tokens)
    return text, tokens


def _mock_reply(req: ChatRequest, backend: LlmBackend, prompt_tokens: int) -> tuple[str, int]:
    root = Path(backend.script_dir)
    digest = hashlib.sha256(
        (req.system_prompt + "\x00" + req.user_prompt).encode("utf-8")
    ).hexdigest()[:16]
    override = root / req.role_kind / "hash" / f"{digest}.txt"
    if override.exists():
        text = override.read_text(encoding="utf-8")
        return text, prompt_tokens + count_tokens(text)
    index = backend._mock_counters.get(req.role_kind, 0)
    path = root / req.role_kind / f"{index:04d}.txt"
    if not path.exists():
        raise MockScriptExhaustedError(
            f"no scripted reply {path} for {req.role_kind} request #{index}"
        )
    backend._mock_counters[req.role_kind] = index + 1
    text = path.read_text(encoding="utf-8")
    return text, prompt_tokens + count_tokens(text)


def _http_reply(req: ChatRequest, backend: LlmBackend, prompt_tokens: int) -> tuple[str, int]:
    import requests

    endpoint = backend.endpoint or os.environ.get("LLM_ENDPOINT", "")
    model = backend.model or os.environ.get("LLM_MODEL", "")
    api_key = backend.api_key or os.environ.get("LLM_API_KEY", "")
    if not endpoint:
        raise TransportError("no chat endpoint configured (LLM_ENDPOINT)")
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    payload = {
        "model": model,
        "temperature": req.temperature,
        "messages": [
            {"role": "system", "content": req.system_prompt},
            {"role": "user", "content": req.user_prompt},
        ],
    }
    delay = 1.0
    last_error: Exception | None = None
    for _ in range(backend.retries):
        try:
            resp = requests.post(endpoint, json=payload, headers=headers, timeout=120)
            resp.raise_for_status()
            body = resp.json()
            text = body["choices"][0]["message"]["content"]
            usage = body.get("usage", {})
            tokens = int(
                usage.get(
                    "total_tokens", prompt_tokens + count_tokens(text)
                )
            )
            return text, tokens
        except Exception as exc:
            last_error = exc
            time.sleep(delay)
            delay *= 2
    raise TransportError(
        f"chat endpoint failed after {backend.retries} attempts: {last_error}"
    )


# ---------------------------------------------------------------------------
# Reply parsing

_FENCE_RE = re.compile(r"```[ \t]*([A-Za-z0-9_+-]*)[ \t]*\n(.*?)```", re.DOTALL)


def fenced_blocks(text: str) -> list[str]:
    return [m.group(2) for m in _FENCE_RE.finditer(text)]


def extract_code_block(text: str) -> str:
    """Contents of the first fenced code block, blank edges trimmed."""
    blocks = fenced_blocks(text)
    if not blocks:
        raise ExtractionError("reply contains no fenced code block")
    return blocks[0].strip("\n")


def extract_code_and_ranges(text: str) -> tuple[str, dict[str, tuple[float, float]]]:
    """First fenced block as program text, second as a parameter-ranges
    mapping name -> (low, high) with low <= high."""
    blocks = fenced_blocks(text)
    if not blocks:
        raise ExtractionError("reply contains no fenced code block")
    if len(blocks) < 2:
        raise RangeParseError("reply has no second block with parameter ranges")
    program = blocks[0].strip("\n")
    ranges = parse_parameter_ranges(blocks[1])
    return program, ranges


def parse_parameter_ranges(block: str) -> dict[str, tuple[float, float]]:
    """Parse a ``parameter_ranges = {...}`` assignment (or a bare dict
    literal) of name -> (low, high) numeric 2-tuples."""
    try:
        tree = ast.parse(block)
    except SyntaxError as exc:
        raise RangeParseError(f"ranges block does not parse: {exc}") from exc
    mapping_node = None
    for node in tree.body:
        if isinstance(node, ast.Assign) and any(
            isinstance(t, ast.Name) and t.id == "parameter_ranges" for t in node.targets
        ):
            mapping_node = node.value
        elif isinstance(node, ast.Expr) and isinstance(node.value, ast.Dict):
            mapping_node = node.value
    if mapping_node is None or not isinstance(mapping_node, ast.Dict):
        raise RangeParseError("no parameter_ranges dictionary found")
    ranges: dict[str, tuple[float, float]] = {}
    for key_node, value_node in zip(mapping_node.keys, mapping_node.values):
        try:
            key = ast.literal_eval(key_node)
            value = ast.literal_eval(value_node)
        except (ValueError, SyntaxError) as exc:
            raise RangeParseError(f"unreadable range entry: {exc}") from exc
        if not isinstance(key, str):
            raise RangeParseError(f"range key {key!r} is not a name string")
        if (
            not isinstance(value, tuple)
            or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value)
        ):
            raise RangeParseError(
                f"range for {key!r} must be a 2-tuple of numbers, got {value!r}"
            )
        low, high = float(value[0]), float(value[1])
        if low > high:
            raise RangeParseError(f"range for {key!r} has low {low} > high {high}")
        ranges[key] = (low, high)
    if not ranges:
        raise RangeParseError("parameter_ranges dictionary is empty")
    return ranges
