"""Helpers for authoring scripted-mock reply directories.

Replies are written positionally per role (`generator/0000.txt`, ...).
Every canned generator reply carries a first fenced block (the heuristic)
plus a second block with a parameter_ranges mapping over that function's
defaults, so the same reply satisfies initialization, crossover, mutation
and parameter-extraction requests regardless of where it lands in the
sequence.
"""

from __future__ import annotations

from pathlib import Path

_BPO_BODIES = (
    (
        "def priority_v2(item: float, bins_remain_cap: np.ndarray, "
        "tightness: float = 1.0) -> np.ndarray:\n"
        "    return -(bins_remain_cap - item) * tightness\n",
        {"tightness": (0.5, 2.0)},
    ),
    (
        "def priority_v2(item: float, bins_remain_cap: np.ndarray, "
        "power: float = 2.0) -> np.ndarray:\n"
        "    leftover = bins_remain_cap - item\n"
        "    return -np.power(leftover + 1.0, power)\n",
        {"power": (1.0, 3.0)},
    ),
    (
        "def priority_v2(item: float, bins_remain_cap: np.ndarray, "
        "bias: float = 0.1) -> np.ndarray:\n"
        "    ratio = item / bins_remain_cap\n"
        "    return ratio + bias * bins_remain_cap\n",
        {"bias": (0.0, 0.5)},
    ),
    (
        "def priority_v2(item: float, bins_remain_cap: np.ndarray, "
        "weight: float = 0.9) -> np.ndarray:\n"
        "    snug = 1.0 / (bins_remain_cap - item + 1.0)\n"
        "    return weight * snug\n",
        {"weight": (0.1, 1.5)},
    ),
    (
        "def priority_v2(item: float, bins_remain_cap: np.ndarray, "
        "scale: float = 1.0) -> np.ndarray:\n"
        "    # prefer bins that end closest to full\n"
        "    return scale * (item - bins_remain_cap)\n",
        {"scale": (0.5, 2.0)},
    ),
    (
        "def priority_v2(item: float, bins_remain_cap: np.ndarray, "
        "floor: float = 0.0) -> np.ndarray:\n"
        "    fill = item / np.maximum(bins_remain_cap, item)\n"
        "    return np.maximum(fill, floor)\n",
        {"floor": (0.0, 0.9)},
    ),
)

PROSE_REPLY = (
    "I considered several designs but decided a narrative answer works "
    "better than code here. No fenced block follows."
)

ANALYSIS_REPLY = (
    "**Analysis:**\n\n"
    "Comparing (best) vs (worst), the best design rewards snug fits while "
    "the worst spreads items thin; (1st) vs (2nd), the margin comes from "
    "penalizing leftover capacity. Overall: concentrate load, avoid "
    "fragmenting bins.\n\n"
    "**Experience:**\n\n"
    "Score bins by how little room remains after placement; avoid rewarding "
    "emptiness."
)

GUIDE_REPLY = (
    "- Keywords: snug fit, leftover penalty, load concentration\n"
    "- Advice: rank bins by post-placement remaining capacity, smallest "
    "first.\n"
    "- Avoid: rewarding the emptiest bin; unbounded scores.\n"
    "- Explanation: tight placements close bins early and track the lower "
    "bound."
)


def generator_reply(index: int) -> str:
    body, ranges = _BPO_BODIES[index % len(_BPO_BODIES)]
    entries = ",\n".join(
        f"    '{name}': ({low}, {high})" for name, (low, high) in ranges.items()
    )
    return (
        "```python\n"
        "import numpy as np\n\n"
        f"{body}"
        "```\n\n"
        "```python\n"
        "parameter_ranges = {\n"
        f"{entries}\n"
        "}\n"
        "```\n"
    )


def reflector_reply(index: int) -> str:
    return ANALYSIS_REPLY if index % 2 == 0 else GUIDE_REPLY


def write_mock_script(
    root: str | Path,
    n_generator: int = 30,
    n_reflector: int = 12,
    prose_positions: tuple[int, ...] = (),
) -> Path:
    """Populate a scripted-mock directory; returns its path.

    ``prose_positions`` inject fence-free replies at those generator
    indices to exercise invalid-offspring handling.
    """
    root = Path(root)
    gen_dir = root / "generator"
    ref_dir = root / "reflector"
    gen_dir.mkdir(parents=True, exist_ok=True)
    ref_dir.mkdir(parents=True, exist_ok=True)
    for i in range(n_generator):
        text = PROSE_REPLY if i in prose_positions else generator_reply(i)
        (gen_dir / f"{i:04d}.txt").write_text(text, encoding="utf-8")
    for i in range(n_reflector):
        (ref_dir / f"{i:04d}.txt").write_text(reflector_reply(i), encoding="utf-8")
    return root
