"""Online bin packing with Weibull-distributed item streams.

Items arrive one at a time and must be placed immediately. The candidate
heuristic scores the open bins that still fit the item; the item goes to
the argmax bin (ties to the lowest index) and a new bin opens only when
nothing fits. Score per instance is -(lb/n) with lb the Martello-Toth L2
lower bound, so lower is better and every valid score sits in [-1, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import EvaluationResult

PROBLEM_NAME = "bpo"
FUNCTION_BASE = "priority"
FUNCTION_SIGNATURE = (
    "def priority_v2(item: float, bins_remain_cap: np.ndarray) -> np.ndarray:"
)
PROBLEM_DESCRIPTION = (
    "Solving online Bin Packing Problem (BPP). BPP requires packing a set of "
    "items of various sizes into the smallest number of fixed-sized bins. "
    "Online BPP requires packing an item as soon as it is received."
)
FUNCTION_DESCRIPTION = (
    "The priority function takes as input an item and an array of "
    "bins_remain_cap (containing the remaining capacity of each bin) and "
    "returns a priority score for each bin. The bin with the highest priority "
    "score will be selected for the item."
)
SEED_SOURCE = '''import numpy as np

def priority_v1(item: float, bins_remain_cap: np.ndarray) -> np.ndarray:
    """Returns priority with which we want to add item to each bin.

    Args:
        item: Size of item to be added to the bin.
        bins_remain_cap: Array of capacities for each bin.

    Return:
        Array of same size as bins_remain_cap with priority score of each bin.
    """
    ratios = item / bins_remain_cap
    log_ratios = np.log(ratios)
    priorities = -log_ratios
    return priorities
'''


@dataclass
class BpoInstance:
    items: np.ndarray
    capacity: int = 100
    seed: int = 0

    def __post_init__(self):
        self.items = np.asarray(self.items, dtype=int)
        if self.items.size and int(self.items.max()) > self.capacity:
            raise ValueError("every item must fit an empty bin")


def gen_bpo(
    seed: int,
    n_items: int = 5000,
    capacity: int = 100,
    shape: float = 45.0,
    scale: float = 3.0,
) -> BpoInstance:
    """Weibull item stream, scaled then clipped into [1, capacity] integers.
    Deterministic per seed."""
    if n_items < 1:
        raise ValueError("n_items must be at least 1")
    rng = np.random.default_rng(seed)
    raw = rng.weibull(shape, size=n_items) * scale
    items = np.clip(np.rint(raw), 1, capacity).astype(int)
    return BpoInstance(items=items, capacity=capacity, seed=seed)


def mt_lower_bound(items, capacity: int) -> int:
    """Martello-Toth L2 bound on the optimal bin count.

    max over integer thresholds k in [0, C/2] of: one bin per item larger
    than C-k or larger than C/2, plus however many bins the items in
    [k, C/2] still force after filling the leftover space of the mid-size
    bins. Never below ceil(sum/C).
    """
    items = np.asarray(items, dtype=float)
    if items.size == 0:
        return 0
    capacity = float(capacity)
    best = int(math.ceil(items.sum() / capacity))
    for k in range(0, int(capacity // 2) + 1):
        big = items > capacity - k
        mid = (items > capacity / 2) & ~big
        small = (items >= k) & (items <= capacity / 2)
        free = np.count_nonzero(mid) * capacity - items[mid].sum()
        overflow = items[small].sum() - free
        extra = max(0, int(math.ceil(overflow / capacity)))
        best = max(best, int(np.count_nonzero(big) + np.count_nonzero(mid)) + extra)
    return best


def pack_online(items, capacity: int, scorer) -> list[list[int]]:
    """Stream items through ``scorer(item, fitting_caps) -> priorities``.

    Returns the packed bins as item lists. Raises ValueError when the
    scorer gives a wrong-shape or non-finite priority array.
    """
    remaining: list[float] = []
    contents: list[list[int]] = []
    for item in items:
        item = float(item)
        fit = [i for i, cap in enumerate(remaining) if cap >= item]
        if not fit:
            remaining.append(capacity - item)
            contents.append([int(item)])
            continue
        caps = np.array([remaining[i] for i in fit], dtype=float)
        pri = np.asarray(scorer(item, caps), dtype=float)
        if pri.shape != caps.shape:
            raise ValueError(
                f"priority shape {pri.shape} does not match {caps.shape}"
            )
        if not np.all(np.isfinite(pri)):
            raise ValueError("priority array has non-finite entries")
        chosen = fit[int(np.argmax(pri))]
        remaining[chosen] -= item
        contents[chosen].append(int(item))
    return contents


def score_instance(instance: BpoInstance, scorer) -> float:
    """-(lb/n): closer to -1 means packing closer to the lower bound."""
    bins = pack_online(instance.items, instance.capacity, scorer)
    lb = mt_lower_bound(instance.items, instance.capacity)
    return -(lb / len(bins))


def evaluate_with_callable(scorer, instances: list[BpoInstance]) -> EvaluationResult:
    per = [score_instance(inst, scorer) for inst in instances]
    return EvaluationResult(objective=float(np.mean(per)), per_instance=per)
