"""Population and cumulative archive of generated heuristics.

The archive is append-only and accumulates every individual ever produced
in a run; the population is a separate size-capped working set holding ids
that resolve into the archive. Diversity metrics are computed over archive
snapshots, never over the population alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateIdError, MalformedRecordError, NoEliteError

ORIGINS = ("seed", "init", "crossover", "mutation", "harmony_tuned")


@dataclass
class Individual:
    """One candidate heuristic.

    ``objective`` is a finite float (lower is better) or ``None`` for
    invalid candidates (failed extraction, sandbox error, timeout).
    ``None`` individuals stay in the archive but are never selected as
    parents or elites.
    """

    id: str
    source: str
    objective: float | None
    generation: int
    origin: str
    role_label: str = ""
    tuned: bool = False
    token_cost: int = 0

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"unknown origin {self.origin!r}")
        if self.generation < 0:
            raise ValueError("generation must be non-negative")
        if self.token_cost < 0:
            raise ValueError("token_cost must be non-negative")
        if self.objective is not None:
            obj = float(self.objective)
            if not math.isfinite(obj):
                raise ValueError("objective must be finite or None")
            self.objective = obj

    @property
    def valid(self) -> bool:
        return self.objective is not None


@dataclass
class Archive:
    """Append-only, insertion-ordered record of all individuals."""

    run_id: str = "run"
    entries: list[Individual] = field(default_factory=list)

    def __post_init__(self):
        self._by_id = {ind.id: ind for ind in self.entries}
        if len(self._by_id) != len(self.entries):
            raise DuplicateIdError("archive initialized with duplicate ids")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, ind_id: str) -> bool:
        return ind_id in self._by_id

    def get(self, ind_id: str) -> Individual:
        return self._by_id[ind_id]

    def add(self, ind: Individual) -> str:
        """Append ``ind`` and return its id. Rejects duplicate ids."""
        if ind.id in self._by_id:
            raise DuplicateIdError(f"id {ind.id!r} already archived")
        if self.entries and ind.generation < self.entries[-1].generation:
            raise ValueError(
                "generation must be non-decreasing along the archive"
            )
        self.entries.append(ind)
        self._by_id[ind.id] = ind
        return ind.id

    def mark_tuned(self, ind_id: str) -> None:
        """Set the tuned flag; the flag never reverts."""
        self._by_id[ind_id].tuned = True

    def snapshot_at(self, t: int) -> list[Individual]:
        """All entries with generation <= t, in insertion order."""
        return [ind for ind in self.entries if ind.generation <= t]

    def timesteps(self) -> list[int]:
        return sorted({ind.generation for ind in self.entries})


@dataclass
class Population:
    """Size-capped working set of archive ids."""

    members: list[str] = field(default_factory=list)
    capacity: int = 10

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be positive")


def valid_members(population: Population, archive: Archive) -> list[Individual]:
    """Members with finite objectives, in population order."""
    return [
        archive.get(mid) for mid in population.members if archive.get(mid).valid
    ]


def best(population: Population, archive: Archive) -> Individual:
    """Member with the minimal objective; ties go to the earlier insertion.

    Raises NoEliteError when every member is invalid.
    """
    order = {ind.id: i for i, ind in enumerate(archive.entries)}
    candidates = valid_members(population, archive)
    if not candidates:
        raise NoEliteError("population has no member with a finite objective")
    return min(candidates, key=lambda ind: (ind.objective, order[ind.id]))


def survive(
    population: Population, archive: Archive, offspring_ids: list[str]
) -> Population:
    """Truncation survival: keep the ``capacity`` best finite-objective
    individuals among current members plus offspring, ties by insertion
    order. Invalid individuals never survive."""
    order = {ind.id: i for i, ind in enumerate(archive.entries)}
    pool_ids = list(dict.fromkeys(population.members + offspring_ids))
    pool = [archive.get(i) for i in pool_ids if archive.get(i).valid]
    pool.sort(key=lambda ind: (ind.objective, order[ind.id]))
    keep = [ind.id for ind in pool[: population.capacity]]
    return Population(members=keep, capacity=population.capacity)


# ---------------------------------------------------------------------------
# Persistence: one self-describing JSON record per line. Field order is
# fixed so reruns produce byte-identical logs.

_RECORD_FIELDS = (
    "id",
    "generation",
    "origin",
    "role_label",
    "objective",
    "tuned",
    "token_cost",
    "source",
)


def record_line(ind: Individual) -> str:
    rec = {
        "id": ind.id,
        "generation": ind.generation,
        "origin": ind.origin,
        "role_label": ind.role_label,
        "objective": "invalid" if ind.objective is None else ind.objective,
        "tuned": ind.tuned,
        "token_cost": ind.token_cost,
        "source": ind.source,
    }
    return json.dumps(rec, ensure_ascii=False)


def parse_record(line: str, line_no: int | None = None) -> Individual:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecordError(f"bad JSON: {exc}", line_no) from exc
    if not isinstance(rec, dict) or set(rec) != set(_RECORD_FIELDS):
        raise MalformedRecordError(
            f"record fields {sorted(rec) if isinstance(rec, dict) else rec!r} "
            f"do not match schema",
            line_no,
        )
    objective = rec["objective"]
    if objective == "invalid":
        objective = None
    elif not isinstance(objective, (int, float)):
        raise MalformedRecordError("objective must be a number or 'invalid'", line_no)
    try:
        return Individual(
            id=rec["id"],
            source=rec["source"],
            objective=objective,
            generation=int(rec["generation"]),
            origin=rec["origin"],
            role_label=rec["role_label"],
            tuned=bool(rec["tuned"]),
            token_cost=int(rec["token_cost"]),
        )
    except (ValueError, TypeError) as exc:
        raise MalformedRecordError(str(exc), line_no) from exc


def persist_run(archive: Archive, path: str | Path) -> None:
    """Write the archive as line-delimited records (run_id in a header line)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"run_id": archive.run_id}) + "\n")
        for ind in archive.entries:
            fh.write(record_line(ind) + "\n")


def load_run(path: str | Path) -> Archive:
    """Inverse of persist_run: field-for-field round trip."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise MalformedRecordError("empty archive file", 1)
    try:
        header = json.loads(lines[0])
        run_id = header["run_id"]
    except (json.JSONDecodeError, TypeError, KeyError) as exc:
        raise MalformedRecordError(f"bad header: {exc}", 1) from exc
    archive = Archive(run_id=run_id)
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            raise MalformedRecordError("blank record line", i)
        archive.add(parse_record(line, line_no=i))
    return archive
