"""The generation loop: initialization, random pair selection, two-phase
reflection, crossover, elitist mutation, harmony-search tuning, truncation
survival, and per-timestep diversity instrumentation.

Every LLM call is budgeted; exhaustion ends the run gracefully with all
completed evaluations kept. Given a seed and a scripted mock backend, a
run is bit-reproducible: the archive log, diversity table, per-generation
records and summary come out byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .archive import (
    Archive,
    Individual,
    Population,
    record_line,
    survive,
    valid_members,
)
from .config import RunConfig
from .diversity import DiversityReport, snapshot_report, write_diversity_csv
from .embedding import EmbeddingProvider
from .errors import (
    BudgetExhaustedError,
    ExtractionError,
    NoEliteError,
    ParameterExtractionError,
    SelectionError,
)
from .harmony import apply_and_reinsert, extract_parameterization, hs_optimize, specialize
from .llm import ChatRequest, LlmBackend, TokenBudget, chat, extract_code_block
from .normalize import normalize_or_degrade
from . import prompts
from .problems import bpo, op, tsp
from .problems.evaluators import make_evaluator

PROBLEM_MODULES = {"bpo": bpo, "tsp_gls": tsp, "op_aco": op}


def dedup_and_rank(pairs, insertion_order: dict[str, int]):
    """Union of pair members, first occurrence kept per normalized source,
    sorted best objective first (ties by insertion)."""
    seen = set()
    unique = []
    for pair in pairs:
        for ind in pair:
            key = normalize_or_degrade(ind.source).text
            if key not in seen:
                seen.add(key)
                unique.append(ind)
    unique.sort(key=lambda e: (e.objective, insertion_order[e.id]))
    return unique


@dataclass
class ReflectionState:
    """Two-phase reflector memory: the current deep analysis, the guide it
    produced, and the accumulated effective/ineffective guides."""

    current_analysis: str = ""
    guide: str = ""
    good_reflections: list[str] = field(default_factory=list)
    bad_reflections: list[str] = field(default_factory=list)


@dataclass
class GenerationRecord:
    timestep: int
    best_objective: float | None
    swdi: float
    cdi: float
    tokens_used: int
    n_invalid: int

    def to_line(self) -> str:
        return json.dumps(
            {
                "timestep": self.timestep,
                "best_objective": self.best_objective,
                "swdi": self.swdi,
                "cdi": self.cdi,
                "tokens_used": self.tokens_used,
                "n_invalid": self.n_invalid,
            }
        )


@dataclass
class RunArtifacts:
    out_dir: Path
    summary: dict
    archive: Archive
    reports: list[DiversityReport]
    records: list[GenerationRecord]


class EvolutionRun:
    """One experiment: owns the archive, population, budget, reflector
    memory and output streams."""

    def __init__(
        self,
        cfg: RunConfig,
        backend: LlmBackend,
        out_dir: str | Path,
        evaluator=None,
    ):
        self.cfg = cfg
        self.backend = backend
        self.out_dir = Path(out_dir)
        self.budget = TokenBudget(cfg.max_tokens)
        self.archive = Archive(run_id=f"{cfg.problem.problem}-s{cfg.seed}")
        self.population = Population(members=[], capacity=cfg.pop_size)
        # independent substreams so one operator's draws never shift
        # another's decisions
        select_ss, mutate_ss, hs_ss = np.random.SeedSequence(cfg.seed).spawn(3)
        self.rng_select = np.random.default_rng(select_ss)
        self.rng_mutate = np.random.default_rng(mutate_ss)
        self.rng_hs = np.random.default_rng(hs_ss)
        self.embedder = EmbeddingProvider(cfg.embedder)
        self.problem = PROBLEM_MODULES[cfg.problem.problem]
        self.evaluator = evaluator
        self.reflection = ReflectionState()
        self.generation = 0
        self.stop_reason = ""
        self.reports: list[DiversityReport] = []
        self.records: list[GenerationRecord] = []
        self._seq = 0
        self._gen_offspring: list[str] = []
        self._archive_fh = None
        self._run_fh = None

    # -- plumbing -------------------------------------------------------------

    def _ensure_evaluator(self):
        if self.evaluator is None:
            from heuristic_sandbox import worker_command

            self.evaluator = make_evaluator(
                self.cfg.problem,
                self.cfg.seed,
                sandbox_command=worker_command(self.cfg.sandbox_memory_mb),
            )
        return self.evaluator

    def _next_id(self) -> str:
        ind_id = f"ind-{self._seq:05d}"
        self._seq += 1
        return ind_id

    def _task(self, persona: str) -> str:
        mod = self.problem
        return prompts.task_description(
            persona,
            mod.FUNCTION_BASE,
            mod.PROBLEM_DESCRIPTION,
            mod.FUNCTION_DESCRIPTION,
        )

    def _chat(self, role_kind: str, system: str, user: str) -> tuple[str, int]:
        request = ChatRequest(
            role_kind=role_kind,
            system_prompt=system,
            user_prompt=user,
            temperature=self.cfg.temperature,
        )
        return chat(request, self.backend, self.budget)

    def _archive_individual(self, ind: Individual) -> str:
        self.archive.add(ind)
        if self._archive_fh is not None:
            self._archive_fh.write(record_line(ind) + "\n")
            self._archive_fh.flush()
        return ind.id

    def _evaluate(self, source: str):
        return self._ensure_evaluator().evaluate(source, seed=self.cfg.seed)

    def _spawn_offspring(self, reply: str, origin: str, tokens: int,
                         role_label: str = "") -> Individual:
        """Extract, evaluate and archive one generated candidate; failures
        archive as invalid and never interrupt the loop."""
        try:
            source = extract_code_block(reply)
            result = self._evaluate(source)
            objective = result.objective
        except ExtractionError:
            source = reply
            objective = None
        ind = Individual(
            id=self._next_id(),
            source=source,
            objective=objective,
            generation=self.generation,
            origin=origin,
            role_label=role_label,
            token_cost=tokens,
        )
        self._archive_individual(ind)
        return ind

    def _current_elite(self) -> Individual:
        candidates = [e for e in self.archive.entries if e.valid]
        if not candidates:
            raise NoEliteError("no finite-objective individual exists yet")
        return min(candidates, key=lambda e: e.objective)

    def _best_objective(self) -> float | None:
        try:
            return self._current_elite().objective
        except NoEliteError:
            return None

    # -- spec operations --------------------------------------------------------

    def initialize_population(self) -> Population:
        """Evaluate the seed design, then ask the generator for pop_init - 1
        more candidates, cycling the persona list round-robin."""
        mod = self.problem
        seed_result = self._evaluate(mod.SEED_SOURCE)
        seed_ind = Individual(
            id=self._next_id(),
            source=mod.SEED_SOURCE,
            objective=seed_result.objective,
            generation=0,
            origin="seed",
        )
        self._archive_individual(seed_ind)
        members = [seed_ind.id]
        roles = self.cfg.roles
        try:
            for i in range(self.cfg.pop_init - 1):
                persona = roles[i % len(roles)]
                user = prompts.init_user(
                    self._task(persona), mod.SEED_SOURCE, mod.FUNCTION_BASE
                )
                reply, tokens = self._chat(
                    "generator", prompts.generator_system(persona), user
                )
                ind = self._spawn_offspring(reply, "init", tokens, role_label=persona)
                members.append(ind.id)
        except BudgetExhaustedError:
            self.stop_reason = "budget exhausted during initialization"
        self.population = Population(members=members, capacity=self.cfg.pop_size)
        return self.population

    def select_parent_pairs(self, k: int) -> list[tuple[Individual, Individual]]:
        """k uniformly random pairs of distinct valid members."""
        valid = valid_members(self.population, self.archive)
        if k > 0 and len(valid) < 2:
            raise SelectionError(
                f"need at least 2 valid members to pair, have {len(valid)}"
            )
        pairs = []
        for _ in range(k):
            i, j = self.rng_select.choice(len(valid), size=2, replace=False)
            pairs.append((valid[int(i)], valid[int(j)]))
        return pairs

    def reflect_analysis(self, pairs) -> str:
        """Phase 1: dedup the selected parents by normalized source, rank
        best to worst, and ask the reflector for a deep analysis."""
        order = {e.id: i for i, e in enumerate(self.archive.entries)}
        unique = dedup_and_rank(pairs, order)
        listing = prompts.ranked_listing([e.source for e in unique])
        analysis, _ = self._chat(
            "reflector", prompts.reflector_system(), prompts.analysis_user(listing)
        )
        self.reflection.current_analysis = analysis
        return analysis

    def reflect_guide(self) -> str:
        """Phase 2: synthesize a guide from the current analysis and the
        accumulated effective/ineffective history."""
        state = self.reflection
        guide, _ = self._chat(
            "reflector",
            prompts.reflector_system(),
            prompts.guide_user(
                state.current_analysis, state.good_reflections, state.bad_reflections
            ),
        )
        state.guide = guide
        return guide

    def crossover(self, pair, guide: str) -> Individual:
        """Blend two parents, better one listed first."""
        order = {e.id: i for i, e in enumerate(self.archive.entries)}
        better, worse = sorted(pair, key=lambda e: (e.objective, order[e.id]))
        mod = self.problem
        persona = self.cfg.roles[0]
        user = prompts.crossover_user(
            self._task(persona),
            prompts.function_signature(better.source, mod.FUNCTION_SIGNATURE),
            better.source,
            prompts.function_signature(worse.source, mod.FUNCTION_SIGNATURE),
            worse.source,
            guide,
            mod.FUNCTION_BASE,
        )
        reply, tokens = self._chat(
            "generator", prompts.generator_system(persona), user
        )
        return self._spawn_offspring(reply, "crossover", tokens)

    def elitist_mutation(self, analysis: str) -> Individual | None:
        """With probability mutation_rate, mutate the current elite guided
        by the phase-1 deep analysis."""
        if self.rng_mutate.uniform() >= self.cfg.mutation_rate:
            return None
        elite = self._current_elite()
        mod = self.problem
        persona = self.cfg.roles[0]
        user = prompts.mutation_user(
            self._task(persona),
            prompts.function_signature(elite.source, mod.FUNCTION_SIGNATURE),
            elite.source,
            analysis,
            mod.FUNCTION_BASE,
        )
        reply, tokens = self._chat(
            "generator", prompts.generator_system(persona), user
        )
        return self._spawn_offspring(reply, "mutation", tokens)

    def harmony_step(self) -> Individual | None:
        """Tune the best untuned candidate; it and its tuning are marked so
        no individual is ever parameter-extracted twice."""
        order = {e.id: i for i, e in enumerate(self.archive.entries)}
        pool_ids = list(dict.fromkeys(self.population.members + self._gen_offspring))
        pool = [
            self.archive.get(i)
            for i in pool_ids
            if self.archive.get(i).valid and not self.archive.get(i).tuned
        ]
        if not pool:
            return None
        candidate = min(pool, key=lambda e: (e.objective, order[e.id]))
        try:
            ph, tokens = extract_parameterization(
                candidate,
                self.backend,
                self.budget,
                validate=lambda src: self._evaluate(src).objective,
            )
        except ParameterExtractionError:
            self.archive.mark_tuned(candidate.id)
            return None
        outcome = hs_optimize(
            ph,
            lambda values: self._evaluate(specialize(ph, values)).objective,
            self.cfg.hs,
            self.rng_hs,
        )
        if outcome is None:
            self.archive.mark_tuned(candidate.id)
            return None
        values, objective = outcome
        tuned = apply_and_reinsert(
            ph,
            values,
            objective,
            self.population,
            self.archive,
            new_id=self._next_id(),
            generation=self.generation,
            token_cost=tokens,
        )
        if self._archive_fh is not None:
            self._archive_fh.write(record_line(tuned) + "\n")
            self._archive_fh.flush()
        self._gen_offspring.append(tuned.id)
        return tuned

    # -- generation loop --------------------------------------------------------

    def _diversity_report(self, timestep: int) -> DiversityReport:
        return snapshot_report(
            self.archive.snapshot_at(timestep),
            self.cfg.alpha,
            timestep,
            self.embedder,
            include_invalid=self.cfg.include_invalid,
        )

    def _survive_and_bookkeep(self, best_before: float | None) -> None:
        """Truncation survival plus effective/ineffective guide filing."""
        self.population = survive(self.population, self.archive, self._gen_offspring)
        self._gen_offspring = []
        if self.reflection.guide:
            best_after = self._best_objective()
            improved = best_after is not None and (
                best_before is None or best_after < best_before
            )
            if improved:
                self.reflection.good_reflections.append(self.reflection.guide)
            else:
                self.reflection.bad_reflections.append(self.reflection.guide)
            self.reflection.guide = ""

    def _emit_timestep(self) -> GenerationRecord:
        t = self.generation
        report = self._diversity_report(t)
        self.reports.append(report)
        record = GenerationRecord(
            timestep=t,
            best_objective=self._best_objective(),
            swdi=report.swdi,
            cdi=report.cdi,
            tokens_used=self.budget.used_tokens,
            n_invalid=sum(
                1 for e in self.archive.entries
                if e.generation == t and not e.valid
            ),
        )
        self.records.append(record)
        if self._run_fh is not None:
            self._run_fh.write(record.to_line() + "\n")
            self._run_fh.flush()
        return record

    def run_generation(self) -> GenerationRecord:
        """One full timestep; raises BudgetExhaustedError mid-flight, with
        the partial progress already archived."""
        self.generation += 1
        self._gen_offspring = []
        self._gen_best_before = self._best_objective()
        pairs = self.select_parent_pairs(self.cfg.pop_size)
        analysis = self.reflect_analysis(pairs)
        guide = self.reflect_guide()
        for pair in pairs:
            ind = self.crossover(pair, guide)
            self._gen_offspring.append(ind.id)
        mutant = self.elitist_mutation(analysis)
        if mutant is not None:
            self._gen_offspring.append(mutant.id)
        self.harmony_step()
        self._survive_and_bookkeep(self._gen_best_before)
        return self._emit_timestep()

    def run(self) -> RunArtifacts:
        """Loop generations until the token budget or the optional
        generation cap is hit; write all artifacts."""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        (self.out_dir / "resolved_config.json").write_text(
            json.dumps(self.cfg.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        self._archive_fh = (self.out_dir / "archive.jsonl").open("w", encoding="utf-8")
        self._archive_fh.write(json.dumps({"run_id": self.archive.run_id}) + "\n")
        self._run_fh = (self.out_dir / "run.jsonl").open("w", encoding="utf-8")
        self._gen_best_before = None
        try:
            self.initialize_population()
            self._emit_timestep()
            while not self.stop_reason:
                if (
                    self.cfg.max_generations is not None
                    and self.generation >= self.cfg.max_generations
                ):
                    self.stop_reason = "generation cap reached"
                    break
                if self.budget.exhausted:
                    self.stop_reason = "token budget exhausted"
                    break
                try:
                    self.run_generation()
                except BudgetExhaustedError:
                    self.stop_reason = "token budget exhausted"
                    self._survive_and_bookkeep(self._gen_best_before)
                    self._emit_timestep()
                except SelectionError:
                    self.stop_reason = "fewer than two valid members to pair"
                    self._survive_and_bookkeep(self._gen_best_before)
                    self._emit_timestep()
        finally:
            self._archive_fh.close()
            self._run_fh.close()
            self._archive_fh = None
            self._run_fh = None
            if self.evaluator is not None and hasattr(self.evaluator, "close"):
                self.evaluator.close()

        write_diversity_csv(self.reports, self.out_dir / "diversity.csv")
        try:
            elite = self._current_elite()
            best_objective, best_id, best_source = (
                elite.objective, elite.id, elite.source,
            )
        except NoEliteError:
            best_objective, best_id, best_source = None, None, ""
        (self.out_dir / "best_heuristic.py").write_text(best_source, encoding="utf-8")
        summary = {
            "run_id": self.archive.run_id,
            "problem": self.cfg.problem.problem,
            "seed": self.cfg.seed,
            "best_objective": best_objective,
            "best_id": best_id,
            "generations_completed": self.generation,
            "tokens_used": self.budget.used_tokens,
            "max_tokens": self.cfg.max_tokens,
            "archive_size": len(self.archive),
            "stop_reason": self.stop_reason,
        }
        (self.out_dir / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        return RunArtifacts(
            out_dir=self.out_dir,
            summary=summary,
            archive=self.archive,
            reports=self.reports,
            records=self.records,
        )
