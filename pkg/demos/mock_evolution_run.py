"""End-to-end evolution against the deterministic scripted mock: no
network, bit-reproducible, a few seconds of wall clock.

Equivalent CLI:
    hevolve run --problem bpo --backend mock --mock-dir <dir> --seed 7 \
        --pop-init 6 --pop-size 3 --max-generations 3 \
        --n-instances 2 --size 40 --output <out>
    hevolve analyze <out>
"""

import tempfile
from pathlib import Path

from hevolve.config import ProblemConfig, RunConfig
from hevolve.engine import EvolutionRun
from hevolve.llm import LlmBackend
from hevolve.mockkit import write_mock_script

workdir = Path(tempfile.mkdtemp(prefix="hevolve-demo-"))
mock_dir = write_mock_script(workdir / "mock")
print(f"scripted replies in {mock_dir}")

cfg = RunConfig(
    problem=ProblemConfig(problem="bpo", n_instances=2, size=40),
    pop_init=6,
    pop_size=3,
    max_generations=3,
    seed=7,
)
run = EvolutionRun(cfg, LlmBackend.mock(mock_dir), workdir / "out")
artifacts = run.run()

print("\ntimestep  best       swdi    cdi     archive")
for record, report in zip(artifacts.records, artifacts.reports):
    print(f"{record.timestep:>8}  {record.best_objective:<9.4f}  "
          f"{record.swdi:<6.3f}  {record.cdi:<6.3f}  {report.archive_size}")

summary = artifacts.summary
print(f"\nstop reason: {summary['stop_reason']}")
print(f"tokens used: {summary['tokens_used']} / {summary['max_tokens']}")
print(f"best objective: {summary['best_objective']} ({summary['best_id']})")
print(f"artifacts in {artifacts.out_dir}:")
for path in sorted(artifacts.out_dir.iterdir()):
    print(f"  {path.name}")
