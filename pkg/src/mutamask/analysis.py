"""Kill analysis: execute test suites against viable mutants, build the
tests × mutants kill matrix, score it, and check real-fault detection for
paired fixed/faulty program versions."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .lang.ast import Program
from .lang.interp import DEFAULT_BUDGET, ExecOutcome, Verdict, run_test
from .lang.testsuite import TestCase


@dataclass
class KillMatrix:
    tests: list[str]  # names of tests included (pass on the original)
    mutant_ids: list[int]
    kills: list[list[bool]]  # [test][mutant]
    verdicts: list[list[str]]  # verdict of each cell run
    baseline: dict[str, str]  # verdict per pool test on the original
    excluded: list[str] = field(default_factory=list)  # pool tests failing baseline

    def killed_ids(self) -> set[int]:
        return {
            mid
            for j, mid in enumerate(self.mutant_ids)
            if any(row[j] for row in self.kills)
        }

    def kills_of_test(self, name: str) -> set[int]:
        i = self.tests.index(name)
        return {mid for j, mid in enumerate(self.mutant_ids) if self.kills[i][j]}

    def killers_of_mutant(self, mutant_id: int) -> list[str]:
        j = self.mutant_ids.index(mutant_id)
        return [self.tests[i] for i in range(len(self.tests)) if self.kills[i][j]]


def build_kill_matrix(
    program: Program,
    mutants: Sequence[tuple[int, Program]],
    tests: Sequence[TestCase],
    budget: int = DEFAULT_BUDGET,
) -> KillMatrix:
    """Test t kills mutant m iff t passes on the original and does not pass
    on m. Pool tests failing on the original are excluded (reported, not
    fatal)."""
    baseline: dict[str, str] = {}
    included: list[TestCase] = []
    excluded: list[str] = []
    for test in tests:
        outcome = run_test(program, test, budget)
        baseline[test.name] = outcome.verdict.value
        if outcome.passed:
            included.append(test)
        else:
            excluded.append(test.name)

    mutant_ids = [mid for mid, _ in mutants]
    kills: list[list[bool]] = []
    verdicts: list[list[str]] = []
    for test in included:
        row_kills: list[bool] = []
        row_verdicts: list[str] = []
        for _, mutated in mutants:
            outcome = run_test(mutated, test, budget)
            row_kills.append(not outcome.passed)
            row_verdicts.append(outcome.verdict.value)
        kills.append(row_kills)
        verdicts.append(row_verdicts)

    return KillMatrix(
        tests=[t.name for t in included],
        mutant_ids=mutant_ids,
        kills=kills,
        verdicts=verdicts,
        baseline=baseline,
        excluded=excluded,
    )


def mutation_score(matrix: KillMatrix) -> float:
    """Killed fraction of the mutant set; vacuously 1.0 with no mutants."""
    if not matrix.mutant_ids:
        return 1.0
    return len(matrix.killed_ids()) / len(matrix.mutant_ids)


def minimal_killing_suite(matrix: KillMatrix) -> list[str]:
    """Greedy set cover over the matrix: repeatedly pick the test killing
    the most not-yet-covered mutants (ties: matrix test order) until every
    killable mutant is covered."""
    remaining = set(matrix.killed_ids())
    kill_sets = {name: matrix.kills_of_test(name) for name in matrix.tests}
    suite: list[str] = []
    while remaining:
        best = max(matrix.tests, key=lambda name: (len(kill_sets[name] & remaining), -matrix.tests.index(name)))
        gained = kill_sets[best] & remaining
        if not gained:
            break
        suite.append(best)
        remaining -= gained
    return suite


# ---------------------------------------------------------------------------
# fault pairs
# ---------------------------------------------------------------------------

@dataclass
class FaultPair:
    fixed: Program
    faulty: Program
    pool: list[TestCase]

    def validate(self, budget: int = DEFAULT_BUDGET) -> None:
        if not fault_triggering_tests(self, budget):
            raise ValueError("fault pair has no fault-triggering test in the pool")


def fault_triggering_tests(pair: FaultPair, budget: int = DEFAULT_BUDGET) -> set[str]:
    """Pool tests that pass on the fixed version and not on the faulty one."""
    triggers = set()
    for test in pair.pool:
        if run_test(pair.fixed, test, budget).passed and not run_test(pair.faulty, test, budget).passed:
            triggers.add(test.name)
    return triggers


def detects_fault(suite: Sequence[str], pair: FaultPair, budget: int = DEFAULT_BUDGET) -> bool:
    """True iff some suite test passes on fixed and not on faulty."""
    chosen = set(suite)
    for test in pair.pool:
        if test.name not in chosen:
            continue
        if run_test(pair.fixed, test, budget).passed and not run_test(pair.faulty, test, budget).passed:
            return True
    return False


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def matrix_to_csv(matrix: KillMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["test"] + [str(mid) for mid in matrix.mutant_ids])
    for i, name in enumerate(matrix.tests):
        writer.writerow([name] + ["1" if k else "0" for k in matrix.kills[i]])
    return buf.getvalue()


def matrix_to_dict(matrix: KillMatrix) -> dict:
    return {
        "tests": matrix.tests,
        "mutants": matrix.mutant_ids,
        "kills": [[int(v) for v in row] for row in matrix.kills],
        "verdicts": matrix.verdicts,
        "baseline": dict(sorted(matrix.baseline.items())),
        "excluded": matrix.excluded,
    }


def matrix_from_dict(data: dict) -> KillMatrix:
    return KillMatrix(
        tests=[str(t) for t in data["tests"]],
        mutant_ids=[int(m) for m in data["mutants"]],
        kills=[[bool(v) for v in row] for row in data["kills"]],
        verdicts=[[str(v) for v in row] for row in data.get("verdicts", [])],
        baseline={str(k): str(v) for k, v in data.get("baseline", {}).items()},
        excluded=[str(t) for t in data.get("excluded", [])],
    )


def save_matrix(matrix: KillMatrix, csv_path: str | Path, json_path: str | Path) -> None:
    Path(csv_path).write_text(matrix_to_csv(matrix), encoding="utf-8")
    Path(json_path).write_text(
        json.dumps(matrix_to_dict(matrix), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_matrix(json_path: str | Path) -> KillMatrix:
    return matrix_from_dict(json.loads(Path(json_path).read_text(encoding="utf-8")))
