"""Developer-effort simulation: repeated randomized mutant-analysis
sessions over a kill matrix, producing effort/effectiveness curves.

A session repeatedly picks a random live mutant; if some pool test kills
it, one killing test is selected (uniformly, or greedily under the
max-additional-kills policy) and every mutant that test kills drops out;
otherwise the mutant is judged equivalent and dropped. Effort counts both
actions, exactly the tests-selected-plus-equivalence-judgments metric.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .analysis import FaultPair, KillMatrix, detects_fault, fault_triggering_tests
from .lang.interp import DEFAULT_BUDGET

POLICIES = ("uniform", "max-additional-kills")


@dataclass(frozen=True)
class SimulationConfig:
    seed: int
    repetitions: int = 100
    effort_cap: Optional[int] = None
    policy: str = "uniform"

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown killing-test policy {self.policy!r}")


@dataclass(frozen=True)
class SessionEvent:
    mutant_id: int
    action: str  # "test-selected" | "judged-equivalent"
    test: Optional[str] = None


@dataclass
class SessionTrace:
    events: list[SessionEvent]
    suite: list[str]  # tests in selection order
    effort: int
    fault_detected: bool
    first_detect_effort: Optional[int]  # 1-based event index, None if never

    def to_dict(self) -> dict:
        return {
            "events": [
                {"mutant": e.mutant_id, "action": e.action, "test": e.test} for e in self.events
            ],
            "suite": self.suite,
            "effort": self.effort,
            "fault_detected": self.fault_detected,
            "first_detect_effort": self.first_detect_effort,
        }


def session_rng(seed: int, index: int) -> random.Random:
    """Independent per-session stream: stable across runs and platforms."""
    return random.Random(f"{seed}:{index}")


def run_session(
    matrix: KillMatrix,
    pair: FaultPair,
    rng: random.Random,
    budget: int = DEFAULT_BUDGET,
    policy: str = "uniform",
    effort_cap: Optional[int] = None,
    triggers: Optional[set[str]] = None,
) -> SessionTrace:
    if triggers is None:
        triggers = fault_triggering_tests(pair, budget)
    killers = {mid: matrix.killers_of_mutant(mid) for mid in matrix.mutant_ids}
    kill_sets = {name: matrix.kills_of_test(name) for name in matrix.tests}

    live = list(matrix.mutant_ids)
    events: list[SessionEvent] = []
    suite: list[str] = []
    first_detect: Optional[int] = None

    while live and (effort_cap is None or len(events) < effort_cap):
        mutant = live[rng.randrange(len(live))]
        killing = killers[mutant]
        if killing:
            if policy == "uniform":
                test = killing[rng.randrange(len(killing))]
            else:  # max-additional-kills
                live_set = set(live)
                test = max(killing, key=lambda t: (len(kill_sets[t] & live_set), -matrix.tests.index(t)))
            suite.append(test)
            events.append(SessionEvent(mutant, "test-selected", test))
            dead = kill_sets[test]
            live = [m for m in live if m not in dead]
            if first_detect is None and test in triggers:
                first_detect = len(events)
        else:
            events.append(SessionEvent(mutant, "judged-equivalent"))
            live.remove(mutant)

    return SessionTrace(
        events=events,
        suite=suite,
        effort=len(events),
        fault_detected=first_detect is not None,
        first_detect_effort=first_detect,
    )


@dataclass
class SimulationResult:
    config: SimulationConfig
    traces: list[SessionTrace]
    curve: list[tuple[int, float]]  # (effort budget, detection fraction)
    max_effort: int

    @property
    def detection_rate(self) -> float:
        return sum(t.fault_detected for t in self.traces) / len(self.traces)

    @property
    def mean_effort(self) -> float:
        return sum(t.effort for t in self.traces) / len(self.traces)

    def normalized_curve(self) -> list[tuple[float, float]]:
        """Effort as a fraction of the maximum observed effort (the paper's
        cross-tool normalization is out of scope; this is the 1-tool analog)."""
        if self.max_effort == 0:
            return []
        return [(x / self.max_effort, y) for x, y in self.curve]

    def summary(self) -> dict:
        return {
            "seed": self.config.seed,
            "repetitions": self.config.repetitions,
            "policy": self.config.policy,
            "effort_cap": self.config.effort_cap,
            "max_effort": self.max_effort,
            "mean_effort": self.mean_effort,
            "detection_rate": self.detection_rate,
            "curve": [[x, y] for x, y in self.curve],
            "normalized_curve": [[x, y] for x, y in self.normalized_curve()],
        }


def run_simulation(
    matrix: KillMatrix,
    pair: FaultPair,
    config: SimulationConfig,
    budget: int = DEFAULT_BUDGET,
) -> SimulationResult:
    triggers = fault_triggering_tests(pair, budget)
    traces = [
        run_session(
            matrix,
            pair,
            session_rng(config.seed, i),
            budget=budget,
            policy=config.policy,
            effort_cap=config.effort_cap,
            triggers=triggers,
        )
        for i in range(config.repetitions)
    ]
    max_effort = max((t.effort for t in traces), default=0)
    curve = []
    for x in range(1, max_effort + 1):
        hits = sum(1 for t in traces if t.first_detect_effort is not None and t.first_detect_effort <= x)
        curve.append((x, hits / len(traces)))
    return SimulationResult(config=config, traces=traces, curve=curve, max_effort=max_effort)


def curve_to_csv(result: SimulationResult) -> str:
    lines = ["effort,effectiveness"]
    for x, y in result.curve:
        lines.append(f"{x},{y}")
    return "\n".join(lines) + "\n"


def traces_to_jsonl(result: SimulationResult) -> str:
    return "".join(
        json.dumps(t.to_dict(), sort_keys=True, separators=(",", ":")) + "\n" for t in result.traces
    )


def save_simulation(result: SimulationResult, out_dir: str | Path) -> None:
    out = Path(out_dir)
    (out / "curve.csv").write_text(curve_to_csv(result), encoding="utf-8")
    (out / "sessions.jsonl").write_text(traces_to_jsonl(result), encoding="utf-8")
    (out / "simulation.json").write_text(
        json.dumps(result.summary(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
