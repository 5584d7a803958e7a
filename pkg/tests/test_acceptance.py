"""Acceptance suite: one test per acceptance criterion, at the stated
tolerances. Run with `pytest tests/test_acceptance.py -v` to get a
pass/fail line per criterion."""

from __future__ import annotations

import json
import time
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
import hypothesis.strategies as st

from mutamask.analysis import FaultPair, KillMatrix, build_kill_matrix, minimal_killing_suite
from mutamask.assertions import filter_assertions, parse_assertion_file
from mutamask.lang import check_program, parse_source, type_check
from mutamask.lang.tokens import TokenKind
from mutamask.masking import MAX_SEQUENCE_TOKENS, OperatorFamily, enumerate_sites, render_masked
from mutamask.mutagen import MutantRecord, MutantStatus, generate, load, normalize, persist
from mutamask.predict import (
    FixturePredictor,
    NgramPredictor,
    Predictor,
    PredictorError,
    train_ngram,
)
from mutamask.simulate import (
    SimulationConfig,
    curve_to_csv,
    run_session,
    run_simulation,
    session_rng,
    traces_to_jsonl,
)

from .generators import minij_programs
from .helpers import FIXTURES, load_program, load_tests
from .oracles import distribution_from_matrix, expected_effort

BUDGET = 100_000

PROPERTY_SETTINGS = settings(
    max_examples=1000,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)


# ---------------------------------------------------------------------------
# Criterion 1: worked-example golden suite (paper prediction lists, exact)
# ---------------------------------------------------------------------------

def _viable_of(fixture: str, program_file: str, family: OperatorFamily):
    program = load_program(FIXTURES / fixture / program_file)
    predictor = FixturePredictor.load(FIXTURES / fixture / "predictions.json")
    mutants, _ = generate(program, predictor)
    return [m for m in mutants if m.viable and m.site.family is family], mutants


@pytest.fixture(scope="module")
def golden_results():
    started = time.perf_counter()
    results = {
        "fig2": _viable_of("leapyear", "leapyear.minij", OperatorFamily.BINARY_OP),
        "fig3": _viable_of("printarray", "printarray.minij", OperatorFamily.UNARY_OP),
        "iiic": _viable_of("leapyear", "leapyear.minij", OperatorFamily.LITERAL),
        "fig4": _viable_of("composite", "composite.minij", OperatorFamily.METHOD_NAME),
        "fig5": _viable_of("search", "search.minij", OperatorFamily.ARRAY_INDEX),
    }
    elapsed = time.perf_counter() - started
    return results, elapsed


def test_criterion1_fig2_binary_op_site(golden_results):
    results, _ = golden_results
    viable, _ = results["fig2"]
    assert [m.replacement for m in viable] == ["/", "-"]


def test_criterion1_fig3_unary_site(golden_results):
    results, _ = golden_results
    viable, _ = results["fig3"]
    assert [m.replacement for m in viable] == ["++"]


def test_criterion1_iiic_literal_site(golden_results):
    results, _ = golden_results
    viable, _ = results["iiic"]
    assert [m.replacement for m in viable] == ["100", "400", "10", "2"]


def test_criterion1_fig4_method_call_site(golden_results):
    results, _ = golden_results
    viable, _ = results["fig4"]
    assert sorted(m.replacement for m in viable) == ["push", "remove"]


def test_criterion1_fig5_array_index_site(golden_results):
    results, _ = golden_results
    viable, _ = results["fig5"]
    assert [m.replacement for m in viable] == ["0", "n", "mid", "1", "low"]
    assert len(viable) == 5


def test_criterion1_runtime_under_five_seconds(golden_results):
    _, elapsed = golden_results
    assert elapsed < 5.0, f"golden suite took {elapsed:.2f}s"


# ---------------------------------------------------------------------------
# Criterion 2: pipeline invariants, >= 1000 generated cases each
# ---------------------------------------------------------------------------

class _FirstSitesPredictor(Predictor):
    """Answers the first few distinct sequences deterministically and skips
    the rest, keeping each generated case affordable while the invariant
    still sees every candidate of the answered sites."""

    def __init__(self, inner: Predictor, limit: int):
        self.inner = inner
        self.limit = limit
        self.seen: dict[str, bool] = {}

    def predict(self, sequence):
        key = sequence.text
        if key not in self.seen:
            self.seen[key] = len(self.seen) < self.limit
        if not self.seen[key]:
            raise PredictorError("site sampled out by test predictor")
        return self.inner.predict(sequence)


@pytest.fixture(scope="module")
def ngram_predictor():
    corpus = [p.read_text(encoding="utf-8") for p in sorted(FIXTURES.rglob("*.minij"))]
    return NgramPredictor(train_ngram(corpus, 2))


@PROPERTY_SETTINGS
@given(source=minij_programs())
def test_criterion2_every_viable_mutant_type_checks(source, ngram_predictor):
    program = type_check(parse_source(source))
    predictor = _FirstSitesPredictor(ngram_predictor, limit=6)
    mutants, report = generate(program, predictor)
    assert sum(report.by_status.values()) == 5 * report.sites_predicted
    for mutant in mutants:
        if mutant.status is MutantStatus.VIABLE:
            reparsed = parse_source(mutant.mutated_source)
            assert check_program(reparsed) == []
            assert normalize(mutant.replacement) != normalize(mutant.site.original)
        else:
            assert mutant.mutated_program is None


@PROPERTY_SETTINGS
@given(source=minij_programs())
def test_criterion2_masked_sequences_single_mask_within_512(source):
    program = type_check(parse_source(source))
    sites = enumerate_sites(program)
    assert sites == enumerate_sites(program)
    for site in sites:
        seq = render_masked(program, site)
        assert sum(1 for t in seq.tokens if t.kind is TokenKind.MASK) == 1
        assert len(seq.tokens) <= MAX_SEQUENCE_TOKENS
        assert seq.text.count("<mask>") == 1


_RECORDS = st.lists(
    st.builds(
        MutantRecord,
        id=st.integers(min_value=0, max_value=10**6),
        family=st.sampled_from([f.value for f in OperatorFamily]),
        span=st.tuples(st.integers(0, 10**4), st.integers(0, 10**4), st.integers(1, 999), st.integers(1, 400)),
        original=st.text(max_size=16),
        replacement=st.text(max_size=16),
        status=st.sampled_from([s.value for s in MutantStatus]),
        rank=st.integers(1, 5),
        score=st.floats(0, 1, allow_nan=False),
        class_name=st.text(min_size=1, max_size=10),
        method_name=st.text(min_size=1, max_size=10),
    ),
    max_size=20,
)


@PROPERTY_SETTINGS
@given(records=_RECORDS)
def test_criterion2_store_roundtrip_byte_identical(records, tmp_path_factory):
    path = tmp_path_factory.mktemp("stores") / "m.jsonl"
    persist(records, path)
    first_bytes = path.read_bytes()
    loaded = load(path)
    assert loaded == records
    persist(loaded, path)
    assert path.read_bytes() == first_bytes


_SIM_MATRIX = KillMatrix(
    tests=["t1", "t2", "t3"],
    mutant_ids=[0, 1, 2, 3],
    kills=[[True, True, False, False], [False, True, True, False], [True, False, False, False]],
    verdicts=[["fail"] * 4] * 3,
    baseline={"t1": "pass", "t2": "pass", "t3": "pass"},
)


def _tiny_pair():
    fixed = type_check(parse_source("class A { int f(){ return 1; } }"))
    faulty = type_check(parse_source("class A { int f(){ return 2; } }"))
    from mutamask.lang import parse_tests, type_check_tests

    pool = type_check_tests(fixed, parse_tests("test t2 { A a = new A(); assert a.f() == 1; }"))
    return FaultPair(fixed, faulty, pool)


@PROPERTY_SETTINGS
@given(seed=st.integers(min_value=0, max_value=2**63 - 1))
def test_criterion2_identical_seeds_identical_reports(seed):
    pair = _tiny_pair()
    config = SimulationConfig(seed=seed, repetitions=5)
    first = run_simulation(_SIM_MATRIX, pair, config, BUDGET)
    second = run_simulation(_SIM_MATRIX, pair, config, BUDGET)
    assert traces_to_jsonl(first) == traces_to_jsonl(second)
    assert curve_to_csv(first) == curve_to_csv(second)
    assert json.dumps(first.summary(), sort_keys=True) == json.dumps(second.summary(), sort_keys=True)


# ---------------------------------------------------------------------------
# Criteria 3 and 4: simulation oracle equivalence and the effort identity
# ---------------------------------------------------------------------------

SESSIONS = 10_000


def _leapyear_matrix():
    base = FIXTURES / "faultpairs" / "01_operator_swap"
    fixed = load_program(base / "fixed.minij")
    faulty = load_program(base / "faulty.minij")
    pool = load_tests(base / "pool.mjtest", fixed)
    mutants, _ = generate(fixed, FixturePredictor.load(base / "predictions.json"))
    matrix = build_kill_matrix(
        fixed, [(m.id, m.mutated_program) for m in mutants if m.viable], pool, BUDGET
    )
    return matrix, FaultPair(fixed, faulty, pool)


def _synthetic(tests, ids, rows):
    return KillMatrix(
        tests=list(tests),
        mutant_ids=list(ids),
        kills=[[bool(v) for v in r] for r in rows],
        verdicts=[["fail" if v else "pass" for v in r] for r in rows],
        baseline={t: "pass" for t in tests},
    )


def _run_sessions(matrix, pair, n=SESSIONS, seed=20_240_601):
    triggers = set()
    return [
        run_session(matrix, pair, session_rng(seed, i), budget=BUDGET, triggers=triggers)
        for i in range(n)
    ]


@pytest.fixture(scope="module")
def oracle_cases():
    pair = _tiny_pair()
    two_by_two = _synthetic(["t1", "t2"], [0, 1], [[1, 0], [0, 1]])
    overlap = _synthetic(["t1", "t2"], [0, 1, 2], [[1, 1, 0], [0, 1, 0]])
    leap_matrix, leap_pair = _leapyear_matrix()
    cases = [
        ("two_by_two", two_by_two, pair),
        ("overlap_with_equivalent", overlap, pair),
        ("leapyear_fixture", leap_matrix, leap_pair),
    ]
    return [(name, matrix, _run_sessions(matrix, p)) for name, matrix, p in cases]


def test_criterion3_two_by_two_effort_exactly_two(oracle_cases):
    name, matrix, traces = oracle_cases[0]
    dist = distribution_from_matrix(matrix)
    assert dist == {2: Fraction(1)}  # oracle: point mass at 2
    assert all(t.effort == 2 for t in traces)  # exact, all 10,000 sessions


def test_criterion3_mean_effort_within_one_percent(oracle_cases):
    for name, matrix, traces in oracle_cases:
        dist = distribution_from_matrix(matrix)
        oracle_mean = float(expected_effort(dist))
        sample_mean = sum(t.effort for t in traces) / len(traces)
        assert abs(sample_mean - oracle_mean) / oracle_mean < 0.01, (
            name,
            sample_mean,
            oracle_mean,
        )
        support = set(dist)
        assert {t.effort for t in traces} <= support, name


def test_criterion3_point_mass_distributions_exact(oracle_cases):
    for name, matrix, traces in oracle_cases:
        dist = distribution_from_matrix(matrix)
        if len(dist) == 1:
            (effort,) = dist
            assert all(t.effort == effort for t in traces), name


def test_criterion4_effort_metric_identity(oracle_cases):
    checked = 0
    for _, _, traces in oracle_cases:
        for trace in traces:
            selected = sum(1 for e in trace.events if e.action == "test-selected")
            judged = sum(1 for e in trace.events if e.action == "judged-equivalent")
            assert trace.effort == selected + judged == len(trace.events)
            assert selected == len(trace.suite)
            checked += 1
    assert checked >= 3 * SESSIONS  # zero violations across every session


# ---------------------------------------------------------------------------
# Criterion 5: assertion-filter reproduction at desk scale
# ---------------------------------------------------------------------------

def test_criterion5_assertion_filter_reproduction():
    program = load_program(FIXTURES / "specfuzzer" / "subjects.minij")
    tests = load_tests(FIXTURES / "specfuzzer" / "subjects.mjtest", program)
    mutants, _ = generate(program, FixturePredictor.load(FIXTURES / "specfuzzer" / "predictions.json"))
    viable = [(m.id, m.mutated_program) for m in mutants if m.viable]
    replacements = {m.id: m.replacement for m in mutants if m.viable}
    assert sorted(replacements.values()) == ["2", "255", "360", "children", "update"]

    specs = parse_assertion_file(FIXTURES / "specfuzzer" / "subjects.mjassert")
    verdicts = {
        (v.assertion.subject, v.assertion.text): v
        for v in filter_assertions(specs, program, viable, tests, BUDGET)
    }

    turn = verdicts[("Angle.getTurn", "abs(res) <= 1")]
    assert turn.kept
    assert sorted(replacements[i] for i in turn.mutants_killed) == ["2", "255", "360"]

    value_stable = verdicts[("Composite.addChild", "c.value == old(c.value)")]
    assert value_stable.kept
    assert [replacements[i] for i in value_stable.mutants_killed] == ["update"]

    children_stable = verdicts[("Composite.addAncestor", "children == old(children)")]
    assert children_stable.kept
    assert [replacements[i] for i in children_stable.mutants_killed] == ["children"]

    tautology = verdicts[("Angle.getTurn", "res == res")]
    assert not tautology.kept
    assert tautology.mutants_killed == []


# ---------------------------------------------------------------------------
# Criterion 6: fault-detection harness over the seeded pairs
# ---------------------------------------------------------------------------

PAIR_DIRS = [
    "01_operator_swap",
    "02_method_swap",
    "03_constant_return",
    "04_empty_string_init",
    "05_recursion_intro",
]

# 03_constant_return is the documented miss: its predictions only cover
# methods unrelated to the seeded getDelimiter fault, so a suite killing
# every viable mutant never exercises the faulty return.
EXPECTED_MISSES = {"03_constant_return"}


def test_criterion6_fault_detection_harness():
    from mutamask.analysis import detects_fault

    assert len(PAIR_DIRS) >= 5
    outcomes = {}
    for name in PAIR_DIRS:
        base = FIXTURES / "faultpairs" / name
        fixed = load_program(base / "fixed.minij")
        faulty = load_program(base / "faulty.minij")
        pool = load_tests(base / "pool.mjtest", fixed)
        pair = FaultPair(fixed, faulty, pool)
        pair.validate(BUDGET)

        mutants, report = generate(fixed, FixturePredictor.load(base / "predictions.json"))
        viable = [(m.id, m.mutated_program) for m in mutants if m.viable]
        assert viable, f"{name}: no viable mutants"
        matrix = build_kill_matrix(fixed, viable, pool, BUDGET)
        suite = minimal_killing_suite(matrix)
        covered = set()
        for test in suite:
            covered |= matrix.kills_of_test(test)
        assert covered == matrix.killed_ids(), f"{name}: suite does not kill all killable mutants"
        outcomes[name] = detects_fault(suite, pair, BUDGET)

    detected = {name for name, hit in outcomes.items() if hit}
    missed = set(outcomes) - detected
    assert len(detected) >= 4, outcomes
    assert missed == EXPECTED_MISSES, outcomes
