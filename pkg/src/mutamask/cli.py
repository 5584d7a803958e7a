"""The mutamask command line: mutate | analyze | simulate | assertions | show.

Flags mirror mutamask.toml (flags win over per-command tables, which win
over top-level keys). All outputs land under --out; exit code 2 flags bad
inputs, 3 an unreachable predictor backend.
"""

from __future__ import annotations

import difflib
import json
import sys
from pathlib import Path
from typing import Optional

import click

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .analysis import (
    FaultPair,
    build_kill_matrix,
    load_matrix,
    matrix_to_csv,
    minimal_killing_suite,
    mutation_score,
    save_matrix,
)
from .assertions import (
    AssertionFormatError,
    InvalidAssertionError,
    filter_assertions,
    parse_assertion_file,
    save_verdicts,
    verdicts_to_dict,
)
from .lang.ast import Program
from .lang.checker import CheckFailure, check_program
from .lang.interp import DEFAULT_BUDGET
from .lang.parser import ParseError, parse_source
from .lang.testsuite import TestCase, check_tests, parse_tests
from .lang.tokens import LexError
from .mutagen import StoreFormatError, generate, load, materialize, persist, rebuild_viable
from .predict import PredictorConfig
from .simulate import SimulationConfig, run_simulation, save_simulation

EXIT_INPUT_ERROR = 2
EXIT_PREDICTOR_UNREACHABLE = 3


class CliError(click.ClickException):
    def __init__(self, message: str, exit_code: int = EXIT_INPUT_ERROR):
        super().__init__(message)
        self.exit_code = exit_code


# ---------------------------------------------------------------------------
# config file merging
# ---------------------------------------------------------------------------

def _load_toml(path: Optional[str]) -> dict:
    candidate = Path(path) if path else Path("mutamask.toml")
    if not candidate.exists():
        if path:
            raise CliError(f"config file not found: {candidate}")
        return {}
    try:
        return tomllib.loads(candidate.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as err:
        raise CliError(f"bad config file {candidate}: {err}")


class Settings:
    """Flag > [command] table > top-level key > default."""

    def __init__(self, config: dict, command: str):
        self.top = config
        self.section = config.get(command, {})

    def get(self, key: str, flag_value, default=None):
        if flag_value is not None and flag_value != ():
            return flag_value
        if key in self.section:
            return self.section[key]
        if key in self.top and not isinstance(self.top[key], dict):
            return self.top[key]
        return default

    def require(self, key: str, flag_value, what: str):
        value = self.get(key, flag_value)
        if value is None:
            raise CliError(f"missing required option: {what}")
        return value


# ---------------------------------------------------------------------------
# input loading (fail fast before any mutant work)
# ---------------------------------------------------------------------------

def _read(path: str) -> str:
    p = Path(path)
    if not p.exists():
        raise CliError(f"file not found: {p}")
    return p.read_text(encoding="utf-8")


def load_program(path: str) -> Program:
    source = _read(path)
    try:
        program = parse_source(source)
    except (LexError, ParseError) as err:
        raise CliError(f"{path}: {err}")
    issues = check_program(program)
    if issues:
        listing = "\n".join(f"  {path}:{i}" for i in issues)
        raise CliError(f"type errors in {path}:\n{listing}")
    return program


def load_test_files(paths: tuple[str, ...], program: Program) -> list[TestCase]:
    tests: list[TestCase] = []
    for path in paths:
        source = _read(path)
        try:
            tests.extend(parse_tests(source))
        except (LexError, ParseError) as err:
            raise CliError(f"{path}: {err}")
    issues = check_tests(program, tests)
    if issues:
        listing = "\n".join(f"  {i}" for i in issues)
        raise CliError(f"type errors in tests:\n{listing}")
    names = [t.name for t in tests]
    dupes = {n for n in names if names.count(n) > 1}
    if dupes:
        raise CliError(f"duplicate test names: {', '.join(sorted(dupes))}")
    return tests


def _predictor_config(settings: Settings, backend, corpus, ngram_order, model, fixtures, endpoint, timeout_ms) -> PredictorConfig:
    backend = settings.require("predictor", backend, "--predictor")
    if backend not in ("ngram", "fixture", "http"):
        raise CliError(f"unknown predictor backend {backend!r}")
    config = PredictorConfig(
        backend=backend,
        ngram_order=int(settings.get("ngram_order", ngram_order, 2)),
        corpus_path=settings.get("corpus", corpus),
        model_path=settings.get("model", model),
        fixture_path=settings.get("fixtures", fixtures),
        endpoint_url=settings.get("endpoint", endpoint),
        timeout_ms=int(settings.get("timeout_ms", timeout_ms, 10_000)),
    )
    if backend == "ngram" and not (config.corpus_path or config.model_path):
        raise CliError("ngram backend needs --corpus or --model")
    if backend == "fixture":
        if not config.fixture_path:
            raise CliError("fixture backend needs --fixtures")
        if not Path(config.fixture_path).exists():
            raise CliError(f"file not found: {config.fixture_path}")
    if backend == "http" and not config.endpoint_url:
        raise CliError("http backend needs --endpoint")
    if backend == "ngram" and config.corpus_path and not Path(config.corpus_path).exists():
        raise CliError(f"corpus not found: {config.corpus_path}")
    if backend == "ngram" and config.model_path and not Path(config.model_path).exists():
        raise CliError(f"model not found: {config.model_path}")
    return config


def _out_dir(settings: Settings, out: Optional[str]) -> Path:
    path = Path(settings.get("out", out, "out"))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _want_plot(settings: Settings, plot: Optional[bool]) -> bool:
    return bool(settings.get("plot", plot, True))


def _budget(settings: Settings, budget: Optional[int]) -> int:
    value = int(settings.get("budget", budget, DEFAULT_BUDGET))
    if value < 1:
        raise CliError("--budget must be >= 1")
    return value


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

@click.group()
def main() -> None:
    """Mutation testing for MiniJ via masked-token prediction."""


_config_opt = click.option("--config", "config_path", type=str, default=None, help="mutamask.toml path")
_program_opt = click.option("--program", type=str, default=None, help="MiniJ source file (.minij)")
_tests_opt = click.option("--tests", type=str, multiple=True, help="test file(s) (.mjtest)")
_out_opt = click.option("--out", type=str, default=None, help="output directory (default: out)")
_budget_opt = click.option("--budget", type=int, default=None, help="interpreter step budget per test run")
_plot_opt = click.option("--plot/--no-plot", "plot", default=None, help="render figures next to delimited outputs")
_store_opt = click.option("--store", type=str, default=None, help="mutant store (default: OUT/mutants.jsonl)")


@main.command()
@_config_opt
@_program_opt
@_out_opt
@_plot_opt
@click.option("--predictor", "backend", type=str, default=None, help="ngram | fixture | http")
@click.option("--corpus", type=str, default=None, help="corpus dir/file for the ngram backend")
@click.option("--ngram-order", type=int, default=None, help="n-gram order 1..3 (default 2)")
@click.option("--model", type=str, default=None, help="saved n-gram model JSON")
@click.option("--fixtures", type=str, default=None, help="fixture predictions JSON")
@click.option("--endpoint", type=str, default=None, help="fill-mask service base URL")
@click.option("--timeout-ms", type=int, default=None, help="http backend timeout (ms)")
def mutate(config_path, program, out, plot, backend, corpus, ngram_order, model, fixtures, endpoint, timeout_ms):
    """Generate mutants: mask every candidate site, query the predictor,
    splice, discard, and persist mutants.jsonl + report.json."""
    settings = Settings(_load_toml(config_path), "mutate")
    program_path = settings.require("program", program, "--program")
    checked = load_program(program_path)
    config = _predictor_config(settings, backend, corpus, ngram_order, model, fixtures, endpoint, timeout_ms)
    out_dir = _out_dir(settings, out)

    mutants, report = generate(checked, config)
    persist(mutants, out_dir / "mutants.jsonl")
    (out_dir / "report.json").write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    if _want_plot(settings, plot):
        from .report import render_mutant_report

        render_mutant_report(report, out_dir / "report.png")

    click.echo(
        f"sites: {report.sites_total} (skipped {report.sites_skipped}); "
        f"candidates: {report.total_candidates}; viable: {report.total_viable}"
    )
    click.echo(f"wrote {out_dir / 'mutants.jsonl'}")
    if (
        config.backend == "http"
        and report.sites_total > 0
        and report.sites_predicted == 0
    ):
        raise CliError("predictor backend unreachable (partial report written)", EXIT_PREDICTOR_UNREACHABLE)


@main.command()
@_config_opt
@_program_opt
@_tests_opt
@_store_opt
@_budget_opt
@_out_opt
@_plot_opt
def analyze(config_path, program, tests, store, budget, out, plot):
    """Build the kill matrix for the stored viable mutants and score it."""
    settings = Settings(_load_toml(config_path), "analyze")
    program_path = settings.require("program", program, "--program")
    checked = load_program(program_path)
    test_paths = tuple(settings.get("tests", tests, ()) or ())
    suite = load_test_files(test_paths, checked)
    out_dir = _out_dir(settings, out)
    store_path = Path(settings.get("store", store, out_dir / "mutants.jsonl"))
    if not store_path.exists():
        raise CliError(f"mutant store not found: {store_path} (run `mutamask mutate` first)")
    try:
        records = load(store_path)
        rebuilt = rebuild_viable(checked, records)
    except StoreFormatError as err:
        raise CliError(str(err))

    step_budget = _budget(settings, budget)
    matrix = build_kill_matrix(checked, [(m.record.id, m.program) for m in rebuilt], suite, step_budget)
    score = mutation_score(matrix)
    save_matrix(matrix, out_dir / "matrix.csv", out_dir / "matrix.json")
    payload = {
        "mutation_score": score,
        "mutants": len(matrix.mutant_ids),
        "killed": len(matrix.killed_ids()),
        "tests_included": matrix.tests,
        "tests_excluded": matrix.excluded,
        "minimal_killing_suite": minimal_killing_suite(matrix),
    }
    if not matrix.tests:
        payload["warning"] = "no tests passed on the original program; score is vacuous"
    (out_dir / "score.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if _want_plot(settings, plot):
        from .report import render_kill_matrix

        render_kill_matrix(matrix, out_dir / "matrix.png")
    if matrix.excluded:
        click.echo(f"warning: excluded tests failing on the original: {', '.join(matrix.excluded)}", err=True)
    if not matrix.tests:
        click.echo("warning: no tests passed on the original program", err=True)
    click.echo(f"mutation score: {score:.4f} ({payload['killed']}/{payload['mutants']} killed)")
    click.echo(f"wrote {out_dir / 'matrix.csv'}, {out_dir / 'score.json'}")


@main.command()
@_config_opt
@_program_opt
@click.option("--faulty", type=str, default=None, help="faulty program version (.minij)")
@_tests_opt
@_budget_opt
@_out_opt
@_plot_opt
@click.option("--seed", type=int, default=None, help="simulation seed (required)")
@click.option("--repetitions", type=int, default=None, help="sessions to run (default 100)")
@click.option("--policy", type=str, default=None, help="uniform | max-additional-kills")
@click.option("--effort-cap", type=int, default=None, help="stop sessions after this many analysed mutants")
def simulate(config_path, program, faulty, tests, budget, out, plot, seed, repetitions, policy, effort_cap):
    """Run the developer cost-effectiveness simulation over an existing
    kill matrix (`mutamask analyze` must have produced matrix.json)."""
    settings = Settings(_load_toml(config_path), "simulate")
    program_path = settings.require("program", program, "--program")
    faulty_path = settings.require("faulty", faulty, "--faulty")
    seed = settings.get("seed", seed)
    if seed is None:
        raise CliError("--seed is required for simulate (reproducibility-first)")
    checked = load_program(program_path)
    faulty_checked = load_program(faulty_path)
    test_paths = tuple(settings.get("tests", tests, ()) or ())
    pool = load_test_files(test_paths, checked)
    issues = check_tests(faulty_checked, pool)
    if issues:
        listing = "\n".join(f"  {i}" for i in issues)
        raise CliError(f"pool tests do not check against the faulty version:\n{listing}")
    out_dir = _out_dir(settings, out)
    matrix_path = out_dir / "matrix.json"
    if not matrix_path.exists():
        raise CliError(f"kill matrix not found: {matrix_path} (run `mutamask analyze` first)")
    matrix = load_matrix(matrix_path)

    pair = FaultPair(fixed=checked, faulty=faulty_checked, pool=pool)
    step_budget = _budget(settings, budget)
    try:
        pair.validate(step_budget)
    except ValueError as err:
        raise CliError(str(err))
    config = SimulationConfig(
        seed=int(seed),
        repetitions=int(settings.get("repetitions", repetitions, 100)),
        effort_cap=settings.get("effort_cap", effort_cap),
        policy=settings.get("policy", policy, "uniform"),
    )
    result = run_simulation(matrix, pair, config, step_budget)
    save_simulation(result, out_dir)
    if _want_plot(settings, plot):
        from .report import render_curve

        render_curve(result, out_dir / "curve.png")
    click.echo(f"seed: {config.seed}")
    click.echo(
        f"sessions: {config.repetitions}; max effort: {result.max_effort}; "
        f"detection rate: {result.detection_rate:.3f}; mean effort: {result.mean_effort:.3f}"
    )
    click.echo(f"wrote {out_dir / 'curve.csv'}, {out_dir / 'sessions.jsonl'}")


@main.command()
@_config_opt
@_program_opt
@_tests_opt
@click.option("--assertions", "assertions_path", type=str, default=None, help="assertion file (.mjassert)")
@_store_opt
@_budget_opt
@_out_opt
def assertions(config_path, program, tests, assertions_path, store, budget, out):
    """Filter candidate assertions: keep only those killing >= 1 mutant."""
    settings = Settings(_load_toml(config_path), "assertions")
    program_path = settings.require("program", program, "--program")
    assertions_file = settings.require("assertions", assertions_path, "--assertions")
    checked = load_program(program_path)
    test_paths = tuple(settings.get("tests", tests, ()) or ())
    suite = load_test_files(test_paths, checked)
    out_dir = _out_dir(settings, out)
    store_path = Path(settings.get("store", store, out_dir / "mutants.jsonl"))
    if not store_path.exists():
        raise CliError(f"mutant store not found: {store_path} (run `mutamask mutate` first)")
    try:
        specs = parse_assertion_file(assertions_file)
    except FileNotFoundError:
        raise CliError(f"file not found: {assertions_file}")
    except AssertionFormatError as err:
        raise CliError(f"{assertions_file}: {err}")
    try:
        records = load(store_path)
        rebuilt = rebuild_viable(checked, records)
    except StoreFormatError as err:
        raise CliError(str(err))

    step_budget = _budget(settings, budget)
    try:
        verdicts = filter_assertions(
            specs, checked, [(m.record.id, m.program) for m in rebuilt], suite, step_budget
        )
    except InvalidAssertionError as err:
        raise CliError(str(err))
    save_verdicts(verdicts, out_dir / "assertions_report.json")
    for verdict in verdicts:
        mark = "KEPT     " if verdict.kept else "DISCARDED"
        click.echo(
            f"{mark} {verdict.assertion.subject} :: {verdict.assertion.text} "
            f"(killed {len(verdict.mutants_killed)}/{verdict.mutants_evaluated})"
        )
    click.echo(f"wrote {out_dir / 'assertions_report.json'}")


@main.command()
@_config_opt
@_program_opt
@_store_opt
@_out_opt
@click.argument("mutant_id", type=int)
def show(config_path, program, store, out, mutant_id):
    """Print one mutant as a unified diff against the original program."""
    settings = Settings(_load_toml(config_path), "show")
    program_path = settings.require("program", program, "--program")
    checked = load_program(program_path)
    out_dir = Path(settings.get("out", out, "out"))
    store_path = Path(settings.get("store", store, out_dir / "mutants.jsonl"))
    if not store_path.exists():
        raise CliError(f"mutant store not found: {store_path}")
    try:
        records = load(store_path)
    except StoreFormatError as err:
        raise CliError(str(err))
    match = [r for r in records if r.id == mutant_id]
    if not match:
        raise CliError(f"no mutant with id {mutant_id} in {store_path}")
    record = match[0]
    if record.status != "viable":
        raise CliError(f"mutant {mutant_id} is not viable ({record.status})")
    rebuilt = rebuild_viable(checked, match)
    diff = difflib.unified_diff(
        checked.source.splitlines(keepends=True),
        rebuilt[0].source.splitlines(keepends=True),
        fromfile="original",
        tofile=f"mutant-{mutant_id}",
    )
    click.echo("".join(diff), nl=False)


if __name__ == "__main__":
    main()
