"""Shared test utilities: fixture loading and in-memory fixture predictors."""

from __future__ import annotations

from pathlib import Path

from mutamask.lang import parse_source, parse_tests, type_check, type_check_tests
from mutamask.lang.ast import Program
from mutamask.masking import MaskSite, OperatorFamily, enumerate_sites, render_masked
from mutamask.predict import FixturePredictor, Prediction, sequence_key

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load_program(path: Path) -> Program:
    return type_check(parse_source(path.read_text(encoding="utf-8")))


def load_tests(path: Path, program: Program):
    tests = parse_tests(path.read_text(encoding="utf-8"))
    return type_check_tests(program, tests)


def find_site(
    program: Program,
    family: OperatorFamily,
    original: str,
    method: str | None = None,
    ordinal: int = 0,
) -> MaskSite:
    matches = [
        s
        for s in enumerate_sites(program)
        if s.family is family
        and s.original == original
        and (method is None or s.method_name == method)
    ]
    return matches[ordinal]


def fixture_predictor(program: Program, picks: list[tuple[MaskSite, list[str]]]) -> FixturePredictor:
    """Build an in-memory fixture predictor answering exactly these sites."""
    entries = {}
    for site, tokens in picks:
        assert len(tokens) == 5
        text = render_masked(program, site).text
        entries[sequence_key(text)] = [
            Prediction(i + 1, tok, round(0.35 - 0.05 * i, 2)) for i, tok in enumerate(tokens)
        ]
    return FixturePredictor(entries)
