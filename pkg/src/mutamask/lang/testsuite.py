"""MiniJ test files (`.mjtest`): `test NAME { ...; assert expr; }` blocks.

A test is a statement block followed by exactly one `assert` carrying the
boolean verdict expression. Tests are checked against a program's classes
but live outside any class, so `this` is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast
from .ast import Block, ClassDecl, Expr, MethodDecl, Program
from .checker import CheckFailure, Checker, TypeIssue, _Class, _Method, _Scope
from .parser import ParseError, Parser
from .tokens import SourceSpan, lex


@dataclass
class TestCase:
    name: str
    body: Block
    verdict: Expr
    span: SourceSpan


class _TestParser(Parser):
    def parse_tests(self) -> list["TestCase"]:
        tests = []
        while not self._at_end():
            tests.append(self._parse_test())
        return tests

    def _parse_test(self) -> "TestCase":
        kw = self._expect("test")
        name = self._expect_ident("test name")
        self._expect("{")
        stmts = []
        while not self._check("assert"):
            if self._check("}") or self._at_end():
                raise self._error("test must end with an assert statement")
            stmts.append(self._parse_stmt())
        self._expect("assert")
        verdict = self._parse_expr()
        self._expect(";")
        close = self._expect("}")
        span = SourceSpan(kw.span.start, close.span.end, kw.span.line, kw.span.col)
        return TestCase(name.lexeme, Block(span, stmts), verdict, span)


def parse_tests(source: str) -> list[TestCase]:
    """Parse a `.mjtest` file into test cases (raises LexError/ParseError)."""
    return _TestParser(lex(source), source).parse_tests()


def _harness_class() -> _Class:
    span = SourceSpan(0, 0, 1, 1)
    run = MethodDecl(span, ast.VOID, "$run", [], Block(span, []), span)
    return _Class(ClassDecl(span, "$test", [], [run]), {}, {"$run": _Method(run, (), ast.VOID)})


def check_test(program: Program, test: TestCase) -> list[TypeIssue]:
    """Type-check one test against a program's classes; annotates the AST.

    Assumes the program itself already checks; only issues inside the test
    body and verdict are reported.
    """
    checker = Checker(program)
    checker.collect()
    baseline = len(checker.issues)
    harness = _harness_class()
    scope = _Scope()
    for stmt in test.body.statements:
        checker._check_stmt(stmt, harness, harness.methods["$run"].decl, scope)
    verdict_ty = checker.check_expr(test.verdict, harness, None, scope)
    if verdict_ty is not None and verdict_ty != ast.BOOLEAN:
        checker.error(f"assert expression must be boolean, got {verdict_ty}", test.verdict.span)
    issues = checker.issues[baseline:]
    for root in (test.body, test.verdict):
        for node in root.walk():
            if node.kind == "this-ref":
                issues.append(TypeIssue("'this' is not available in tests", node.span))
    return issues


def check_tests(program: Program, tests: list[TestCase]) -> list[TypeIssue]:
    issues: list[TypeIssue] = []
    for test in tests:
        issues.extend(check_test(program, test))
    return issues


def type_check_tests(program: Program, tests: list[TestCase]) -> list[TestCase]:
    """Check all tests; raise CheckFailure listing every issue."""
    issues = check_tests(program, tests)
    if issues:
        raise CheckFailure(issues)
    return tests
