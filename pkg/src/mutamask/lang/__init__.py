"""The MiniJ mini-language: lexer, parser, type checker, and interpreter."""

from .tokens import MASK_TEXT, LexError, SourceSpan, Token, TokenKind, lex, trailing_trivia
from .ast import MiniJType, Program
from .parser import ParseError, parse, parse_source
from .checker import CheckFailure, TypeIssue, check_program, type_check
from .pretty import pretty
from .interp import (
    DEFAULT_BUDGET,
    ExecOutcome,
    Interpreter,
    MethodObserver,
    Verdict,
    run_test,
)
from .testsuite import TestCase, check_tests, parse_tests, type_check_tests

__all__ = [
    "MASK_TEXT",
    "LexError",
    "SourceSpan",
    "Token",
    "TokenKind",
    "lex",
    "trailing_trivia",
    "MiniJType",
    "Program",
    "ParseError",
    "parse",
    "parse_source",
    "CheckFailure",
    "TypeIssue",
    "check_program",
    "type_check",
    "pretty",
    "DEFAULT_BUDGET",
    "ExecOutcome",
    "Interpreter",
    "MethodObserver",
    "Verdict",
    "run_test",
    "TestCase",
    "check_tests",
    "parse_tests",
    "type_check_tests",
]
