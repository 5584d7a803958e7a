"""Method assertions with `old()`/`abs()`/`res`, validated against the test
suite and filtered by mutation analysis: an assertion survives only if it
is violated on at least one mutant.

Formulas are a pure subset of MiniJ expressions. `old(e)` evaluates e
against a deep snapshot of the subject's receiver and parameters taken at
method entry (one snapshot frame per activation, so recursion is safe),
and `==`/`!=` compare arrays and objects structurally, so an assertion
like `children == old(children)` is violated exactly when the call changed
the collection's contents.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .lang import ast
from .lang.ast import (
    ArrayRead,
    Binary,
    Cast,
    Expr,
    FieldAccess,
    Literal,
    MethodCall,
    Program,
    StaticCall,
    ThisRef,
    UnaryPostfix,
    UnaryPrefix,
    VarRef,
)
from .lang.checker import Checker, TypeIssue, _Scope
from .lang.interp import (
    DEFAULT_BUDGET,
    ArrayValue,
    Char,
    Interpreter,
    MethodObserver,
    MiniJRuntimeError,
    ObjectValue,
    run_test,
    values_equal,
)
from .lang.parser import ParseError, Parser
from .lang.testsuite import TestCase
from .lang.tokens import LexError, lex


@dataclass
class AssertionSpec:
    class_name: str
    method_name: str
    formula: Expr
    text: str  # the formula as written
    line: int = 0

    @property
    def subject(self) -> str:
        return f"{self.class_name}.{self.method_name}"


class AssertionFormatError(Exception):
    pass


class InvalidAssertionError(Exception):
    """An assertion that fails its own precondition (bad types, or falsified
    by the test suite on the original program)."""


def parse_assertion_line(line: str, line_no: int = 0) -> AssertionSpec:
    if "::" not in line:
        raise AssertionFormatError(f"line {line_no}: expected 'Class.method :: formula'")
    subject, formula_text = line.split("::", 1)
    subject = subject.strip()
    formula_text = formula_text.strip()
    if subject.count(".") != 1:
        raise AssertionFormatError(f"line {line_no}: subject must be 'Class.method', got {subject!r}")
    class_name, method_name = subject.split(".")
    try:
        parser = Parser(lex(formula_text), formula_text)
        formula = parser._parse_expr()
    except (LexError, ParseError) as err:
        raise AssertionFormatError(f"line {line_no}: bad formula: {err}") from err
    if parser._peek() is not None:
        raise AssertionFormatError(f"line {line_no}: trailing tokens after formula")
    return AssertionSpec(class_name.strip(), method_name.strip(), formula, formula_text, line_no)


def parse_assertion_file(path: str | Path) -> list[AssertionSpec]:
    specs = []
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("//"):
            continue
        specs.append(parse_assertion_line(line, line_no))
    return specs


# ---------------------------------------------------------------------------
# checking
# ---------------------------------------------------------------------------

class _FormulaChecker(Checker):
    """Checks a formula in the subject's pre/post environment: parameters
    and `res` as locals, fields via the subject class; `old(e)` of any
    expression keeps e's type; `abs(e)` is int -> int."""

    def _call_type(self, expr, cls, method, scope):
        if expr.receiver is None and expr.method == "old":
            if len(expr.args) != 1:
                self.error("old() takes exactly one argument", expr.name_span)
                return None
            return self.check_expr(expr.args[0], cls, method, scope)
        if expr.receiver is None and expr.method == "abs":
            if len(expr.args) != 1:
                self.error("abs() takes exactly one argument", expr.name_span)
                return None
            arg_ty = self.check_expr(expr.args[0], cls, method, scope)
            if arg_ty is not None and arg_ty != ast.INT:
                self.error(f"abs() needs an int argument, got {arg_ty}", expr.args[0].span)
                return None
            return ast.INT
        if expr.receiver is None:
            self.error("only old(...) and abs(...) calls are allowed in formulas", expr.name_span)
            return None
        from .lang.checker import STATIC_CLASSES

        if (
            isinstance(expr.receiver, VarRef)
            and expr.receiver.parens == 0
            and (scope is None or scope.lookup(expr.receiver.name) is None)
            and expr.receiver.name not in cls.fields
            and expr.receiver.name in STATIC_CLASSES
        ):
            # Math.* rewrites to a static call; purity of the chosen method is
            # enforced by the dedicated walk afterwards.
            return super()._call_type(expr, cls, method, scope)
        # Receiver calls would let formulas run arbitrary (impure) code.
        self.error("method calls are not allowed in assertion formulas", expr.name_span)
        for arg in expr.args:
            self.check_expr(arg, cls, method, scope)
        return None


def _purity_issues(expr: Expr, in_old: bool = False) -> list[TypeIssue]:
    issues: list[TypeIssue] = []
    if isinstance(expr, (UnaryPrefix, UnaryPostfix)) and expr.op in ("++", "--"):
        issues.append(TypeIssue(f"'{expr.op}' is not allowed in assertion formulas", expr.span))
    if isinstance(expr, StaticCall) and expr.method == "random":
        issues.append(TypeIssue("Math.random() is not allowed in assertion formulas", expr.span))
    if expr.kind in ("new-array", "new-object"):
        issues.append(TypeIssue("'new' is not allowed in assertion formulas", expr.span))
    entering_old = isinstance(expr, MethodCall) and expr.receiver is None and expr.method == "old"
    if entering_old and in_old:
        issues.append(TypeIssue("old() may not be nested inside old()", expr.span))
    if in_old and isinstance(expr, VarRef) and expr.name == "res":
        issues.append(TypeIssue("res is not available inside old()", expr.span))
    for child in expr.children():
        if isinstance(child, Expr):
            issues.extend(_purity_issues(child, in_old or entering_old))
    return issues


def check_assertion(program: Program, assertion: AssertionSpec) -> list[TypeIssue]:
    """Type-check the formula against its subject; annotates the AST."""
    checker = _FormulaChecker(program)
    checker.collect()
    baseline = len(checker.issues)
    cls = checker.classes.get(assertion.class_name)
    if cls is None:
        return [TypeIssue(f"unknown class '{assertion.class_name}'", assertion.formula.span)]
    sig = cls.methods.get(assertion.method_name)
    if sig is None:
        return [TypeIssue(f"unknown method '{assertion.subject}'", assertion.formula.span)]
    scope = _Scope()
    for param in sig.decl.params:
        scope.declare(param.name, param.declared)
    if sig.returns != ast.VOID:
        scope.declare("res", sig.returns)
    ty = checker.check_expr(assertion.formula, cls, sig.decl, scope)
    issues = checker.issues[baseline:]
    if ty is not None and ty != ast.BOOLEAN:
        issues.append(TypeIssue(f"formula must be boolean, got {ty}", assertion.formula.span))
    issues.extend(_purity_issues(assertion.formula))
    return issues


# ---------------------------------------------------------------------------
# structural equality, snapshots, fingerprints
# ---------------------------------------------------------------------------

def deep_equal(a, b, _pairs: Optional[set] = None) -> bool:
    """Structural equality over value graphs; cyclic references compare
    coinductively (a revisited pair is assumed equal)."""
    if isinstance(a, ArrayValue) and isinstance(b, ArrayValue):
        if _pairs is None:
            _pairs = set()
        key = (id(a), id(b))
        if key in _pairs:
            return True
        _pairs.add(key)
        if a.element != b.element or len(a.items) != len(b.items):
            return False
        return all(deep_equal(x, y, _pairs) for x, y in zip(a.items, b.items))
    if isinstance(a, ObjectValue) and isinstance(b, ObjectValue):
        if _pairs is None:
            _pairs = set()
        key = (id(a), id(b))
        if key in _pairs:
            return True
        _pairs.add(key)
        if a.class_name != b.class_name or a.fields.keys() != b.fields.keys():
            return False
        return all(deep_equal(a.fields[k], b.fields[k], _pairs) for k in a.fields)
    if isinstance(a, (ArrayValue, ObjectValue)) or isinstance(b, (ArrayValue, ObjectValue)):
        return False
    return values_equal(a, b)


def state_fingerprint(*roots) -> str:
    """Deterministic digest of a value graph (used to assert that formula
    evaluation never mutates program state)."""
    seen: dict[int, int] = {}
    parts: list[str] = []

    def visit(value) -> None:
        if isinstance(value, dict):
            parts.append("{")
            for name in sorted(value):
                parts.append(name + "=")
                visit(value[name])
            parts.append("}")
            return
        if isinstance(value, (ArrayValue, ObjectValue)):
            ref = seen.get(id(value))
            if ref is not None:
                parts.append(f"@{ref}")
                return
            seen[id(value)] = len(seen)
            if isinstance(value, ArrayValue):
                parts.append(f"arr[{value.element}]({len(value.items)}:")
                for item in value.items:
                    visit(item)
                parts.append(")")
            else:
                parts.append(f"obj[{value.class_name}](")
                for name in sorted(value.fields):
                    parts.append(name + "=")
                    visit(value.fields[name])
                parts.append(")")
        elif isinstance(value, Char):
            parts.append(f"c{ord(value.ch)}")
        elif isinstance(value, bool):
            parts.append("t" if value else "f")
        elif isinstance(value, int):
            parts.append(f"i{value}")
        elif isinstance(value, str):
            parts.append("s" + value)
        elif value is None:
            parts.append("null")
        else:
            raise TypeError(f"not a MiniJ value: {value!r}")
        parts.append(";")

    for root in roots:
        visit(root)
    return hashlib.sha256("".join(parts).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

class FormulaError(Exception):
    """Runtime error while evaluating a formula (counts as a violation)."""


@dataclass
class Violation:
    test: str
    kind: str  # "false" | "error"
    message: str = ""


@dataclass
class _Env:
    this_obj: Optional[ObjectValue]
    variables: dict
    result: object
    snapshot: Optional[tuple[Optional[ObjectValue], dict]]


def _eval_formula(expr: Expr, env: _Env):
    if isinstance(expr, Literal):
        if expr.token_kind == "char":
            return Char(expr.value)
        return expr.value
    if isinstance(expr, VarRef):
        if expr.binding == "field":
            if env.this_obj is None:
                raise FormulaError(f"no receiver for field '{expr.name}'")
            return env.this_obj.fields[expr.name]
        if expr.name == "res" and "res" not in env.variables:
            return env.result
        return env.variables[expr.name]
    if isinstance(expr, ThisRef):
        if env.this_obj is None:
            raise FormulaError("no receiver")
        return env.this_obj
    if isinstance(expr, FieldAccess):
        obj = _eval_formula(expr.obj, env)
        if obj is None:
            raise FormulaError(f"field '{expr.field_name}' of null")
        if isinstance(obj, ArrayValue):
            return len(obj.items)
        return obj.fields[expr.field_name]
    if isinstance(expr, ArrayRead):
        array = _eval_formula(expr.array, env)
        index = _eval_formula(expr.index, env)
        if array is None:
            raise FormulaError("indexing null array")
        if not 0 <= index < len(array.items):
            raise FormulaError(f"index {index} out of bounds for length {len(array.items)}")
        return array.items[index]
    if isinstance(expr, Binary):
        op = expr.op
        if op == "&&":
            return bool(_eval_formula(expr.left, env)) and bool(_eval_formula(expr.right, env))
        if op == "||":
            return bool(_eval_formula(expr.left, env)) or bool(_eval_formula(expr.right, env))
        left = _eval_formula(expr.left, env)
        right = _eval_formula(expr.right, env)
        if op in ("==", "!="):
            equal = deep_equal(left, right)
            return equal if op == "==" else not equal
        if op in ("<", "<=", ">", ">="):
            a = ord(left.ch) if isinstance(left, Char) else left
            b = ord(right.ch) if isinstance(right, Char) else right
            return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
        if op == "+" and (isinstance(left, str) or isinstance(right, str)):
            from .lang.interp import display

            if left is None or right is None:
                raise FormulaError("string concatenation with null")
            return display(left) + display(right)
        try:
            return Interpreter._arith(op, left, right)
        except MiniJRuntimeError as err:
            raise FormulaError(str(err)) from err
    if isinstance(expr, UnaryPrefix):
        if expr.op == "!":
            return not _eval_formula(expr.operand, env)
        if expr.op == "-":
            return -_eval_formula(expr.operand, env)
        raise FormulaError(f"operator '{expr.op}' not allowed in formulas")
    if isinstance(expr, MethodCall):
        if expr.receiver is None and expr.method == "old":
            if env.snapshot is None:
                raise FormulaError("old() is not available here")
            snap_this, snap_vars = env.snapshot
            pre = _Env(snap_this, snap_vars, None, None)
            return _eval_formula(expr.args[0], pre)
        if expr.receiver is None and expr.method == "abs":
            return abs(_eval_formula(expr.args[0], env))
        raise FormulaError(f"call '{expr.method}' not allowed in formulas")
    if isinstance(expr, StaticCall):
        args = [_eval_formula(a, env) for a in expr.args]
        if expr.method == "abs":
            return abs(args[0])
        if expr.method == "min":
            return min(args[0], args[1])
        if expr.method == "max":
            return max(args[0], args[1])
        raise FormulaError(f"static call '{expr.class_name}.{expr.method}' not allowed in formulas")
    if isinstance(expr, Cast):
        value = _eval_formula(expr.operand, env)
        if expr.target == ast.INT:
            return ord(value.ch) if isinstance(value, Char) else value
        return value if isinstance(value, Char) else Char(chr(value & 0xFFFF))
    raise FormulaError(f"expression kind '{expr.kind}' not allowed in formulas")


class AssertionObserver(MethodObserver):
    """Snapshots the subject's receiver and parameters at each entry and
    checks the formula at the matching exit."""

    def __init__(self, assertion: AssertionSpec, verify_purity: bool = False):
        self.assertion = assertion
        self.current_test = ""
        self.violations: list[Violation] = []
        self.verify_purity = verify_purity
        self.checks = 0

    def matches(self, class_name: str, method_name: str) -> bool:
        return class_name == self.assertion.class_name and method_name == self.assertion.method_name

    def on_enter(self, this_obj, params):
        return copy.deepcopy((this_obj, params))

    def on_exit(self, token, this_obj, params, return_value):
        self.checks += 1
        snap_this, snap_params = token
        env = _Env(this_obj, params, return_value, (snap_this, snap_params))
        before = state_fingerprint(this_obj, params, return_value) if self.verify_purity else None
        try:
            value = _eval_formula(self.assertion.formula, env)
        except FormulaError as err:
            self.violations.append(Violation(self.current_test, "error", str(err)))
            return
        finally:
            if self.verify_purity:
                after = state_fingerprint(this_obj, params, return_value)
                if before != after:
                    raise AssertionError("formula evaluation mutated program state")
        if value is not True:
            self.violations.append(Violation(self.current_test, "false"))


@dataclass
class AssertionEvaluation:
    holds: bool
    counterexample: Optional[str]  # first violating test
    violations: list[Violation] = field(default_factory=list)
    checks: int = 0  # subject-method exits observed


def evaluate_assertion(
    assertion: AssertionSpec,
    program: Program,
    tests: Sequence[TestCase],
    budget: int = DEFAULT_BUDGET,
    verify_purity: bool = False,
) -> AssertionEvaluation:
    """Run every test with the subject instrumented; holds iff no violation."""
    issues = check_assertion(program, assertion)
    if issues:
        raise InvalidAssertionError("; ".join(str(i) for i in issues))
    observer = AssertionObserver(assertion, verify_purity=verify_purity)
    for test in tests:
        observer.current_test = test.name
        run_test(program, test, budget, observer=observer)
        if observer.violations:
            first = observer.violations[0]
            return AssertionEvaluation(False, first.test, observer.violations, observer.checks)
    return AssertionEvaluation(True, None, [], observer.checks)


@dataclass
class AssertionVerdict:
    assertion: AssertionSpec
    kept: bool
    mutants_killed: list[int]
    mutants_evaluated: int

    @property
    def status(self) -> str:
        return "kept" if self.kept else "discarded"

    def to_dict(self) -> dict:
        return {
            "subject": self.assertion.subject,
            "assertion": self.assertion.text,
            "status": self.status,
            "mutants_evaluated": self.mutants_evaluated,
            "mutants_killed": len(self.mutants_killed),
            "killed_ids": self.mutants_killed,
        }


def filter_assertions(
    assertions: Sequence[AssertionSpec],
    program: Program,
    mutants: Sequence[tuple[int, Program]],
    tests: Sequence[TestCase],
    budget: int = DEFAULT_BUDGET,
) -> list[AssertionVerdict]:
    """Keep an assertion iff it is violated during some test execution on
    some mutant. All assertions must hold on the original program."""
    for assertion in assertions:
        evaluation = evaluate_assertion(assertion, program, tests, budget)
        if not evaluation.holds:
            raise InvalidAssertionError(
                f"{assertion.subject} :: {assertion.text} is falsified on the original "
                f"program by test '{evaluation.counterexample}'"
            )

    verdicts = []
    for assertion in assertions:
        killed: list[int] = []
        for mutant_id, mutated in mutants:
            observer = AssertionObserver(assertion)
            violated = False
            for test in tests:
                observer.current_test = test.name
                run_test(mutated, test, budget, observer=observer)
                if observer.violations:
                    violated = True
                    break
            if violated:
                killed.append(mutant_id)
        verdicts.append(AssertionVerdict(assertion, bool(killed), killed, len(mutants)))
    return verdicts


def verdicts_to_dict(verdicts: Sequence[AssertionVerdict]) -> dict:
    return {"assertions": [v.to_dict() for v in verdicts]}


def save_verdicts(verdicts: Sequence[AssertionVerdict], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(verdicts_to_dict(verdicts), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
