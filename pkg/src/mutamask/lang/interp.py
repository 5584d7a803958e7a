"""Step-budgeted tree-walking interpreter for MiniJ.

Every statement, expression, and method entry costs one step; when the
budget runs out the run ends with a budget-exhausted outcome instead of
aborting, so kill analysis can count runaway mutants (infinite loops,
runaway recursion) like any other non-pass verdict.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from . import ast
from .ast import (
    ArrayRead,
    ArrayWrite,
    Assign,
    Binary,
    Block,
    Cast,
    ClassDecl,
    Expr,
    ExprStmt,
    FieldAccess,
    For,
    If,
    Literal,
    MethodCall,
    MethodDecl,
    MiniJType,
    NewArray,
    NewObject,
    Program,
    Return,
    StaticCall,
    Stmt,
    ThisRef,
    UnaryPostfix,
    UnaryPrefix,
    VarDecl,
    VarRef,
    While,
)

DEFAULT_BUDGET = 1_000_000
DEFAULT_MAX_CALL_DEPTH = 256

_PY_RECURSION_LIMIT = 60_000


class Verdict(Enum):
    PASS = "pass"
    FAIL = "fail"
    RUNTIME_ERROR = "runtime-error"
    BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class ExecOutcome:
    verdict: Verdict
    steps_used: int
    error_kind: Optional[str] = None
    detail: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


# --- runtime values ---

@dataclass(frozen=True)
class Char:
    ch: str


@dataclass(eq=False)
class ArrayValue:
    element: MiniJType
    items: list


@dataclass(eq=False)
class ObjectValue:
    class_name: str
    fields: dict = field(default_factory=dict)


def default_value(ty: MiniJType):
    if ty == ast.INT:
        return 0
    if ty == ast.BOOLEAN:
        return False
    if ty == ast.CHAR:
        return Char("\0")
    return None  # string, class, and array types default to null


def display(value) -> str:
    """String rendering used by string concatenation."""
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, Char):
        return value.ch
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, ArrayValue):
        return f"<{value.element}[{len(value.items)}]>"
    if isinstance(value, ObjectValue):
        return f"<{value.class_name}>"
    raise TypeError(f"not a MiniJ value: {value!r}")


def values_equal(a, b) -> bool:
    """MiniJ `==`: value equality for primitives and strings, identity for
    arrays and objects, and null only equals null."""
    if a is None or b is None:
        return a is None and b is None
    if isinstance(a, (ArrayValue, ObjectValue)) or isinstance(b, (ArrayValue, ObjectValue)):
        return a is b
    if isinstance(a, Char) and isinstance(b, Char):
        return a.ch == b.ch
    return a == b


def java_div(a: int, b: int) -> int:
    """Truncating division (rounds toward zero, like Java)."""
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def java_mod(a: int, b: int) -> int:
    return a - b * java_div(a, b)


# --- control-flow signals and errors ---

class MiniJRuntimeError(Exception):
    """A runtime error inside the interpreted program (an outcome, not a bug)."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class BudgetExhausted(Exception):
    pass


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


class InterpreterInvariantError(AssertionError):
    """Raised in type-assertion mode when a runtime value disagrees with the
    checker's resolved type (an implementation bug, never a MiniJ outcome)."""


class MethodObserver:
    """Hook for instrumenting entries/exits of one subject method."""

    def matches(self, class_name: str, method_name: str) -> bool:
        raise NotImplementedError

    def on_enter(self, this_obj: ObjectValue, params: dict) -> object:
        raise NotImplementedError

    def on_exit(self, token: object, this_obj: ObjectValue, params: dict, return_value) -> None:
        raise NotImplementedError


class Frame:
    __slots__ = ("scopes", "this_obj")

    def __init__(self, this_obj: Optional[ObjectValue]):
        self.scopes: list[dict] = [{}]
        self.this_obj = this_obj

    def push(self) -> None:
        self.scopes.append({})

    def pop(self) -> None:
        self.scopes.pop()

    def declare(self, name: str, value) -> None:
        self.scopes[-1][name] = value

    def get(self, name: str):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise KeyError(name)

    def set(self, name: str, value) -> None:
        for scope in reversed(self.scopes):
            if name in scope:
                scope[name] = value
                return
        raise KeyError(name)

    def flat_locals(self) -> dict:
        merged: dict = {}
        for scope in self.scopes:
            merged.update(scope)
        return merged


class Interpreter:
    def __init__(
        self,
        program: Program,
        budget: int = DEFAULT_BUDGET,
        max_call_depth: int = DEFAULT_MAX_CALL_DEPTH,
        random_seed: int = 0,
        check_types: bool = False,
        observer: Optional[MethodObserver] = None,
    ):
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.program = program
        self.budget = budget
        self.max_call_depth = max_call_depth
        self.check_types = check_types
        self.observer = observer
        self.steps = 0
        self.call_depth = 0
        self._rng_state = random_seed & 0x7FFFFFFF

    # --- bookkeeping ---

    def _tick(self) -> None:
        if self.steps >= self.budget:
            self.steps = self.budget
            raise BudgetExhausted()
        self.steps += 1

    def _next_random(self) -> int:
        self._rng_state = (1103515245 * self._rng_state + 12345) % (1 << 31)
        return self._rng_state

    # --- object construction ---

    def construct(self, class_name: str) -> ObjectValue:
        cls = self.program.find_class(class_name)
        if cls is None:
            raise MiniJRuntimeError("unknown-class", f"no class named '{class_name}'")
        obj = ObjectValue(class_name)
        for fld in cls.fields:
            obj.fields[fld.name] = default_value(fld.declared)
        frame = Frame(obj)
        for fld in cls.fields:
            if fld.init is not None:
                obj.fields[fld.name] = self.eval(fld.init, frame)
        return obj

    # --- statements ---

    def exec_block(self, block: Block, frame: Frame) -> None:
        frame.push()
        try:
            for stmt in block.statements:
                self.exec_stmt(stmt, frame)
        finally:
            frame.pop()

    def exec_stmt(self, stmt: Stmt, frame: Frame) -> None:
        self._tick()
        if isinstance(stmt, Block):
            self.exec_block(stmt, frame)
        elif isinstance(stmt, VarDecl):
            value = self.eval(stmt.init, frame) if stmt.init is not None else default_value(stmt.declared)
            frame.declare(stmt.name, value)
        elif isinstance(stmt, Assign):
            self._assign(stmt, frame)
        elif isinstance(stmt, ArrayWrite):
            self._array_write(stmt, frame)
        elif isinstance(stmt, ExprStmt):
            self.eval(stmt.expr, frame)
        elif isinstance(stmt, If):
            if self.eval(stmt.cond, frame):
                self.exec_stmt(stmt.then_branch, frame)
            elif stmt.else_branch is not None:
                self.exec_stmt(stmt.else_branch, frame)
        elif isinstance(stmt, While):
            while self.eval(stmt.cond, frame):
                self.exec_stmt(stmt.body, frame)
        elif isinstance(stmt, For):
            frame.push()
            try:
                if stmt.init is not None:
                    self.exec_stmt(stmt.init, frame)
                while stmt.cond is None or self.eval(stmt.cond, frame):
                    self.exec_stmt(stmt.body, frame)
                    if stmt.update is not None:
                        self.exec_stmt(stmt.update, frame)
            finally:
                frame.pop()
        elif isinstance(stmt, Return):
            value = self.eval(stmt.value, frame) if stmt.value is not None else None
            raise _ReturnSignal(value)
        else:
            raise TypeError(f"unhandled statement {type(stmt).__name__}")

    def _assign(self, stmt: Assign, frame: Frame) -> None:
        value = self.eval(stmt.value, frame)
        target = stmt.target
        if isinstance(target, VarRef):
            if target.binding == "field":
                obj = self._require_this(frame)
                if stmt.op is not None:
                    value = self._arith(stmt.op, obj.fields[target.name], value)
                obj.fields[target.name] = value
            else:
                if stmt.op is not None:
                    value = self._arith(stmt.op, frame.get(target.name), value)
                frame.set(target.name, value)
        elif isinstance(target, FieldAccess):
            obj = self.eval(target.obj, frame)
            if obj is None:
                raise MiniJRuntimeError("null-dereference", f"field '{target.field_name}' of null")
            if stmt.op is not None:
                value = self._arith(stmt.op, obj.fields[target.field_name], value)
            obj.fields[target.field_name] = value
        else:
            raise TypeError(f"bad assignment target {type(target).__name__}")

    def _array_write(self, stmt: ArrayWrite, frame: Frame) -> None:
        array = self.eval(stmt.array, frame)
        index = self.eval(stmt.index, frame)
        value = self.eval(stmt.value, frame)
        if array is None:
            raise MiniJRuntimeError("null-dereference", "indexing null array")
        if not 0 <= index < len(array.items):
            raise MiniJRuntimeError("index-out-of-bounds", f"index {index} out of bounds for length {len(array.items)}")
        if stmt.op is not None:
            value = self._arith(stmt.op, array.items[index], value)
        array.items[index] = value

    # --- expressions ---

    def eval(self, expr: Expr, frame: Frame):
        self._tick()
        value = self._eval(expr, frame)
        if self.check_types:
            self._assert_type(expr, value)
        return value

    def _eval(self, expr: Expr, frame: Frame):
        if isinstance(expr, Literal):
            if expr.token_kind == "char":
                return Char(expr.value)
            return expr.value
        if isinstance(expr, VarRef):
            if expr.binding == "field":
                return self._require_this(frame).fields[expr.name]
            return frame.get(expr.name)
        if isinstance(expr, ThisRef):
            return self._require_this(frame)
        if isinstance(expr, FieldAccess):
            obj = self.eval(expr.obj, frame)
            if obj is None:
                raise MiniJRuntimeError("null-dereference", f"field '{expr.field_name}' of null")
            if isinstance(obj, ArrayValue):
                return len(obj.items)  # .length is the only array field
            return obj.fields[expr.field_name]
        if isinstance(expr, ArrayRead):
            array = self.eval(expr.array, frame)
            index = self.eval(expr.index, frame)
            if array is None:
                raise MiniJRuntimeError("null-dereference", "indexing null array")
            if not 0 <= index < len(array.items):
                raise MiniJRuntimeError("index-out-of-bounds", f"index {index} out of bounds for length {len(array.items)}")
            return array.items[index]
        if isinstance(expr, Binary):
            return self._binary(expr, frame)
        if isinstance(expr, UnaryPrefix):
            if expr.op == "!":
                return not self.eval(expr.operand, frame)
            if expr.op == "-":
                return -self.eval(expr.operand, frame)
            read, write = self._lvalue(expr.operand, frame)
            value = read() + (1 if expr.op == "++" else -1)
            write(value)
            return value
        if isinstance(expr, UnaryPostfix):
            read, write = self._lvalue(expr.operand, frame)
            value = read()
            write(value + (1 if expr.op == "++" else -1))
            return value
        if isinstance(expr, MethodCall):
            if expr.receiver is None:
                receiver = self._require_this(frame)
            else:
                receiver = self.eval(expr.receiver, frame)
                if receiver is None:
                    raise MiniJRuntimeError("null-dereference", f"calling '{expr.method}' on null")
            args = [self.eval(a, frame) for a in expr.args]
            return self.call_method(receiver, expr.method, args)
        if isinstance(expr, StaticCall):
            args = [self.eval(a, frame) for a in expr.args]
            return self._static_call(expr.class_name, expr.method, args)
        if isinstance(expr, Cast):
            value = self.eval(expr.operand, frame)
            if expr.target == ast.INT:
                return ord(value.ch) if isinstance(value, Char) else value
            return value if isinstance(value, Char) else Char(chr(value & 0xFFFF))
        if isinstance(expr, NewArray):
            size = self.eval(expr.size, frame)
            if size < 0:
                raise MiniJRuntimeError("negative-array-size", f"new array of size {size}")
            return ArrayValue(expr.element, [default_value(expr.element) for _ in range(size)])
        if isinstance(expr, NewObject):
            return self.construct(expr.class_name)
        raise TypeError(f"unhandled expression {type(expr).__name__}")

    def _binary(self, expr: Binary, frame: Frame):
        op = expr.op
        if op == "&&":
            return bool(self.eval(expr.left, frame)) and bool(self.eval(expr.right, frame))
        if op == "||":
            return bool(self.eval(expr.left, frame)) or bool(self.eval(expr.right, frame))
        left = self.eval(expr.left, frame)
        right = self.eval(expr.right, frame)
        if op == "==":
            return values_equal(left, right)
        if op == "!=":
            return not values_equal(left, right)
        if op in ("<", "<=", ">", ">="):
            a = ord(left.ch) if isinstance(left, Char) else left
            b = ord(right.ch) if isinstance(right, Char) else right
            return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
        if op == "+" and (isinstance(left, str) or isinstance(right, str)):
            if left is None or right is None:
                raise MiniJRuntimeError("null-dereference", "string concatenation with null")
            return display(left) + display(right)
        return self._arith(op, left, right)

    @staticmethod
    def _arith(op: str, a: int, b: int) -> int:
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if b == 0:
            raise MiniJRuntimeError("division-by-zero", f"{a} {op} 0")
        return java_div(a, b) if op == "/" else java_mod(a, b)

    def _lvalue(self, expr: Expr, frame: Frame) -> tuple[Callable, Callable]:
        if isinstance(expr, VarRef):
            if expr.binding == "field":
                obj = self._require_this(frame)
                return (lambda: obj.fields[expr.name]), (lambda v: obj.fields.__setitem__(expr.name, v))
            return (lambda: frame.get(expr.name)), (lambda v: frame.set(expr.name, v))
        if isinstance(expr, FieldAccess):
            obj = self.eval(expr.obj, frame)
            if obj is None:
                raise MiniJRuntimeError("null-dereference", f"field '{expr.field_name}' of null")
            return (lambda: obj.fields[expr.field_name]), (lambda v: obj.fields.__setitem__(expr.field_name, v))
        if isinstance(expr, ArrayRead):
            array = self.eval(expr.array, frame)
            index = self.eval(expr.index, frame)
            if array is None:
                raise MiniJRuntimeError("null-dereference", "indexing null array")
            if not 0 <= index < len(array.items):
                raise MiniJRuntimeError("index-out-of-bounds", f"index {index} out of bounds for length {len(array.items)}")
            return (lambda: array.items[index]), (lambda v: array.items.__setitem__(index, v))
        raise TypeError(f"not an lvalue: {type(expr).__name__}")

    def _require_this(self, frame: Frame) -> ObjectValue:
        if frame.this_obj is None:
            raise MiniJRuntimeError("null-dereference", "no enclosing object")
        return frame.this_obj

    # --- calls ---

    def call_method(self, receiver: ObjectValue, method_name: str, args: list):
        decl = self.program.find_method(receiver.class_name, method_name)
        if decl is None:
            raise MiniJRuntimeError("unknown-method", f"{receiver.class_name}.{method_name}")
        if self.call_depth >= self.max_call_depth:
            raise MiniJRuntimeError("stack-overflow", f"call depth exceeded {self.max_call_depth}")
        self._tick()
        frame = Frame(receiver)
        for param, arg in zip(decl.params, args):
            frame.declare(param.name, arg)

        observing = self.observer is not None and self.observer.matches(receiver.class_name, method_name)
        token = self.observer.on_enter(receiver, frame.flat_locals()) if observing else None

        self.call_depth += 1
        try:
            self.exec_block(decl.body, frame)
            result = None
        except _ReturnSignal as signal:
            result = signal.value
        finally:
            self.call_depth -= 1
        if observing:
            self.observer.on_exit(token, receiver, frame.flat_locals(), result)
        return result

    def _static_call(self, class_name: str, method_name: str, args: list):
        if class_name != "Math":
            raise MiniJRuntimeError("unknown-class", f"no static class '{class_name}'")
        if method_name == "abs":
            return abs(args[0])
        if method_name == "min":
            return min(args[0], args[1])
        if method_name == "max":
            return max(args[0], args[1])
        if method_name == "random":
            return self._next_random()
        raise MiniJRuntimeError("unknown-method", f"Math.{method_name}")

    # --- type assertion mode ---

    def _assert_type(self, expr: Expr, value) -> None:
        ty = expr.ty
        if ty is None:
            raise InterpreterInvariantError(f"unresolved type on {expr.kind} at {expr.span.line}:{expr.span.col}")
        if not _value_matches(ty, value):
            raise InterpreterInvariantError(
                f"runtime value {value!r} disagrees with resolved type {ty} at {expr.span.line}:{expr.span.col}"
            )


def _value_matches(ty: MiniJType, value) -> bool:
    if ty == ast.NULL:
        return value is None
    if ty == ast.INT:
        return type(value) is int
    if ty == ast.BOOLEAN:
        return type(value) is bool
    if ty == ast.CHAR:
        return isinstance(value, Char)
    if ty == ast.STRING:
        return value is None or isinstance(value, str)
    if ty == ast.VOID:
        return value is None
    if ty.is_array:
        return value is None or (isinstance(value, ArrayValue) and value.element == ty.element)
    return value is None or (isinstance(value, ObjectValue) and value.class_name == ty.base)


def _ensure_recursion_headroom() -> None:
    if sys.getrecursionlimit() < _PY_RECURSION_LIMIT:
        sys.setrecursionlimit(_PY_RECURSION_LIMIT)


def run_test(
    program: Program,
    test,
    budget: int = DEFAULT_BUDGET,
    *,
    random_seed: int = 0,
    check_types: bool = False,
    observer: Optional[MethodObserver] = None,
) -> ExecOutcome:
    """Execute one test against a checked program; never raises for program
    behavior — runtime errors and budget exhaustion are outcomes."""
    _ensure_recursion_headroom()
    interp = Interpreter(
        program,
        budget=budget,
        random_seed=random_seed,
        check_types=check_types,
        observer=observer,
    )
    frame = Frame(None)
    try:
        try:
            # Body statements share the test frame's root scope so the
            # verdict expression can see the locals they declare.
            for stmt in test.body.statements:
                interp.exec_stmt(stmt, frame)
        except _ReturnSignal:
            pass  # early `return;` skips the rest of the body, not the verdict
        verdict_value = interp.eval(test.verdict, frame)
    except BudgetExhausted:
        return ExecOutcome(Verdict.BUDGET_EXHAUSTED, interp.budget)
    except MiniJRuntimeError as err:
        return ExecOutcome(Verdict.RUNTIME_ERROR, interp.steps, err.kind, str(err))
    except RecursionError:
        return ExecOutcome(Verdict.RUNTIME_ERROR, interp.steps, "stack-overflow", "host recursion limit")
    if verdict_value is True:
        return ExecOutcome(Verdict.PASS, interp.steps)
    return ExecOutcome(Verdict.FAIL, interp.steps)
