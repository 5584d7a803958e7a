"""MiniJ type checker: the compile oracle for mutant viability.

Checking is two-pass (collect class signatures, then check bodies) so the
result is independent of declaration order. Every expression node is
annotated with its resolved type; var-refs additionally learn whether they
bind a local or a field, and `Math.*` calls are rewritten from method-call
nodes into static-call nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

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
    assignable,
)
from .tokens import SourceSpan

#: Built-in static class methods: name -> (param types, return type).
MATH_METHODS: dict[str, tuple[tuple[MiniJType, ...], MiniJType]] = {
    "abs": ((ast.INT,), ast.INT),
    "min": ((ast.INT, ast.INT), ast.INT),
    "max": ((ast.INT, ast.INT), ast.INT),
    "random": ((), ast.INT),
}

STATIC_CLASSES = {"Math": MATH_METHODS}

_COMPARABLE = (ast.INT, ast.CHAR)


@dataclass(frozen=True)
class TypeIssue:
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span.line}:{self.span.col}: {self.message}"


class CheckFailure(Exception):
    def __init__(self, issues: list[TypeIssue]):
        super().__init__("; ".join(str(i) for i in issues))
        self.issues = issues


@dataclass
class _Method:
    decl: MethodDecl
    params: tuple[MiniJType, ...]
    returns: MiniJType


@dataclass
class _Class:
    decl: ClassDecl
    fields: dict[str, MiniJType]
    methods: dict[str, _Method]


class _Scope:
    def __init__(self, parent: Optional["_Scope"] = None):
        self.parent = parent
        self.vars: dict[str, MiniJType] = {}

    def declare(self, name: str, ty: MiniJType) -> bool:
        if name in self.vars:
            return False
        self.vars[name] = ty
        return True

    def lookup(self, name: str) -> Optional[MiniJType]:
        scope: Optional[_Scope] = self
        while scope is not None:
            if name in scope.vars:
                return scope.vars[name]
            scope = scope.parent
        return None


class Checker:
    def __init__(self, program: Program):
        self.program = program
        self.issues: list[TypeIssue] = []
        self.classes: dict[str, _Class] = {}

    def error(self, message: str, span: SourceSpan) -> None:
        self.issues.append(TypeIssue(message, span))

    # --- signature collection ---

    def _valid_type(self, ty: MiniJType, span: SourceSpan, allow_void: bool = False) -> bool:
        base = ty
        while base.is_array:
            base = base.element
        if base == ast.VOID:
            if not (allow_void and ty == ast.VOID):
                self.error("void is not a usable type here", span)
                return False
            return True
        if base.is_reference and base.base != "string" and base.base not in self.classes:
            self.error(f"unknown type '{base.base}'", span)
            return False
        return True

    def collect(self) -> None:
        for cls in self.program.classes:
            if cls.name in self.classes or cls.name in STATIC_CLASSES:
                self.error(f"duplicate class '{cls.name}'", cls.span)
                continue
            self.classes[cls.name] = _Class(cls, {}, {})
        for cls in self.program.classes:
            info = self.classes.get(cls.name)
            if info is None or info.decl is not cls:
                continue
            for fld in cls.fields:
                if fld.name in info.fields:
                    self.error(f"duplicate field '{fld.name}' in class '{cls.name}'", fld.span)
                    continue
                if self._valid_type(fld.declared, fld.span):
                    info.fields[fld.name] = fld.declared
            for method in cls.methods:
                if method.name in info.methods:
                    self.error(f"duplicate method '{method.name}' in class '{cls.name}'", method.span)
                    continue
                ok = self._valid_type(method.return_type, method.span, allow_void=True)
                param_types = []
                seen = set()
                for p in method.params:
                    if p.name in seen:
                        self.error(f"duplicate parameter '{p.name}'", p.span)
                    seen.add(p.name)
                    self._valid_type(p.declared, p.span)
                    param_types.append(p.declared)
                if ok:
                    info.methods[method.name] = _Method(method, tuple(param_types), method.return_type)

    # --- body checking ---

    def check(self) -> None:
        self.collect()
        for cls in self.program.classes:
            info = self.classes.get(cls.name)
            if info is None or info.decl is not cls:
                continue
            for fld in cls.fields:
                if fld.init is not None:
                    ty = self.check_expr(fld.init, info, None)
                    if ty is not None and not assignable(fld.declared, ty):
                        self.error(f"cannot initialize {fld.declared} field '{fld.name}' with {ty}", fld.init.span)
            for method in cls.methods:
                self._check_method(info, method)

    def _check_method(self, cls: _Class, method: MethodDecl) -> None:
        scope = _Scope()
        for p in method.params:
            scope.declare(p.name, p.declared)
        self._check_block(method.body, cls, method, scope)

    def _check_block(self, block: Block, cls: _Class, method: MethodDecl, scope: _Scope) -> None:
        inner = _Scope(scope)
        for stmt in block.statements:
            self._check_stmt(stmt, cls, method, inner)

    def _check_stmt(self, stmt: Stmt, cls: _Class, method: MethodDecl, scope: _Scope) -> None:
        if isinstance(stmt, Block):
            self._check_block(stmt, cls, method, scope)
        elif isinstance(stmt, VarDecl):
            self._valid_type(stmt.declared, stmt.span)
            if stmt.init is not None:
                ty = self.check_expr(stmt.init, cls, method, scope)
                if ty is not None and not assignable(stmt.declared, ty):
                    self.error(f"cannot initialize {stmt.declared} variable '{stmt.name}' with {ty}", stmt.init.span)
            if not scope.declare(stmt.name, stmt.declared):
                self.error(f"duplicate variable '{stmt.name}'", stmt.name_span)
        elif isinstance(stmt, Assign):
            target_ty = self.check_expr(stmt.target, cls, method, scope)
            value_ty = self.check_expr(stmt.value, cls, method, scope)
            if target_ty is None or value_ty is None:
                return
            if stmt.op is None:
                if not assignable(target_ty, value_ty):
                    self.error(f"cannot assign {value_ty} to {target_ty}", stmt.value.span)
            else:
                if target_ty != ast.INT or value_ty != ast.INT:
                    self.error(f"compound '{stmt.op}=' needs int operands, got {target_ty} and {value_ty}", stmt.op_span)
        elif isinstance(stmt, ArrayWrite):
            arr_ty = self.check_expr(stmt.array, cls, method, scope)
            idx_ty = self.check_expr(stmt.index, cls, method, scope)
            value_ty = self.check_expr(stmt.value, cls, method, scope)
            elem: Optional[MiniJType] = None
            if arr_ty is not None:
                if not arr_ty.is_array:
                    self.error(f"cannot index non-array type {arr_ty}", stmt.array.span)
                else:
                    elem = arr_ty.element
            if idx_ty is not None and idx_ty != ast.INT:
                self.error(f"array index must be int, got {idx_ty}", stmt.index.span)
            if elem is not None and value_ty is not None:
                if stmt.op is None:
                    if not assignable(elem, value_ty):
                        self.error(f"cannot assign {value_ty} to {elem} element", stmt.value.span)
                elif elem != ast.INT or value_ty != ast.INT:
                    self.error(f"compound '{stmt.op}=' needs int operands, got {elem} and {value_ty}", stmt.op_span)
        elif isinstance(stmt, ExprStmt):
            self.check_expr(stmt.expr, cls, method, scope)
        elif isinstance(stmt, If):
            self._check_cond(stmt.cond, cls, method, scope)
            self._check_stmt(stmt.then_branch, cls, method, scope)
            if stmt.else_branch is not None:
                self._check_stmt(stmt.else_branch, cls, method, scope)
        elif isinstance(stmt, While):
            self._check_cond(stmt.cond, cls, method, scope)
            self._check_stmt(stmt.body, cls, method, scope)
        elif isinstance(stmt, For):
            inner = _Scope(scope)
            if stmt.init is not None:
                self._check_stmt(stmt.init, cls, method, inner)
            if stmt.cond is not None:
                self._check_cond(stmt.cond, cls, method, inner)
            if stmt.update is not None:
                self._check_stmt(stmt.update, cls, method, inner)
            self._check_stmt(stmt.body, cls, method, inner)
        elif isinstance(stmt, Return):
            expected = method.return_type
            if stmt.value is None:
                if expected != ast.VOID:
                    self.error(f"missing return value in method returning {expected}", stmt.span)
            else:
                ty = self.check_expr(stmt.value, cls, method, scope)
                if expected == ast.VOID:
                    self.error("void method may not return a value", stmt.value.span)
                elif ty is not None and not assignable(expected, ty):
                    self.error(f"return type mismatch: expected {expected}, got {ty}", stmt.value.span)
        else:
            raise TypeError(f"unhandled statement {type(stmt).__name__}")

    def _check_cond(self, cond: Expr, cls: _Class, method: MethodDecl, scope: _Scope) -> None:
        ty = self.check_expr(cond, cls, method, scope)
        if ty is not None and ty != ast.BOOLEAN:
            self.error(f"condition must be boolean, got {ty}", cond.span)

    # --- expressions ---

    def check_expr(self, expr: Expr, cls: _Class, method: Optional[MethodDecl], scope: Optional[_Scope] = None) -> Optional[MiniJType]:
        ty = self._expr_type(expr, cls, method, scope)
        expr.ty = ty
        return ty

    def _expr_type(self, expr: Expr, cls: _Class, method: Optional[MethodDecl], scope: Optional[_Scope]) -> Optional[MiniJType]:
        if isinstance(expr, Literal):
            return {
                "int": ast.INT,
                "boolean": ast.BOOLEAN,
                "char": ast.CHAR,
                "string": ast.STRING,
                "null": ast.NULL,
            }[expr.token_kind]

        if isinstance(expr, ThisRef):
            return ast.class_type(cls.decl.name)

        if isinstance(expr, VarRef):
            local = scope.lookup(expr.name) if scope is not None else None
            if local is not None:
                expr.binding = "local"
                return local
            if expr.name in cls.fields:
                expr.binding = "field"
                return cls.fields[expr.name]
            self.error(f"unknown identifier '{expr.name}'", expr.span)
            return None

        if isinstance(expr, FieldAccess):
            obj_ty = self.check_expr(expr.obj, cls, method, scope)
            if obj_ty is None:
                return None
            if obj_ty.is_array:
                if expr.field_name == "length":
                    return ast.INT
                self.error(f"arrays have no field '{expr.field_name}'", expr.name_span)
                return None
            target = self.classes.get(obj_ty.base)
            if target is None:
                self.error(f"type {obj_ty} has no fields", expr.obj.span)
                return None
            if expr.field_name not in target.fields:
                self.error(f"unknown field '{expr.field_name}' in class '{obj_ty.base}'", expr.name_span)
                return None
            return target.fields[expr.field_name]

        if isinstance(expr, ArrayRead):
            arr_ty = self.check_expr(expr.array, cls, method, scope)
            idx_ty = self.check_expr(expr.index, cls, method, scope)
            if idx_ty is not None and idx_ty != ast.INT:
                self.error(f"array index must be int, got {idx_ty}", expr.index.span)
            if arr_ty is None:
                return None
            if not arr_ty.is_array:
                self.error(f"cannot index non-array type {arr_ty}", expr.array.span)
                return None
            return arr_ty.element

        if isinstance(expr, Binary):
            return self._binary_type(expr, cls, method, scope)

        if isinstance(expr, UnaryPrefix):
            operand_ty = self.check_expr(expr.operand, cls, method, scope)
            if expr.op == "!":
                if operand_ty is not None and operand_ty != ast.BOOLEAN:
                    self.error(f"'!' needs a boolean operand, got {operand_ty}", expr.op_span)
                    return None
                return ast.BOOLEAN
            if expr.op == "-":
                if operand_ty is not None and operand_ty != ast.INT:
                    self.error(f"unary '-' needs an int operand, got {operand_ty}", expr.op_span)
                    return None
                return ast.INT
            # ++ / --
            if not self._is_lvalue(expr.operand):
                self.error(f"'{expr.op}' needs a variable, field, or array element", expr.operand.span)
                return None
            if operand_ty is not None and operand_ty != ast.INT:
                self.error(f"'{expr.op}' needs an int operand, got {operand_ty}", expr.op_span)
                return None
            return ast.INT

        if isinstance(expr, UnaryPostfix):
            operand_ty = self.check_expr(expr.operand, cls, method, scope)
            if not self._is_lvalue(expr.operand):
                self.error(f"'{expr.op}' needs a variable, field, or array element", expr.operand.span)
                return None
            if operand_ty is not None and operand_ty != ast.INT:
                self.error(f"'{expr.op}' needs an int operand, got {operand_ty}", expr.op_span)
                return None
            return ast.INT

        if isinstance(expr, MethodCall):
            return self._call_type(expr, cls, method, scope)

        if isinstance(expr, StaticCall):
            return self._static_call_type(expr, cls, method, scope)

        if isinstance(expr, Cast):
            operand_ty = self.check_expr(expr.operand, cls, method, scope)
            if operand_ty is not None and operand_ty not in (ast.INT, ast.CHAR):
                self.error(f"cannot cast {operand_ty} to {expr.target}", expr.span)
                return None
            return expr.target

        if isinstance(expr, NewArray):
            self._valid_type(expr.element, expr.span)
            size_ty = self.check_expr(expr.size, cls, method, scope)
            if size_ty is not None and size_ty != ast.INT:
                self.error(f"array size must be int, got {size_ty}", expr.size.span)
            return ast.array_of(expr.element)

        if isinstance(expr, NewObject):
            if expr.class_name not in self.classes:
                self.error(f"unknown class '{expr.class_name}'", expr.name_span)
                return None
            return ast.class_type(expr.class_name)

        raise TypeError(f"unhandled expression {type(expr).__name__}")

    def _binary_type(self, expr: Binary, cls: _Class, method, scope) -> Optional[MiniJType]:
        left = self.check_expr(expr.left, cls, method, scope)
        right = self.check_expr(expr.right, cls, method, scope)
        op = expr.op
        if left is None or right is None:
            return None
        if op in ("&&", "||"):
            if left != ast.BOOLEAN or right != ast.BOOLEAN:
                self.error(f"'{op}' needs boolean operands, got {left} and {right}", expr.op_span)
                return None
            return ast.BOOLEAN
        if op in ("<", "<=", ">", ">="):
            if left == right and left in _COMPARABLE:
                return ast.BOOLEAN
            self.error(f"'{op}' cannot compare {left} and {right}", expr.op_span)
            return None
        if op in ("==", "!="):
            if left == right and left != ast.VOID:
                return ast.BOOLEAN
            if (left == ast.NULL and right.is_reference) or (right == ast.NULL and left.is_reference):
                return ast.BOOLEAN
            self.error(f"'{op}' cannot compare {left} and {right}", expr.op_span)
            return None
        if op == "+":
            if left == ast.INT and right == ast.INT:
                return ast.INT
            concatable = (ast.INT, ast.BOOLEAN, ast.CHAR, ast.STRING)
            if (left == ast.STRING and right in concatable) or (right == ast.STRING and left in concatable):
                return ast.STRING
            self.error(f"'+' cannot combine {left} and {right}", expr.op_span)
            return None
        if op in ("-", "*", "/", "%"):
            if left == ast.INT and right == ast.INT:
                return ast.INT
            self.error(f"'{op}' needs int operands, got {left} and {right}", expr.op_span)
            return None
        raise ValueError(f"unknown binary operator {op!r}")

    def _call_type(self, expr: MethodCall, cls: _Class, method, scope) -> Optional[MiniJType]:
        # `Name.m(...)` where Name is not a variable resolves as a static call.
        if (
            isinstance(expr.receiver, VarRef)
            and expr.receiver.parens == 0
            and (scope is None or scope.lookup(expr.receiver.name) is None)
            and expr.receiver.name not in cls.fields
        ):
            name = expr.receiver.name
            if name in STATIC_CLASSES:
                rewritten = StaticCall(expr.span, name, expr.method, expr.args, expr.receiver.span, expr.name_span)
                rewritten.parens = expr.parens
                ty = self._static_call_type(rewritten, cls, method, scope)
                rewritten.ty = ty
                # splice the rewritten node over the original in place
                expr.__class__ = StaticCall
                expr.__dict__.clear()
                expr.__dict__.update(rewritten.__dict__)
                return ty
            self.error(f"unknown identifier '{name}'", expr.receiver.span)
            return None

        if expr.receiver is None:
            target = self.classes[cls.decl.name]
            receiver_desc = f"class '{cls.decl.name}'"
        else:
            recv_ty = self.check_expr(expr.receiver, cls, method, scope)
            if recv_ty is None:
                for arg in expr.args:
                    self.check_expr(arg, cls, method, scope)
                return None
            if recv_ty.is_array or recv_ty.base not in self.classes:
                self.error(f"type {recv_ty} has no methods", expr.receiver.span)
                for arg in expr.args:
                    self.check_expr(arg, cls, method, scope)
                return None
            target = self.classes[recv_ty.base]
            receiver_desc = f"class '{recv_ty.base}'"

        arg_types = [self.check_expr(a, cls, method, scope) for a in expr.args]
        sig = target.methods.get(expr.method)
        if sig is None:
            self.error(f"unknown method '{expr.method}' in {receiver_desc}", expr.name_span)
            return None
        if len(arg_types) != len(sig.params):
            self.error(
                f"method '{expr.method}' expects {len(sig.params)} argument(s), got {len(arg_types)}",
                expr.name_span,
            )
            return None
        for i, (got, want) in enumerate(zip(arg_types, sig.params)):
            if got is not None and not assignable(want, got):
                self.error(f"argument {i + 1} of '{expr.method}': expected {want}, got {got}", expr.args[i].span)
        return sig.returns

    def _static_call_type(self, expr: StaticCall, cls: _Class, method, scope) -> Optional[MiniJType]:
        table = STATIC_CLASSES.get(expr.class_name)
        arg_types = [self.check_expr(a, cls, method, scope) for a in expr.args]
        if table is None:
            self.error(f"unknown static class '{expr.class_name}'", expr.class_span)
            return None
        sig = table.get(expr.method)
        if sig is None:
            self.error(f"unknown static method '{expr.class_name}.{expr.method}'", expr.name_span)
            return None
        params, returns = sig
        if len(arg_types) != len(params):
            self.error(
                f"'{expr.class_name}.{expr.method}' expects {len(params)} argument(s), got {len(arg_types)}",
                expr.name_span,
            )
            return None
        for i, (got, want) in enumerate(zip(arg_types, params)):
            if got is not None and not assignable(want, got):
                self.error(f"argument {i + 1} of '{expr.method}': expected {want}, got {got}", expr.args[i].span)
        return returns

    @staticmethod
    def _is_lvalue(expr: Expr) -> bool:
        return isinstance(expr, (VarRef, FieldAccess, ArrayRead)) and expr.parens == 0


def check_program(program: Program) -> list[TypeIssue]:
    """Annotate the program with types; return all issues ([] means checked)."""
    checker = Checker(program)
    checker.check()
    return checker.issues


def type_check(program: Program) -> Program:
    """Check and annotate; raise CheckFailure listing every issue."""
    issues = check_program(program)
    if issues:
        raise CheckFailure(issues)
    return program
