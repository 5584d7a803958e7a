"""Canonical MiniJ pretty printer.

Re-lexing the printed text yields the same (kind, lexeme) token stream as
the original source: explicit parentheses are reproduced from the paren
counts recorded by the parser.
"""

from __future__ import annotations

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
    FieldDecl,
    For,
    If,
    Literal,
    MethodCall,
    MethodDecl,
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

_STRING_ESCAPES = {"\\": "\\\\", "\n": "\\n", "\t": "\\t", "\r": "\\r", "\0": "\\0"}


def _escape(text: str, quote: str) -> str:
    out = []
    for ch in text:
        if ch in _STRING_ESCAPES:
            out.append(_STRING_ESCAPES[ch])
        elif ch == quote:
            out.append("\\" + quote)
        else:
            out.append(ch)
    return "".join(out)


def expr_text(e: Expr) -> str:
    return "(" * e.parens + _expr(e) + ")" * e.parens


def _expr(e: Expr) -> str:
    if isinstance(e, Literal):
        if e.token_kind == "null":
            return "null"
        if e.token_kind == "boolean":
            return "true" if e.value else "false"
        if e.token_kind == "string":
            return '"' + _escape(e.value, '"') + '"'
        if e.token_kind == "char":
            return "'" + _escape(e.value, "'") + "'"
        return str(e.value)
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, ThisRef):
        return "this"
    if isinstance(e, FieldAccess):
        return f"{expr_text(e.obj)}.{e.field_name}"
    if isinstance(e, ArrayRead):
        return f"{expr_text(e.array)}[{expr_text(e.index)}]"
    if isinstance(e, Binary):
        return f"{expr_text(e.left)} {e.op} {expr_text(e.right)}"
    if isinstance(e, UnaryPrefix):
        body = expr_text(e.operand)
        sep = " " if e.op[-1] in "+-" and body[:1] in "+-" else ""  # keep `- -x` from re-lexing as `--x`
        return f"{e.op}{sep}{body}"
    if isinstance(e, UnaryPostfix):
        return f"{expr_text(e.operand)}{e.op}"
    if isinstance(e, MethodCall):
        args = ", ".join(expr_text(a) for a in e.args)
        if e.receiver is None:
            return f"{e.method}({args})"
        return f"{expr_text(e.receiver)}.{e.method}({args})"
    if isinstance(e, StaticCall):
        args = ", ".join(expr_text(a) for a in e.args)
        return f"{e.class_name}.{e.method}({args})"
    if isinstance(e, Cast):
        return f"({e.target}) {expr_text(e.operand)}"
    if isinstance(e, NewArray):
        return f"new {e.element}[{expr_text(e.size)}]"
    if isinstance(e, NewObject):
        return f"new {e.class_name}()"
    raise TypeError(f"unhandled expression {type(e).__name__}")


def _assign_op(op) -> str:
    return "=" if op is None else op + "="


def _stmt(s: Stmt, indent: int, out: list[str]) -> None:
    pad = "    " * indent
    if isinstance(s, Block):
        out.append(pad + "{")
        for inner in s.statements:
            _stmt(inner, indent + 1, out)
        out.append(pad + "}")
    elif isinstance(s, VarDecl):
        init = f" = {expr_text(s.init)}" if s.init is not None else ""
        out.append(f"{pad}{s.declared} {s.name}{init};")
    elif isinstance(s, Assign):
        out.append(f"{pad}{expr_text(s.target)} {_assign_op(s.op)} {expr_text(s.value)};")
    elif isinstance(s, ArrayWrite):
        out.append(f"{pad}{expr_text(s.array)}[{expr_text(s.index)}] {_assign_op(s.op)} {expr_text(s.value)};")
    elif isinstance(s, ExprStmt):
        out.append(f"{pad}{expr_text(s.expr)};")
    elif isinstance(s, If):
        out.append(f"{pad}if ({expr_text(s.cond)})")
        _stmt(s.then_branch, indent + (0 if isinstance(s.then_branch, Block) else 1), out)
        if s.else_branch is not None:
            out.append(pad + "else")
            _stmt(s.else_branch, indent + (0 if isinstance(s.else_branch, Block) else 1), out)
    elif isinstance(s, While):
        out.append(f"{pad}while ({expr_text(s.cond)})")
        _stmt(s.body, indent + (0 if isinstance(s.body, Block) else 1), out)
    elif isinstance(s, For):
        init = _inline_stmt(s.init) if s.init is not None else ""
        cond = expr_text(s.cond) if s.cond is not None else ""
        update = _inline_stmt(s.update) if s.update is not None else ""
        out.append(f"{pad}for ({init}; {cond}; {update})")
        _stmt(s.body, indent + (0 if isinstance(s.body, Block) else 1), out)
    elif isinstance(s, Return):
        if s.value is None:
            out.append(pad + "return;")
        else:
            out.append(f"{pad}return {expr_text(s.value)};")
    else:
        raise TypeError(f"unhandled statement {type(s).__name__}")


def _inline_stmt(s: Stmt) -> str:
    if isinstance(s, VarDecl):
        init = f" = {expr_text(s.init)}" if s.init is not None else ""
        return f"{s.declared} {s.name}{init}"
    if isinstance(s, Assign):
        return f"{expr_text(s.target)} {_assign_op(s.op)} {expr_text(s.value)}"
    if isinstance(s, ArrayWrite):
        return f"{expr_text(s.array)}[{expr_text(s.index)}] {_assign_op(s.op)} {expr_text(s.value)}"
    if isinstance(s, ExprStmt):
        return expr_text(s.expr)
    raise TypeError(f"statement not allowed in for header: {type(s).__name__}")


def pretty(program: Program) -> str:
    out: list[str] = []
    for cls in program.classes:
        out.append(f"class {cls.name} {{")
        for fld in cls.fields:
            init = f" = {expr_text(fld.init)}" if fld.init is not None else ""
            out.append(f"    {fld.declared} {fld.name}{init};")
        for method in cls.methods:
            params = ", ".join(f"{p.declared} {p.name}" for p in method.params)
            out.append(f"    {method.return_type} {method.name}({params})")
            _stmt(method.body, 1, out)
        out.append("}")
    return "\n".join(out) + ("\n" if out else "")
