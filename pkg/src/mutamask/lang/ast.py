"""MiniJ abstract syntax tree.

One dataclass per node kind. Every node carries a source span; expression
nodes additionally carry a resolved type (filled in by the checker) and a
paren count so the pretty printer can reproduce the original token stream.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .tokens import SourceSpan, Token


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MiniJType:
    """A MiniJ type: a primitive, ``void``, a class name, or an array."""

    base: str  # "int" | "boolean" | "char" | "string" | "void" | "null" | class name
    element: Optional["MiniJType"] = None  # set iff this is an array type

    def __post_init__(self):
        if self.element is not None and self.element.base == "void" and self.element.element is None:
            raise ValueError("array element type may not be void")

    @property
    def is_array(self) -> bool:
        return self.element is not None

    @property
    def is_reference(self) -> bool:
        return self.is_array or self.base not in ("int", "boolean", "char", "void", "null")

    def __str__(self) -> str:
        if self.is_array:
            return f"{self.element}[]"
        return self.base


INT = MiniJType("int")
BOOLEAN = MiniJType("boolean")
CHAR = MiniJType("char")
STRING = MiniJType("string")
VOID = MiniJType("void")
NULL = MiniJType("null")  # type of the null literal, assignable to references


def array_of(element: MiniJType) -> MiniJType:
    return MiniJType("[]", element)


def class_type(name: str) -> MiniJType:
    return MiniJType(name)


def assignable(target: MiniJType, value: MiniJType) -> bool:
    if target == value:
        return True
    return value == NULL and target.is_reference


# ---------------------------------------------------------------------------
# Nodes
# ---------------------------------------------------------------------------

@dataclass
class Node:
    span: SourceSpan

    @property
    def kind(self) -> str:
        return _KIND_NAMES[type(self)]

    def children(self) -> Iterator["Node"]:
        """Child nodes in source order."""
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Node):
                yield value
            elif isinstance(value, list):
                for item in value:
                    if isinstance(item, Node):
                        yield item

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.children():
            yield from child.walk()


@dataclass
class Expr(Node):
    # Resolved by the checker; compared in structural equality so two checked
    # parses of the same text are equal.
    ty: Optional[MiniJType] = field(default=None, init=False)
    # Number of explicit paren pairs around this expression in the source.
    parens: int = field(default=0, init=False)


@dataclass
class Stmt(Node):
    pass


@dataclass
class Literal(Expr):
    value: object  # int | bool | str (string/char payload) | None for null
    token_kind: str  # "int" | "boolean" | "char" | "string" | "null"


@dataclass
class VarRef(Expr):
    name: str
    binding: Optional[str] = field(default=None, init=False)  # "local" | "field"


@dataclass
class FieldAccess(Expr):
    obj: Expr
    field_name: str
    name_span: SourceSpan


@dataclass
class ArrayRead(Expr):
    array: Expr
    index: Expr


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    op_span: SourceSpan


@dataclass
class UnaryPrefix(Expr):
    op: str  # "!" | "-" | "++" | "--"
    operand: Expr
    op_span: SourceSpan


@dataclass
class UnaryPostfix(Expr):
    operand: Expr
    op: str  # "++" | "--"
    op_span: SourceSpan


@dataclass
class MethodCall(Expr):
    receiver: Optional[Expr]  # None for implicit-this calls
    method: str
    args: list[Expr]
    name_span: SourceSpan


@dataclass
class StaticCall(Expr):
    class_name: str
    method: str
    args: list[Expr]
    class_span: SourceSpan
    name_span: SourceSpan


@dataclass
class Cast(Expr):
    target: MiniJType  # int or char
    operand: Expr


@dataclass
class NewArray(Expr):
    element: MiniJType
    size: Expr


@dataclass
class NewObject(Expr):
    class_name: str
    name_span: SourceSpan


@dataclass
class ThisRef(Expr):
    pass


# --- statements ---

@dataclass
class Block(Stmt):
    statements: list[Stmt]


@dataclass
class VarDecl(Stmt):
    declared: MiniJType
    name: str
    init: Optional[Expr]
    name_span: SourceSpan


@dataclass
class Assign(Stmt):
    """Assignment to a variable or field. `op` is None for plain `=`,
    otherwise the arithmetic half of a compound operator."""

    target: Expr  # VarRef | FieldAccess
    op: Optional[str]  # None | "+" | "-" | "*" | "/"
    value: Expr
    op_span: SourceSpan


@dataclass
class ArrayWrite(Stmt):
    array: Expr
    index: Expr
    op: Optional[str]
    value: Expr
    op_span: SourceSpan


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class If(Stmt):
    cond: Expr
    then_branch: Stmt
    else_branch: Optional[Stmt]


@dataclass
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass
class For(Stmt):
    init: Optional[Stmt]  # VarDecl | Assign | ArrayWrite | ExprStmt
    cond: Optional[Expr]
    update: Optional[Stmt]  # Assign | ArrayWrite | ExprStmt
    body: Stmt


@dataclass
class Return(Stmt):
    value: Optional[Expr]


# --- declarations ---

@dataclass
class Param(Node):
    declared: MiniJType
    name: str


@dataclass
class FieldDecl(Node):
    declared: MiniJType
    name: str
    init: Optional[Expr]


@dataclass
class MethodDecl(Node):
    return_type: MiniJType
    name: str
    params: list[Param]
    body: Block
    name_span: SourceSpan
    class_name: str = field(default="", init=False)  # owner, set by the parser


@dataclass
class ClassDecl(Node):
    name: str
    fields: list[FieldDecl]
    methods: list[MethodDecl]


@dataclass
class Program(Node):
    classes: list[ClassDecl]
    source: str = field(default="", repr=False, compare=False)
    tokens: list[Token] = field(default_factory=list, repr=False, compare=False)

    def find_class(self, name: str) -> Optional[ClassDecl]:
        for cls in self.classes:
            if cls.name == name:
                return cls
        return None

    def find_method(self, class_name: str, method: str) -> Optional[MethodDecl]:
        cls = self.find_class(class_name)
        if cls is None:
            return None
        for m in cls.methods:
            if m.name == method:
                return m
        return None


_KIND_NAMES = {
    ClassDecl: "class-decl",
    FieldDecl: "field-decl",
    MethodDecl: "method-decl",
    Param: "param",
    Block: "block",
    If: "if",
    While: "while",
    For: "for",
    Return: "return",
    ExprStmt: "expr-stmt",
    VarDecl: "var-decl",
    Assign: "assign",
    Binary: "binary",
    UnaryPrefix: "unary-prefix",
    UnaryPostfix: "unary-postfix",
    Literal: "literal",
    VarRef: "var-ref",
    FieldAccess: "field-access",
    ArrayRead: "array-read",
    ArrayWrite: "array-write",
    MethodCall: "method-call",
    StaticCall: "static-call",
    Cast: "cast",
    NewArray: "new-array",
    NewObject: "new-object",
    ThisRef: "this-ref",
    Program: "program",
}
