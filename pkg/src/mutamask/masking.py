"""Mask-site enumeration and masked-sequence rendering.

Walks a checked program's method bodies, produces one site per maskable
token occurrence (or per whole array index), and renders each site as the
enclosing method's token stream with a single mask marker, truncated to
the 512-token window documented in docs/render.md.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator

from .lang import ast
from .lang.ast import (
    ArrayRead,
    ArrayWrite,
    Assign,
    Binary,
    Expr,
    FieldAccess,
    Literal,
    MethodCall,
    MethodDecl,
    Node,
    Program,
    StaticCall,
    UnaryPostfix,
    UnaryPrefix,
    VarRef,
)
from .lang.tokens import MASK_TEXT, SourceSpan, Token, TokenKind

MAX_SEQUENCE_TOKENS = 512


class OperatorFamily(Enum):
    BINARY_OP = "binary-op"
    UNARY_OP = "unary-op"
    LITERAL = "literal"
    VARIABLE_NAME = "variable-name"
    COMPOUND_ASSIGN_OP = "compound-assign-op"
    METHOD_NAME = "method-name"
    FIELD_NAME = "field-name"
    ARRAY_INDEX = "array-index"
    TYPE_REFERENCE = "type-reference"


_FAMILY_ORDER = {family: i for i, family in enumerate(OperatorFamily)}


@dataclass(frozen=True)
class MaskSite:
    family: OperatorFamily
    method: MethodDecl
    target_span: SourceSpan
    original: str  # the masked text (one token, or the whole index expression)

    @property
    def class_name(self) -> str:
        return self.method.class_name

    @property
    def method_name(self) -> str:
        return self.method.name


@dataclass(frozen=True)
class MaskedSequence:
    site: MaskSite
    tokens: tuple[Token, ...]
    window: tuple[int, int]  # [start, end] indices into the masked method stream

    @property
    def text(self) -> str:
        return render_tokens(self.tokens)

    @property
    def mask_index(self) -> int:
        for i, tok in enumerate(self.tokens):
            if tok.kind is TokenKind.MASK:
                return i
        raise ValueError("masked sequence has no mask marker")


_NO_SPACE_BEFORE = {";", ",", ")", "]"}
_NO_SPACE_AFTER = {"(", "["}


def render_tokens(tokens) -> str:
    """The normative token-to-text rule (docs/render.md): single spaces,
    except none before `; , ) ]` and none after `( [`."""
    parts: list[str] = []
    prev: Token | None = None
    for tok in tokens:
        if prev is not None and tok.lexeme not in _NO_SPACE_BEFORE and prev.lexeme not in _NO_SPACE_AFTER:
            parts.append(" ")
        parts.append(tok.lexeme)
        prev = tok
    return "".join(parts)


def _expr_sites(expr: Expr, method: MethodDecl, source: str) -> Iterator[MaskSite]:
    if isinstance(expr, Binary):
        yield MaskSite(OperatorFamily.BINARY_OP, method, expr.op_span, expr.op)
    elif isinstance(expr, (UnaryPrefix, UnaryPostfix)):
        yield MaskSite(OperatorFamily.UNARY_OP, method, expr.op_span, expr.op)
    elif isinstance(expr, Literal) and expr.token_kind != "null":
        span = expr.span
        yield MaskSite(OperatorFamily.LITERAL, method, span, source[span.start : span.end])
    elif isinstance(expr, VarRef):
        yield MaskSite(OperatorFamily.VARIABLE_NAME, method, expr.span, expr.name)
    elif isinstance(expr, MethodCall):
        yield MaskSite(OperatorFamily.METHOD_NAME, method, expr.name_span, expr.method)
    elif isinstance(expr, StaticCall):
        yield MaskSite(OperatorFamily.TYPE_REFERENCE, method, expr.class_span, expr.class_name)
        yield MaskSite(OperatorFamily.METHOD_NAME, method, expr.name_span, expr.method)
    elif isinstance(expr, FieldAccess):
        yield MaskSite(OperatorFamily.FIELD_NAME, method, expr.name_span, expr.field_name)
    elif isinstance(expr, ArrayRead):
        span = expr.index.span
        yield MaskSite(OperatorFamily.ARRAY_INDEX, method, span, source[span.start : span.end])


def _stmt_sites(node: Node, method: MethodDecl, source: str) -> Iterator[MaskSite]:
    if isinstance(node, Assign) and node.op is not None:
        op_span = node.op_span
        yield MaskSite(
            OperatorFamily.COMPOUND_ASSIGN_OP,
            method,
            SourceSpan(op_span.start, op_span.start + 1, op_span.line, op_span.col),
            node.op,
        )
    elif isinstance(node, ArrayWrite):
        if node.op is not None:
            op_span = node.op_span
            yield MaskSite(
                OperatorFamily.COMPOUND_ASSIGN_OP,
                method,
                SourceSpan(op_span.start, op_span.start + 1, op_span.line, op_span.col),
                node.op,
            )
        span = node.index.span
        yield MaskSite(OperatorFamily.ARRAY_INDEX, method, span, source[span.start : span.end])


def enumerate_sites(program: Program) -> list[MaskSite]:
    """All mask sites of a checked program, in deterministic source order
    (span start, then family tag order)."""
    sites: list[MaskSite] = []
    source = program.source
    for cls in program.classes:
        for method in cls.methods:
            for node in method.body.walk():
                if isinstance(node, Expr):
                    sites.extend(_expr_sites(node, method, source))
                else:
                    sites.extend(_stmt_sites(node, method, source))
    sites.sort(key=lambda s: (s.target_span.start, _FAMILY_ORDER[s.family]))
    return sites


def method_tokens(program: Program, method: MethodDecl) -> list[Token]:
    return [t for t in program.tokens if method.span.contains(t.span)]


def _masked_stream(program: Program, site: MaskSite) -> list[Token]:
    tokens = method_tokens(program, site.method)
    target = site.target_span
    mask = Token(TokenKind.MASK, MASK_TEXT, target)

    if site.family is OperatorFamily.ARRAY_INDEX:
        inside = [i for i, t in enumerate(tokens) if target.start <= t.span.start and t.span.end <= target.end]
        if not inside:
            raise ValueError("array-index site does not cover any token")
        first, last = inside[0], inside[-1]
        return tokens[:first] + [mask] + tokens[last + 1 :]

    if site.family is OperatorFamily.COMPOUND_ASSIGN_OP:
        # The site covers the arithmetic half of a `+=`-style token; the
        # rendered stream keeps the `=` half as its own token.
        for i, tok in enumerate(tokens):
            if tok.span.start == target.start:
                eq_span = SourceSpan(tok.span.end - 1, tok.span.end, tok.span.line, tok.span.col + 1)
                eq = Token(TokenKind.OPERATOR, "=", eq_span)
                return tokens[:i] + [mask, eq] + tokens[i + 1 :]
        raise ValueError("compound-assign site does not match a token")

    for i, tok in enumerate(tokens):
        if tok.span.start == target.start and tok.span.end == target.end:
            return tokens[:i] + [mask] + tokens[i + 1 :]
    raise ValueError(f"mask site does not match a token at {target.start}..{target.end}")


def render_masked(program: Program, site: MaskSite) -> MaskedSequence:
    """The method's token stream with the site masked, truncated to the
    maximal centered window of at most 512 tokens."""
    stream = _masked_stream(program, site)
    mask_at = next(i for i, t in enumerate(stream) if t.kind is TokenKind.MASK)

    lo = hi = mask_at
    # Alternate left then right from the mask until the limit or both bounds.
    while hi - lo + 1 < MAX_SEQUENCE_TOKENS and (lo > 0 or hi < len(stream) - 1):
        if lo > 0:
            lo -= 1
            if hi - lo + 1 >= MAX_SEQUENCE_TOKENS:
                break
        if hi < len(stream) - 1:
            hi += 1
    return MaskedSequence(site, tuple(stream[lo : hi + 1]), (lo, hi))
