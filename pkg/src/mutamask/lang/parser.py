"""Recursive-descent parser for MiniJ.

The grammar implemented here is the one documented in docs/grammar.md.
Every node gets a span covering its tokens; parenthesized expressions
record their paren count so pretty-printing reproduces the token stream.
"""

from __future__ import annotations

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
    FieldDecl,
    For,
    If,
    Literal,
    MethodCall,
    MethodDecl,
    MiniJType,
    NewArray,
    NewObject,
    Param,
    Program,
    Return,
    Stmt,
    ThisRef,
    UnaryPostfix,
    UnaryPrefix,
    VarDecl,
    VarRef,
    While,
)
from .tokens import SourceSpan, Token, TokenKind, lex, literal_value

_TYPE_BASES = {"int": ast.INT, "boolean": ast.BOOLEAN, "char": ast.CHAR, "string": ast.STRING, "void": ast.VOID}

_COMPOUND_OPS = {"+=": "+", "-=": "-", "*=": "*", "/=": "/"}


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, expected: tuple[str, ...] = ()):
        super().__init__(f"{span.line}:{span.col}: {message}")
        self.message = message
        self.span = span
        self.expected = expected


def _join(a: SourceSpan, b: SourceSpan) -> SourceSpan:
    return SourceSpan(a.start, b.end, a.line, a.col)


class Parser:
    def __init__(self, tokens: list[Token], source: str = ""):
        self.tokens = tokens
        self.source = source
        self.pos = 0

    # --- token helpers ---

    def _peek(self, offset: int = 0) -> Optional[Token]:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def _at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def _error(self, message: str, expected: tuple[str, ...] = ()) -> ParseError:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1].span if self.tokens else SourceSpan(0, 0, 1, 1)
            span = SourceSpan(last.end, last.end, last.line, last.col)
            return ParseError(f"unexpected end of input: {message}", span, expected)
        return ParseError(f"{message} (found {tok.lexeme!r})", tok.span, expected)

    def _advance(self) -> Token:
        tok = self._peek()
        if tok is None:
            raise self._error("unexpected end of input")
        self.pos += 1
        return tok

    def _check(self, lexeme: str) -> bool:
        tok = self._peek()
        return tok is not None and tok.lexeme == lexeme

    def _match(self, lexeme: str) -> Optional[Token]:
        if self._check(lexeme):
            return self._advance()
        return None

    def _expect(self, lexeme: str) -> Token:
        tok = self._match(lexeme)
        if tok is None:
            raise self._error(f"expected {lexeme!r}", expected=(lexeme,))
        return tok

    def _expect_ident(self, what: str = "identifier") -> Token:
        tok = self._peek()
        if tok is None or tok.kind is not TokenKind.IDENT:
            raise self._error(f"expected {what}", expected=("identifier",))
        return self._advance()

    # --- types ---

    def _at_type(self) -> bool:
        """Lookahead: does a type start here? IDENT counts as a type start
        only when followed by another IDENT or by `[` `]` (a declaration)."""
        tok = self._peek()
        if tok is None:
            return False
        if tok.lexeme in _TYPE_BASES:
            return True
        if tok.kind is TokenKind.IDENT:
            i = 1
            while True:
                a, b = self._peek(i), self._peek(i + 1)
                if a is not None and a.lexeme == "[" and b is not None and b.lexeme == "]":
                    i += 2
                    continue
                return a is not None and a.kind is TokenKind.IDENT
        return False

    def _parse_type(self) -> tuple[MiniJType, SourceSpan]:
        tok = self._advance()
        if tok.lexeme in _TYPE_BASES:
            ty = _TYPE_BASES[tok.lexeme]
        elif tok.kind is TokenKind.IDENT:
            ty = ast.class_type(tok.lexeme)
        else:
            raise ParseError(f"expected type, found {tok.lexeme!r}", tok.span)
        span = tok.span
        while self._check("["):
            self._advance()
            close = self._expect("]")
            if ty == ast.VOID:
                raise ParseError("array element type may not be void", span)
            ty = ast.array_of(ty)
            span = _join(span, close.span)
        return ty, span

    # --- program structure ---

    def parse_program(self) -> Program:
        classes = [self._parse_class()]  # unit := class+
        while not self._at_end():
            classes.append(self._parse_class())
        span = _join(classes[0].span, classes[-1].span)
        return Program(span, classes, source=self.source, tokens=self.tokens)

    def _parse_class(self) -> ClassDecl:
        kw = self._expect("class")
        name = self._expect_ident("class name")
        self._expect("{")
        fields: list[FieldDecl] = []
        methods: list[MethodDecl] = []
        while not self._check("}"):
            member = self._parse_member(name.lexeme)
            if isinstance(member, FieldDecl):
                fields.append(member)
            else:
                methods.append(member)
        close = self._expect("}")
        return ClassDecl(_join(kw.span, close.span), name.lexeme, fields, methods)

    def _parse_member(self, class_name: str):
        ty, ty_span = self._parse_type()
        name = self._expect_ident("member name")
        if self._check("("):
            return self._parse_method(ty, ty_span, name, class_name)
        init = None
        if self._match("="):
            init = self._parse_expr()
        semi = self._expect(";")
        return FieldDecl(_join(ty_span, semi.span), ty, name.lexeme, init)

    def _parse_method(self, return_type: MiniJType, ty_span: SourceSpan, name: Token, class_name: str) -> MethodDecl:
        self._expect("(")
        params: list[Param] = []
        if not self._check(")"):
            while True:
                p_ty, p_span = self._parse_type()
                p_name = self._expect_ident("parameter name")
                params.append(Param(_join(p_span, p_name.span), p_ty, p_name.lexeme))
                if not self._match(","):
                    break
        self._expect(")")
        body = self._parse_block()
        decl = MethodDecl(_join(ty_span, body.span), return_type, name.lexeme, params, body, name.span)
        decl.class_name = class_name
        return decl

    # --- statements ---

    def _parse_block(self) -> Block:
        open_ = self._expect("{")
        stmts: list[Stmt] = []
        while not self._check("}"):
            stmts.append(self._parse_stmt())
        close = self._expect("}")
        return Block(_join(open_.span, close.span), stmts)

    def _parse_stmt(self) -> Stmt:
        tok = self._peek()
        if tok is None:
            raise self._error("expected statement")
        if tok.lexeme == "{":
            return self._parse_block()
        if tok.lexeme == "if":
            return self._parse_if()
        if tok.lexeme == "while":
            return self._parse_while()
        if tok.lexeme == "for":
            return self._parse_for()
        if tok.lexeme == "return":
            kw = self._advance()
            value = self._parse_expr()  # bare `return;` is not grammatical
            semi = self._expect(";")
            return Return(_join(kw.span, semi.span), value)
        if self._at_type():
            return self._parse_var_decl()
        stmt = self._parse_simple_stmt()
        semi = self._expect(";")
        stmt.span = _join(stmt.span, semi.span)
        return stmt

    def _parse_var_decl(self) -> VarDecl:
        ty, ty_span = self._parse_type()
        name = self._expect_ident("variable name")
        init = None
        if self._match("="):
            init = self._parse_expr()
        semi = self._expect(";")
        return VarDecl(_join(ty_span, semi.span), ty, name.lexeme, init, name.span)

    def _parse_simple_stmt(self) -> Stmt:
        """An assignment or a bare expression (no trailing `;`)."""
        expr = self._parse_expr()
        tok = self._peek()
        if tok is not None and tok.kind is TokenKind.OPERATOR and (tok.lexeme == "=" or tok.lexeme in _COMPOUND_OPS):
            op_tok = self._advance()
            value = self._parse_expr()
            op = None if op_tok.lexeme == "=" else _COMPOUND_OPS[op_tok.lexeme]
            span = _join(expr.span, value.span)
            if isinstance(expr, ArrayRead) and expr.parens == 0:
                return ArrayWrite(span, expr.array, expr.index, op, value, op_tok.span)
            if isinstance(expr, (VarRef, FieldAccess)) and expr.parens == 0:
                return Assign(span, expr, op, value, op_tok.span)
            raise ParseError("assignment target must be a variable, field, or array element", expr.span)
        return ExprStmt(expr.span, expr)

    def _parse_if(self) -> If:
        kw = self._expect("if")
        self._expect("(")
        cond = self._parse_expr()
        self._expect(")")
        then_branch = self._parse_stmt()
        else_branch = None
        if self._match("else"):
            else_branch = self._parse_stmt()
        end = else_branch.span if else_branch else then_branch.span
        return If(_join(kw.span, end), cond, then_branch, else_branch)

    def _parse_while(self) -> While:
        kw = self._expect("while")
        self._expect("(")
        cond = self._parse_expr()
        self._expect(")")
        body = self._parse_stmt()
        return While(_join(kw.span, body.span), cond, body)

    def _parse_for(self) -> For:
        kw = self._expect("for")
        self._expect("(")
        init: Optional[Stmt] = None
        if not self._check(";"):
            if self._at_type():
                ty, ty_span = self._parse_type()
                name = self._expect_ident("variable name")
                init_expr = None
                if self._match("="):
                    init_expr = self._parse_expr()
                end = init_expr.span if init_expr is not None else name.span
                init = VarDecl(_join(ty_span, end), ty, name.lexeme, init_expr, name.span)
            else:
                init = self._parse_simple_stmt()
            self._expect(";")
        else:
            self._expect(";")
        cond = None if self._check(";") else self._parse_expr()
        self._expect(";")
        update = None if self._check(")") else self._parse_simple_stmt()
        self._expect(")")
        body = self._parse_stmt()
        return For(_join(kw.span, body.span), init, cond, update, body)

    # --- expressions ---

    def _parse_expr(self) -> Expr:
        return self._parse_binary(0)

    _BINARY_LEVELS = (("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-"), ("*", "/", "%"))

    def _parse_binary(self, level: int) -> Expr:
        if level >= len(self._BINARY_LEVELS):
            return self._parse_unary()
        ops = self._BINARY_LEVELS[level]
        left = self._parse_binary(level + 1)
        while True:
            tok = self._peek()
            if tok is None or tok.kind is not TokenKind.OPERATOR or tok.lexeme not in ops:
                return left
            op_tok = self._advance()
            right = self._parse_binary(level + 1)
            left = Binary(_join(left.span, right.span), op_tok.lexeme, left, right, op_tok.span)

    def _parse_unary(self) -> Expr:
        tok = self._peek()
        if tok is not None and tok.kind is TokenKind.OPERATOR and tok.lexeme in ("!", "-", "++", "--"):
            op_tok = self._advance()
            operand = self._parse_unary()
            return UnaryPrefix(_join(op_tok.span, operand.span), op_tok.lexeme, operand, op_tok.span)
        # cast: `(` int|char `)` unary
        nxt = self._peek(1)
        after = self._peek(2)
        if (
            tok is not None
            and tok.lexeme == "("
            and nxt is not None
            and nxt.lexeme in ("int", "char")
            and after is not None
            and after.lexeme == ")"
        ):
            open_ = self._advance()
            target = _TYPE_BASES[self._advance().lexeme]
            self._expect(")")
            operand = self._parse_unary()
            return Cast(_join(open_.span, operand.span), target, operand)
        return self._parse_postfix()

    def _parse_postfix(self) -> Expr:
        expr = self._parse_primary()
        while True:
            tok = self._peek()
            if tok is None:
                return expr
            if tok.lexeme == ".":
                self._advance()
                name = self._expect_ident("member name")
                if self._check("("):
                    args, close = self._parse_args()
                    expr = MethodCall(_join(expr.span, close.span), expr, name.lexeme, args, name.span)
                else:
                    expr = FieldAccess(_join(expr.span, name.span), expr, name.lexeme, name.span)
            elif tok.lexeme == "[":
                self._advance()
                index = self._parse_expr()
                close = self._expect("]")
                expr = ArrayRead(_join(expr.span, close.span), expr, index)
            elif tok.kind is TokenKind.OPERATOR and tok.lexeme in ("++", "--"):
                op_tok = self._advance()
                expr = UnaryPostfix(_join(expr.span, op_tok.span), expr, op_tok.lexeme, op_tok.span)
            else:
                return expr

    def _parse_args(self) -> tuple[list[Expr], Token]:
        self._expect("(")
        args: list[Expr] = []
        if not self._check(")"):
            while True:
                args.append(self._parse_expr())
                if not self._match(","):
                    break
        close = self._expect(")")
        return args, close

    def _parse_primary(self) -> Expr:
        tok = self._peek()
        if tok is None:
            raise self._error("expected expression")
        if tok.kind in (TokenKind.INT, TokenKind.STRING, TokenKind.CHAR, TokenKind.BOOL):
            self._advance()
            kind = {
                TokenKind.INT: "int",
                TokenKind.STRING: "string",
                TokenKind.CHAR: "char",
                TokenKind.BOOL: "boolean",
            }[tok.kind]
            return Literal(tok.span, literal_value(tok), kind)
        if tok.lexeme == "null":
            self._advance()
            return Literal(tok.span, None, "null")
        if tok.lexeme == "this":
            self._advance()
            return ThisRef(tok.span)
        if tok.lexeme == "new":
            return self._parse_new()
        if tok.lexeme == "(":
            self._advance()
            inner = self._parse_expr()
            self._expect(")")
            # The node's span stays the bare expression; the paren count alone
            # records the wrapping for printing.
            inner.parens += 1
            return inner
        if tok.kind is TokenKind.IDENT:
            name = self._advance()
            if self._check("("):
                args, close = self._parse_args()
                return MethodCall(_join(name.span, close.span), None, name.lexeme, args, name.span)
            return VarRef(name.span, name.lexeme)
        raise self._error("expected expression")

    def _parse_new(self) -> Expr:
        kw = self._expect("new")
        tok = self._advance()
        if tok.lexeme in _TYPE_BASES and tok.lexeme != "void":
            base = _TYPE_BASES[tok.lexeme]
            self._expect("[")
            size = self._parse_expr()
            close = self._expect("]")
            return NewArray(_join(kw.span, close.span), base, size)
        if tok.kind is TokenKind.IDENT:
            if self._check("["):
                self._advance()
                size = self._parse_expr()
                close = self._expect("]")
                return NewArray(_join(kw.span, close.span), ast.class_type(tok.lexeme), size)
            self._expect("(")
            close = self._expect(")")
            return NewObject(_join(kw.span, close.span), tok.lexeme, tok.span)
        raise ParseError(f"expected type after 'new', found {tok.lexeme!r}", tok.span)


def parse(tokens: list[Token], source: str = "") -> Program:
    """Parse a token stream into a Program (raises ParseError)."""
    return Parser(tokens, source).parse_program()


def parse_source(source: str) -> Program:
    """Lex and parse MiniJ source text."""
    return parse(lex(source), source)
