"""MiniJ lexer.

Tokens carry source spans and the trivia (whitespace and comments) that
precedes them, so that concatenating ``trivia + lexeme`` over the token
stream reproduces the input exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class TokenKind(Enum):
    IDENT = "identifier"
    INT = "int-literal"
    STRING = "string-literal"
    CHAR = "char-literal"
    BOOL = "bool-literal"
    OPERATOR = "operator"
    KEYWORD = "keyword"
    PUNCT = "punctuation"
    MASK = "mask-marker"


@dataclass(frozen=True)
class SourceSpan:
    """Half-open [start, end) offsets into the source text, plus the
    line/column (1-based) of the first character."""

    start: int
    end: int
    line: int
    col: int

    def contains(self, other: "SourceSpan") -> bool:
        return self.start <= other.start and other.end <= self.end


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    span: SourceSpan
    trivia: str = ""  # whitespace/comments between the previous token and this one


#: Text used for the mask token in rendered masked sequences and on the wire.
MASK_TEXT = "<mask>"

KEYWORDS = frozenset(
    {
        "class", "int", "boolean", "char", "string", "void",
        "if", "else", "while", "for", "return", "new", "null", "this",
        "test", "assert",
    }
)

TYPE_KEYWORDS = frozenset({"int", "boolean", "char", "string", "void"})

# Maximal munch: longer operators first.
_OPERATORS = (
    "<=", ">=", "==", "!=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=",
    "+", "-", "*", "/", "%", "<", ">", "!", "=",
)

_PUNCT = "(){}[];,."

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", "'": "'", '"': '"', "0": "\0"}


class LexError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span.line}:{span.col}: {message}")
        self.message = message
        self.span = span


def unescape(body: str, span: SourceSpan) -> str:
    """Decode backslash escapes in a string/char literal body."""
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            if i + 1 >= len(body):
                raise LexError("dangling escape in literal", span)
            esc = body[i + 1]
            if esc not in _ESCAPES:
                raise LexError(f"unknown escape '\\{esc}'", span)
            out.append(_ESCAPES[esc])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Lexer:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def _advance(self, n: int) -> None:
        for _ in range(n):
            if self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _span_from(self, start: int, line: int, col: int) -> SourceSpan:
        return SourceSpan(start, self.pos, line, col)

    def _here(self) -> SourceSpan:
        return SourceSpan(self.pos, min(self.pos + 1, len(self.src)), self.line, self.col)

    def _skip_trivia(self) -> str:
        start = self.pos
        while self.pos < len(self.src):
            ch = self.src[self.pos]
            if ch in " \t\r\n":
                self._advance(1)
            elif self.src.startswith("//", self.pos):
                while self.pos < len(self.src) and self.src[self.pos] != "\n":
                    self._advance(1)
            elif self.src.startswith("/*", self.pos):
                open_span = self._here()
                self._advance(2)
                while not self.src.startswith("*/", self.pos):
                    if self.pos >= len(self.src):
                        raise LexError("unterminated block comment", open_span)
                    self._advance(1)
                self._advance(2)
            else:
                break
        return self.src[start : self.pos]

    def _quoted(self, quote: str, what: str) -> str:
        open_span = self._here()
        self._advance(1)
        while True:
            if self.pos >= len(self.src) or self.src[self.pos] == "\n":
                raise LexError(f"unterminated {what} literal", open_span)
            ch = self.src[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.src):
                    raise LexError(f"unterminated {what} literal", open_span)
                self._advance(2)
            elif ch == quote:
                self._advance(1)
                return self.src[open_span.start : self.pos]
            else:
                self._advance(1)

    def run(self) -> list[Token]:
        tokens: list[Token] = []
        while True:
            trivia = self._skip_trivia()
            if self.pos >= len(self.src):
                break  # trailing trivia stays recoverable via trailing_trivia()
            start, line, col = self.pos, self.line, self.col
            ch = self.src[self.pos]

            if ch.isalpha() or ch == "_":
                while self.pos < len(self.src) and (self.src[self.pos].isalnum() or self.src[self.pos] == "_"):
                    self._advance(1)
                text = self.src[start : self.pos]
                if text in ("true", "false"):
                    kind = TokenKind.BOOL
                elif text in KEYWORDS:
                    kind = TokenKind.KEYWORD
                else:
                    kind = TokenKind.IDENT
                tokens.append(Token(kind, text, self._span_from(start, line, col), trivia))
            elif ch.isdigit():
                while self.pos < len(self.src) and self.src[self.pos].isdigit():
                    self._advance(1)
                tokens.append(Token(TokenKind.INT, self.src[start : self.pos], self._span_from(start, line, col), trivia))
            elif ch == '"':
                text = self._quoted('"', "string")
                span = self._span_from(start, line, col)
                unescape(text[1:-1], span)  # validate escapes eagerly
                tokens.append(Token(TokenKind.STRING, text, span, trivia))
            elif ch == "'":
                text = self._quoted("'", "char")
                span = self._span_from(start, line, col)
                value = unescape(text[1:-1], span)
                if len(value) != 1:
                    raise LexError("char literal must contain exactly one character", span)
                tokens.append(Token(TokenKind.CHAR, text, span, trivia))
            else:
                for op in _OPERATORS:
                    if self.src.startswith(op, self.pos):
                        self._advance(len(op))
                        tokens.append(Token(TokenKind.OPERATOR, op, self._span_from(start, line, col), trivia))
                        break
                else:
                    if ch in _PUNCT:
                        self._advance(1)
                        tokens.append(Token(TokenKind.PUNCT, ch, self._span_from(start, line, col), trivia))
                    else:
                        raise LexError(f"illegal character {ch!r}", self._here())
        return tokens


def lex(source: str) -> list[Token]:
    """Tokenize MiniJ source. Raises LexError with a span on bad input."""
    return _Lexer(source).run()


def trailing_trivia(source: str, tokens: list[Token]) -> str:
    """The whitespace/comments after the last token (round-trip helper)."""
    if not tokens:
        return source
    return source[tokens[-1].span.end :]


def literal_value(token: Token):
    """Python value of a literal token."""
    if token.kind is TokenKind.INT:
        return int(token.lexeme)
    if token.kind is TokenKind.BOOL:
        return token.lexeme == "true"
    if token.kind is TokenKind.STRING:
        return unescape(token.lexeme[1:-1], token.span)
    if token.kind is TokenKind.CHAR:
        return unescape(token.lexeme[1:-1], token.span)
    raise ValueError(f"not a literal token: {token.kind}")
