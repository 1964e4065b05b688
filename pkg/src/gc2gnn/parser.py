"""Concrete syntax for GC2 queries.

Grammar::

    formula  := or_expr
    or_expr  := and_expr { "or" and_expr }
    and_expr := unary { "and" unary }
    unary    := "not" unary | "exists>=" INT unary | atom
    atom     := "col(" INT ")" | "true" | "(" formula ")"

Whitespace between tokens is insignificant, so ``exists >= 2`` and
``col ( 1 )`` are accepted. Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .errors import FormulaError, ParseError
from .formula import And, Col, ExistsGeq, Formula, Not, Or, Top


class SourceSpan(NamedTuple):
    """Offsets ``[start, end)`` into the query text."""

    start: int
    end: int


@dataclass(frozen=True)
class Token:
    kind: str  # "word", "int", "op", "eof"
    text: str
    start: int

    @property
    def span(self):
        return SourceSpan(self.start, self.start + len(self.text))


_TOKEN_RE = re.compile(r"\s*(?:(?P<int>\d+)|(?P<word>[A-Za-z_]\w*)|(?P<op>>=|\(|\)))")
_COMMENT_RE = re.compile(r"(?m)^[ \t]*#.*$")
_KEYWORDS = {"not", "and", "or", "exists", "col", "true"}


def strip_comments(text: str) -> str:
    """Blank out ``#`` comment lines, keeping offsets stable."""
    return _COMMENT_RE.sub(lambda m: " " * len(m.group()), text)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            tokens.append(Token("eof", "", n))
            return tokens
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", SourceSpan(pos, pos + 1))
        kind = m.lastgroup
        tok = m.group(kind)
        start = m.start(kind)
        if kind == "word" and tok not in _KEYWORDS:
            raise ParseError(f"unknown keyword {tok!r}", SourceSpan(start, start + len(tok)))
        tokens.append(Token(kind, tok, start))
        pos = m.end()


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, expected: str, tok: Token | None = None):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        start, end = tok.span
        raise ParseError(f"expected {expected}, found {found}", SourceSpan(start, max(end, start)))

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            self.error(repr(text))
        return self.advance()

    def integer(self, what: str) -> tuple[int, Token]:
        tok = self.peek()
        if tok.kind != "int":
            self.error(what)
        self.advance()
        return int(tok.text), tok

    def formula(self) -> Formula:
        left = self.and_expr()
        while self.peek().text == "or" and self.peek().kind == "word":
            self.advance()
            left = Or(left, self.and_expr())
        return left

    def and_expr(self) -> Formula:
        left = self.unary()
        while self.peek().text == "and" and self.peek().kind == "word":
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "word" and tok.text == "not":
            self.advance()
            return Not(self.unary())
        if tok.kind == "word" and tok.text == "exists":
            self.advance()
            self.expect(">=")
            n, ntok = self.integer("a counting bound")
            if n == 0:
                raise ParseError("counting bound in exists>= must be at least 1", ntok.span)
            return ExistsGeq(n, self.unary())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.kind == "word" and tok.text == "col":
            self.advance()
            self.expect("(")
            i, itok = self.integer("a color index")
            if i == 0:
                raise ParseError("color indices start at 1", itok.span)
            self.expect(")")
            return Col(i)
        if tok.kind == "word" and tok.text == "true":
            self.advance()
            return Top()
        if tok.text == "(" and tok.kind == "op":
            self.advance()
            inner = self.formula()
            self.expect(")")
            return inner
        self.error("'col(', 'true', 'not', 'exists>=' or '('")


def parse(text: str) -> Formula:
    """Parse query text. ``or`` and ``true`` are kept; call :func:`desugar` to remove them."""
    p = _Parser(strip_comments(text))
    try:
        f = p.formula()
    except FormulaError as exc:  # pragma: no cover - guarded by explicit checks above
        tok = p.peek()
        raise ParseError(str(exc), tok.span) from exc
    if p.peek().kind != "eof":
        p.error("end of input")
    return f


def render(f: Formula) -> str:
    if isinstance(f, Col):
        return f"col({f.color})"
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Not):
        return f"not {render(f.child)}"
    if isinstance(f, ExistsGeq):
        return f"exists>={f.count} {render(f.child)}"
    if isinstance(f, And):
        return f"({render(f.left)} and {render(f.right)})"
    if isinstance(f, Or):
        return f"({render(f.left)} or {render(f.right)})"
    raise TypeError(f"not a formula: {f!r}")


def load_query(path) -> Formula:
    return parse(Path(path).read_text(encoding="utf-8"))


def save_query(f: Formula, path, comment: str | None = None) -> None:
    lines = [f"# {comment}"] if comment else []
    lines.append(render(f))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
