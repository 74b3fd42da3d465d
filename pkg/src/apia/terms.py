"""Terms, tokens and the line-level recursive descent parser shared by the DSL readers.

Ground atoms travel through the rest of the package as canonical strings
(``greet(alice,bob)``), so everything here ends in :func:`render`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>\d+)"
    r"|(?P<ident>[a-z][A-Za-z0-9_]*)"
    r"|(?P<var>[A-Z_][A-Za-z0-9_]*)"
    r"|(?P<op>!=|[(),:;+=-])"
)


class DslSyntaxError(Exception):
    """Raised by :class:`LineParser`; ``col`` is 1-based."""

    def __init__(self, col: int, message: str):
        super().__init__(message)
        self.col = col
        self.message = message


@dataclass(frozen=True)
class Token:
    kind: str  # ident | var | op | end
    text: str
    col: int


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Fn:
    """A constant (no args) or a compound term."""

    name: str
    args: tuple["Term", ...] = ()

    def __str__(self) -> str:
        return render(self)


Term = Union[Var, Fn]


def render(term: Term) -> str:
    if isinstance(term, Var):
        return term.name
    if not term.args:
        return term.name
    return f"{term.name}({','.join(render(a) for a in term.args)})"


def variables(term: Term) -> Iterator[str]:
    if isinstance(term, Var):
        yield term.name
    else:
        for arg in term.args:
            yield from variables(arg)


def substitute(term: Term, binding: Mapping[str, str]) -> Fn:
    if isinstance(term, Var):
        return Fn(binding[term.name])
    if not term.args:
        return term
    return Fn(term.name, tuple(substitute(a, binding) for a in term.args))


def is_ground(term: Term) -> bool:
    return next(variables(term), None) is None


def strip_comment(line: str) -> str:
    idx = line.find("%")
    return line if idx < 0 else line[:idx]


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(pos + 1, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token("ident" if kind == "num" else kind, m.group(), pos + 1))
        pos = m.end()
    tokens.append(Token("end", "", len(text) + 1))
    return tokens


@dataclass(frozen=True)
class RawLiteral:
    """A literal as written, before classification against declarations.

    ``negation`` is ``""`` for a positive literal, ``"-"`` for classical
    negation and ``"not"`` for default negation.  Comparisons use ``op``.
    """

    term: Term
    negation: str = ""
    op: str | None = None
    rhs: Term | None = None
    col: int = 0


class LineParser:
    """Recursive descent over the tokens of one statement."""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("ident", "op")

    def at_end(self) -> bool:
        return self.tok.kind == "end"

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "end":
            self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of line"
            raise DslSyntaxError(self.tok.col, f"expected {text!r}, found {found!r}")
        return self.advance()

    def expect_end(self) -> None:
        if not self.at_end():
            raise DslSyntaxError(self.tok.col, f"unexpected {self.tok.text!r}")

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of line"
            raise DslSyntaxError(self.tok.col, f"expected {what}, found {found!r}")
        return self.advance()

    def term(self) -> Term:
        tok = self.tok
        if tok.kind == "var":
            self.advance()
            return Var(tok.text)
        name = self.ident("term").text
        if not self.accept("("):
            return Fn(name)
        args = [self.term()]
        while self.accept(","):
            args.append(self.term())
        self.expect(")")
        return Fn(name, tuple(args))

    def literal(self) -> RawLiteral:
        col = self.tok.col
        if self.accept("-"):
            return RawLiteral(self.term(), "-", col=col)
        if self.at("not") and self.peek().kind in ("ident", "var"):
            self.advance()
            return RawLiteral(self.term(), "not", col=col)
        term = self.term()
        for op in ("!=", "="):
            if self.accept(op):
                return RawLiteral(term, op=op, rhs=self.term(), col=col)
        return RawLiteral(term, col=col)

    def literals(self) -> list[RawLiteral]:
        out = [self.literal()]
        while self.accept(","):
            out.append(self.literal())
        return out


def parse_ground_atom(text: str) -> Fn:
    """Parse a canonical atom string back into a term (used for nested atoms)."""
    parser = LineParser(text)
    term = parser.term()
    parser.expect_end()
    if not is_ground(term):
        raise DslSyntaxError(1, f"atom {text!r} is not ground")
    return term  # type: ignore[return-value]
