"""Minimal s-expression reader and printer.

Atoms are kept as strings; callers decide whether a token is a number,
a symbol or a keyword.  Every parsed list remembers where it started so
that validators can point at the offending line and column.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)


class SList(list):
    """A parsed list that carries its source position."""

    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Sym:
    name: str
    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        return self.name


SExpr = Union[Sym, SList]


def _tokens(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in "()":
            yield c, line, col
            i += 1
            col += 1
            continue
        start, scol = i, col
        while i < n and not text[i].isspace() and text[i] not in "();":
            i += 1
            col += 1
        yield text[start:i], line, scol


def parse_all(text: str) -> list[SExpr]:
    """Parse every top-level expression in ``text``."""
    stack: list[SList] = []
    out: list[SExpr] = []
    for tok, line, col in _tokens(text):
        if tok == "(":
            lst = SList()
            lst.line, lst.col = line, col
            stack.append(lst)
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line, col)
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
        else:
            (stack[-1] if stack else out).append(Sym(tok, line, col))
    if stack:
        raise ParseError("unclosed '('", stack[-1].line, stack[-1].col)
    return out


def parse_one(text: str) -> SExpr:
    items = parse_all(text)
    if len(items) != 1:
        raise ParseError(f"expected exactly one expression, found {len(items)}")
    return items[0]


def pos(e) -> tuple[int, int]:
    """Source position, or (0, 0) for values that were not parsed from text."""
    return (getattr(e, "line", 0), getattr(e, "col", 0))


def fail(e: SExpr, message: str) -> ParseError:
    return ParseError(message, *pos(e))


def is_sym(e: SExpr, name: str | None = None) -> bool:
    return isinstance(e, Sym) and (name is None or e.name == name)


def as_number(e: SExpr) -> Fraction | None:
    """Return the rational value of a numeral atom such as ``-3`` or ``1/2``."""
    if not isinstance(e, Sym):
        return None
    try:
        return Fraction(e.name)
    except (ValueError, ZeroDivisionError):
        return None


def keyword_sections(items: list[SExpr], head: SExpr) -> dict[str, SExpr]:
    """Split ``:key value`` pairs; duplicate or dangling keys are errors."""
    out: dict[str, SExpr] = {}
    i = 0
    while i < len(items):
        k = items[i]
        if not (isinstance(k, Sym) and k.name.startswith(":")):
            raise fail(k if isinstance(k, Sym) else head, f"expected a :keyword, got {render(k)}")
        if i + 1 >= len(items):
            raise fail(k, f"keyword {k.name} has no value")
        if k.name in out:
            raise fail(k, f"duplicate keyword {k.name}")
        out[k.name] = items[i + 1]
        i += 2
    return out


def render(e) -> str:
    """Print nested lists/tuples/atoms back to s-expression text."""
    if isinstance(e, (list, tuple)):
        return "(" + " ".join(render(x) for x in e) + ")"
    if isinstance(e, Fraction):
        return str(e.numerator) if e.denominator == 1 else f"{e.numerator}/{e.denominator}"
    if isinstance(e, bool):
        return "true" if e else "false"
    return str(e)
