"""Purely implicational formulas over named atoms.

A formula is an atom or an implication between two formulas; there are no
other connectives. Two concrete syntaxes are supported:

* infix, with a right-associative ``->`` and optional parentheses, as in
  ``a -> b -> c`` (read ``a -> (b -> c)``);
* prefix, operator first, with ``>`` as the arrow token and single spaces
  between tokens, as in ``> a > b c``.

The weight of a formula counts atom occurrences plus arrows, which is
exactly the token count of its prefix rendering.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cache

__all__ = [
    "Atom",
    "Implication",
    "Formula",
    "FormulaSyntaxError",
    "parse_infix",
    "parse_prefix",
    "to_infix",
    "to_prefix",
    "weight",
    "subformulas",
    "formula_key",
]


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Implication:
    antecedent: "Formula"
    consequent: "Formula"


Formula = Atom | Implication


class FormulaSyntaxError(ValueError):
    """Malformed formula text; ``position`` points at the offending spot.

    For infix input the position is a character offset, for prefix input a
    token index.
    """

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (position {position})")
        self.position = position


_ATOM_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_INFIX_TOKEN_RE = re.compile(r"->|\(|\)|[A-Za-z][A-Za-z0-9_]*")


def _tokenize_infix(text: str) -> list[tuple[str, int]]:
    tokens: list[tuple[str, int]] = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _INFIX_TOKEN_RE.match(text, i)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[i]!r}", i)
        tokens.append((m.group(), i))
        i = m.end()
    return tokens


def parse_infix(text: str) -> Formula:
    """Parse the infix syntax; the arrow associates to the right."""
    tokens = _tokenize_infix(text)
    if not tokens:
        raise FormulaSyntaxError("empty input", 0)
    formula, i = _parse_infix_implication(tokens, 0, len(text))
    if i != len(tokens):
        raise FormulaSyntaxError(f"unexpected {tokens[i][0]!r}", tokens[i][1])
    return formula


def _parse_infix_implication(
    tokens: list[tuple[str, int]], i: int, end: int
) -> tuple[Formula, int]:
    left, i = _parse_infix_unit(tokens, i, end)
    if i < len(tokens) and tokens[i][0] == "->":
        right, i = _parse_infix_implication(tokens, i + 1, end)
        return Implication(left, right), i
    return left, i


def _parse_infix_unit(
    tokens: list[tuple[str, int]], i: int, end: int
) -> tuple[Formula, int]:
    if i >= len(tokens):
        raise FormulaSyntaxError("unexpected end of input", end)
    tok, pos = tokens[i]
    if tok == "(":
        inner, i = _parse_infix_implication(tokens, i + 1, end)
        if i >= len(tokens) or tokens[i][0] != ")":
            raise FormulaSyntaxError("expected ')'", tokens[i][1] if i < len(tokens) else end)
        return inner, i + 1
    if tok in ("->", ")"):
        raise FormulaSyntaxError(f"unexpected {tok!r}", pos)
    return Atom(tok), i + 1


def parse_prefix(text: str) -> Formula:
    """Parse the prefix syntax: whitespace-separated tokens, ``>`` is the arrow."""
    tokens = text.split()
    if not tokens:
        raise FormulaSyntaxError("empty input", 0)
    formula, i = _parse_prefix_at(tokens, 0)
    if i != len(tokens):
        raise FormulaSyntaxError(f"unused token {tokens[i]!r}", i)
    return formula


def _parse_prefix_at(tokens: list[str], i: int) -> tuple[Formula, int]:
    if i >= len(tokens):
        raise FormulaSyntaxError("missing operand", i)
    tok = tokens[i]
    if tok == ">":
        left, j = _parse_prefix_at(tokens, i + 1)
        right, k = _parse_prefix_at(tokens, j)
        return Implication(left, right), k
    if _ATOM_RE.fullmatch(tok) is None:
        raise FormulaSyntaxError(f"bad atom {tok!r}", i)
    return Atom(tok), i + 1


def to_infix(f: Formula) -> str:
    """Render with minimal parentheses; only left arrow operands need them."""
    if isinstance(f, Atom):
        return f.name
    left = to_infix(f.antecedent)
    if isinstance(f.antecedent, Implication):
        left = f"({left})"
    return f"{left} -> {to_infix(f.consequent)}"


@cache
def to_prefix(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    return f"> {to_prefix(f.antecedent)} {to_prefix(f.consequent)}"


@cache
def weight(f: Formula) -> int:
    if isinstance(f, Atom):
        return 1
    return 1 + weight(f.antecedent) + weight(f.consequent)


def formula_key(f: Formula) -> tuple[int, str]:
    """Deterministic total order on formulas: weight first, then prefix text."""
    return (weight(f), to_prefix(f))


def subformulas(f: Formula) -> list[Formula]:
    """All distinct subformulas of ``f``, ordered by ``formula_key``."""
    seen: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        if isinstance(g, Implication):
            stack.append(g.antecedent)
            stack.append(g.consequent)
    return sorted(seen, key=formula_key)
