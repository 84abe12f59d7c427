"""Unranked ordered trees and hedges.

A hedge is a plain tuple of :class:`Tree` values; ``()`` is the empty hedge.
Trees are named tuples, so equality and hashing are structural and cheap,
which matters because decision procedures memoize on them constantly.

Variables (``$x``) and the context hole (``$hole``) are ordinary leaves whose
label starts with ``$``.
"""

from __future__ import annotations

import re
import sys
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, NamedTuple, Sequence

HOLE = "$hole"

SYMBOL_RE = re.compile(r"[A-Za-z0-9_]+\Z")


class Tree(NamedTuple):
    label: str
    children: tuple = ()

    def __str__(self) -> str:
        return render_tree(self)


Hedge = tuple  # tuple[Tree, ...]


class ParseError(ValueError):
    """Syntax error with a 1-based line/column position."""

    def __init__(self, message: str, line: int = 1, column: int = 1, source: str | None = None):
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")


def is_variable(label: str) -> bool:
    return label.startswith("$")


def leaf(label: str) -> Tree:
    return Tree(label, ())


# -- text format -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<lp>\()|(?P<rp>\))"
    r"|(?P<var>\$[A-Za-z0-9_]+)|(?P<name>[A-Za-z0-9_][A-Za-z0-9_:.{}^~@\-]*)"
)


def tokenize(text: str, line: int = 1, column: int = 1, source: str | None = None):
    """Yield ``(kind, value, line, column)`` tokens; kinds are lp, rp, var, name."""
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, column, source)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            yield kind, value, line, column
        newlines = value.count("\n")
        if newlines:
            line += newlines
            column = len(value) - value.rfind("\n")
        else:
            column += len(value)
        pos = m.end()


class _Parser:
    def __init__(self, text: str, *, allow_vars: bool, symbols_only: bool, line=1, column=1, source=None):
        self.tokens = list(tokenize(text, line, column, source))
        self.pos = 0
        self.allow_vars = allow_vars
        self.symbols_only = symbols_only
        self.source = source
        self.end = (line + text.count("\n"), column + len(text))

    def error(self, message: str) -> ParseError:
        if self.pos < len(self.tokens):
            _, _, line, column = self.tokens[self.pos]
        else:
            line, column = self.end
        return ParseError(message, line, column, self.source)

    def peek(self):
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def hedge(self) -> Hedge:
        items = []
        while self.peek() in ("name", "var"):
            items.append(self.tree())
        return tuple(items)

    def tree(self) -> Tree:
        kind, value, _, _ = self.tokens[self.pos]
        if kind == "var":
            if not self.allow_vars:
                raise self.error(f"variable {value} not allowed here")
        elif self.symbols_only and not SYMBOL_RE.match(value):
            raise self.error(f"invalid symbol {value!r}")
        self.pos += 1
        label = sys.intern(value)
        if self.peek() != "lp":
            return Tree(label, ())
        if kind == "var":
            raise self.error("a variable cannot have children")
        self.pos += 1
        children = self.hedge()
        if self.peek() != "rp":
            raise self.error("expected ')'")
        self.pos += 1
        return Tree(label, children)

    def finish(self) -> None:
        if self.pos != len(self.tokens):
            raise self.error(f"unexpected {self.tokens[self.pos][1]!r}")


def parse_hedge(
    text: str, *, allow_vars: bool = False, symbols_only: bool = True, line: int = 1, source: str | None = None
) -> Hedge:
    """Parse ``a(b c(d)) e`` style text into a hedge.

    With ``allow_vars`` the ``$name`` leaves of rule files and contexts are
    accepted. ``symbols_only=False`` admits state names (``entry:q:a`` ...)
    so that configurations printed by traces read back.
    """
    p = _Parser(text, allow_vars=allow_vars, symbols_only=symbols_only, line=line, source=source)
    h = p.hedge()
    p.finish()
    return h


def parse_context(text: str) -> Hedge:
    body = parse_hedge(text, allow_vars=True)
    holes = sum(1 for _ in _labels(body) if _ == HOLE)
    if holes != 1:
        raise ParseError(f"a context needs exactly one {HOLE}, found {holes}")
    return body


def render_tree(t: Tree) -> str:
    if not t.children:
        return t.label
    return f"{t.label}({render_hedge(t.children)})"


def render_hedge(h: Iterable[Tree]) -> str:
    return " ".join(render_tree(t) for t in h)


# -- structural helpers ------------------------------------------------------


def size(h: Hedge) -> int:
    """Total node count."""
    return sum(1 + size(t.children) for t in h)


def _labels(h: Hedge) -> Iterator[str]:
    for t in h:
        yield t.label
        yield from _labels(t.children)


def labels(h: Hedge) -> set[str]:
    return set(_labels(h))


def variables(h: Hedge) -> set[str]:
    return {x for x in _labels(h) if is_variable(x)}


def is_ground(h: Hedge) -> bool:
    return not variables(h)


def substitute(h: Hedge, mapping: dict) -> Hedge:
    """Replace each variable leaf by the hedge it maps to, splicing in place."""
    out = []
    for t in h:
        if t.label in mapping and not t.children:
            out.extend(mapping[t.label])
        else:
            out.append(Tree(t.label, substitute(t.children, mapping)))
    return tuple(out)


def apply_context(c: Hedge, h: Hedge) -> Hedge:
    """Plug ``h`` into the hole of context ``c``."""
    return substitute(c, {HOLE: tuple(h)})


def relabel_hedge(h: Hedge, mapping) -> Hedge:
    return tuple(Tree(mapping.get(t.label, t.label), relabel_hedge(t.children, mapping)) for t in h)


def suffix_subhedges(h: Hedge) -> set[Hedge]:
    """Sub-hedges obtained by repeatedly splitting off the head tree or
    descending into a tree's children; bare variables are left out."""
    out: set[Hedge] = set()
    todo = [tuple(h)]
    while todo:
        g = todo.pop()
        if not g or g in out:
            continue
        if len(g) == 1 and is_variable(g[0].label):
            continue
        out.add(g)
        if len(g) > 1:
            todo.append(g[:1])
            todo.append(g[1:])
        elif g[0].children:
            todo.append(g[0].children)
    return out


# -- enumeration -------------------------------------------------------------


def _sort_key(h: Hedge) -> str:
    return render_hedge(h)


@lru_cache(maxsize=None)
def _exact(alphabet: tuple, n: int) -> tuple:
    """All hedges with exactly ``n`` nodes, sorted lexicographically."""
    if n == 0:
        return ((),)
    found = []
    for k in range(1, n + 1):
        for kids in _exact(alphabet, k - 1):
            heads = [Tree(a, kids) for a in alphabet]
            for head, rest in product(heads, _exact(alphabet, n - k)):
                found.append((head,) + rest)
    found.sort(key=_sort_key)
    return tuple(found)


def enumerate_hedges(alphabet: Iterable[str], max_size: int) -> list[Hedge]:
    """Every hedge over ``alphabet`` with at most ``max_size`` nodes, ordered
    by size and then by rendered text."""
    if max_size < 0:
        raise ValueError("max_size must be >= 0")
    alpha = tuple(sorted(set(alphabet)))
    out: list[Hedge] = []
    for n in range(max_size + 1):
        out.extend(_exact(alpha, n))
    return out


def iter_hedges(alphabet: Iterable[str], max_size: int) -> Iterator[Hedge]:
    alpha = tuple(sorted(set(alphabet)))
    for n in range(max_size + 1):
        yield from _exact(alpha, n)


def as_hedge(value: str | Tree | Sequence[Tree]) -> Hedge:
    if isinstance(value, str):
        return parse_hedge(value, allow_vars=True, symbols_only=False)
    if isinstance(value, Tree):
        return (value,)
    return tuple(value)
