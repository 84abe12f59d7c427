"""Bidimensional context-free hedge automata.

Transitions come in two shapes::

    p1(d1) ... pn(dn) -> q(d1 ... dn)      horizontal
    p1(p2(d)) -> q(d)                      vertical

where each ``d`` is either a variable or the empty hedge.  Labels ``p`` are
alphabet symbols or states; targets are states.
"""

from __future__ import annotations

import enum
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .hedge import HOLE, SYMBOL_RE, ParseError, is_variable, parse_hedge


class AutomatonError(ValueError):
    pass


class Fragment(enum.Enum):
    HA = "HA"
    CFHA = "CFHA"
    CF2HA = "CF2HA"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class Horizontal:
    """``lhs`` is a tuple of ``(label, carries_var)`` pairs."""

    lhs: tuple
    target: str

    @property
    def labels(self) -> tuple:
        return tuple(label for label, _ in self.lhs)

    @property
    def has_vars(self) -> bool:
        return any(var for _, var in self.lhs)

    def __str__(self) -> str:
        parts, args = [], []
        for k, (label, var) in enumerate(self.lhs, 1):
            if var:
                parts.append(f"{label}(${k})")
                args.append(f"${k}")
            else:
                parts.append(label)
        rhs = f"{self.target}({' '.join(args)})" if args else self.target
        return f"{' '.join(parts)} -> {rhs}".lstrip()


@dataclass(frozen=True, order=True)
class Vertical:
    outer: str
    inner: str
    target: str
    var: bool = True

    def __str__(self) -> str:
        if self.var:
            return f"{self.outer}({self.inner}($1)) -> {self.target}($1)"
        return f"{self.outer}({self.inner}) -> {self.target}"


def horizontal(*lhs, target: str) -> Horizontal:
    """Shorthand: ``horizontal(("a", False), ("q0", True), target="q1")``;
    bare strings mean a position without a variable."""
    items = tuple((x, False) if isinstance(x, str) else (x[0], bool(x[1])) for x in lhs)
    return Horizontal(items, target)


@dataclass(frozen=True)
class Automaton:
    alphabet: frozenset
    states: frozenset
    finals: frozenset
    horizontals: frozenset = field(default_factory=frozenset)
    verticals: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        for name in ("alphabet", "states", "finals", "horizontals", "verticals"):
            value = getattr(self, name)
            if not isinstance(value, frozenset):
                object.__setattr__(self, name, frozenset(value))
        clash = self.alphabet & self.states
        if clash:
            raise AutomatonError(f"names used both as symbol and state: {sorted(clash)}")
        for a in self.alphabet:
            if not SYMBOL_RE.match(a):
                raise AutomatonError(f"invalid alphabet symbol {a!r}")
        if HOLE in self.states:
            raise AutomatonError(f"{HOLE} is reserved")
        if not self.finals <= self.states:
            raise AutomatonError(f"final states not declared: {sorted(self.finals - self.states)}")
        known = self.alphabet | self.states
        for t in self.horizontals:
            bad = [x for x in t.labels if x not in known]
            if bad or t.target not in self.states:
                raise AutomatonError(f"transition {t} mentions unknown names {bad or [t.target]}")
        for t in self.verticals:
            if t.outer not in known or t.inner not in known or t.target not in self.states:
                raise AutomatonError(f"transition {t} mentions unknown names")

    # convenience
    @property
    def transitions(self) -> list:
        return sorted(self.horizontals) + sorted(self.verticals)

    def is_state(self, label: str) -> bool:
        return label in self.states

    def with_finals(self, finals: Iterable[str]) -> "Automaton":
        return Automaton(self.alphabet, self.states, frozenset(finals), self.horizontals, self.verticals)

    def restrict(self, keep: Iterable[str]) -> "Automaton":
        """Drop states outside ``keep`` together with every transition naming them."""
        keep = frozenset(keep) & self.states
        ok = self.alphabet | keep
        hs = {t for t in self.horizontals if t.target in keep and all(x in ok for x in t.labels)}
        vs = {t for t in self.verticals if t.target in keep and t.outer in ok and t.inner in ok}
        return Automaton(self.alphabet, keep, self.finals & keep, hs, vs)

    def rename_states(self, mapping: Mapping[str, str]) -> "Automaton":
        m = lambda x: mapping.get(x, x)  # noqa: E731
        hs = {Horizontal(tuple((m(x), v) for x, v in t.lhs), m(t.target)) for t in self.horizontals}
        vs = {Vertical(m(t.outer), m(t.inner), m(t.target), t.var) for t in self.verticals}
        return Automaton(self.alphabet, {m(q) for q in self.states}, {m(q) for q in self.finals}, hs, vs)

    def __str__(self) -> str:
        return render_automaton(self)


# -- fragments ---------------------------------------------------------------


def is_cfha_shaped(a: Automaton) -> bool:
    if any(t.has_vars for t in a.horizontals):
        return False
    return all(t.outer in a.alphabet and t.inner in a.states and not t.var for t in a.verticals)


def ha_split(a: Automaton) -> tuple[set, set] | None:
    """Find a split of the states into hedge and tree states that fits the
    HA shapes ``eps -> qh``, ``qh qv -> qh'`` and ``a(qh) -> qv``; ``None``
    when there is none."""
    if not is_cfha_shaped(a):
        return None
    color: dict[str, str] = {}

    def assign(q, c):
        if color.setdefault(q, c) != c:
            raise LookupError(q)

    try:
        for t in a.horizontals:
            if len(t.lhs) == 0:
                assign(t.target, "h")
            elif len(t.lhs) == 2 and all(x in a.states for x in t.labels):
                assign(t.lhs[0][0], "h")
                assign(t.lhs[1][0], "v")
                assign(t.target, "h")
            else:
                return None
        for t in a.verticals:
            assign(t.inner, "h")
            assign(t.target, "v")
    except LookupError:
        return None
    hedge_states = {q for q in a.states if color.get(q, "h") == "h"}
    return hedge_states, set(a.states) - hedge_states


def classify_fragment(a: Automaton) -> Fragment:
    if not is_cfha_shaped(a):
        return Fragment.CF2HA
    if ha_split(a) is not None:
        return Fragment.HA
    return Fragment.CFHA


# -- constructions -----------------------------------------------------------


def union(a1: Automaton, a2: Automaton) -> Automaton:
    if a1.alphabet != a2.alphabet:
        raise AutomatonError("union needs equal alphabets")
    left = a1.rename_states({q: f"1:{q}" for q in a1.states})
    right = a2.rename_states({q: f"2:{q}" for q in a2.states})
    return Automaton(
        a1.alphabet,
        left.states | right.states,
        left.finals | right.finals,
        left.horizontals | right.horizontals,
        left.verticals | right.verticals,
    )


def relabel(a: Automaton, mapping: Mapping[str, str]) -> Automaton:
    """Rename alphabet symbols through ``mapping`` (total on the alphabet)."""
    m = lambda x: mapping.get(x, x) if x in a.alphabet else x  # noqa: E731
    hs = {Horizontal(tuple((m(x), v) for x, v in t.lhs), t.target) for t in a.horizontals}
    vs = {Vertical(m(t.outer), m(t.inner), t.target, t.var) for t in a.verticals}
    return Automaton({m(x) for x in a.alphabet}, a.states, a.finals, hs, vs)


def entry_name(q: str, a: str) -> str:
    return f"entry:{q}:{a}"


def fresh(base: str, taken: set) -> str:
    name, k = base, 0
    while name in taken:
        k += 1
        name = f"{base}~{k}"
    taken.add(name)
    return name


def normalize_cfha(a: Automaton) -> tuple[Automaton, dict]:
    """Give every (symbol, state) pair its own entry state.

    Each vertical ``a(p) -> q`` becomes the unit ``p -> entry:q:a`` plus
    ``a(entry:q:a) -> q``.  Symbols standing directly in horizontal
    left-hand sides are first lifted to states ``leaf:a`` recognizing the
    leaf ``a``.  Returns the automaton and the map ``(a, q) -> entry``.
    """
    if classify_fragment(a) is Fragment.CF2HA:
        raise AutomatonError("normalize_cfha needs a CFHA (variable-free) automaton")
    taken = set(a.states) | set(a.alphabet)
    states = set(a.states)
    hs, vs = set(), set(a.verticals)
    lifted: dict[str, str] = {}
    eps_state = None
    for t in a.horizontals:
        lhs = []
        for label, var in t.lhs:
            if label in a.alphabet:
                if label not in lifted:
                    if eps_state is None:
                        eps_state = fresh("eps", taken)
                        states.add(eps_state)
                        hs.add(Horizontal((), eps_state))
                    lifted[label] = fresh(f"leaf:{label}", taken)
                    states.add(lifted[label])
                    vs.add(Vertical(label, eps_state, lifted[label], False))
                label = lifted[label]
            lhs.append((label, var))
        hs.add(Horizontal(tuple(lhs), t.target))

    entries: dict = {}
    base_states = sorted(states)
    for sym in sorted(a.alphabet):
        for q in base_states:
            entries[(sym, q)] = fresh(entry_name(q, sym), taken)
    new_vs = set()
    for t in vs:
        e = entries[(t.outer, t.target)]
        hs.add(Horizontal(((t.inner, False),), e))
    for (sym, q), e in entries.items():
        new_vs.add(Vertical(sym, e, q, False))
    out = Automaton(a.alphabet, states | set(entries.values()), a.finals, hs, new_vs)
    return out, entries


def merge(*automata: Automaton, finals: Iterable[str] | None = None) -> Automaton:
    """Plain union of the transition sets; state sets must be disjoint."""
    alphabet, states, hs, vs = set(), set(), set(), set()
    for a in automata:
        if states & a.states:
            raise AutomatonError(f"state name collision: {sorted(states & a.states)}")
        alphabet |= a.alphabet
        states |= a.states
        hs |= a.horizontals
        vs |= a.verticals
    if finals is None:
        finals = set().union(*(a.finals for a in automata))
    return Automaton(alphabet, states, finals, hs, vs)


# -- text format -------------------------------------------------------------


def _split_names(text: str, line: int, source) -> list[str]:
    names = text.split()
    for n in names:
        if not n or n[0] in "$#()":
            raise ParseError(f"bad name {n!r}", line, 1, source)
    return [sys.intern(n) for n in names]


def parse_transition(text: str, line: int = 1, source: str | None = None):
    if "->" not in text:
        raise ParseError("transition needs '->'", line, 1, source)
    left, right = text.split("->", 1)
    lhs = _parse_side(left, line, source)
    rhs = _parse_side(right, line, source)
    if len(rhs) != 1 or is_variable(rhs[0].label):
        raise ParseError("right-hand side must be a single state", line, 1, source)
    target = rhs[0].label
    rhs_vars = [c.label for c in rhs[0].children]
    if any(not is_variable(x) or c.children for x, c in zip(rhs_vars, rhs[0].children)):
        raise ParseError("right-hand side arguments must be variables", line, 1, source)

    if len(lhs) == 1 and len(lhs[0].children) == 1 and not is_variable(lhs[0].children[0].label):
        outer, inner = lhs[0], lhs[0].children[0]
        if not inner.children:
            var = None
        elif len(inner.children) == 1 and is_variable(inner.children[0].label) and not inner.children[0].children:
            var = inner.children[0].label
        else:
            raise ParseError("vertical transitions nest exactly two labels", line, 1, source)
        if rhs_vars != ([var] if var else []):
            raise ParseError("vertical right-hand side must repeat the inner variable", line, 1, source)
        return Vertical(outer.label, inner.label, target, var is not None)

    items, lhs_vars = [], []
    for t in lhs:
        if is_variable(t.label):
            raise ParseError("bare variable in left-hand side", line, 1, source)
        if not t.children:
            items.append((t.label, False))
        elif len(t.children) == 1 and is_variable(t.children[0].label) and not t.children[0].children:
            items.append((t.label, True))
            lhs_vars.append(t.children[0].label)
        else:
            raise ParseError(f"cannot read left-hand side item {t.label}(...)", line, 1, source)
    if len(set(lhs_vars)) != len(lhs_vars):
        raise ParseError("left-hand side variables must be distinct", line, 1, source)
    if rhs_vars != lhs_vars:
        raise ParseError("right-hand side must list the left-hand side variables in order", line, 1, source)
    return Horizontal(tuple(items), target)


def _parse_side(text: str, line: int, source):
    return parse_hedge(text, allow_vars=True, symbols_only=False, line=line, source=source)


def parse_automaton(text: str, source: str | None = None) -> Automaton:
    alphabet: list[str] = []
    states: list[str] = []
    finals: list[str] = []
    hs, vs = set(), set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, rest = body.partition(":")
        key = key.strip()
        if not sep or key not in ("alphabet", "states", "final", "finals", "trans"):
            raise ParseError(f"unknown line {body!r}", lineno, 1, source)
        if key == "alphabet":
            alphabet += _split_names(rest, lineno, source)
            for a in alphabet:
                if not SYMBOL_RE.match(a):
                    raise ParseError(f"invalid symbol {a!r}", lineno, 1, source)
        elif key == "states":
            states += _split_names(rest, lineno, source)
        elif key in ("final", "finals"):
            finals += _split_names(rest, lineno, source)
        else:
            t = parse_transition(rest, lineno, source)
            (vs if isinstance(t, Vertical) else hs).add(t)
    try:
        return Automaton(frozenset(alphabet), frozenset(states), frozenset(finals), frozenset(hs), frozenset(vs))
    except AutomatonError as e:
        raise ParseError(str(e), 1, 1, source) from None


def render_automaton(a: Automaton, header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines.append("alphabet: " + " ".join(sorted(a.alphabet)))
    lines.append("states: " + " ".join(sorted(a.states)))
    lines.append("final: " + " ".join(sorted(a.finals)))
    for t in sorted(a.horizontals):
        lines.append(f"trans: {t}")
    for t in sorted(a.verticals):
        lines.append(f"trans: {t}")
    return "\n".join(lines) + "\n"


def load_automaton(path: str | Path) -> Automaton:
    path = Path(path)
    return parse_automaton(path.read_text(encoding="utf-8"), source=str(path))

