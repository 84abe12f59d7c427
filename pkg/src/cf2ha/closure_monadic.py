"""Forward closure under finite, linear, inverse-monadic, 1-childvar rules.

The automaton built here reads a rewritten hedge bottom-up and folds every
occurrence of a right-hand side ``r`` (with its variable part already read)
back into the symbol ``a`` of the rule ``a($x) -> r``.

States of the result:

* the states of the input automaton,
* ``u:a`` for each symbol ``a`` (a node labeled ``a``, either present in the
  hedge or obtained by folding),
* ``s:<hedge>`` for each sub-hedge of a right-hand side (the encoded hedge
  spells ``$x`` as ``@``),
* one ``catchall`` state collecting assemblies that leave the sub-hedge set.

A state ``s:g`` carries the part of the hedge sitting at the variable of
``g``, so ``s:g(w)`` stands for ``g{$x -> w}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from .automata import Automaton, Horizontal, Vertical, fresh
from .hedge import (
    Hedge,
    ParseError,
    Tree,
    is_variable,
    parse_hedge,
    render_hedge,
    size,
    substitute,
    suffix_subhedges,
    variables,
)

X = "$x"


class RewriteRule(NamedTuple):
    symbol: str
    var: str
    rhs: Hedge

    def __str__(self) -> str:
        return f"{self.symbol}({self.var}) -> {render_hedge(self.rhs)}"

    def canonical(self) -> Hedge:
        """Right-hand side with the variable renamed to ``$x``."""
        return substitute(self.rhs, {self.var: (Tree(X),)}) if self.var != X else self.rhs


class RuleClassError(ValueError):
    def __init__(self, verdict: "Verdict"):
        self.verdict = verdict
        super().__init__(str(verdict))


@dataclass
class Verdict:
    problems: list = field(default_factory=list)  # (rule, condition, detail)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "accepted"
        return "\n".join(f"{rule}: {cond} violated ({detail})" for rule, cond, detail in self.problems)


def _var_siblings(h: Hedge, top: bool = True) -> bool:
    """True if some variable occurrence has a sibling."""
    for t in h:
        if is_variable(t.label) and (len(h) > 1 or top):
            return True
        if _var_siblings(t.children, top=False):
            return True
    return False


def _var_count(h: Hedge) -> int:
    return sum((1 if is_variable(t.label) else 0) + _var_count(t.children) for t in h)


def check_rule(rule: RewriteRule):
    """First violated condition as ``(condition, detail)``, or ``None``."""
    rhs = rule.rhs
    if not rhs:
        return "inverse-monadic", "right-hand side is empty"
    if len(rhs) == 1 and is_variable(rhs[0].label):
        return "inverse-monadic", "right-hand side is a bare variable"
    vs = variables(rhs)
    if _var_count(rhs) > len(vs):
        return "linear", "a variable occurs twice"
    if vs - {rule.var}:
        return "linear", f"unbound variable {sorted(vs - {rule.var})[0]}"
    if _var_siblings(rhs):
        return "1-childvar", f"{rule.var} has siblings"
    return None


def check_rule_class(rules: Iterable[RewriteRule]) -> Verdict:
    v = Verdict()
    for r in rules:
        bad = check_rule(r)
        if bad:
            v.problems.append((r, *bad))
    return v


def parse_rule(text: str, line: int = 1, source: str | None = None) -> RewriteRule:
    body = text.strip()
    for prefix in ("rule:", "rule "):
        if body.startswith(prefix):
            body = body[len(prefix):]
            break
    if "->" not in body:
        raise ParseError("rule needs '->'", line, 1, source)
    left, right = body.split("->", 1)
    lhs = parse_hedge(left, allow_vars=True, line=line, source=source)
    rhs = parse_hedge(right, allow_vars=True, line=line, source=source)
    if (
        len(lhs) != 1
        or is_variable(lhs[0].label)
        or len(lhs[0].children) != 1
        or not is_variable(lhs[0].children[0].label)
    ):
        raise ParseError("left-hand side must be SYMBOL($var)", line, 1, source)
    return RewriteRule(lhs[0].label, lhs[0].children[0].label, rhs)


def parse_rules(text: str, source: str | None = None) -> list[RewriteRule]:
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            rules.append(parse_rule(body, lineno, source))
    return rules


def load_rules(path: str | Path) -> list[RewriteRule]:
    path = Path(path)
    return parse_rules(path.read_text(encoding="utf-8"), source=str(path))


def render_rules(rules: Iterable[RewriteRule]) -> str:
    return "".join(f"rule {r}\n" for r in rules)


# -- construction ------------------------------------------------------------


def encode(h: Hedge) -> str:
    return render_hedge(h).replace(X, "@").replace(" ", ".").replace("(", "{").replace(")", "}")


def sub_state(h: Hedge) -> str:
    return "s:" + encode(h)


def symbol_state(a: str) -> str:
    return "u:" + a


def subhedge_set(rules: Iterable[RewriteRule]) -> set:
    out: set = set()
    for r in rules:
        out |= suffix_subhedges(r.canonical())
    return out


def _carries(h: Hedge) -> bool:
    return X in variables(h)


def build_closure(a_l: Automaton, rules: Iterable[RewriteRule]) -> Automaton:
    """Automaton for the hedges reachable from ``L(a_l)`` with ``rules``."""
    rules = list(rules)
    verdict = check_rule_class(rules)
    if not verdict:
        raise RuleClassError(verdict)

    alphabet = set(a_l.alphabet)
    for r in rules:
        alphabet.add(r.symbol)
        alphabet |= {x for x in _symbols(r.rhs)}
    subs = subhedge_set(rules)

    taken = set(a_l.states) | alphabet
    names = {}
    for a in sorted(alphabet):
        names[("u", a)] = fresh(symbol_state(a), taken)
    for g in sorted(subs, key=lambda g: (size(g), render_hedge(g))):
        names[("s", g)] = fresh(sub_state(g), taken)
    catchall = fresh("catchall", taken)
    u = lambda a: names[("u", a)]  # noqa: E731
    s = lambda g: names[("s", g)]  # noqa: E731
    under = lambda p: u(p) if p in alphabet else p  # noqa: E731

    hs: set = set()
    vs: set = set()
    for t in a_l.horizontals:
        hs.add(Horizontal(tuple((under(p), var) for p, var in t.lhs), t.target))
    for t in a_l.verticals:
        vs.add(Vertical(under(t.outer), under(t.inner), t.target, t.var))
    for a in alphabet:
        hs.add(Horizontal(((a, True),), u(a)))

    trees = [g for g in subs if len(g) == 1]
    for g in subs:
        if len(g) > 1:
            head, rest = g[:1], g[1:]
            hs.add(Horizontal(((s(head), _carries(head)), (s(rest), _carries(rest))), s(g)))
            continue
        t = g[0]
        if not t.children:
            hs.add(Horizontal(((u(t.label), False),), s(g)))
        elif t.children == (Tree(X),):
            hs.add(Horizontal(((u(t.label), True),), s(g)))
        else:
            vs.add(Vertical(u(t.label), s(t.children), s(g), _carries(t.children)))
    for head in trees:
        for rest in subs:
            if _carries(head) and _carries(rest):
                continue
            if head + rest not in subs:
                hs.add(Horizontal(((s(head), _carries(head)), (s(rest), _carries(rest))), catchall))
    for r in rules:
        rhs = r.canonical()
        hs.add(Horizontal(((s(rhs), _carries(rhs)),), u(r.symbol)))

    states = set(a_l.states) | set(names.values()) | {catchall}
    return Automaton(alphabet, states, a_l.finals, hs, vs)


def _symbols(h: Hedge):
    for t in h:
        if not is_variable(t.label):
            yield t.label
        yield from _symbols(t.children)


def closure_state_count(a_l: Automaton, rules: Iterable[RewriteRule]) -> int:
    rules = list(rules)
    alphabet = set(a_l.alphabet)
    for r in rules:
        alphabet |= {r.symbol, *_symbols(r.rhs)}
    return len(a_l.states) + len(subhedge_set(rules)) + len(alphabet) + 1
