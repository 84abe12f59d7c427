"""Forward closure under update rules parameterized by a hedge automaton.

Six rule forms, each rewriting a node ``a($x)``::

    ren a -> b          a($x) -> b($x)
    ac  a -> a(u _ v)   a($x) -> a(u $x v)
    as  a -> u _ v      a($x) -> u a($x) v
    ap  a -> b          a($x) -> b(a($x))
    rpl a -> u          a($x) -> u
    del a               a($x) -> $x

``u`` and ``v`` are sequences of states of the parameter automaton; every
occurrence stands for an independently chosen member of the state's
language.

The pipeline merges the parameter automaton with the seed automaton,
normalizes and cleans the result, adds stacked states tracking pending
renamings, then saturates with one transition family per rule form.  The
output is variable-free.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx

from .automata import (
    Automaton,
    AutomatonError,
    Fragment,
    Horizontal,
    Vertical,
    classify_fragment,
    fresh,
    is_cfha_shaped,
    load_automaton,
    merge,
    normalize_cfha,
    relabel,
)
from .decision import clean
from .hedge import SYMBOL_RE, Hedge, ParseError, Tree, relabel_hedge

log = logging.getLogger(__name__)

FORMS = ("ren", "ac", "as", "ap", "rpl", "del")
X = "$x"


@dataclass(frozen=True, order=True)
class UpdateRule:
    form: str
    symbol: str
    target: str | None = None  # ren, ap
    u: tuple = ()  # ac, as, rpl
    v: tuple = ()  # ac, as

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown rule form {self.form!r}")
        if (self.target is None) != (self.form not in ("ren", "ap")):
            raise ValueError(f"{self.form} rule with wrong arguments")

    def __str__(self) -> str:
        seq = lambda ps: " ".join(f"%{p}" for p in ps)  # noqa: E731
        if self.form in ("ren", "ap"):
            return f"{self.form} {self.symbol} -> {self.target}"
        if self.form == "ac":
            return f"ac {self.symbol} -> {self.symbol} ( {' '.join(filter(None, [seq(self.u), '_', seq(self.v)]))} )"
        if self.form == "as":
            return f"as {self.symbol} -> {' '.join(filter(None, [seq(self.u), '_', seq(self.v)]))}"
        if self.form == "rpl":
            return f"rpl {self.symbol} -> {seq(self.u)}".rstrip()
        return f"del {self.symbol}"

    def parameters(self) -> list:
        """Parameter states in left-to-right order of occurrence."""
        return [*self.u, *self.v]

    def template(self) -> Hedge:
        """Right-hand side with ``%p`` leaves for parameter states."""
        a, x = self.symbol, Tree(X)
        u = tuple(Tree("%" + p) for p in self.u)
        v = tuple(Tree("%" + p) for p in self.v)
        if self.form == "ren":
            return (Tree(self.target, (x,)),)
        if self.form == "ac":
            return (Tree(a, u + (x,) + v),)
        if self.form == "as":
            return u + (Tree(a, (x,)),) + v
        if self.form == "ap":
            return (Tree(self.target, (Tree(a, (x,)),)),)
        if self.form == "rpl":
            return u
        return (x,)

    def symbols(self) -> set:
        return {self.symbol} | ({self.target} if self.target else set())


@dataclass(frozen=True)
class PHRS:
    rules: tuple
    param: Automaton

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(sorted(set(self.rules))))
        for r in self.rules:
            missing = [p for p in r.parameters() if p not in self.param.states]
            if missing:
                raise AutomatonError(f"rule {r}: unknown parameter state {missing[0]}")

    def symbols(self) -> set:
        return set().union(*(r.symbols() for r in self.rules)) if self.rules else set()


# -- file format -------------------------------------------------------------

_TOK = re.compile(r"\s*(?:(->)|(%[A-Za-z0-9_:.{}^~@\-]+)|(_)|(\()|(\))|([A-Za-z0-9_]+)|(\S))")


def _tokens(text: str, line: int, source):
    out = []
    for m in _TOK.finditer(text):
        if m.group(7):
            raise ParseError(f"unexpected {m.group(7)!r}", line, m.start(7) + 1, source)
        kind = ("arrow", "state", "hole", "lp", "rp", "name")[m.lastindex - 1]
        out.append((kind, m.group(m.lastindex)))
    return out


def parse_update_rule(text: str, line: int = 1, source: str | None = None) -> UpdateRule:
    toks = _tokens(text, line, source)

    def fail(msg):
        raise ParseError(msg, line, 1, source)

    if not toks or toks[0][0] != "name" or toks[0][1] not in FORMS:
        fail(f"rule must start with one of {', '.join(FORMS)}")
    form = toks[0][1]
    if len(toks) < 2 or toks[1][0] != "name":
        fail(f"{form} needs a symbol")
    a = toks[1][1]
    rest = toks[2:]
    if form == "del":
        if rest:
            fail("del takes no right-hand side")
        return UpdateRule("del", a)
    if not rest or rest[0][0] != "arrow":
        fail(f"{form} needs '->'")
    rhs = rest[1:]

    def states_only(items, what):
        out = []
        for kind, val in items:
            if kind == "state":
                out.append(val[1:])
            elif kind == "name":
                fail(
                    f"{what}: literal symbol {val!r}; parameters must be %states of the parameter automaton"
                    " (mint singleton states for literals)"
                )
            else:
                fail(f"{what}: unexpected {val!r}")
        return tuple(out)

    def around_hole(items, what):
        holes = [i for i, (kind, _) in enumerate(items) if kind == "hole"]
        if len(holes) != 1:
            if any(kind in ("lp", "rp") for kind, _ in items):
                fail(f"{what}: '_' stands for the whole {a}-node; nested trees are not an update rule")
            fail(f"{what}: exactly one '_' expected")
        i = holes[0]
        return states_only(items[:i], what), states_only(items[i + 1:], what)

    if form in ("ren", "ap"):
        if len(rhs) != 1 or rhs[0][0] != "name":
            fail(f"{form} right-hand side must be a single symbol")
        return UpdateRule(form, a, target=rhs[0][1])
    if form == "ac":
        if len(rhs) < 3 or rhs[0][0] != "name" or rhs[1][0] != "lp" or rhs[-1][0] != "rp":
            fail("ac right-hand side must read SYMBOL ( ... _ ... )")
        if rhs[0][1] != a:
            fail(
                f"ac keeps the node label: {rhs[0][1]!r} differs from {a!r};"
                " this combines ac with ren, write it as two rules"
            )
        u, v = around_hole(rhs[2:-1], "ac")
        return UpdateRule("ac", a, u=u, v=v)
    if form == "as":
        kinds = [kind for kind, _ in rhs]
        for i in range(len(rhs) - 3):
            if kinds[i:i + 4] == ["name", "lp", "hole", "rp"]:
                b = rhs[i][1]
                fail(
                    f"as keeps the node: '_' is the {a}-node itself, {b}(_) renames it;"
                    " this combines as with ren, write it as two rules"
                )
        u, v = around_hole(rhs, "as")
        return UpdateRule("as", a, u=u, v=v)
    return UpdateRule("rpl", a, u=states_only(rhs, "rpl"))


def parse_phrs(
    text: str, base_dir: str | Path = ".", source: str | None = None, param: Automaton | None = None,
    mint: Iterable[str] = (),
) -> PHRS:
    rules = []
    param_path = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition(":")
        key = key.strip()
        if not sep or key not in ("param-automaton", "rule"):
            raise ParseError("expected 'param-automaton:' or 'rule:'", lineno, 1, source)
        if key == "param-automaton":
            param_path = Path(base_dir) / value.strip()
        else:
            rules.append((lineno, parse_update_rule(value, lineno, source)))
    if param is None:
        if param_path is None:
            raise ParseError("missing 'param-automaton:' line", 1, 1, source)
        param = load_automaton(param_path)
    if mint:
        param, _ = mint_singletons(param, mint)
    for lineno, r in rules:
        for p in r.parameters():
            if p not in param.states:
                raise ParseError(f"unknown parameter state %{p}", lineno, 1, source)
        for s in r.symbols():
            if not SYMBOL_RE.match(s):
                raise ParseError(f"invalid symbol {s!r}", lineno, 1, source)
    return PHRS(tuple(r for _, r in rules), param)


def load_phrs(path: str | Path, mint: Iterable[str] = ()) -> PHRS:
    path = Path(path)
    return parse_phrs(path.read_text(encoding="utf-8"), path.parent, str(path), mint=mint)


def render_phrs(r: PHRS, param_path: str) -> str:
    return f"param-automaton: {param_path}\n" + "".join(f"rule: {x}\n" for x in r.rules)


def mint_singletons(param: Automaton, symbols: Iterable[str]) -> tuple[Automaton, dict]:
    """Add a state ``lit:c`` with language ``{c}`` for each symbol ``c``."""
    symbols = sorted(set(symbols))
    taken = set(param.states) | set(param.alphabet) | set(symbols)
    eps = fresh("lit-eps", taken)
    names = {c: fresh(f"lit:{c}", taken) for c in symbols}
    hs = set(param.horizontals) | {Horizontal((), eps)}
    vs = set(param.verticals) | {Vertical(c, eps, q, False) for c, q in names.items()}
    out = Automaton(param.alphabet | set(symbols), param.states | {eps} | set(names.values()), param.finals, hs, vs)
    return out, names


# -- renaming structure --------------------------------------------------------


def ren_graph(r: PHRS) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(sorted(r.symbols() | r.param.alphabet))
    g.add_edges_from((x.symbol, x.target) for x in r.rules if x.form == "ren")
    return g


def is_loopfree(r: PHRS) -> bool:
    return nx.is_directed_acyclic_graph(ren_graph(r))


def hat(r: PHRS, others: Sequence[Automaton] = ()) -> tuple[PHRS, list, dict]:
    """Collapse renaming cycles to their smallest symbol.

    Returns the loop-free system, the relabeled automata and the symbol map.
    Identity renamings left over after the collapse are dropped.
    """
    g = ren_graph(r)
    for a in others:
        g.add_nodes_from(a.alphabet)
    rep = {}
    for comp in nx.strongly_connected_components(g):
        m = min(comp)
        for s in comp:
            rep[s] = m
    rules = set()
    for x in r.rules:
        y = UpdateRule(
            x.form, rep[x.symbol], rep[x.target] if x.target else None, x.u, x.v
        )
        if y.form == "ren" and y.symbol == y.target:
            continue
        rules.add(y)
    param = relabel(r.param, rep)
    return PHRS(tuple(rules), param), [relabel(a, rep) for a in others], dict(sorted(rep.items()))


def map_hedge(h: Hedge, mapping: dict) -> Hedge:
    return relabel_hedge(h, mapping)


def renaming_chains(r: PHRS, alphabet: Iterable[str]) -> list:
    """Every path ``a1 ... an`` of the renaming graph, including single symbols."""
    succ: dict = {}
    for x in r.rules:
        if x.form == "ren":
            succ.setdefault(x.symbol, set()).add(x.target)
    out = []

    def walk(chain):
        out.append(chain)
        for b in sorted(succ.get(chain[-1], ())):
            if b in chain:
                raise ValueError("renaming chains need a loop-free system")
            walk(chain + (b,))

    for a in sorted(set(alphabet)):
        walk((a,))
    return out


# -- construction --------------------------------------------------------------


@dataclass
class UpdateContext:
    base: Automaton  # merged, normalized, cleaned
    entries: dict  # (symbol, state) -> entry state, surviving ones only
    chains: list
    bases: list  # non-entry states of ``base``
    pop: dict = field(default_factory=dict)  # (state, chain) -> state
    push: dict = field(default_factory=dict)
    rules: tuple = ()
    initial: Automaton | None = None

    def stacked(self):
        """Instantiated ``(state, chain)`` pairs."""
        return sorted(self.push)


def _extend(a: Automaton, alphabet: set) -> Automaton:
    return Automaton(alphabet, a.states, a.finals, a.horizontals, a.verticals)


def build_initial(param: Automaton, a_l: Automaton, r: PHRS) -> tuple[Automaton, UpdateContext]:
    if not is_loopfree(r):
        raise ValueError("build_initial needs a loop-free system; apply hat first")
    if classify_fragment(param) is not Fragment.HA:
        raise AutomatonError("the parameter automaton must be an HA")
    if not is_cfha_shaped(a_l):
        raise AutomatonError("the seed automaton must be a CFHA")
    alphabet = set(param.alphabet) | set(a_l.alphabet) | r.symbols()
    merged = merge(_extend(param, alphabet), _extend(a_l, alphabet), finals=a_l.finals)
    normal, entries = normalize_cfha(merged)
    b = clean(normal)
    live = {k: e for k, e in entries.items() if e in b.states}
    entry_states = set(entries.values())
    bases = sorted(q for q in b.states if q not in entry_states)
    chains = renaming_chains(r, alphabet)

    taken = set(b.states) | alphabet
    ctx = UpdateContext(b, live, chains, bases, rules=r.rules)
    for q in bases:
        for c in chains:
            e = live.get((c[0], q))
            if e is None:
                continue
            label = ".".join(c)
            ctx.pop[(q, c)] = e if len(c) == 1 else fresh(f"pop:{q}:{label}", taken)
            ctx.push[(q, c)] = fresh(f"push:{q}:{label}", taken)

    hs = set(b.horizontals)
    vs = set()
    for (q, c), up in ctx.push.items():
        if len(c) == 1:
            hs.add(Horizontal(((up, False),), q))
        vs.add(Vertical(c[-1], ctx.pop[(q, c)], up, False))
    states = set(b.states) | set(ctx.pop.values()) | set(ctx.push.values())
    a0 = Automaton(alphabet, states, b.finals, hs, vs)
    ctx.initial = a0
    return a0, ctx


def _rule_transitions(rule: UpdateRule, ctx: UpdateContext, q: str, c: tuple) -> list:
    ok = ctx.base.states
    pop, push = ctx.pop[(q, c)], ctx.push[(q, c)]
    if any(p not in ok for p in rule.parameters()):
        return []  # a parameter with empty language: the rule has no instance
    seq = lambda ps: tuple((p, False) for p in ps)  # noqa: E731
    if rule.form == "ren":
        c2 = c + (rule.target,)
        return [
            Horizontal(((pop, False),), ctx.pop[(q, c2)]),
            Horizontal(((ctx.push[(q, c2)], False),), push),
        ]
    if rule.form == "ac":
        return [Horizontal(seq(rule.u) + ((pop, False),) + seq(rule.v), pop)]
    if rule.form == "as":
        return [Horizontal(seq(rule.u) + ((push, False),) + seq(rule.v), push)]
    if rule.form == "ap":
        return [Vertical(rule.target, push, push, False)]
    if rule.form == "rpl":
        return [Horizontal(seq(rule.u), push)]
    return [Horizontal(((pop, False),), push)]


def complete(ctx: UpdateContext, order: Sequence[UpdateRule] | None = None) -> Automaton:
    """Saturate the initial automaton with the per-rule transitions."""
    a0 = ctx.initial
    rules = list(ctx.rules if order is None else order)
    hs, vs = set(a0.horizontals), set(a0.verticals)
    by_last: dict = {}
    for q, c in ctx.push:
        by_last.setdefault(c[-1], []).append((q, c))
    rounds = 0
    while True:
        before = len(hs) + len(vs)
        for rule in rules:
            for q, c in by_last.get(rule.symbol, ()):
                for t in _rule_transitions(rule, ctx, q, c):
                    (hs if isinstance(t, Horizontal) else vs).add(t)
        rounds += 1
        if len(hs) + len(vs) == before:
            break
    added = len(hs) + len(vs) - len(a0.horizontals) - len(a0.verticals)
    assert added <= 2 * len(ctx.push) * max(1, len(rules))
    log.debug("completion: %d transitions added in %d rounds", added, rounds)
    return Automaton(a0.alphabet, a0.states, a0.finals, hs, vs)


def expected_state_count(ctx: UpdateContext) -> int:
    """State count predicted from the chain set alone."""
    entry_states = set(ctx.entries.values())
    p_in = {e for e in entry_states if e in ctx.base.states}
    n = len(ctx.base.states)
    for c in ctx.chains:
        users = sum(1 for q in ctx.bases if (c[0], q) in ctx.entries)
        n += users if len(c) == 1 else 2 * users
    assert len(p_in) == sum(1 for c in ctx.chains if len(c) == 1 for q in ctx.bases if (c[0], q) in ctx.entries)
    return n


def post_star_update(param: Automaton, a_l: Automaton, r: PHRS) -> tuple[Automaton, dict]:
    """CFHA for the closure, plus the symbol map queries must go through."""
    if is_loopfree(r):
        mapping = {s: s for s in sorted(r.symbols() | param.alphabet | a_l.alphabet)}
    else:
        r, (param, a_l), mapping = hat(PHRS(r.rules, param), [param, a_l])
    _, ctx = build_initial(param, a_l, PHRS(r.rules, param))
    return complete(ctx), mapping
