"""Membership, emptiness and cleaning for CF2HA."""

from __future__ import annotations

import logging
from collections import defaultdict, deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

from .automata import Automaton, Horizontal, Vertical, fresh, is_cfha_shaped
from .hedge import Hedge, Tree, render_hedge

log = logging.getLogger(__name__)

H, V = "h", "v"


@dataclass(frozen=True)
class Marking:
    """Per-state marks.  ``h``: some ground hedge reduces to the state;
    ``v``: some context carries an arbitrary hedge up as the state's argument."""

    marks: dict
    iterations: int

    def __getitem__(self, q: str) -> frozenset:
        return self.marks.get(q, frozenset())

    def marked(self) -> set:
        return {q for q, m in self.marks.items() if m}


def mark_states(a: Automaton) -> Marking:
    """Mark states h (some hedge reduces to the state) and v (some context
    reduces to the state around any hedge).

    Empty-hedge rules can grow the children of a node that already exists,
    which the two marking rules do not see, so the fixpoint runs on the
    preprocessed automaton and nullable states get h afterwards.
    """
    null = nullable(a)
    a, original = preprocess(a), a.states
    marks: dict[str, set] = {q: set() for q in a.states}

    def any_mark(p):
        return p in a.alphabet or bool(marks[p])

    def carries(p):
        return p in a.alphabet or V in marks[p]

    iterations = 0
    while True:
        before = sum(len(m) for m in marks.values())
        for t in a.horizontals:
            if all(any_mark(p) for p in t.labels):
                marks[t.target].add(H)
                if any(var and carries(p) for p, var in t.lhs):
                    marks[t.target].add(V)
        for t in a.verticals:
            if carries(t.outer) and any_mark(t.inner):
                marks[t.target].add(H)
                if t.var and carries(t.inner):
                    marks[t.target].add(V)
        if sum(len(m) for m in marks.values()) == before:
            break
        iterations += 1
    assert iterations <= 2 * len(a.states)
    for q in null:
        marks[q].add(H)
    return Marking({q: frozenset(marks[q]) for q in original}, iterations)


def is_empty(a: Automaton) -> bool:
    m = mark_states(a)
    return not any(m[q] for q in a.finals)


def clean(a: Automaton) -> Automaton:
    """Remove states with an empty language."""
    return a.restrict(mark_states(a).marked())


def nullable(a: Automaton) -> set:
    """States ``q`` with ``eps ->* q``."""
    out: set = set()
    changed = True
    while changed:
        changed = False
        for t in a.horizontals:
            if t.target not in out and all(p in out for p in t.labels):
                out.add(t.target)
                changed = True
        for t in a.verticals:
            if t.target not in out and t.outer in out and t.inner in out:
                out.add(t.target)
                changed = True
    return out


def _force_eps(t):
    if isinstance(t, Horizontal):
        return Horizontal(tuple((p, False) for p, _ in t.lhs), t.target)
    return Vertical(t.outer, t.inner, t.target, False)


def _retarget(t, q):
    if isinstance(t, Horizontal):
        return Horizontal(t.lhs, q)
    return Vertical(t.outer, t.inner, q, t.var)


def preprocess(a: Automaton) -> Automaton:
    """Equivalent automaton in which every step strictly shrinks the pair
    (symbol occurrences, state occurrences).

    Empty-hedge rules are folded into variants that skip nullable positions;
    unit rules ``p(x) -> q(x)`` and ``p -> q`` are folded into the rules that
    produce ``p``.  If the empty hedge is accepted, a fresh final state with
    ``-> q`` and no other occurrence keeps it so.
    """
    null = nullable(a)
    hs: set = set()
    vs: set = set(a.verticals)
    for t in a.horizontals:
        if not t.lhs:
            continue
        skippable = [i for i, (p, _) in enumerate(t.lhs) if p in null]
        for k in range(len(skippable) + 1):
            for drop in combinations(skippable, k):
                lhs = tuple(x for i, x in enumerate(t.lhs) if i not in drop)
                if lhs:
                    hs.add(Horizontal(lhs, t.target))
    for t in a.verticals:
        if t.inner in null:
            hs.add(Horizontal(((t.outer, False),), t.target))

    units = {t for t in hs if len(t.lhs) == 1 and t.lhs[0][0] in a.states}
    others = [t for t in hs if t not in units] + sorted(vs)
    step = defaultdict(list)
    for t in units:
        step[t.lhs[0][0]].append((t.target, t.lhs[0][1]))

    out_h, out_v = set(), set()
    for t in others:
        # (state, still carrying the argument) pairs reachable through units
        seen = {(t.target, True)}
        todo = [(t.target, True)]
        while todo:
            p, full = todo.pop()
            for q, var in step[p]:
                nxt = (q, full and var)
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        for q, full in seen:
            u = _retarget(t, q) if full else _retarget(_force_eps(t), q)
            (out_h if isinstance(u, Horizontal) else out_v).add(u)

    states = set(a.states)
    finals = set(a.finals)
    if finals & null:
        taken = states | set(a.alphabet)
        e = fresh("nullable", taken)
        states.add(e)
        finals.add(e)
        out_h.add(Horizontal((), e))
    return Automaton(a.alphabet, states, finals, out_h, out_v)


# -- search ------------------------------------------------------------------


class Recognizer:
    """Membership search over configurations of the preprocessed automaton.

    Configurations are hedges over symbols and states; a state node's
    children are its argument.  Results are memoized across calls.
    """

    def __init__(self, a: Automaton):
        self.automaton = a
        self.pre = pre = preprocess(a)
        self.accepts_empty = bool(a.finals & nullable(a))
        self.finals = pre.finals
        self.states = pre.states
        self.by_first = defaultdict(list)
        for t in pre.horizontals:
            if t.lhs:
                self.by_first[t.lhs[0][0]].append(t)
        self.by_pair = defaultdict(list)
        for t in pre.verticals:
            self.by_pair[(t.outer, t.inner)].append(t)
        self.preds_h = defaultdict(list)
        for t in pre.horizontals:
            if t.lhs:
                self.preds_h[t.target].append(t)
        self.preds_v = defaultdict(list)
        for t in pre.verticals:
            self.preds_v[t.target].append(t)
        self._memo: dict = {}
        self.chart = ChartParser(a) if is_cfha_shaped(a) else None
        self.segments = SegmentParser(pre)

    # forward
    def successors(self, h: Hedge):
        """Yield ``(transition, configuration)`` for every one-step move."""
        n = len(h)
        for i, node in enumerate(h):
            for t in self.by_first.get(node.label, ()):
                k = len(t.lhs)
                if i + k > n:
                    continue
                arg = []
                for (label, var), m in zip(t.lhs, h[i:i + k]):
                    if m.label != label or (not var and m.children):
                        break
                    arg.extend(m.children)
                else:
                    yield t, h[:i] + (Tree(t.target, tuple(arg)),) + h[i + k:]
            if len(node.children) == 1:
                inner = node.children[0]
                for t in self.by_pair.get((node.label, inner.label), ()):
                    if t.var:
                        yield t, h[:i] + (Tree(t.target, inner.children),) + h[i + 1:]
                    elif not inner.children:
                        yield t, h[:i] + (Tree(t.target, ()),) + h[i + 1:]
            for t, kids in self.successors(node.children):
                yield t, h[:i] + (Tree(node.label, kids),) + h[i + 1:]

    def _accepting(self, h: Hedge) -> bool:
        return len(h) == 1 and h[0].label in self.finals and not h[0].children

    def _reach(self, h: Hedge) -> bool:
        memo = self._memo
        if h in memo:
            return memo[h]
        memo[h] = False
        if self._accepting(h):
            memo[h] = True
            return True
        for _, nxt in self.successors(h):
            if self._reach(nxt):
                memo[h] = True
                return True
        return False

    def member(self, h: Hedge) -> bool:
        h = tuple(h)
        if not h:
            return self.accepts_empty
        if self.chart is not None:
            return bool(self.chart.hedge_states(h) & self.automaton.finals)
        if self.segments is not None:
            return any(not y.children and y.label in self.finals for y in self.segments.reduce(h))
        return self._reach(h)

    def trace(self, h: Hedge) -> list | None:
        """Steps ``(configuration, transition, next configuration)`` ending in
        a final state, or ``None`` when ``h`` is rejected."""
        h = tuple(h)
        if not h:
            if not self.accepts_empty:
                return None
            e = next(t for t in self.pre.horizontals if not t.lhs and t.target in self.finals)
            return [((), e, (Tree(e.target),))]
        if not self._reach(h):
            return None
        steps = []
        cur = h
        while not self._accepting(cur):
            for t, nxt in self.successors(cur):
                if self._reach(nxt):
                    steps.append((cur, t, nxt))
                    cur = nxt
                    break
        return steps

    # backward
    def predecessors(self, h: Hedge):
        for i, node in enumerate(h):
            q = node.label
            if q in self.states:
                u = node.children
                for t in self.preds_h.get(q, ()):
                    for parts in _splits(u, sum(1 for _, var in t.lhs if var)):
                        it = iter(parts)
                        nodes = tuple(Tree(label, next(it) if var else ()) for label, var in t.lhs)
                        yield h[:i] + nodes + h[i + 1:]
                for t in self.preds_v.get(q, ()):
                    if t.var:
                        yield h[:i] + (Tree(t.outer, (Tree(t.inner, u),)),) + h[i + 1:]
                    elif not u:
                        yield h[:i] + (Tree(t.outer, (Tree(t.inner, ()),)),) + h[i + 1:]
            for kids in self.predecessors(node.children):
                yield h[:i] + (Tree(node.label, kids),) + h[i + 1:]

    def generate(self, max_size: int) -> set:
        """All accepted ground hedges with at most ``max_size`` nodes.

        Runs the transitions backwards from the final states.  Forward steps
        never grow a configuration, so the size bound loses nothing."""
        found = {()} if self.accepts_empty else set()
        start = [(Tree(q, ()),) for q in sorted(self.finals) if _sz(((Tree(q, ()),))) <= max_size]
        seen = set(start)
        todo = deque(start)
        while todo:
            cfg = todo.popleft()
            if not self._has_state(cfg):
                found.add(cfg)
                continue
            for prev in self.predecessors(cfg):
                if prev not in seen and _sz(prev) <= max_size:
                    seen.add(prev)
                    todo.append(prev)
        return found

    def _has_state(self, h: Hedge) -> bool:
        return any(t.label in self.states or self._has_state(t.children) for t in h)


class SegmentParser:
    """Membership for the preprocessed automaton by segment decomposition.

    Without empty-hedge rules a sibling list never becomes empty through
    steps inside it, and a move that carries children upward does not look
    at them.  So every run can be reordered to reduce a carried hedge only
    when a vertical transition inspects it, and a list collapsing to one
    node always splits into contiguous segments that collapse on their own.
    ``reduce`` returns the single nodes a list can become; children of those
    nodes are left unreduced.
    """

    def __init__(self, pre: Automaton):
        self.unary = defaultdict(list)
        self.multi = []
        for t in pre.horizontals:
            if len(t.lhs) == 1:
                label, var = t.lhs[0]
                self.unary[label].append((var, t.target))
            elif len(t.lhs) > 1:
                self.multi.append(t)
        self.vert = defaultdict(list)
        for t in pre.verticals:
            self.vert[t.outer].append((t.inner, t.var, t.target))
        self._forms: dict = {}
        self._reduce: dict = {}

    def forms(self, c: Tree) -> frozenset:
        got = self._forms.get(c)
        if got is not None:
            return got
        seen = {c}
        todo = [c]
        while todo:
            x = todo.pop()
            found = []
            for var, q in self.unary.get(x.label, ()):
                if var or not x.children:
                    found.append(Tree(q, x.children if var else ()))
            if x.children:
                for inner, var, q in self.vert.get(x.label, ()):
                    for y in self.reduce(x.children):
                        if y.label == inner and (var or not y.children):
                            found.append(Tree(q, y.children if var else ()))
            for y in found:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        got = self._forms[c] = frozenset(seen)
        return got

    def reduce(self, h: Hedge) -> frozenset:
        got = self._reduce.get(h)
        if got is not None:
            return got
        n = len(h)
        if n == 1:
            got = self.forms(h[0])
        else:
            out: set = set()
            for t in self.multi:
                k = len(t.lhs)
                if k > n:
                    continue
                for cuts in combinations(range(1, n), k - 1):
                    bounds = (0, *cuts, n)
                    options = []
                    for (label, var), lo, hi in zip(t.lhs, bounds, bounds[1:]):
                        opts = [y for y in self.reduce(h[lo:hi]) if y.label == label and (var or not y.children)]
                        if not opts:
                            break
                        options.append([y.children if var else () for y in opts])
                    else:
                        for args in product(*options):
                            out |= self.forms(Tree(t.target, tuple(x for a in args for x in a)))
            got = frozenset(out)
        self._reduce[h] = got
        return got


class ChartParser:
    """Membership for variable-free automata.

    Without arguments a horizontal transition is a context-free production
    over sibling sequences, so each child hedge is parsed with a chart and a
    tree ``a(w)`` reduces to ``q`` when ``a(p) -> q`` and ``w`` parses as ``p``.
    """

    def __init__(self, a: Automaton):
        self.a = a
        self.null = nullable(a)
        self.rules = [t for t in a.horizontals if t.lhs]
        self.by_inner = defaultdict(list)
        for t in a.verticals:
            self.by_inner[t.inner].append(t)
        self._trees: dict = {}
        self._hedges: dict = {}

    def tree_labels(self, t: Tree) -> frozenset:
        """Labels a single tree can stand for as one sibling."""
        got = self._trees.get(t)
        if got is None:
            inner = self.hedge_states(t.children)
            out = {t.label} if not t.children else set()
            for p in inner:
                for v in self.by_inner.get(p, ()):
                    if v.outer == t.label:
                        out.add(v.target)
            got = self._trees[t] = frozenset(out)
        return got

    def hedge_states(self, h: Hedge) -> frozenset:
        got = self._hedges.get(h)
        if got is not None:
            return got
        n = len(h)
        if n == 0:
            got = frozenset(self.null)
        else:
            chart = {}
            for length in range(1, n + 1):
                for i in range(n - length + 1):
                    chart[(i, i + length)] = self._span(chart, h, i, i + length)
            got = frozenset(x for x in chart[(0, n)] if x in self.a.states)
        self._hedges[h] = got
        return got

    def _span(self, chart: dict, h: Hedge, i: int, j: int) -> set:
        cell = set(self.tree_labels(h[i])) if j == i + 1 else set()
        chart[(i, j)] = cell
        changed = True
        while changed:
            changed = False
            for t in self.rules:
                if t.target in cell:
                    continue
                reach = {i}
                for p, _ in t.lhs:
                    nxt = {m for m in reach if p in self.null}
                    for m in reach:
                        for k in range(m + 1, j + 1):
                            if p in chart.get((m, k), ()):
                                nxt.add(k)
                    reach = nxt
                    if not reach:
                        break
                if j in reach:
                    cell.add(t.target)
                    changed = True
        return cell


@lru_cache(maxsize=None)
def _sz(h: Hedge) -> int:
    return sum(1 + _sz(t.children) for t in h)


def _splits(u: tuple, k: int):
    if k == 0:
        if not u:
            yield ()
        return
    if k == 1:
        yield (u,)
        return
    for i in range(len(u) + 1):
        for rest in _splits(u[i:], k - 1):
            yield (u[:i],) + rest


@lru_cache(maxsize=64)
def recognizer(a: Automaton) -> Recognizer:
    return Recognizer(a)


def _check_alphabet(a: Automaton, h: Hedge) -> None:
    for t in h:
        if t.label not in a.alphabet:
            raise ValueError(f"symbol {t.label!r} not in the alphabet")
        _check_alphabet(a, t.children)


def is_member(a: Automaton, h: Hedge) -> bool:
    h = tuple(h)
    _check_alphabet(a, h)
    return recognizer(a).member(h)


def witness_trace(a: Automaton, h: Hedge) -> list | None:
    h = tuple(h)
    _check_alphabet(a, h)
    return recognizer(a).trace(h)


def replay(a: Automaton, steps: list) -> bool:
    """Check that a trace is a chain of legal moves of ``preprocess(a)``
    ending in a final state."""
    r = recognizer(a)
    for cur, t, nxt in steps:
        if cur == () and not t.lhs:
            if nxt != (Tree(t.target),) or t not in r.pre.horizontals:
                return False
            continue
        if (t, nxt) not in set(r.successors(cur)):
            return False
    last = steps[-1][2] if steps else None
    return last is not None and len(last) == 1 and last[0].label in r.finals and not last[0].children


def render_trace(steps: list) -> str:
    lines = []
    for k, (cur, t, nxt) in enumerate(steps, 1):
        lines.append(f"{k}. {render_hedge(cur) or 'ε'} -[{t}]-> {render_hedge(nxt)}")
    return "\n".join(lines)


def accepted_hedges(a: Automaton, max_size: int) -> set:
    return recognizer(a).generate(max_size)


def state_language(a: Automaton, q: str) -> Automaton:
    """Automaton whose language is ``L(a, q)``."""
    return a.with_finals({q})
