"""Shared test helpers: fixture loading, random automata and a naive
membership search used as an independent reference."""

from __future__ import annotations

import random
from collections import deque
from pathlib import Path

from cf2ha.automata import Automaton, Horizontal, Vertical, load_automaton
from cf2ha.hedge import Tree, size

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(name: str) -> Path:
    return FIXTURES / name


def load(name: str) -> Automaton:
    return load_automaton(fixture(name))


def random_automaton(seed: int, max_states: int = 5, max_transitions: int = 8, alphabet=("a", "b")) -> Automaton:
    rng = random.Random(seed)
    states = [f"q{i}" for i in range(rng.randint(1, max_states))]
    labels = list(alphabet) + states
    hs, vs = set(), set()
    for _ in range(rng.randint(1, max_transitions)):
        target = rng.choice(states)
        if rng.random() < 0.6:
            lhs = tuple((rng.choice(labels), rng.random() < 0.4) for _ in range(rng.choice((0, 1, 1, 2, 2))))
            hs.add(Horizontal(lhs, target))
        else:
            vs.add(Vertical(rng.choice(labels), rng.choice(labels), target, rng.random() < 0.4))
    finals = rng.sample(states, rng.randint(1, min(2, len(states))))
    return Automaton(set(alphabet), set(states), set(finals), hs, vs)


def _naive_steps(a: Automaton, h: tuple):
    """Moves of the automaton exactly as defined, ε-rules included."""
    n = len(h)
    for t in a.horizontals:
        k = len(t.lhs)
        if k == 0:
            for i in range(n + 1):
                yield h[:i] + (Tree(t.target),) + h[i:]
            continue
        for i in range(n - k + 1):
            arg = []
            for (label, var), node in zip(t.lhs, h[i:i + k]):
                if node.label != label or (node.children and not var):
                    break
                arg.extend(node.children)
            else:
                yield h[:i] + (Tree(t.target, tuple(arg)),) + h[i + k:]
    for i, node in enumerate(h):
        for t in a.verticals:
            if node.label == t.outer and len(node.children) == 1 and node.children[0].label == t.inner:
                inner = node.children[0].children
                if t.var or not inner:
                    yield h[:i] + (Tree(t.target, inner),) + h[i + 1:]
        for kids in _naive_steps(a, node.children):
            yield h[:i] + (Tree(node.label, kids),) + h[i + 1:]


def naive_member(a: Automaton, h: tuple, slack: int = 3) -> bool:
    """Breadth-first search over configurations of at most ``size(h) + slack``
    nodes.  Exact whenever some accepting run stays within that bound."""
    limit = size(h) + slack
    goal = {(Tree(q),) for q in a.finals}
    start = tuple(h)
    seen = {start}
    todo = deque([start])
    while todo:
        cfg = todo.popleft()
        if cfg in goal:
            return True
        for nxt in _naive_steps(a, cfg):
            if nxt not in seen and size(nxt) <= limit:
                seen.add(nxt)
                todo.append(nxt)
    return False


def singleton_automaton(h: tuple, alphabet) -> Automaton:
    """Automaton accepting exactly the ground hedge ``h``."""
    hs, vs = set(), set()
    names: dict = {}

    def tree_state(t):
        if t not in names:
            names[t] = q = f"t{len(names)}"
            if t.children:
                vs.add(Vertical(t.label, hedge_state(t.children), q, False))
            else:
                hs.add(Horizontal(((t.label, False),), q))
        return names[t]

    def hedge_state(g):
        parts = [tree_state(t) for t in g]
        if len(parts) == 1:
            return parts[0]
        key = ("hedge", g)
        if key not in names:
            names[key] = q = f"t{len(names)}"
            hs.add(Horizontal(tuple((p, False) for p in parts), q))
        return names[key]

    final = hedge_state(h) if h else "t_eps"
    if not h:
        hs.add(Horizontal((), final))
    states = set(names.values()) | {final}
    return Automaton(set(alphabet), states, {final}, hs, vs)
