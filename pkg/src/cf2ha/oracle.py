"""Brute-force hedge rewriting, the ground truth for the closure constructions.

Rules have a left-hand side ``a($x)``; anything with ``symbol``, ``var`` and
``rhs`` attributes will do.  Matching is a plain label comparison, so there
is no sequence pattern matching here on purpose.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from itertools import product
from typing import Iterable, Iterator, NamedTuple

from .hedge import Hedge, Tree, enumerate_hedges, render_hedge, size, substitute, variables

log = logging.getLogger(__name__)


def _index(rules) -> dict:
    by = defaultdict(list)
    for r in rules:
        by[r.symbol].append(r)
    return by


def _rewrites(by: dict, h: Hedge) -> Iterator[Hedge]:
    for i, t in enumerate(h):
        for r in by.get(t.label, ()):
            yield h[:i] + substitute(r.rhs, {r.var: t.children}) + h[i + 1:]
        for kids in _rewrites(by, t.children):
            yield h[:i] + (Tree(t.label, kids),) + h[i + 1:]


def rewrites(rules, h: Hedge) -> list[Hedge]:
    """One entry per (rule, matching node) pair, duplicates kept."""
    return list(_rewrites(_index(rules), tuple(h)))


def one_step(rules, h: Hedge) -> set[Hedge]:
    return set(_rewrites(_index(rules), tuple(h)))


def size_nondecreasing(rule) -> bool:
    """True when no instance of ``rule`` shrinks the hedge it rewrites."""
    return rule.var in variables(rule.rhs) and size(rule.rhs) >= 2


class BoundedPost(NamedTuple):
    hedges: frozenset
    exact: bool

    def __contains__(self, h) -> bool:
        return h in self.hedges

    def __len__(self) -> int:
        return len(self.hedges)

    def __iter__(self):
        return iter(sorted(self.hedges, key=lambda h: (size(h), render_hedge(h))))


def post_star_bounded(rules, seeds: Iterable[Hedge], max_size: int, max_intermediate: int | None = None) -> BoundedPost:
    """Reachable hedges of size at most ``max_size``, exploring intermediates
    up to ``max_intermediate`` nodes.

    ``exact`` is set when every rule is size-nondecreasing: then no path to a
    small hedge passes through a larger one and the answer is the true
    ``post*`` restricted to the size bound.  Otherwise the result is an
    under-approximation.
    """
    rules = list(rules)
    if max_intermediate is None:
        max_intermediate = max_size
    if max_intermediate < max_size:
        raise ValueError("max_intermediate must be >= max_size")
    by = _index(rules)
    start = sorted({tuple(s) for s in seeds if size(s) <= max_intermediate}, key=lambda h: (size(h), render_hedge(h)))
    seen = set(start)
    frontier = start
    while frontier:
        nxt = set()
        for h in frontier:
            for g in _rewrites(by, h):
                if g not in seen and size(g) <= max_intermediate:
                    seen.add(g)
                    nxt.add(g)
        frontier = sorted(nxt, key=lambda h: (size(h), render_hedge(h)))
    exact = all(size_nondecreasing(r) for r in rules)
    return BoundedPost(frozenset(h for h in seen if size(h) <= max_size), exact)


def state_members(param, state: str, bound: int) -> list[Hedge]:
    from .decision import is_member

    a = param.with_finals({state})
    return [h for h in enumerate_hedges(param.alphabet, bound) if is_member(a, h)]


def instantiate_phrs(r, param_size_bound: int) -> list:
    """Ground rewrite rules obtained by replacing every parameter-state
    occurrence, independently, by a member of its language."""
    from .closure_monadic import RewriteRule

    languages: dict[str, list] = {}
    out = []
    for rule in r.rules:
        template = rule.template()
        slots = rule.parameters()
        for p in slots:
            if p not in languages:
                languages[p] = state_members(r.param, p, param_size_bound)
                if not languages[p]:
                    log.warning("state %s has no member up to size %d; rule %s dropped", p, param_size_bound, rule)
        if any(not languages[p] for p in slots):
            continue
        for choice in product(*(languages[p] for p in slots)):
            it = iter(choice)
            rhs = _fill(template, it)
            out.append(RewriteRule(rule.symbol, "$x", rhs))
    return out


def _fill(h: Hedge, choices) -> Hedge:
    out = []
    for t in h:
        if t.label.startswith("%"):
            out.extend(next(choices))
        else:
            out.append(Tree(t.label, _fill(t.children, choices)))
    return tuple(out)
