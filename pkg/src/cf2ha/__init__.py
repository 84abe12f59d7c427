"""Bidimensional context-free hedge automata and exact rewrite closures."""

__version__ = "0.1.0"

from .automata import Automaton, Fragment, Horizontal, Vertical, classify_fragment, load_automaton, parse_automaton
from .decision import accepted_hedges, clean, is_empty, is_member, mark_states, witness_trace
from .hedge import Tree, parse_hedge, render_hedge

__all__ = [
    "Automaton",
    "Fragment",
    "Horizontal",
    "Tree",
    "Vertical",
    "accepted_hedges",
    "classify_fragment",
    "clean",
    "is_empty",
    "is_member",
    "load_automaton",
    "mark_states",
    "parse_automaton",
    "parse_hedge",
    "render_hedge",
    "witness_trace",
]
