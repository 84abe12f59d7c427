from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cf2ha.closure_monadic import load_rules, parse_rules
from cf2ha.closure_update import PHRS, UpdateRule, load_phrs
from cf2ha.hedge import Tree, enumerate_hedges, parse_hedge, render_hedge, size
from cf2ha.oracle import instantiate_phrs, one_step, post_star_bounded, rewrites

from helpers import fixture, load

PATTERN_RULES = load_rules(fixture("pattern.hrs"))


def texts(hs):
    return {render_hedge(h) for h in hs}


def test_one_step_sequence_from_p0():
    assert texts(one_step(PATTERN_RULES, parse_hedge("p0"))) == {"a p1"}
    assert texts(one_step(PATTERN_RULES, parse_hedge("a p1"))) == {"a p2 c"}
    assert texts(one_step(PATTERN_RULES, parse_hedge("a p2 c"))) == {"a p0(b) c", "a b c"}


def test_one_step_without_matches():
    assert one_step(PATTERN_RULES, parse_hedge("a b(c) c")) == set()
    assert one_step([], parse_hedge("p0")) == set()


def test_rewriting_splices_into_siblings():
    rules = parse_rules("rule a($x) -> $x\n")
    assert texts(one_step(rules, parse_hedge("b(c a(d e) f)"))) == {"b(c d e f)"}


def _matches(rules, h):
    by = Counter(r.symbol for r in rules)
    return sum(by[t.label] + _matches(rules, t.children) for t in h)


@settings(max_examples=60)
@given(st.integers(0, 2000))
def test_successor_count_equals_label_matches(i):
    hs = enumerate_hedges(["a", "p0", "p1", "p2"], 4)
    h = hs[i % len(hs)]
    assert len(rewrites(PATTERN_RULES, h)) == _matches(PATTERN_RULES, h)


def test_post_star_from_p0():
    res = post_star_bounded(PATTERN_RULES, [parse_hedge("p0")], 9)
    assert res.exact
    assert {"a a b(b) c c", "a b c", "p0", "a p1"} <= texts(res)
    assert all(size(h) <= 9 for h in res)


def test_post_star_without_rules():
    seeds = [parse_hedge("a b"), parse_hedge("a(b(c(d)))")]
    assert set(post_star_bounded([], seeds, 2).hedges) == {seeds[0]}


def test_slack_is_monotone_and_reported():
    r = load_phrs(fixture("doc.phrs"))
    rules = instantiate_phrs(r, 2)
    tight = post_star_bounded(rules, [parse_hedge("doc")], 4)
    loose = post_star_bounded(rules, [parse_hedge("doc")], 4, 6)
    assert not tight.exact and not loose.exact
    assert tight.hedges <= loose.hedges
    with pytest.raises(ValueError):
        post_star_bounded(rules, [], 4, 3)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 6), st.sets(st.sampled_from(["p0", "p1", "p2", "a p1", "p2 c"]), max_size=3))
def test_post_star_monotone(n, m, seeds):
    seeds = [parse_hedge(s) for s in seeds]
    lo, hi = n, max(n, m)
    small = post_star_bounded(PATTERN_RULES, seeds[:1], lo).hedges
    assert small <= post_star_bounded(PATTERN_RULES, seeds, lo).hedges
    assert small <= post_star_bounded(PATTERN_RULES, seeds[:1], hi).hedges
    universe = enumerate_hedges(["a", "b", "c", "p0", "p1", "p2"], lo)
    assert len(post_star_bounded(PATTERN_RULES, seeds, lo)) <= len(universe)


def test_instantiate_without_parameters():
    r = PHRS((UpdateRule("ren", "a", "b"),), load("loop_param.aut"))
    assert [str(x) for x in instantiate_phrs(r, 3)] == ["a($x) -> b($x)"]


def test_instantiate_ac_with_singleton_language():
    r = load_phrs(fixture("doc.phrs"))
    ac = PHRS(tuple(x for x in r.rules if x.form == "ac"), r.param)
    assert [str(x) for x in instantiate_phrs(ac, 3)] == ["doc($x) -> doc(item $x)"]


def test_occurrences_are_independent():
    param = load("rpl_param.aut")  # bs accepts b, b b, b b b, ...
    r = PHRS((UpdateRule("as", "a", u=("bs",), v=("bs",)),), param)
    got = instantiate_phrs(r, 2)
    assert len(got) == 4
    assert {render_hedge(x.rhs) for x in got} == {
        "b a($x) b",
        "b a($x) b b",
        "b b a($x) b",
        "b b a($x) b b",
    }


def test_empty_parameter_language_drops_the_rule(caplog):
    param = load("rpl_param.aut")
    r = PHRS((UpdateRule("rpl", "a", u=("bs",)),), param)
    assert instantiate_phrs(r, 0) == []
    assert "no member" in caplog.text


def test_all_rule_forms_instantiate_to_their_shape():
    param = load("doc_param.aut")
    forms = [
        (UpdateRule("ren", "doc", "log"), "log($x)"),
        (UpdateRule("ac", "doc", u=("p",)), "doc(item $x)"),
        (UpdateRule("as", "doc", v=("p",)), "doc($x) item"),
        (UpdateRule("ap", "doc", "log"), "log(doc($x))"),
        (UpdateRule("rpl", "doc", u=("p", "p")), "item item"),
        (UpdateRule("del", "doc"), "$x"),
    ]
    for rule, rhs in forms:
        [g] = instantiate_phrs(PHRS((rule,), param), 2)
        assert render_hedge(g.rhs) == rhs
        assert g.symbol == "doc"
    assert Tree("$x") in instantiate_phrs(PHRS((forms[-1][0],), param), 1)[0].rhs
