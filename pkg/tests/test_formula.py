from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import AGENTS, formulas
from stitlab.formula import (AgentVar, And, Cstit, Dstit, FormulaSyntaxError, Iff, Imagine,
                             Imp, Meta, Neg, Or, Poss, ReservedName, SchemaPattern, Settled,
                             UnknownAgent, Var, agents_of, depth, desugar, is_desugared,
                             match_schema, instantiate, parse, pattern, subformulas, to_text,
                             walk)

p, q, r = Var("p"), Var("q"), Var("r")


# --- parsing -----------------------------------------------------------------

@pytest.mark.parametrize("text,expected", [
    ("(p & ~q)", And(p, Neg(q))),
    ("[d a]p", Dstit("a", p)),
    ("[i a]p", Imagine("a", p)),
    ("S p -> p", Imp(Settled(p), p)),
    ("P q", Poss(q)),
    ("p -> q -> r", Imp(p, Imp(q, r))),
    ("p & q | r", Or(And(p, q), r)),
    ("p | q & r", Or(p, And(q, r))),
    ("p <-> q <-> r", Iff(Iff(p, q), r)),
    ("p & q & r", And(And(p, q), r)),
    ("~[c a]S p", Neg(Cstit("a", Settled(p)))),
    ("[c a]p -> [i b](p | q)", Imp(Cstit("a", p), Imagine("b", Or(p, q)))),
])
def test_parse_examples(text, expected):
    assert parse(text, {"a", "b"}) == expected


def test_malformed_bracket_is_syntax_error():
    with pytest.raises(FormulaSyntaxError) as e:
        parse("I a]p", {"a"})
    assert e.value.position is not None


@pytest.mark.parametrize("text", ["", "p &", "(p", "p q", "[x a]p", "[c a p", "~", "p -> -> q"])
def test_syntax_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse(text, {"a"})


def test_unknown_agent():
    with pytest.raises(UnknownAgent):
        parse("[c b]p", {"a"})


@pytest.mark.parametrize("text", ["S & p", "c", "p & i"])
def test_reserved_names_are_not_variables(text):
    with pytest.raises((ReservedName, FormulaSyntaxError)):
        parse(text, {"a"})


def test_reserved_name_error_class():
    with pytest.raises(ReservedName):
        parse("d", {"a"})


# --- printing ----------------------------------------------------------------

@pytest.mark.parametrize("f,text", [
    (And(p, Neg(q)), "p & ~q"),
    (Settled(Imp(p, p)), "S (p -> p)"),
    (Imagine("a", p), "[i a]p"),
    (Imp(Imp(p, q), r), "(p -> q) -> r"),
    (Imp(p, Imp(q, r)), "p -> q -> r"),
    (And(Or(p, q), r), "(p | q) & r"),
    (Iff(p, Iff(q, r)), "p <-> (q <-> r)"),
    (Neg(Neg(p)), "~~p"),
])
def test_print_examples(f, text):
    assert to_text(f) == text


@settings(max_examples=400, deadline=None)
@given(formulas(max_depth=6))
def test_round_trip(f):
    assert depth(f) <= 6
    assert parse(to_text(f), AGENTS) == f


# --- desugaring --------------------------------------------------------------

def test_desugar_examples():
    assert desugar(Dstit("a", p)) == And(Cstit("a", p), Neg(Settled(p)))
    assert desugar(Poss(p)) == Neg(Settled(Neg(p)))
    assert desugar(p) == p


def _leaves(f):
    names = Counter(g.name for g in walk(f) if isinstance(g, Var))
    agents = set(agents_of(f))
    return set(names), agents


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_desugar_idempotent_and_leaf_preserving(f):
    d = desugar(f)
    assert is_desugared(d)
    assert not any(isinstance(g, (Poss, Dstit)) for g in walk(d))
    assert desugar(d) == d
    assert _leaves(d) == _leaves(f)


# --- subformulas -------------------------------------------------------------

def test_subformulas_examples():
    assert subformulas(p) == [p]
    assert subformulas(And(p, Neg(p))) == [p, Neg(p), And(p, Neg(p))]
    assert subformulas(Imagine("a", p)) == [p, Imagine("a", p)]


@settings(max_examples=200, deadline=None)
@given(formulas(sugar=False))
def test_subformulas_post_order_and_unique(f):
    subs = subformulas(f)
    assert subs[-1] == f
    assert len(subs) == len(set(subs))
    assert set(subs) == set(walk(f))
    seen = set()
    for g in subs:
        assert all(k in seen for k in g.children())
        seen.add(g)


# --- schemata ----------------------------------------------------------------

T_SCHEMA = SchemaPattern(pattern("S B1 -> B1"), name="A1T")
A3_SCHEMA = SchemaPattern(pattern("S B1 -> [c al1]B1"), name="A3")
TWO = SchemaPattern(pattern("[c al1]B1 & [c al2]B2"),
                    distinct=((AgentVar("α1"), AgentVar("α2")),))


def test_match_examples():
    assert match_schema(T_SCHEMA, parse("S p -> p")) == {"B1": p}
    assert match_schema(A3_SCHEMA, parse("S p -> [c a]p", {"a"})) == {"B1": p, AgentVar("α1"): "a"}
    assert match_schema(TWO, parse("[c a]p & [c a]q", {"a"})) is None
    assert match_schema(TWO, parse("[c a]p & [c b]q", {"a", "b"})) is not None


def test_match_rejects_inconsistent_metavariables():
    assert match_schema(T_SCHEMA, parse("S p -> q")) is None
    assert match_schema(A3_SCHEMA, parse("S p -> [c a]q", {"a"})) is None


def test_pattern_builds_metavariables():
    f = pattern("[i al2]B3")
    assert f == Imagine(AgentVar("α2"), Meta("B3"))


@settings(max_examples=200, deadline=None)
@given(formulas(sugar=False, max_depth=3), formulas(sugar=False, max_depth=3),
       st.permutations(AGENTS))
def test_schema_round_trip(b1, b2, agents):
    sigma = {"B1": b1, "B2": b2, AgentVar("α1"): agents[0], AgentVar("α2"): agents[1]}
    for schema in (T_SCHEMA, A3_SCHEMA, TWO):
        got = match_schema(schema, instantiate(schema, sigma))
        assert got is not None
        assert instantiate(schema, got) == instantiate(schema, sigma)


def test_formulas_are_hashable_values():
    assert hash(parse("p & q")) == hash(And(p, q))
    assert len({parse("[c a]p", {"a"}), Cstit("a", p)}) == 1
    with pytest.raises(Exception):
        p.name = "q"
