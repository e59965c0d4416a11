"""Soundness checks on streams small enough to run in the default suite."""

import pytest

from stitlab.formula import parse
from stitlab.generate import ModelBounds, enumerate_models
from stitlab.semantics import Evaluator
from stitlab.soundness import (FORMULA_POOL, POOL_TEXT, SOUND_SCHEMAS, axiom_instances,
                               axiom_soundness, fuzz, rule_preservation, usable_pool)
from stitlab.proof import check_axiom

P = lambda *texts: tuple(parse(t) for t in texts)

# exhaustive definable-policy streams small enough for the default run
ONE_AGENT = ModelBounds(max_moments=3, max_agents=1, variables=("p",), max_family=1,
                        props="definable", pool=P("p", "[i a]p", "S p"))
TWO_AGENTS = ModelBounds(max_moments=2, max_agents=2, variables=("p",), max_family=2,
                         props="definable", pool=P("p", "[i a]p", "[i b]p"))
# larger ones, marked slow (about a minute each)
ONE_AGENT_WIDE = ModelBounds(max_moments=3, max_agents=1, variables=("p",), max_family=1,
                             props="definable",
                             pool=P(*(t for t in POOL_TEXT if "b" not in t and "q" not in t)))
ONE_AGENT_FAM2 = ModelBounds(max_moments=3, max_agents=1, variables=("p",), max_family=2,
                             props="definable", pool=P("p", "[i a]p", "S p"))


def test_pool_has_twenty_formulas():
    assert len(FORMULA_POOL) == 20 == len(set(FORMULA_POOL))


@pytest.mark.parametrize("name", SOUND_SCHEMAS)
def test_generated_instances_are_instances(name):
    for k, f in enumerate(axiom_instances(name, FORMULA_POOL, ("a", "b"))):
        assert check_axiom(name, f), f
        if k > 400:
            break


def test_usable_pool_drops_foreign_agents():
    assert all("b" not in str(f) for f in usable_pool(FORMULA_POOL, ("a",)))


@pytest.mark.parametrize("bounds", [ONE_AGENT, TWO_AGENTS], ids=["one-agent", "two-agents"])
def test_axioms_and_rules_sound_on_small_streams(bounds):
    models = list(enumerate_models(bounds))
    assert len(models) > 500
    axioms = axiom_soundness(models, bounds.pool)
    assert axioms.ok, axioms.failures[0].describe()
    rules = rule_preservation(models, bounds.pool)
    assert rules.ok, rules.failures[0].describe()
    assert set(rules.per_kind) == {"R1", "R2", "R3"}


@pytest.mark.slow
@pytest.mark.parametrize("bounds", [ONE_AGENT_WIDE, ONE_AGENT_FAM2], ids=["wide-pool", "family-2"])
def test_axioms_sound_on_larger_streams(bounds):
    report = axiom_soundness(enumerate_models(bounds), bounds.pool)
    assert report.models > 10_000
    assert report.ok, report.failures[0].describe()


def test_small_stream_detects_dropped_clause():
    report = axiom_soundness(enumerate_models(TWO_AGENTS), TWO_AGENTS.pool,
                             evaluator=Evaluator(drop_clause_ii=True))
    assert not report.ok


def test_fuzz_is_clean():
    report = fuzz(60, 1)
    assert report.models == 60
    assert report.ok, report.failures[0].describe()
    assert set(SOUND_SCHEMAS) <= set(report.per_kind)


def test_fuzz_catches_dropped_clause():
    report = fuzz(60, 1, evaluator=Evaluator(drop_clause_ii=True))
    assert not report.ok
    assert any(f.kind == "A5" for f in report.failures)
