"""Axiom and rule soundness checks over streams of models.

Schema instances are drawn from :data:`FORMULA_POOL`; an instance is only
built from pool formulas whose agents the model declares, and agent
metavariables range over the model's agents.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .formula import (AgentModal, AgentVar, Formula, Iff, Imagine, Imp, Meta,
                      Settled, agents_of, desugar, instantiate, parse, walk)
from .generate import ModelBounds, random_model
from .model import ImaginationModel, Point
from .proof import SCHEMAS, a4_schema
from .semantics import DEFAULT, Evaluator, compiled

log = logging.getLogger(__name__)

POOL_TEXT = (
    "p",
    "q",
    "~p",
    "p & q",
    "p | ~q",
    "p -> q",
    "S p",
    "P q",
    "[c a]p",
    "[c b]q",
    "[d a]p",
    "[i a]p",
    "[i b]q",
    "~[c a]q",
    "[c a](p | q)",
    "[i a](p & q)",
    "P [c b]p",
    "[c a][i a]p",
    "[i a][c b]p",
    "[i b](p -> [i a]q)",
)

FORMULA_POOL: Tuple[Formula, ...] = tuple(desugar(parse(t)) for t in POOL_TEXT)

SOUND_SCHEMAS = ("A1K", "A1T", "A15", "A2K", "A2T", "A25", "A3", "A4", "A5")

# A4 with three or more agents ranges over this many pool formulas only
A4_WIDE_POOL = 5


def usable_pool(pool: Sequence[Formula], agents: Sequence[str]) -> List[Formula]:
    have = set(agents)
    return [desugar(f) for f in pool if set(agents_of(f)) <= have]


def axiom_instances(name: str, pool: Sequence[Formula],
                    agents: Sequence[str]) -> Iterator[Formula]:
    """Every instance of schema ``name`` over ``pool`` and ``agents``."""
    pool = usable_pool(pool, agents)
    if name == "A4":
        for n in range(1, len(agents) + 1):
            schema = a4_schema(n)
            alphas = [AgentVar(f"α{k}") for k in range(1, n + 1)]
            sub = pool if n <= 2 else pool[:A4_WIDE_POOL]
            for picked in itertools.permutations(agents, n):
                for args in itertools.product(sub, repeat=n):
                    sigma = dict(zip(alphas, picked))
                    sigma.update({f"B{k + 1}": a for k, a in enumerate(args)})
                    yield instantiate(schema, sigma)
        return
    schema = SCHEMAS[name]
    metas = sorted({g.name for g in walk(schema.pattern) if isinstance(g, Meta)})
    alpha = next((g.agent for g in walk(schema.pattern)
                  if isinstance(g, AgentModal) and isinstance(g.agent, AgentVar)), None)
    for args in itertools.product(pool, repeat=len(metas)):
        sigma = dict(zip(metas, args))
        if alpha is None:
            yield instantiate(schema, sigma)
            continue
        for a in agents:
            sigma[alpha] = a
            yield instantiate(schema, sigma)


@dataclass
class Failure:
    kind: str
    formula: Formula
    model: ImaginationModel
    point: Point

    def describe(self) -> str:
        return f"{self.kind}: {self.formula} fails at {self.point} in {self.model!r}"


@dataclass
class SoundnessReport:
    models: int = 0
    checks: int = 0
    failures: List[Failure] = field(default_factory=list)
    per_kind: Dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def merge_kind(self, kind):
        self.per_kind[kind] = self.per_kind.get(kind, 0) + 1


def _fail_point(model, f, ev, memo) -> Optional[Point]:
    c = compiled(model)
    bad = c.full & ~ev.mask(model, f, memo)
    if not bad:
        return None
    return model.points[(bad & -bad).bit_length() - 1]


def check_axioms_in_model(model: ImaginationModel, report: SoundnessReport,
                          pool: Sequence[Formula] = FORMULA_POOL,
                          schemas: Sequence[str] = SOUND_SCHEMAS,
                          evaluator: Evaluator = DEFAULT,
                          max_failures: int = 10) -> None:
    memo: Dict[Formula, int] = {}
    for name in schemas:
        for f in axiom_instances(name, pool, model.agents):
            report.checks += 1
            report.merge_kind(name)
            pt = _fail_point(model, f, evaluator, memo)
            if pt is not None and len(report.failures) < max_failures:
                report.failures.append(Failure(name, f, model, pt))


def check_rules_in_model(model: ImaginationModel, report: SoundnessReport,
                         pool: Sequence[Formula] = FORMULA_POOL,
                         evaluator: Evaluator = DEFAULT,
                         max_failures: int = 10) -> None:
    """R1-R3 preserve validity in ``model`` for pool formulas."""
    memo: Dict[Formula, int] = {}
    full = compiled(model).full
    pool = usable_pool(pool, model.agents)

    def valid(f):
        return evaluator.mask(model, f, memo) == full

    def record(kind, f):
        report.checks += 1
        report.merge_kind(kind)
        pt = _fail_point(model, f, evaluator, memo)
        if pt is not None and len(report.failures) < max_failures:
            report.failures.append(Failure(kind, f, model, pt))

    valid_pool = [f for f in pool if valid(f)]
    for a, b in itertools.product(pool, repeat=2):
        if valid(a) and valid(Imp(a, b)):
            record("R1", b)
    for a in valid_pool:
        record("R2", Settled(a))
    for a, b in itertools.product(pool, repeat=2):
        if valid(Iff(a, b)):
            for ag in model.agents:
                record("R3", Iff(Imagine(ag, a), Imagine(ag, b)))


def axiom_soundness(models: Iterable[ImaginationModel],
                    pool: Sequence[Formula] = FORMULA_POOL,
                    evaluator: Evaluator = DEFAULT) -> SoundnessReport:
    report = SoundnessReport()
    for model in models:
        report.models += 1
        check_axioms_in_model(model, report, pool, evaluator=evaluator)
    return report


def rule_preservation(models: Iterable[ImaginationModel],
                      pool: Sequence[Formula] = FORMULA_POOL,
                      evaluator: Evaluator = DEFAULT) -> SoundnessReport:
    report = SoundnessReport()
    for model in models:
        report.models += 1
        check_rules_in_model(model, report, pool, evaluator=evaluator)
    return report


FUZZ_BOUNDS = ModelBounds(max_moments=5, max_agents=2, variables=("p", "q"),
                          max_family=2, props="definable", pool=FORMULA_POOL)


def random_models(count: int, seed: int,
                  bounds: ModelBounds = FUZZ_BOUNDS) -> Iterator[ImaginationModel]:
    for k in range(count):
        yield random_model(seed * 1_000_003 + k, bounds)


def fuzz(count: int, seed: int, bounds: ModelBounds = FUZZ_BOUNDS,
         evaluator: Evaluator = DEFAULT, rules: bool = True) -> SoundnessReport:
    """Check every schema instance (and optionally rule preservation) on
    ``count`` random models."""
    report = SoundnessReport()
    for model in random_models(count, seed, bounds):
        report.models += 1
        check_axioms_in_model(model, report, bounds.pool or FORMULA_POOL,
                              evaluator=evaluator)
        if rules:
            check_rules_in_model(model, report, bounds.pool or FORMULA_POOL,
                                 evaluator=evaluator)
    log.info("fuzz: %d models, %d checks, %d failures",
             report.models, report.checks, len(report.failures))
    return report
