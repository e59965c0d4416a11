"""Bounded countermodel search.

The search walks ``enumerate_models`` in its canonical order and reports
the first model with a point falsifying the formula.  Each hit is checked
again with the pointwise evaluator and the frame validator before it is
returned.  ``NotFound`` only speaks about the bounds it carries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .formula import Formula, Imagine, Neg, agents_of, desugar, variables, walk
from .generate import MAX_AGENTS, ModelBounds, enumerate_models
from .model import ImaginationModel, Point, validate
from .semantics import DEFAULT, Evaluator, refuting_point, satisfies

DEFAULT_MAX_MOMENTS = 3
DEFAULT_MAX_FAMILY = 2
DEFAULT_PROPS = "definable"


@dataclass
class Countermodel:
    model: ImaginationModel
    point: Point
    examined: int

    def __bool__(self):
        return True


@dataclass
class NotFound:
    bounds: ModelBounds
    examined: int

    def __bool__(self):
        return False


def default_bounds(f: Formula, max_moments: int = DEFAULT_MAX_MOMENTS,
                   max_family: int = DEFAULT_MAX_FAMILY, props: str = DEFAULT_PROPS,
                   extra_agents: int = 1, unsafe: bool = False) -> ModelBounds:
    """Bounds fitted to ``f``: its agents and variables, and for the
    definable policy the arguments of its imagination subformulas."""
    f = desugar(f)
    agents = agents_of(f) or ["a"]
    if not unsafe:
        extra_agents = min(extra_agents, max(0, MAX_AGENTS - len(agents)))
    names = list(agents)
    for extra in ("a", "b", "c", "d", "e"):
        if len(names) >= len(agents) + extra_agents:
            break
        if extra not in names:
            names.append(extra)
    pool = []
    for g in walk(f):
        if isinstance(g, Imagine) and g.sub not in pool:
            pool.append(g.sub)
    return ModelBounds(max_moments=max_moments, max_agents=len(names),
                       min_agents=len(agents), agent_names=tuple(names),
                       variables=tuple(variables(f)), max_family=max_family,
                       props=props, pool=tuple(pool), unsafe=unsafe)


def find_countermodel(f: Formula, bounds: Optional[ModelBounds] = None,
                      evaluator: Evaluator = DEFAULT):
    """First ``(model, point)`` within ``bounds`` where ``f`` fails, else NotFound."""
    f = desugar(f)
    if bounds is None:
        bounds = default_bounds(f)
    need = set(agents_of(f))
    examined = 0
    for model in enumerate_models(bounds):
        if not need <= set(model.agents):
            continue
        examined += 1
        pt = refuting_point(model, f, evaluator)
        if pt is None:
            continue
        if not satisfies(model, pt, Neg(f)):
            raise AssertionError(f"evaluators disagree on {f} at {pt}")
        report = validate(model)
        if report:
            raise AssertionError(f"generator produced an invalid model: {report.conditions()}")
        return Countermodel(model, pt, examined)
    return NotFound(bounds, examined)
