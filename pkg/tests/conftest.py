import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from stitlab.formula import (And, Cstit, Dstit, Iff, Imagine, Imp, Neg, Or, Poss,
                             Settled, Var)

DATA = Path(__file__).resolve().parent.parent / "data"
MODELS = DATA / "models"
PROOFS = DATA / "proofs"

VARS = ("p", "q", "r")
AGENTS = ("a", "b")


def formulas(agents=AGENTS, variables=VARS, max_depth=6, sugar=True):
    """Hypothesis strategy for formulas of depth at most ``max_depth``."""
    leaves = st.sampled_from([Var(v) for v in variables])
    agent = st.sampled_from(agents)

    def extend(children):
        unary = [st.builds(Neg, children), st.builds(Settled, children),
                 st.builds(Cstit, agent, children), st.builds(Imagine, agent, children)]
        if sugar:
            unary += [st.builds(Poss, children), st.builds(Dstit, agent, children)]
        binary = [st.builds(k, children, children) for k in (And, Or, Imp, Iff)]
        return st.one_of(*unary, *binary)

    # each recursive layer adds one level of depth
    s = leaves
    for _ in range(max_depth):
        s = st.one_of(leaves, extend(s))
    return s


def random_formula(rng: random.Random, depth: int, agents=AGENTS, variables=VARS):
    """Desugared random formula, plain-random flavour for loops outside hypothesis."""
    if depth == 0 or rng.random() < 0.2:
        return Var(rng.choice(variables))
    k = rng.randrange(8)
    sub = lambda: random_formula(rng, depth - 1, agents, variables)
    if k == 0:
        return Neg(sub())
    if k == 1:
        return Settled(sub())
    if k == 2:
        return Cstit(rng.choice(agents), sub())
    if k == 3:
        return Imagine(rng.choice(agents), sub())
    return (And, Or, Imp, Iff)[k - 4](sub(), sub())


@pytest.fixture
def models_dir():
    return MODELS


@pytest.fixture
def proofs_dir():
    return PROOFS
