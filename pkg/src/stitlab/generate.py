"""Model generators: exhaustive enumeration within bounds, and seeded random models.

Enumeration order is deterministic: tree shape (by size, then canonical
form), number of agents, choices, valuation, neighborhoods.  Trees are
enumerated up to isomorphism; everything above the frame is enumerated
exhaustively.

Neighborhood families are drawn from a set of candidate propositions:

``all``
    every subset of ``MH(M)``; only allowed while ``|MH| <= 4``.
``definable``
    the distinct extensions of the formulas in ``bounds.pool``, computed in
    the model with all neighborhoods empty.
``auto``
    ``all`` where ``|MH| <= 4``, ``definable`` elsewhere.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterator, List, Sequence, Tuple

from .formula import Formula, desugar
from .model import (ImaginationModel, ModelError, Point, TreeOrder,
                    compute_histories, undivided_classes)

MAX_MOMENTS = 6
MAX_AGENTS = 3
MAX_HISTORIES = 8
MAX_FAMILY = 3
MAX_ALL_SUBSETS_MH = 4
DEFAULT_CAP = 1_000_000

POLICIES = ("all", "definable", "auto")


class BoundsTooLarge(ModelError):
    def __init__(self, message: str, size: int = 0):
        self.size = size
        super().__init__(message)


@dataclass(frozen=True)
class ModelBounds:
    max_moments: int = 3
    max_agents: int = 1
    variables: Tuple[str, ...] = ("p",)
    max_family: int = 1
    props: str = "auto"
    pool: Tuple[Formula, ...] = ()
    agent_names: Tuple[str, ...] = ("a", "b", "c")
    min_agents: int = 1
    max_histories: int = MAX_HISTORIES
    cap: int = DEFAULT_CAP
    unsafe: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "agent_names", tuple(self.agent_names))
        object.__setattr__(self, "pool", tuple(desugar(f) for f in self.pool))
        if self.props not in POLICIES:
            raise ValueError(f"unknown proposition policy {self.props!r}")
        if self.max_agents > len(self.agent_names):
            raise ValueError("not enough agent names for max_agents")
        if not self.unsafe:
            for name, value, cap in (("max_moments", self.max_moments, MAX_MOMENTS),
                                     ("max_agents", self.max_agents, MAX_AGENTS),
                                     ("max_histories", self.max_histories, MAX_HISTORIES),
                                     ("max_family", self.max_family, MAX_FAMILY)):
                if value > cap:
                    raise BoundsTooLarge(f"{name}={value} exceeds the hard cap {cap}"
                                         " (use unsafe bounds to override)")

    def describe(self) -> Dict:
        return {"max_moments": self.max_moments, "agents": list(self.agent_names[:self.max_agents]),
                "min_agents": self.min_agents, "variables": list(self.variables),
                "max_family": self.max_family, "props": self.props,
                "pool": [str(f) for f in self.pool], "max_histories": self.max_histories}

    def policy_for(self, n_points: int) -> str:
        if self.props == "auto":
            return "all" if n_points <= MAX_ALL_SUBSETS_MH else "definable"
        return self.props


# ---------------------------------------------------------------------------
# frames

@lru_cache(maxsize=None)
def rooted_trees(n: int) -> Tuple[tuple, ...]:
    """Canonical forms of the rooted unlabeled trees with ``n`` nodes.

    A tree is the sorted tuple of its children's canonical forms.
    """
    if n < 1:
        return ()
    if n == 1:
        return ((),)
    return tuple(sorted(set(_forests(n - 1)), key=_tree_key))


@lru_cache(maxsize=None)
def _forests(total: int) -> Tuple[tuple, ...]:
    if total == 0:
        return ((),)
    out = set()
    for k in range(1, total + 1):
        for t in rooted_trees(k):
            for rest in _forests(total - k):
                out.add(tuple(sorted((t,) + rest, key=_tree_key)))
    return tuple(sorted(out, key=lambda f: [_tree_key(t) for t in f]))


def _tree_key(t) -> tuple:
    return (_size(t), [_tree_key(c) for c in t])


def _size(t) -> int:
    return 1 + sum(_size(c) for c in t)


def label_tree(shape) -> TreeOrder:
    """Name moments ``m0, m1, ...`` in preorder."""
    moments: List[str] = []
    covers = []

    def visit(node, parent):
        name = f"m{len(moments)}"
        moments.append(name)
        if parent is not None:
            covers.append((parent, name))
        for child in node:
            visit(child, name)

    visit(shape, None)
    return TreeOrder(tuple(moments), frozenset(covers))


def set_partitions(items: Sequence) -> Iterator[List[List]]:
    """All partitions of ``items``; the one-block partition comes first."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in set_partitions(rest):
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]
        yield [[first]] + p


def _independent(blocks_per_agent: Sequence[Sequence[FrozenSet[int]]]) -> bool:
    for pick in itertools.product(*blocks_per_agent):
        if not frozenset.intersection(*pick):
            return False
    return True


def choice_options(order: TreeOrder, histories, agents: Sequence[str]) -> List[Dict]:
    """Every admissible choice function for ``agents`` on the frame.

    Each agent's partition at ``m`` is a coarsening of the undividedness
    classes at ``m``; combinations failing independence are dropped.
    """
    per_moment = []
    for m in order.moments:
        classes = undivided_classes(order, histories, m)
        if len(classes) < 2:
            per_moment.append([None])
            continue
        parts = []
        for p in set_partitions(range(len(classes))):
            parts.append(tuple(frozenset().union(*(classes[i] for i in block))
                               for block in p))
        combos = [combo for combo in itertools.product(parts, repeat=len(agents))
                  if _independent(combo)]
        per_moment.append([(m, combo) for combo in combos])
    out = []
    for sel in itertools.product(*per_moment):
        choice = {}
        for entry in sel:
            if entry is None:
                continue
            m, combo = entry
            for a, cells in zip(agents, combo):
                if len(cells) > 1:
                    choice[(m, a)] = cells
        out.append(choice)
    return out


def _frames(bounds: ModelBounds):
    for n in range(1, bounds.max_moments + 1):
        for shape in rooted_trees(n):
            order = label_tree(shape)
            hist = compute_histories(order)
            if len(hist) > bounds.max_histories:
                continue
            yield order, hist


def _families(candidates: Sequence[FrozenSet[Point]], max_family: int):
    out = []
    for k in range(0, max_family + 1):
        out.extend(frozenset(c) for c in itertools.combinations(candidates, k))
    return out


def _all_subsets(points: Sequence[Point]) -> List[FrozenSet[Point]]:
    n = len(points)
    return [frozenset(points[i] for i in range(n) if bits >> i & 1)
            for bits in range(1 << n)]


def _model(order, hist, agents, choice, nbhd=None, valuation=None) -> ImaginationModel:
    m = ImaginationModel(order, agents, choice, nbhd, valuation)
    m.__dict__["histories"] = hist
    return m


def definable_candidates(model: ImaginationModel, pool: Sequence[Formula]) -> List[FrozenSet[Point]]:
    from .semantics import extension
    bare = _model(model.order, model.histories, model.agents, model.choice,
                  None, model.valuation)
    seen = []
    for f in pool:
        try:
            x = extension(bare, f)
        except ValueError:
            # pool formula mentions an agent this model lacks
            continue
        if x not in seen:
            seen.append(x)
    return seen


# ---------------------------------------------------------------------------
# enumeration

# walk at most this many (frame, choice, valuation) triples to count exactly
EXACT_COUNT_LIMIT = 20_000


def _n_families(cands: int, max_family: int) -> int:
    return sum(math.comb(cands, k) for k in range(max_family + 1))


def count_models(bounds: ModelBounds) -> int:
    """Length of ``enumerate_models(bounds)``, or an upper bound on it.

    Under the definable policy the count is exact when there are at most
    ``EXACT_COUNT_LIMIT`` frame/choice/valuation triples to inspect;
    otherwise ``len(pool)`` stands in for the number of distinct
    extensions.
    """
    plan = list(_plan(bounds))
    triples = sum(len(choices) * 2 ** (n_pts * len(bounds.variables))
                  for _, _, _, choices, n_pts, policy in plan if policy != "all")
    exact = triples <= EXACT_COUNT_LIMIT
    total = 0
    for order, hist, agents, choices, n_pts, policy in plan:
        slots = n_pts * len(agents)
        if policy == "all" or not exact:
            cands = 2 ** n_pts if policy == "all" else min(len(bounds.pool), 2 ** n_pts)
            total += (len(choices) * 2 ** (n_pts * len(bounds.variables))
                      * _n_families(cands, bounds.max_family) ** slots)
            continue
        points = list(_model(order, hist, agents, {}).points)
        subsets = _all_subsets(points)
        for choice in choices:
            for vals in itertools.product(subsets, repeat=len(bounds.variables)):
                probe = _model(order, hist, agents, choice, None,
                               dict(zip(bounds.variables, vals)))
                cands = len(definable_candidates(probe, bounds.pool))
                total += _n_families(cands, bounds.max_family) ** slots
    return total


def _plan(bounds: ModelBounds):
    lo = max(1, bounds.min_agents)
    for order, hist in _frames(bounds):
        n_pts = sum(1 for h in hist for _ in h)
        policy = bounds.policy_for(n_pts)
        if policy == "all" and n_pts > MAX_ALL_SUBSETS_MH and not bounds.unsafe:
            raise BoundsTooLarge(
                f"all-subsets policy requested for a frame with |MH| = {n_pts} > "
                f"{MAX_ALL_SUBSETS_MH}")
        for k in range(lo, bounds.max_agents + 1):
            agents = bounds.agent_names[:k]
            yield order, hist, agents, choice_options(order, hist, agents), n_pts, policy


def enumerate_models(bounds: ModelBounds) -> Iterator[ImaginationModel]:
    """Deterministic, exhaustive stream of valid models within ``bounds``.

    Raises :class:`BoundsTooLarge` before yielding anything when the
    stream would exceed ``bounds.cap`` models.
    """
    size = count_models(bounds)
    if size > bounds.cap:
        raise BoundsTooLarge(f"enumeration would produce up to {size} models, "
                             f"above the cap of {bounds.cap}", size)
    return _enumerate(bounds)


def _enumerate(bounds: ModelBounds) -> Iterator[ImaginationModel]:
    for order, hist, agents, choices, n_pts, policy in _plan(bounds):
        probe = _model(order, hist, agents, {})
        points = list(probe.points)
        subsets = _all_subsets(points)
        slots = [(p, a) for p in points for a in agents]
        for choice in choices:
            for vals in itertools.product(subsets, repeat=len(bounds.variables)):
                valuation = dict(zip(bounds.variables, vals))
                if policy == "all":
                    cands = subsets
                else:
                    cands = definable_candidates(
                        _model(order, hist, agents, choice, None, valuation), bounds.pool)
                fams = _families(cands, bounds.max_family)
                for assignment in itertools.product(fams, repeat=len(slots)):
                    nbhd = {slot: fam for slot, fam in zip(slots, assignment) if fam}
                    yield _model(order, hist, agents, choice, nbhd, valuation)


# ---------------------------------------------------------------------------
# random models

def random_model(seed: int, bounds: ModelBounds) -> ImaginationModel:
    """A valid model drawn deterministically from ``seed``.

    Independence holds by construction: at a branching moment the
    undividedness classes are labelled with tuples from a product of
    per-agent label sets, every tuple used at least once, and an agent's
    cell is the union of the classes carrying one of its labels.  Some
    draws instead try random coarsenings and keep them only if they pass
    the independence check.
    """
    rng = random.Random(seed)
    top = max(1, bounds.max_moments)
    n = top if rng.random() < 0.3 else rng.randint(1, top)
    # lean towards the root so that moments with many successors (and with
    # room for several independent non-vacuous choices) come up often
    parents = [None] + [0 if rng.random() < 0.5 else rng.randrange(i) for i in range(1, n)]
    moments = tuple(f"m{i}" for i in range(n))
    order = TreeOrder(moments, frozenset((moments[p], moments[i])
                                         for i, p in enumerate(parents) if p is not None))
    hist = compute_histories(order)
    lo = max(1, bounds.min_agents)
    k = rng.randint(lo, max(lo, bounds.max_agents))
    agents = bounds.agent_names[:k]

    choice = {}
    for m in moments:
        classes = undivided_classes(order, hist, m)
        if len(classes) < 2:
            continue
        cells = None
        if rng.random() < 0.3:
            for _ in range(5):
                trial = [_random_coarsening(rng, classes) for _ in agents]
                if _independent(trial):
                    cells = trial
                    break
        if cells is None:
            cells = _fiber_product(rng, classes, len(agents))
        for a, part in zip(agents, cells):
            if len(part) > 1:
                choice[(m, a)] = part

    probe = _model(order, hist, agents, choice)
    points = list(probe.points)
    valuation = {v: frozenset(p for p in points if rng.random() < 0.5)
                 for v in bounds.variables}
    probe = _model(order, hist, agents, choice, None, valuation)
    if bounds.policy_for(len(points)) == "all" and len(points) <= MAX_ALL_SUBSETS_MH:
        cands = _all_subsets(points)
    else:
        cands = definable_candidates(probe, bounds.pool) or _all_subsets(points)[:1]
    nbhd = {}
    for m in moments:
        mpoints = [p for p in points if p.moment == m]
        for a in agents:
            if rng.random() < 0.3:
                fam = _random_family(rng, cands, bounds.max_family)
                for p in mpoints:
                    nbhd[(p, a)] = fam
            else:
                for p in mpoints:
                    nbhd[(p, a)] = _random_family(rng, cands, bounds.max_family)
    return _model(order, hist, agents, choice, nbhd, valuation)


def _random_family(rng, cands, max_family):
    size = rng.randint(0, min(max_family, len(cands)))
    return frozenset(rng.sample(cands, size))


def _random_coarsening(rng, classes):
    blocks: List[List[FrozenSet[int]]] = []
    for c in classes:
        j = rng.randint(0, len(blocks))
        if j == len(blocks):
            blocks.append([c])
        else:
            blocks[j].append(c)
    return tuple(frozenset().union(*b) for b in blocks)


def _fiber_product(rng, classes, n_agents):
    k = len(classes)
    sizes = [1] * n_agents
    order = list(range(n_agents))
    rng.shuffle(order)
    budget = k
    for left, i in enumerate(order):
        if rng.random() < 0.5:
            s = rng.randint(1, budget)
        else:
            # balanced split: gives several agents real choices at once
            s = max(1, int(round(budget ** (1 / (n_agents - left)))))
        sizes[i] = s
        budget //= s
    labels = list(itertools.product(*(range(s) for s in sizes)))
    shuffled = list(classes)
    rng.shuffle(shuffled)
    tags = labels + [rng.choice(labels) for _ in range(k - len(labels))]
    out = []
    for i in range(n_agents):
        part = []
        for lab in range(sizes[i]):
            part.append(frozenset().union(*(c for c, t in zip(shuffled, tags) if t[i] == lab)))
        out.append(tuple(part))
    return out
