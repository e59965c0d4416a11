"""Finite imagination models: tree order, histories, choices, neighborhoods.

Histories are maximal chains of the tree order.  They are indexed
``h0, h1, ...`` by the lexicographic order of their ascending moment-name
sequences, so model files can refer to them by number.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import (Dict, FrozenSet, Iterable, List, Mapping, NamedTuple,
                    Optional, Sequence, Tuple)


class ModelError(ValueError):
    pass


class AgentSetEmpty(ModelError):
    def __init__(self):
        super().__init__("the agent set must be nonempty")


class Point(NamedTuple):
    """A moment-history pair ``m/h``; ``history`` is a canonical index."""

    moment: str
    history: int

    def __str__(self):
        return f"{self.moment}/h{self.history}"


Proposition = FrozenSet[Point]
Partition = Tuple[FrozenSet[int], ...]


@dataclass(frozen=True)
class TreeOrder:
    """Moments plus cover pairs ``(parent, child)``; ``<=`` is their
    reflexive-transitive closure."""

    moments: Tuple[str, ...]
    covers: FrozenSet[Tuple[str, str]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "moments", tuple(self.moments))
        object.__setattr__(self, "covers", frozenset(tuple(c) for c in self.covers))
        if len(set(self.moments)) != len(self.moments):
            raise ModelError("duplicate moment names")
        known = set(self.moments)
        for a, b in self.covers:
            for m in (a, b):
                if m not in known:
                    raise ModelError(f"cover refers to unknown moment {m!r}")

    @cached_property
    def above(self) -> Dict[str, FrozenSet[str]]:
        """``above[m]`` is the set of all ``m'`` with ``m <= m'``."""
        succ: Dict[str, List[str]] = {m: [] for m in self.moments}
        for a, b in self.covers:
            succ[a].append(b)
        out = {}
        for m in self.moments:
            seen = {m}
            stack = [m]
            while stack:
                for n in succ[stack.pop()]:
                    if n not in seen:
                        seen.add(n)
                        stack.append(n)
            out[m] = frozenset(seen)
        return out

    def leq(self, a: str, b: str) -> bool:
        return b in self.above[a]

    def lt(self, a: str, b: str) -> bool:
        return a != b and b in self.above[a]

    def cycle_witness(self) -> Optional[Tuple[str, str]]:
        for a, b in itertools.combinations(self.moments, 2):
            if self.leq(a, b) and self.leq(b, a):
                return (a, b)
        return None

    def is_partial_order(self) -> bool:
        return self.cycle_witness() is None


def compute_histories(order: TreeOrder) -> List[Tuple[str, ...]]:
    """All maximal chains of ``order``, each ascending, in canonical order.

    Works for any finite partial order: maximal chains are exactly the
    maximal paths of the Hasse diagram.
    """
    if not order.is_partial_order():
        raise ModelError("covers do not generate a partial order")
    hasse: Dict[str, List[str]] = {m: [] for m in order.moments}
    for a in order.moments:
        ups = [b for b in order.above[a] if b != a]
        for b in ups:
            if not any(order.lt(a, k) and order.lt(k, b) for k in ups):
                hasse[a].append(b)
    minimal = [m for m in order.moments
               if not any(order.lt(k, m) for k in order.moments)]
    chains = []

    def extend(path):
        nxt = hasse[path[-1]]
        if not nxt:
            chains.append(tuple(path))
        for b in nxt:
            extend(path + [b])

    for m in minimal:
        extend([m])
    return sorted(set(chains))


def undivided_classes(order: TreeOrder, histories: Sequence[Tuple[str, ...]],
                      moment: str) -> List[FrozenSet[int]]:
    """Partition ``H_m`` by sharing some moment strictly above ``moment``."""
    through = [i for i, h in enumerate(histories) if moment in h]
    later = {i: {m for m in histories[i] if order.lt(moment, m)} for i in through}
    # union-find over "share a later moment"
    parent = {i: i for i in through}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(through, 2):
        if later[i] & later[j]:
            parent[find(i)] = find(j)
    groups: Dict[int, List[int]] = {}
    for i in through:
        groups.setdefault(find(i), []).append(i)
    return sorted((frozenset(g) for g in groups.values()), key=lambda s: min(s))


class ImaginationModel:
    """A finite imagination model.

    ``choice`` maps ``(moment, agent)`` to a partition of the history
    indices through that moment; missing entries mean a vacuous choice.
    ``neighborhoods`` maps ``(point, agent)`` to a family of propositions
    (missing means empty) and ``valuation`` maps variable names to
    propositions (missing means empty).

    Instances are treated as immutable.
    """

    def __init__(self, order: TreeOrder, agents: Iterable[str],
                 choice: Optional[Mapping[Tuple[str, str], Iterable[Iterable[int]]]] = None,
                 neighborhoods: Optional[Mapping[Tuple[Point, str], Iterable[Iterable[Point]]]] = None,
                 valuation: Optional[Mapping[str, Iterable[Point]]] = None):
        self.order = order
        self.agents = tuple(agents)
        if len(set(self.agents)) != len(self.agents):
            raise ModelError("duplicate agent names")
        self.choice: Dict[Tuple[str, str], Partition] = {
            key: tuple(frozenset(c) for c in cells)
            for key, cells in (choice or {}).items()}
        self.neighborhoods: Dict[Tuple[Point, str], FrozenSet[Proposition]] = {}
        for (pt, a), fam in (neighborhoods or {}).items():
            fam = frozenset(frozenset(Point(*p) for p in prop) for prop in fam)
            if fam:
                self.neighborhoods[(Point(*pt), a)] = fam
        self.valuation: Dict[str, Proposition] = {
            v: frozenset(Point(*p) for p in pts) for v, pts in (valuation or {}).items()}

    @property
    def moments(self) -> Tuple[str, ...]:
        return self.order.moments

    @cached_property
    def histories(self) -> List[Tuple[str, ...]]:
        return compute_histories(self.order)

    @cached_property
    def _through(self) -> Dict[str, Tuple[int, ...]]:
        return {m: tuple(i for i, h in enumerate(self.histories) if m in h)
                for m in self.moments}

    def histories_through(self, moment: str) -> Tuple[int, ...]:
        return self._through[moment]

    @cached_property
    def points(self) -> Tuple[Point, ...]:
        """``MH(M)`` ordered by moment (as listed), then history index."""
        return tuple(Point(m, h) for m in self.moments for h in self._through[m])

    @cached_property
    def point_set(self) -> FrozenSet[Point]:
        return frozenset(self.points)

    def is_point(self, p) -> bool:
        return Point(*p) in self.point_set

    def cells(self, moment: str, agent: str) -> Partition:
        cells = self.choice.get((moment, agent))
        if cells is None:
            return (frozenset(self._through[moment]),)
        return cells

    def cell_of(self, moment: str, agent: str, history: int) -> FrozenSet[int]:
        for cell in self.cells(moment, agent):
            if history in cell:
                return cell
        raise ModelError(f"h{history} is in no choice cell of {agent} at {moment}")

    def is_vacuous(self, moment: str, agent: str) -> bool:
        return len(self.cells(moment, agent)) == 1

    def neighborhood(self, point: Point, agent: str) -> FrozenSet[Proposition]:
        return self.neighborhoods.get((Point(*point), agent), frozenset())

    def value(self, var: str) -> Proposition:
        return self.valuation.get(var, frozenset())

    def key(self):
        """Canonical data used for equality."""
        if self.order.is_partial_order():
            # explicit vacuous choices equal omitted ones
            choice = tuple(((m, a), tuple(sorted(tuple(sorted(c)) for c in self.cells(m, a))))
                           for m in self.moments for a in self.agents)
        else:
            choice = tuple(sorted((k, tuple(sorted(tuple(sorted(c)) for c in v)))
                                  for k, v in self.choice.items()))
        nb = tuple(sorted((k, tuple(sorted(tuple(sorted(p)) for p in fam)))
                          for k, fam in self.neighborhoods.items()))
        val = tuple(sorted((v, tuple(sorted(p))) for v, p in self.valuation.items() if p))
        return (self.order.moments, tuple(sorted(self.order.covers)),
                self.agents, choice, nb, val)

    def __eq__(self, other):
        if not isinstance(other, ImaginationModel):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return (f"ImaginationModel(moments={list(self.moments)}, "
                f"agents={list(self.agents)}, histories={len(self.histories)})")

    def history_table(self) -> List[str]:
        return [f"h{i} = [{', '.join(h)}]" for i, h in enumerate(self.histories)]


# ---------------------------------------------------------------------------
# validation

ANTISYMMETRY = "not a partial order"
NONEMPTY = "nonempty tree"
DIRECTED = "downward directedness"
LINEARITY = "backward linearity"
PARTITION = "choice partition"
NCUH = "no choice between undivided histories"
INDEPENDENCE = "independence of agents"
REFERENCE = "dangling reference"


@dataclass
class Violation:
    condition: str
    witness: dict
    message: str

    def to_dict(self):
        return {"condition": self.condition, "witness": self.witness,
                "message": self.message}


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        # truthy when something is wrong, so ``if validate(m): ...`` reads naturally
        return bool(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)

    def conditions(self) -> List[str]:
        return [v.condition for v in self.violations]

    def add(self, condition, witness, message):
        self.violations.append(Violation(condition, witness, message))


def validate(model: ImaginationModel) -> ValidationReport:
    """Check every frame condition; violations carry concrete witnesses."""
    report = ValidationReport()
    order = model.order
    if not order.moments:
        report.add(NONEMPTY, {}, "Tree has no moments")
        return report
    cyc = order.cycle_witness()
    if cyc is not None:
        report.add(ANTISYMMETRY, {"moments": list(cyc)},
                   f"{cyc[0]} <= {cyc[1]} <= {cyc[0]} with {cyc[0]} != {cyc[1]}")
        return report

    for m1, m2 in itertools.combinations(order.moments, 2):
        if not any(order.leq(m, m1) and order.leq(m, m2) for m in order.moments):
            report.add(DIRECTED, {"moments": [m1, m2]},
                       f"{m1} and {m2} have no common lower bound")
    for m in order.moments:
        below = [k for k in order.moments if order.leq(k, m)]
        for m1, m2 in itertools.combinations(below, 2):
            if not (order.leq(m1, m2) or order.leq(m2, m1)):
                report.add(LINEARITY, {"moments": [m1, m2], "above": m},
                           f"{m1} and {m2} are incomparable but both below {m}")

    agents = set(model.agents)
    n_hist = len(model.histories)
    for (m, a), cells in model.choice.items():
        if m not in model._through or a not in agents:
            report.add(REFERENCE, {"choice": [m, a]},
                       f"choice given for unknown moment/agent {m}/{a}")
            continue
        hm = set(model._through[m])
        seen: set = set()
        bad = None
        for cell in cells:
            if not cell:
                bad = "empty cell"
            elif not cell <= hm:
                bad = f"cell {_hs(cell)} has histories not through {m}"
            elif cell & seen:
                bad = f"cells overlap on {_hs(cell & seen)}"
            seen |= cell
        if bad is None and seen != hm:
            bad = f"cells miss {_hs(hm - seen)}"
        if bad:
            report.add(PARTITION, {"moment": m, "agent": a,
                                   "cells": [sorted(c) for c in cells]},
                       f"Choice of {a} at {m} is not a partition of H_{m}: {bad}")

    partition_ok = PARTITION not in report.conditions()
    if partition_ok:
        for m in model.moments:
            hm = model._through[m]
            for a in model.agents:
                w = _ncuh_witness(model, m, a, hm)
                if w:
                    report.add(NCUH, w,
                               f"{a} separates h{w['histories'][0]} and "
                               f"h{w['histories'][1]} at {m} though both pass "
                               f"through {w['shared']}")
            w = independence_witness(model, m)
            if w is not None:
                sel = ", ".join(f"{a}->{_hs(c)}" for a, c in w.items())
                report.add(INDEPENDENCE,
                           {"moment": m, "selector": {a: sorted(c) for a, c in w.items()}},
                           f"selector {sel} at {m} has empty intersection")

    for (pt, a), fam in model.neighborhoods.items():
        if a not in agents or not model.is_point(pt):
            report.add(REFERENCE, {"neighborhood": [pt.moment, pt.history, a]},
                       f"neighborhood at invalid point/agent {pt}/{a}")
            continue
        for prop in fam:
            badp = [p for p in prop if not model.is_point(p)]
            if badp:
                report.add(REFERENCE, {"neighborhood": [pt.moment, pt.history, a],
                                       "point": list(badp[0])},
                           f"proposition in N_{a}({pt}) contains invalid point {badp[0]}")
                break
    for v, prop in model.valuation.items():
        badp = [p for p in prop if not model.is_point(p)]
        if badp:
            report.add(REFERENCE, {"variable": v, "point": list(badp[0])},
                       f"V({v}) contains invalid point {badp[0]}")
    if n_hist == 0:
        report.add(NONEMPTY, {}, "no histories")
    return report


def _hs(cell) -> str:
    return "{" + ", ".join(f"h{i}" for i in sorted(cell)) + "}"


def _ncuh_witness(model, m, a, hm):
    cells = model.cells(m, a)
    owner = {h: k for k, cell in enumerate(cells) for h in cell}
    for h1, h2 in itertools.combinations(hm, 2):
        if owner[h1] == owner[h2]:
            continue
        for mm in model.histories[h1]:
            if model.order.lt(m, mm) and mm in model.histories[h2]:
                return {"moment": m, "agent": a, "histories": [h1, h2], "shared": mm}
    return None


def independence_witness(model: ImaginationModel, moment: str) -> Optional[Dict[str, FrozenSet[int]]]:
    """First selector (in product order) whose cells have empty intersection."""
    agents = model.agents
    if not agents:
        return None
    for pick in itertools.product(*(model.cells(moment, a) for a in agents)):
        if not frozenset.intersection(*pick):
            return dict(zip(agents, pick))
    return None


# ---------------------------------------------------------------------------
# construction helpers

def build_sigma_model(variables: Iterable[str], agents: Iterable[str]) -> ImaginationModel:
    """The one-moment model: vacuous choices, empty neighborhoods, empty valuation."""
    agents = tuple(agents)
    if not agents:
        raise AgentSetEmpty()
    return ImaginationModel(TreeOrder(("m0",)), agents,
                            valuation={v: () for v in variables})


# ---------------------------------------------------------------------------
# file format

def model_from_dict(data: Mapping) -> ImaginationModel:
    try:
        agents = [str(a) for a in data["agents"]]
        moments = [str(m) for m in data["moments"]]
    except KeyError as e:
        raise ModelError(f"model file lacks field {e.args[0]!r}") from None
    covers = [tuple(c) for c in data.get("covers", [])]
    for c in covers:
        if len(c) != 2:
            raise ModelError(f"cover must be a pair: {list(c)}")
    order = TreeOrder(tuple(moments), frozenset(covers))
    choice = {}
    for m, per_agent in (data.get("choice") or {}).items():
        for a, cells in per_agent.items():
            choice[(m, a)] = [[int(h) for h in cell] for cell in cells]
    neighborhoods = {}
    for a, entries in (data.get("neighborhoods") or {}).items():
        for entry in entries:
            at = _point(entry["at"])
            fam = [[_point(p) for p in prop] for prop in entry.get("props", [])]
            key = (at, a)
            if key in neighborhoods:
                raise ModelError(f"duplicate neighborhood entry for {a} at {at}")
            neighborhoods[key] = fam
    valuation = {v: [_point(p) for p in pts]
                 for v, pts in (data.get("valuation") or {}).items()}
    return ImaginationModel(order, agents, choice, neighborhoods, valuation)


def _point(raw) -> Point:
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise ModelError(f"point must be [moment, historyIndex]: {raw!r}")
    return Point(str(raw[0]), int(raw[1]))


def model_to_dict(model: ImaginationModel) -> dict:
    out: dict = {
        "agents": list(model.agents),
        "moments": list(model.moments),
        "covers": [list(c) for c in sorted(model.order.covers)],
    }
    choice: dict = {}
    for (m, a), cells in sorted(model.choice.items()):
        choice.setdefault(m, {})[a] = [sorted(c) for c in
                                       sorted(cells, key=lambda c: sorted(c))]
    if choice:
        out["choice"] = choice
    nb: dict = {}
    for (pt, a), fam in sorted(model.neighborhoods.items()):
        props = sorted(sorted(list(p) for p in prop) for prop in fam)
        nb.setdefault(a, []).append({"at": list(pt), "props": [
            [list(p) for p in prop] for prop in props]})
    if nb:
        out["neighborhoods"] = nb
    val = {v: [list(p) for p in sorted(pts)] for v, pts in sorted(model.valuation.items())}
    if val:
        out["valuation"] = val
    return out


def load_model(path) -> ImaginationModel:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ModelError(f"{path}: not valid JSON: {e}") from None
    return model_from_dict(data)


def dump_model(model: ImaginationModel, path=None, **extra) -> str:
    data = model_to_dict(model)
    data.update(extra)
    text = json.dumps(data, indent=2)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text
