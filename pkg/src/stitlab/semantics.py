"""Satisfaction, extensions and validity over finite imagination models.

Two independent routes compute truth:

* :func:`extension` works bottom-up on integer bitmasks over ``MH(M)``
  and is what the searcher and the fuzzer use;
* :func:`satisfies` follows the satisfaction clauses pointwise, one
  recursive call per clause, and is used to re-verify every reported hit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from .formula import (And, Cstit, Dstit, Formula, Iff, Imagine, Imp, Neg, Or,
                      Poss, Settled, Var, to_text)
from .model import ImaginationModel, Point, Proposition


class EvaluationError(ValueError):
    pass


class _Compiled:
    """Bitmask view of a model: bit ``k`` stands for ``model.points[k]``."""

    def __init__(self, model: ImaginationModel):
        self.model = model
        pts = model.points
        self.index = {p: k for k, p in enumerate(pts)}
        self.full = (1 << len(pts)) - 1
        # per moment: point indices in history order
        self.moment_members: List[List[int]] = []
        for m in model.moments:
            self.moment_members.append([self.index[Point(m, h)]
                                        for h in model.histories_through(m)])
        self.moment_masks = [_mask(ms) for ms in self.moment_members]
        self.cell_masks: Dict[str, List[int]] = {}
        # cell_members[a][k]: indices of the points in k's choice cell
        self.cell_members: Dict[str, List[List[int]]] = {}
        for a in model.agents:
            masks = []
            members = [None] * len(pts)
            for m in model.moments:
                for cell in model.cells(m, a):
                    ids = [self.index[Point(m, h)] for h in sorted(cell)]
                    masks.append(_mask(ids))
                    for k in ids:
                        members[k] = ids
            self.cell_masks[a] = masks
            self.cell_members[a] = members
        self.nbhd: Dict[str, List[FrozenSet[int]]] = {
            a: [frozenset() for _ in pts] for a in model.agents}
        for (pt, a), fam in model.neighborhoods.items():
            if a in self.nbhd and pt in self.index:
                self.nbhd[a][self.index[pt]] = frozenset(self.to_mask(p) for p in fam)
        self.val = {v: self.to_mask(p) for v, p in model.valuation.items()}

    def to_mask(self, prop) -> int:
        out = 0
        for p in prop:
            k = self.index.get(Point(*p))
            if k is None:
                raise EvaluationError(f"{p} is not a point of the model")
            out |= 1 << k
        return out

    def to_prop(self, mask: int) -> Proposition:
        pts = self.model.points
        return frozenset(pts[k] for k in range(len(pts)) if mask >> k & 1)


def _mask(ids) -> int:
    out = 0
    for k in ids:
        out |= 1 << k
    return out


def compiled(model: ImaginationModel) -> _Compiled:
    c = model.__dict__.get("_compiled")
    if c is None:
        c = _Compiled(model)
        model.__dict__["_compiled"] = c
    return c


class Evaluator:
    """Bottom-up evaluator with a per-model memo of subformula extensions.

    ``drop_clause_ii`` removes the second conjunct of the imagination
    clause; it exists only so the fuzzer can demonstrate that it notices.
    """

    def __init__(self, drop_clause_ii: bool = False):
        self.drop_clause_ii = drop_clause_ii

    def mask(self, model: ImaginationModel, f: Formula,
             memo: Optional[Dict[Formula, int]] = None) -> int:
        c = compiled(model)
        if memo is None:
            memo = {}
        return self._ext(c, f, memo)

    def _ext(self, c: _Compiled, f: Formula, memo: Dict[Formula, int]) -> int:
        got = memo.get(f)
        if got is not None:
            return got
        t = type(f)
        if t is Var:
            r = c.val.get(f.name, 0)
        elif t is Neg:
            r = c.full & ~self._ext(c, f.sub, memo)
        elif t is And:
            r = self._ext(c, f.left, memo) & self._ext(c, f.right, memo)
        elif t is Or:
            r = self._ext(c, f.left, memo) | self._ext(c, f.right, memo)
        elif t is Imp:
            r = (c.full & ~self._ext(c, f.left, memo)) | self._ext(c, f.right, memo)
        elif t is Iff:
            r = c.full & ~(self._ext(c, f.left, memo) ^ self._ext(c, f.right, memo))
        elif t is Settled:
            x = self._ext(c, f.sub, memo)
            r = 0
            for g in c.moment_masks:
                if x & g == g:
                    r |= g
        elif t is Cstit:
            x = self._ext(c, f.sub, memo)
            r = 0
            for g in self._cells(c, f.agent):
                if x & g == g:
                    r |= g
        elif t is Imagine:
            r = self._imagine(c, f.agent, self._ext(c, f.sub, memo))
        elif t in (Poss, Dstit):
            raise EvaluationError(f"desugar before evaluating: {to_text(f)}")
        else:
            raise EvaluationError(f"cannot evaluate {f!r}")
        memo[f] = r
        return r

    def _cells(self, c: _Compiled, agent) -> List[int]:
        try:
            return c.cell_masks[agent]
        except KeyError:
            raise EvaluationError(f"agent {agent!r} is not an agent of the model") from None

    def _imagine(self, c: _Compiled, agent, x: int) -> int:
        self._cells(c, agent)
        nb = c.nbhd[agent]
        members = c.cell_members[agent]
        r = 0
        for ms in c.moment_members:
            inside = {k: x in nb[k] for k in ms}
            some_out = self.drop_clause_ii or not all(inside.values())
            if not some_out:
                continue
            for k in ms:
                if all(inside[j] for j in members[k]):
                    r |= 1 << k
        return r


DEFAULT = Evaluator()


def extension(model: ImaginationModel, f: Formula) -> Proposition:
    """All points of the whole model at which ``f`` holds."""
    c = compiled(model)
    return c.to_prop(DEFAULT.mask(model, f))


def valid_in_model(model: ImaginationModel, f: Formula,
                   evaluator: Evaluator = DEFAULT,
                   memo: Optional[Dict[Formula, int]] = None) -> bool:
    c = compiled(model)
    return evaluator.mask(model, f, memo) == c.full


def refuting_point(model: ImaginationModel, f: Formula,
                   evaluator: Evaluator = DEFAULT,
                   memo: Optional[Dict[Formula, int]] = None) -> Optional[Point]:
    """First point (in ``model.points`` order) where ``f`` fails, if any."""
    c = compiled(model)
    bad = c.full & ~evaluator.mask(model, f, memo)
    if not bad:
        return None
    return model.points[(bad & -bad).bit_length() - 1]


# ---------------------------------------------------------------------------
# pointwise route

def satisfies(model: ImaginationModel, point, f: Formula) -> bool:
    """``M, m/h |= f`` computed clause by clause at single points."""
    point = Point(*point)
    if not model.is_point(point):
        raise EvaluationError(f"{point} is not a point of the model")
    return _Pointwise(model).sat(point, f)


class _Pointwise:
    def __init__(self, model: ImaginationModel):
        self.model = model
        self.exts: Dict[Formula, FrozenSet[Point]] = {}

    def global_ext(self, f: Formula) -> FrozenSet[Point]:
        got = self.exts.get(f)
        if got is None:
            got = frozenset(p for p in self.model.points if self.sat(p, f))
            self.exts[f] = got
        return got

    def sat(self, pt: Point, f: Formula) -> bool:
        M = self.model
        m, h = pt
        if isinstance(f, Var):
            return pt in M.value(f.name)
        if isinstance(f, Neg):
            return not self.sat(pt, f.sub)
        if isinstance(f, And):
            return self.sat(pt, f.left) and self.sat(pt, f.right)
        if isinstance(f, Or):
            return self.sat(pt, f.left) or self.sat(pt, f.right)
        if isinstance(f, Imp):
            return (not self.sat(pt, f.left)) or self.sat(pt, f.right)
        if isinstance(f, Iff):
            return self.sat(pt, f.left) == self.sat(pt, f.right)
        if isinstance(f, Settled):
            return all(self.sat(Point(m, h2), f.sub) for h2 in M.histories_through(m))
        if isinstance(f, (Cstit, Imagine)) and f.agent not in M.agents:
            raise EvaluationError(f"agent {f.agent!r} is not an agent of the model")
        if isinstance(f, Cstit):
            return all(self.sat(Point(m, h2), f.sub) for h2 in M.cell_of(m, f.agent, h))
        if isinstance(f, Imagine):
            x = self.global_ext(f.sub)
            clause_i = all(x in M.neighborhood(Point(m, h2), f.agent)
                           for h2 in M.cell_of(m, f.agent, h))
            clause_ii = any(x not in M.neighborhood(Point(m, h2), f.agent)
                            for h2 in M.histories_through(m))
            return clause_i and clause_ii
        raise EvaluationError(f"desugar before evaluating: {f!r}")


# ---------------------------------------------------------------------------
# traces

@dataclass
class TraceStep:
    clause: str
    formula: str
    point: Point
    value: bool
    children: List["TraceStep"] = field(default_factory=list)
    # imagination steps: per history of the moment, (in cell, X in N_a)
    membership: Optional[List[Tuple[int, bool, bool]]] = None

    def replay(self) -> bool:
        """Recompute this step's value from its recorded children."""
        vals = [c.replay() for c in self.children]
        if any(v != c.value for v, c in zip(vals, self.children)):
            raise AssertionError(f"inconsistent trace below {self.formula}")
        k = self.clause
        if k == "atom":
            return self.value
        if k == "not":
            return not vals[0]
        if k == "and":
            return vals[0] and vals[1]
        if k == "or":
            return vals[0] or vals[1]
        if k == "implies":
            return (not vals[0]) or vals[1]
        if k == "iff":
            return vals[0] == vals[1]
        if k in ("settled", "cstit"):
            return all(vals)
        if k == "imagine":
            clause_i = all(inn for _, in_cell, inn in self.membership if in_cell)
            clause_ii = any(not inn for _, _, inn in self.membership)
            return clause_i and clause_ii
        raise AssertionError(f"unknown clause {k}")

    def lines(self, indent: int = 0) -> List[str]:
        pad = "  " * indent
        out = [f"{pad}{self.point} |= {self.formula}: {str(self.value).lower()}  [{self.clause}]"]
        if self.membership is not None:
            for h, in_cell, inn in self.membership:
                out.append(f"{pad}  h{h}: {'in cell' if in_cell else 'off cell'}, "
                           f"Ext {'in' if inn else 'not in'} N")
        for c in self.children:
            out.extend(c.lines(indent + 1))
        return out


@dataclass
class EvalResult:
    value: bool
    trace: Optional[TraceStep] = None


def evaluate(model: ImaginationModel, point, f: Formula, trace: bool = False) -> EvalResult:
    point = Point(*point)
    if not model.is_point(point):
        raise EvaluationError(f"{point} is not a point of the model")
    if not trace:
        return EvalResult(satisfies(model, point, f))
    step = _trace(_Pointwise(model), point, f)
    return EvalResult(step.value, step)


_CLAUSE = {Neg: "not", And: "and", Or: "or", Imp: "implies", Iff: "iff",
           Settled: "settled", Cstit: "cstit", Imagine: "imagine", Var: "atom"}


def _trace(pw: _Pointwise, pt: Point, f: Formula) -> TraceStep:
    M = pw.model
    m, h = pt
    kids: List[TraceStep] = []
    membership = None
    if isinstance(f, Neg):
        kids = [_trace(pw, pt, f.sub)]
    elif isinstance(f, (And, Or, Imp, Iff)):
        kids = [_trace(pw, pt, f.left), _trace(pw, pt, f.right)]
    elif isinstance(f, Settled):
        kids = [_trace(pw, Point(m, h2), f.sub) for h2 in M.histories_through(m)]
    elif isinstance(f, Cstit):
        kids = [_trace(pw, Point(m, h2), f.sub) for h2 in sorted(M.cell_of(m, f.agent, h))]
    elif isinstance(f, Imagine):
        x = pw.global_ext(f.sub)
        cell = M.cell_of(m, f.agent, h)
        membership = [(h2, h2 in cell, x in M.neighborhood(Point(m, h2), f.agent))
                      for h2 in M.histories_through(m)]
    return TraceStep(_CLAUSE.get(type(f), "?"), to_text(f), pt, pw.sat(pt, f),
                     kids, membership)
