"""Hilbert-style proof checking for the imagination logic L.

Axioms (schemata over formula metavariables ``B1, B2, ...`` and agent
metavariables ``α1, α2, ...``)::

    A0   substitution instances of classical tautologies
    A1K  S(B1 -> B2) -> (S B1 -> S B2)
    A1T  S B1 -> B1
    A15  ~S B1 -> S ~S B1
    A2K, A2T, A25   the same three with [c α1] in place of S
    A3   S B1 -> [c α1]B1
    A4   (P[c α1]B1 & ... & P[c αn]Bn) -> P([c α1]B1 & ... & [c αn]Bn),
         n >= 1, the αi pairwise distinct, conjunctions nested to the left
    A5   [i α1]B1 -> ([c α1][i α1]B1 & ~S [i α1]B1)

Rules: ``MP i j`` (line j is line i -> current), ``NEC i`` (current is
``S`` of line i), ``CGR i`` (line i is ``B1 <-> B2``, current is
``[i a]B1 <-> [i a]B2``).  ``NEC`` and ``CGR`` refuse lines that depend on
premises.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .formula import (And, AgentVar, Cstit, Formula, FormulaError, Iff, Imagine,
                      Imp, Meta, Neg, Or, SchemaPattern, Settled, Var,
                      desugar, match_schema, parse, pattern, to_text)

AXIOMS = ("A0", "A1K", "A1T", "A15", "A2K", "A2T", "A25", "A3", "A4", "A5")
RULES = ("MP", "NEC", "CGR")
JUSTIFICATIONS = AXIOMS + RULES + ("PREM",)


def _schema(name: str, text: str) -> SchemaPattern:
    return SchemaPattern(pattern(text), name=name)


SCHEMAS: Dict[str, SchemaPattern] = {
    "A1K": _schema("A1K", "S (B1 -> B2) -> (S B1 -> S B2)"),
    "A1T": _schema("A1T", "S B1 -> B1"),
    "A15": _schema("A15", "~S B1 -> S ~S B1"),
    "A2K": _schema("A2K", "[c al1](B1 -> B2) -> ([c al1]B1 -> [c al1]B2)"),
    "A2T": _schema("A2T", "[c al1]B1 -> B1"),
    "A25": _schema("A25", "~[c al1]B1 -> [c al1]~[c al1]B1"),
    "A3": _schema("A3", "S B1 -> [c al1]B1"),
    "A5": _schema("A5", "[i al1]B1 -> ([c al1][i al1]B1 & ~S [i al1]B1)"),
}


def a4_schema(n: int) -> SchemaPattern:
    """The A4 schema for ``n`` agents, desugared, with distinctness constraints."""
    if n < 1:
        raise ValueError("A4 needs at least one conjunct")
    alphas = [AgentVar(f"α{k}") for k in range(1, n + 1)]
    boxes = [Cstit(alphas[k], Meta(f"B{k + 1}")) for k in range(n)]

    def poss(f):
        return Neg(Settled(Neg(f)))

    def chain(items):
        out = items[0]
        for f in items[1:]:
            out = And(out, f)
        return out

    pat = Imp(chain([poss(b) for b in boxes]), poss(chain(boxes)))
    return SchemaPattern(pat, tuple(itertools.combinations(alphas, 2)), name="A4")


def _conjuncts(f: Formula) -> int:
    n = 1
    while isinstance(f, And):
        n += 1
        f = f.left
    return n


# ---------------------------------------------------------------------------
# propositional tautologies

def boolean_skeleton(f: Formula) -> Tuple[Formula, List[Formula]]:
    """Replace each maximal non-Boolean subformula by a fresh atom.

    Returns the skeleton (over atoms ``_0, _1, ...``) and the list of the
    replaced subformulas, in order of first occurrence.
    """
    atoms: List[Formula] = []

    def go(g):
        if isinstance(g, Neg):
            return Neg(go(g.sub))
        if isinstance(g, (And, Or, Imp, Iff)):
            return type(g)(go(g.left), go(g.right))
        if g not in atoms:
            atoms.append(g)
        return Var(f"_{atoms.index(g)}")

    return go(f), atoms


def _truth(f: Formula, row: Dict[str, bool]) -> bool:
    if isinstance(f, Var):
        return row[f.name]
    if isinstance(f, Neg):
        return not _truth(f.sub, row)
    a, b = _truth(f.left, row), _truth(f.right, row)
    if isinstance(f, And):
        return a and b
    if isinstance(f, Or):
        return a or b
    if isinstance(f, Imp):
        return (not a) or b
    return a == b


def is_tautology(f: Formula) -> bool:
    """A0: true under every assignment to the maximal modal subformulas."""
    skel, atoms = boolean_skeleton(f)
    names = [f"_{k}" for k in range(len(atoms))]
    for values in itertools.product((False, True), repeat=len(names)):
        if not _truth(skel, dict(zip(names, values))):
            return False
    return True


# ---------------------------------------------------------------------------
# checks

@dataclass
class Check:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


def check_axiom(name: str, f: Formula) -> Check:
    """Is ``f`` (desugared) an instance of axiom schema ``name``?"""
    f = desugar(f)
    if name == "A0":
        if is_tautology(f):
            return Check(True)
        return Check(False, "not a propositional tautology")
    if name == "A4":
        if not isinstance(f, Imp):
            return Check(False, "A4 instances are implications")
        n = _conjuncts(f.left)
        schema = a4_schema(n)
        if match_schema(schema, f) is not None:
            return Check(True)
        if match_schema(SchemaPattern(schema.pattern), f) is not None:
            return Check(False, "A4 requires pairwise different agents")
        return Check(False, f"does not match A4 with {n} conjunct(s): {schema}")
    schema = SCHEMAS.get(name)
    if schema is None:
        return Check(False, f"unknown axiom {name}")
    if match_schema(schema, f) is None:
        return Check(False, f"does not match {name}: {schema}")
    return Check(True)


# ---------------------------------------------------------------------------
# proofs

class ProofError(ValueError):
    pass


class ProofSyntaxError(ProofError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class EmptyProof(ProofError):
    def __init__(self):
        super().__init__("proof has no lines")


class DanglingReference(ProofError):
    def __init__(self, line: int, ref: int):
        self.line = line
        self.ref = ref
        super().__init__(f"DanglingReference: line {line} refers to line {ref}, "
                         "which is not an earlier line")


@dataclass(frozen=True)
class Justification:
    kind: str
    refs: Tuple[int, ...] = ()

    def __str__(self):
        return " ".join([self.kind] + [str(r) for r in self.refs])

    @classmethod
    def parse(cls, text: str) -> "Justification":
        parts = text.split()
        if not parts:
            raise ValueError("empty justification")
        kind = parts[0].upper()
        arity = {"MP": 2, "NEC": 1, "CGR": 1}.get(kind, 0)
        if kind not in JUSTIFICATIONS:
            raise ValueError(f"unknown justification {parts[0]!r}")
        if len(parts) - 1 != arity:
            raise ValueError(f"{kind} takes {arity} line reference(s)")
        try:
            refs = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise ValueError(f"line references must be integers: {text!r}") from None
        return cls(kind, refs)


@dataclass
class ProofLine:
    number: int
    formula: Formula
    just: Justification
    surface: Optional[Formula] = None


@dataclass
class Proof:
    lines: List[ProofLine]
    premises: List[Formula] = field(default_factory=list)
    agents: Optional[Tuple[str, ...]] = None

    def line(self, n: int) -> ProofLine:
        return self.lines[n - 1]

    def to_text(self) -> str:
        out = []
        if self.agents:
            out.append("agents: " + ", ".join(self.agents))
        if self.premises:
            out.append("premises: " + " ; ".join(to_text(p) for p in self.premises))
        for ln in self.lines:
            shown = ln.surface if ln.surface is not None else ln.formula
            out.append(f"{ln.number}. {to_text(shown)} ; {ln.just}")
        return "\n".join(out) + "\n"

    def with_justification(self, n: int, just: Justification) -> "Proof":
        lines = [ProofLine(l.number, l.formula, just if l.number == n else l.just, l.surface)
                 for l in self.lines]
        return Proof(lines, list(self.premises), self.agents)


def make_proof(rows: Sequence[Tuple[str, str]], premises: Sequence[str] = (),
               agents: Optional[Sequence[str]] = None) -> Proof:
    """Build a proof from ``(formula text, justification text)`` rows."""
    lines = []
    for k, (ftext, jtext) in enumerate(rows, 1):
        surface = parse(ftext, agents)
        lines.append(ProofLine(k, desugar(surface), Justification.parse(jtext), surface))
    return Proof(lines, [desugar(parse(p, agents)) for p in premises],
                 tuple(agents) if agents else None)


_LINE = re.compile(r"^\s*(\d+)\s*\.\s*(.*)$")


def parse_proof(text: str, agents: Optional[Sequence[str]] = None) -> Proof:
    """Read the line-oriented proof format.

    Optional headers ``agents: a, b`` and ``premises: F ; G``, then lines
    ``N. <formula> ; <JUST>``.  ``#`` starts a comment.
    """
    premises_text: List[Tuple[int, str]] = []
    rows: List[Tuple[int, int, str, str]] = []
    header_agents = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        low = line.lower()
        if low.startswith("agents:"):
            header_agents = tuple(a.strip() for a in line[7:].split(",") if a.strip())
            continue
        if low.startswith("premises:"):
            premises_text.extend((lineno, p.strip()) for p in line[9:].split(";") if p.strip())
            continue
        m = _LINE.match(line)
        if not m:
            raise ProofSyntaxError(lineno, "expected 'N. <formula> ; <JUST>'")
        body = m.group(2)
        if ";" not in body:
            raise ProofSyntaxError(lineno, "missing '; <JUST>'")
        ftext, jtext = body.rsplit(";", 1)
        rows.append((lineno, int(m.group(1)), ftext.strip(), jtext.strip()))
    if agents is None:
        agents = header_agents
    elif header_agents is not None:
        agents = tuple(dict.fromkeys(tuple(agents) + header_agents))
    premises = []
    for lineno, ptext in premises_text:
        try:
            premises.append(desugar(parse(ptext, agents)))
        except FormulaError as e:
            raise ProofSyntaxError(lineno, f"premise: {e}") from None
    lines = []
    for lineno, number, ftext, jtext in rows:
        if number != len(lines) + 1:
            raise ProofSyntaxError(lineno, f"expected line number {len(lines) + 1}, got {number}")
        try:
            surface = parse(ftext, agents)
        except FormulaError as e:
            raise ProofSyntaxError(lineno, str(e)) from None
        try:
            just = Justification.parse(jtext)
        except ValueError as e:
            raise ProofSyntaxError(lineno, str(e)) from None
        lines.append(ProofLine(number, desugar(surface), just, surface))
    return Proof(lines, premises, tuple(agents) if agents else None)


def _depends(proof: Proof) -> List[bool]:
    deps = []
    for ln in proof.lines:
        if ln.just.kind == "PREM":
            deps.append(True)
        else:
            deps.append(any(deps[r - 1] for r in ln.just.refs
                            if 1 <= r < ln.number))
    return deps


def check_rule(proof: Proof, n: int) -> Check:
    """Check the rule application (or premise use) on line ``n``."""
    ln = proof.line(n)
    j = ln.just
    for r in j.refs:
        if not 1 <= r < n:
            return Check(False, str(DanglingReference(n, r)))
    deps = _depends(proof)
    cur = ln.formula
    if j.kind == "PREM":
        if cur in proof.premises:
            return Check(True)
        return Check(False, "PREM: formula is not among the declared premises")
    if j.kind == "MP":
        i, k = j.refs
        minor = proof.line(i).formula
        major = proof.line(k).formula
        if major == Imp(minor, cur):
            return Check(True)
        return Check(False, f"MP: line {k} is not (line {i}) -> (line {n})")
    if j.kind == "NEC":
        (i,) = j.refs
        if deps[i - 1]:
            return Check(False, f"NEC: line {i} depends on premises")
        if cur == Settled(proof.line(i).formula):
            return Check(True)
        return Check(False, f"NEC: line {n} is not S applied to line {i}")
    if j.kind == "CGR":
        (i,) = j.refs
        if deps[i - 1]:
            return Check(False, f"CGR: line {i} depends on premises")
        src = proof.line(i).formula
        if not isinstance(src, Iff):
            return Check(False, f"CGR: line {i} is not a biconditional")
        if (isinstance(cur, Iff) and isinstance(cur.left, Imagine)
                and isinstance(cur.right, Imagine) and cur.left.agent == cur.right.agent
                and cur.left.sub == src.left and cur.right.sub == src.right):
            return Check(True)
        return Check(False, f"CGR: line {n} is not [i a]B1 <-> [i a]B2 for line {i}")
    return Check(False, f"{j.kind} is not a rule")


@dataclass
class Verdict:
    accepted: bool
    formula: Optional[Formula] = None
    premises: Tuple[Formula, ...] = ()
    line: Optional[int] = None
    reason: str = ""
    surface: Optional[Formula] = None

    @property
    def premise_free(self) -> bool:
        return self.accepted and not self.premises

    def certified(self):
        """The statement certified: (premises used, conclusion)."""
        return (self.premises, self.formula) if self.accepted else None

    def __bool__(self):
        return self.accepted

    def describe(self) -> str:
        if not self.accepted:
            return f"Rejected at line {self.line}: {self.reason}"
        shown = self.surface if self.surface is not None else self.formula
        text = f"Accepted: {to_text(shown)}"
        if self.premises:
            text += " (from premises " + " ; ".join(to_text(p) for p in self.premises) + ")"
        else:
            text += " (premise-free theorem)"
        return text


def check_line(proof: Proof, n: int) -> Check:
    j = proof.line(n).just
    if j.kind in AXIOMS:
        return check_axiom(j.kind, proof.line(n).formula)
    return check_rule(proof, n)


def check_proof(proof: Proof) -> Verdict:
    """Check every line in order; the first failure rejects the proof.

    Raises :class:`EmptyProof` for a proof with no lines.
    """
    if not proof.lines:
        raise EmptyProof()
    for ln in proof.lines:
        res = check_line(proof, ln.number)
        if not res:
            return Verdict(False, line=ln.number, reason=res.reason)
    last = proof.lines[-1]
    return Verdict(True, last.formula, _premises_used(proof), surface=last.surface)


def _premises_used(proof: Proof) -> Tuple[Formula, ...]:
    needed = set()
    stack = [len(proof.lines)]
    seen = set()
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        ln = proof.line(n)
        if ln.just.kind == "PREM":
            needed.add(ln.formula)
        stack.extend(ln.just.refs)
    return tuple(p for p in proof.premises if p in needed)


def justification_alphabet(n: int) -> List[Justification]:
    """Every justification token usable on line ``n`` (references to earlier lines)."""
    out = [Justification(a) for a in AXIOMS]
    earlier = range(1, n)
    out += [Justification("MP", (i, j)) for i in earlier for j in earlier]
    out += [Justification("NEC", (i,)) for i in earlier]
    out += [Justification("CGR", (i,)) for i in earlier]
    out.append(Justification("PREM"))
    return out


# ---------------------------------------------------------------------------
# bundled derivations

def converse_a5(agent: str = "a", arg: str = "p") -> Proof:
    """``([c a][i a]A & ~S [i a]A) -> [i a]A`` from A2T and propositional logic."""
    ia = f"[i {agent}]{arg}"
    t = f"[c {agent}]{ia} -> {ia}"
    goal = f"([c {agent}]{ia} & ~S {ia}) -> {ia}"
    return make_proof([
        (t, "A2T"),
        (f"({t}) -> ({goal})", "A0"),
        (goal, "MP 1 2"),
    ], agents=(agent,))


def cstit_necessitation(agent: str = "a", arg: str = "p -> p") -> Proof:
    """Derived necessitation for ``[c a]`` via A3 and NEC."""
    return make_proof([
        (arg, "A0"),
        (f"S ({arg})", "NEC 1"),
        (f"S ({arg}) -> [c {agent}]({arg})", "A3"),
        (f"[c {agent}]({arg})", "MP 2 3"),
    ], agents=(agent,))


def imagination_congruence(agent: str = "a", left: str = "p", right: str = "~~p") -> Proof:
    """``[i a]A <-> [i a]B`` for Boolean-equivalent ``A``, ``B`` via CGR."""
    return make_proof([
        (f"({left}) <-> ({right})", "A0"),
        (f"[i {agent}]({left}) <-> [i {agent}]({right})", "CGR 1"),
    ], agents=(agent,))


def dstit_not_settled(agent: str = "a", arg: str = "p") -> Proof:
    """``[d a]A -> ~S A``: the negative condition of deliberative stit."""
    return make_proof([
        (f"[d {agent}]{arg} -> ~S {arg}", "A0"),
    ], agents=(agent,))


BUNDLED = {
    "converse_a5": converse_a5,
    "cstit_necessitation": cstit_necessitation,
    "imagination_congruence": imagination_congruence,
    "dstit_not_settled": dstit_not_settled,
}


# ---------------------------------------------------------------------------
# soundness cross-check

@dataclass
class ConsistentWith:
    models_checked: int

    def __bool__(self):
        return True


@dataclass
class RefutedBy:
    model: object
    point: object

    def __bool__(self):
        return False


def theoremhood_smoke(f: Formula, models) -> "ConsistentWith | RefutedBy":
    """Look for a model in ``models`` where ``f`` is not valid."""
    from .semantics import refuting_point
    f = desugar(f)
    count = 0
    for model in models:
        count += 1
        pt = refuting_point(model, f)
        if pt is not None:
            return RefutedBy(model, pt)
    return ConsistentWith(count)
