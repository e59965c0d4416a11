"""Object language: formula AST, concrete syntax, desugaring, schema matching.

Surface syntax::

    ~A   A & B   A | B   A -> B   A <-> B
    S A  P A     [c a]A  [d a]A   [i a]A

Precedence, tightest first: unary, ``&``, ``|``, ``->``, ``<->``.  ``&``,
``|`` and ``<->`` associate to the left, ``->`` to the right.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Tuple, Union

RESERVED = frozenset({"S", "P", "c", "d", "i"})

class FormulaError(ValueError):
    pass


class FormulaSyntaxError(FormulaError):
    def __init__(self, position: int, expected: str, text: str = ""):
        self.position = position
        self.expected = expected
        near = text[position:position + 10] if text else ""
        msg = f"at position {position}: expected {expected}"
        if near:
            msg += f" near {near!r}"
        elif text:
            msg += " at end of input"
        super().__init__(msg)


class UnknownAgent(FormulaError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown agent {name!r}")


class ReservedName(FormulaError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"{name!r} is reserved and cannot be a variable")


# ---------------------------------------------------------------------------
# AST

class Formula:
    """Base class of all formula nodes.

    Nodes are frozen dataclasses; their hash is computed once at
    construction since formulas are used heavily as memo keys.
    """

    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)

    def children(self) -> Tuple["Formula", ...]:
        return ()

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((type(self).__name__,) + tuple(
            getattr(self, f) for f in self._fields)))


def _cached_hash(cls):
    # dataclass(eq=True, frozen=True) installs a field-wise __hash__; replace it
    cls.__hash__ = lambda self: self._hash
    return cls


@_cached_hash
@dataclass(frozen=True, eq=True, repr=False)
class Var(Formula):
    name: str
    _hash: int = field(default=0, init=False, compare=False, repr=False)
    _fields = ("name",)

    def __repr__(self):
        return f"Var({self.name!r})"


@_cached_hash
@dataclass(frozen=True, eq=True, repr=False)
class Meta(Formula):
    """Formula metavariable (``B1``, ``B2``, ...) used in schema patterns."""

    name: str
    _hash: int = field(default=0, init=False, compare=False, repr=False)
    _fields = ("name",)

    def __repr__(self):
        return f"Meta({self.name!r})"


@_cached_hash
@dataclass(frozen=True, eq=True, repr=False)
class Neg(Formula):
    sub: Formula
    _hash: int = field(default=0, init=False, compare=False, repr=False)
    _fields = ("sub",)

    def children(self):
        return (self.sub,)

    def __repr__(self):
        return f"Neg({self.sub!r})"


class Binary(Formula):
    __slots__ = ()
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


@_cached_hash
@dataclass(frozen=True, eq=True, repr=False)
class And(Binary):
    left: Formula
    right: Formula
    _hash: int = field(default=0, init=False, compare=False, repr=False)
    _fields = ("left", "right")


@_cached_hash
@dataclass(frozen=True, eq=True, repr=False)
class Or(Binary):
    left: Formula
    right: Formula
    _hash: int = field(default=0, init=False, compare=False, repr=False)
    _fields = ("left", "right")


@_cached_hash
@dataclass(frozen=True, eq=True, repr=False)
class Imp(Binary):
    left: Formula
    right: Formula
    _hash: int = field(default=0, init=False, compare=False, repr=False)
    _fields = ("left", "right")


@_cached_hash
@dataclass(frozen=True, eq=True, repr=False)
class Iff(Binary):
    left: Formula
    right: Formula
    _hash: int = field(default=0, init=False, compare=False, repr=False)
    _fields = ("left", "right")


@_cached_hash
@dataclass(frozen=True, eq=True, repr=False)
class Settled(Formula):
    sub: Formula
    _hash: int = field(default=0, init=False, compare=False, repr=False)
    _fields = ("sub",)

    def children(self):
        return (self.sub,)

    def __repr__(self):
        return f"Settled({self.sub!r})"


@_cached_hash
@dataclass(frozen=True, eq=True, repr=False)
class Poss(Formula):
    sub: Formula
    _hash: int = field(default=0, init=False, compare=False, repr=False)
    _fields = ("sub",)

    def children(self):
        return (self.sub,)

    def __repr__(self):
        return f"Poss({self.sub!r})"


@dataclass(frozen=True)
class AgentVar:
    """Agent metavariable (``α1``, ``α2``, ...) used in schema patterns."""

    name: str

    def __str__(self):
        return self.name


Agent = Union[str, AgentVar]


class AgentModal(Formula):
    __slots__ = ()
    agent: Agent
    sub: Formula

    def children(self):
        return (self.sub,)

    def __repr__(self):
        return f"{type(self).__name__}({self.agent!r}, {self.sub!r})"


@_cached_hash
@dataclass(frozen=True, eq=True, repr=False)
class Cstit(AgentModal):
    agent: Agent
    sub: Formula
    _hash: int = field(default=0, init=False, compare=False, repr=False)
    _fields = ("agent", "sub")


@_cached_hash
@dataclass(frozen=True, eq=True, repr=False)
class Dstit(AgentModal):
    agent: Agent
    sub: Formula
    _hash: int = field(default=0, init=False, compare=False, repr=False)
    _fields = ("agent", "sub")


@_cached_hash
@dataclass(frozen=True, eq=True, repr=False)
class Imagine(AgentModal):
    agent: Agent
    sub: Formula
    _hash: int = field(default=0, init=False, compare=False, repr=False)
    _fields = ("agent", "sub")


UNARY = (Neg, Settled, Poss)
BOOLEAN = (Neg, And, Or, Imp, Iff)

_BRACKET_TAG = {Cstit: "c", Dstit: "d", Imagine: "i"}
_TAG_CLASS = {v: k for k, v in _BRACKET_TAG.items()}
_BINARY_SYMBOL = {And: "&", Or: "|", Imp: "->", Iff: "<->"}
# binding strength; unary and atoms are above every binary
_PREC = {Iff: 1, Imp: 2, Or: 3, And: 4}


def rebuild(f: Formula, children: Iterable[Formula]) -> Formula:
    """Return a node of the same kind as ``f`` with the given children."""
    kids = tuple(children)
    if isinstance(f, Binary):
        return type(f)(*kids)
    if isinstance(f, AgentModal):
        return type(f)(f.agent, kids[0])
    if isinstance(f, UNARY):
        return type(f)(kids[0])
    return f


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(<->|->|[~&|()\[\]])|([A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(pos, "an operator, '(' or an identifier", text)
        start = m.start(1) if m.group(1) else m.start(2)
        if m.group(1):
            tokens.append(("op", m.group(1), start))
        else:
            tokens.append(("id", m.group(2), start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, agents: Optional[Iterable[str]]):
        self.text = text
        self.agents = None if agents is None else frozenset(agents)
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, expected: str):
        raise FormulaSyntaxError(self.peek()[2], expected, self.text)

    def expect(self, value: str):
        kind, val, _ = self.peek()
        if kind != "op" or val != value:
            self.fail(repr(value))
        self.advance()

    def at_op(self, value: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "op" and val == value

    def parse(self) -> Formula:
        f = self.iff()
        if self.peek()[0] != "eof":
            self.fail("end of input or a binary operator")
        return f

    def iff(self):
        f = self.imp()
        while self.at_op("<->"):
            self.advance()
            f = Iff(f, self.imp())
        return f

    def imp(self):
        f = self.disj()
        if self.at_op("->"):
            self.advance()
            return Imp(f, self.imp())
        return f

    def disj(self):
        f = self.conj()
        while self.at_op("|"):
            self.advance()
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.at_op("&"):
            self.advance()
            f = And(f, self.unary())
        return f

    def unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val == "~":
            self.advance()
            return Neg(self.unary())
        if kind == "id" and val in ("S", "P"):
            self.advance()
            return (Settled if val == "S" else Poss)(self.unary())
        if kind == "op" and val == "[":
            self.advance()
            kind, tag, _ = self.peek()
            if kind != "id" or tag not in _TAG_CLASS:
                self.fail("one of 'c', 'd', 'i'")
            self.advance()
            kind, agent, apos = self.peek()
            if kind != "id":
                self.fail("an agent name")
            if self.agents is not None and agent not in self.agents:
                raise UnknownAgent(agent)
            self.advance()
            self.expect("]")
            return _TAG_CLASS[tag](agent, self.unary())
        return self.atom()

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "op" and val == "(":
            self.advance()
            f = self.iff()
            self.expect(")")
            return f
        if kind == "id":
            if val in RESERVED:
                raise ReservedName(val)
            self.advance()
            return Var(val)
        self.fail("a variable, '(' or a unary operator")


def parse(text: str, agents: Optional[Iterable[str]] = None) -> Formula:
    """Parse ``text`` into a formula; sugar (``P``, ``[d a]``) is kept.

    When ``agents`` is given, agent tokens outside it raise
    :class:`UnknownAgent`.  ``agents=None`` accepts any agent name.
    """
    if agents is not None:
        agents = frozenset(agents)
        if not agents:
            raise FormulaError("agent set must be nonempty")
    return _Parser(text, agents).parse()


# ---------------------------------------------------------------------------
# printing

def _prec(f: Formula) -> int:
    return _PREC.get(type(f), 10)


def to_text(f: Formula) -> str:
    """Render with the fewest parentheses that still parse back to ``f``."""
    if isinstance(f, (Var, Meta)):
        return f.name
    if isinstance(f, Neg):
        return "~" + _operand(f.sub)
    if isinstance(f, Settled):
        return "S " + _operand(f.sub)
    if isinstance(f, Poss):
        return "P " + _operand(f.sub)
    if isinstance(f, AgentModal):
        return f"[{_BRACKET_TAG[type(f)]} {f.agent}]" + _operand(f.sub)
    if isinstance(f, Binary):
        p = _PREC[type(f)]
        right_assoc = isinstance(f, Imp)
        lp = _prec(f.left)
        rp = _prec(f.right)
        left = to_text(f.left)
        right = to_text(f.right)
        if lp < p or (right_assoc and lp == p):
            left = f"({left})"
        if rp < p or (not right_assoc and rp == p):
            right = f"({right})"
        return f"{left} {_BINARY_SYMBOL[type(f)]} {right}"
    raise TypeError(f"not a formula: {f!r}")


def _operand(f: Formula) -> str:
    s = to_text(f)
    return f"({s})" if isinstance(f, Binary) else s


# ---------------------------------------------------------------------------
# structural utilities

def desugar(f: Formula) -> Formula:
    """Eliminate ``P`` and ``[d a]``; everything else is kept as is."""
    if isinstance(f, Poss):
        return Neg(Settled(Neg(desugar(f.sub))))
    if isinstance(f, Dstit):
        sub = desugar(f.sub)
        return And(Cstit(f.agent, sub), Neg(Settled(sub)))
    kids = f.children()
    if not kids:
        return f
    return rebuild(f, (desugar(k) for k in kids))


def is_desugared(f: Formula) -> bool:
    return not any(isinstance(g, (Poss, Dstit)) for g in walk(f))


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal, duplicates included."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(g.children()))


def subformulas(f: Formula) -> List[Formula]:
    """All distinct subformulas of ``f`` in post-order, ``f`` last."""
    seen = set()
    out = []

    def visit(g):
        for k in g.children():
            visit(k)
        if g not in seen:
            seen.add(g)
            out.append(g)

    visit(f)
    return out


def variables(f: Formula) -> List[str]:
    return sorted({g.name for g in walk(f) if isinstance(g, Var)})


def agents_of(f: Formula) -> List[str]:
    return sorted({g.agent for g in walk(f)
                   if isinstance(g, AgentModal) and isinstance(g.agent, str)})


def depth(f: Formula) -> int:
    kids = f.children()
    return 0 if not kids else 1 + max(depth(k) for k in kids)


# ---------------------------------------------------------------------------
# schemata

@dataclass(frozen=True)
class SchemaPattern:
    """A formula tree with metavariable leaves and agent metavariables.

    ``distinct`` lists pairs of agent metavariables that must be
    instantiated by different agents.
    """

    pattern: Formula
    distinct: Tuple[Tuple[AgentVar, AgentVar], ...] = ()
    name: str = ""

    def __str__(self):
        return to_text(self.pattern)


Assignment = Dict[Union[str, AgentVar], Union[Formula, str]]


def match_schema(schema: SchemaPattern, f: Formula) -> Optional[Assignment]:
    """Return the instantiating assignment, or ``None`` when ``f`` is no instance."""
    sigma: Assignment = {}
    if not _match(schema.pattern, f, sigma):
        return None
    for x, y in schema.distinct:
        if sigma[x] == sigma[y]:
            return None
    return sigma


def _match(p: Formula, f: Formula, sigma: Assignment) -> bool:
    if isinstance(p, Meta):
        bound = sigma.get(p.name)
        if bound is None:
            sigma[p.name] = f
            return True
        return bound == f
    if type(p) is not type(f):
        return False
    if isinstance(p, Var):
        return p.name == f.name
    if isinstance(p, AgentModal):
        if isinstance(p.agent, AgentVar):
            bound = sigma.get(p.agent)
            if bound is None:
                sigma[p.agent] = f.agent
            elif bound != f.agent:
                return False
        elif p.agent != f.agent:
            return False
    return all(_match(a, b, sigma) for a, b in zip(p.children(), f.children()))


def instantiate(schema: Union[SchemaPattern, Formula], sigma: Assignment) -> Formula:
    """Replace metavariables by their images under ``sigma``."""
    p = schema.pattern if isinstance(schema, SchemaPattern) else schema
    if isinstance(p, Meta):
        return sigma[p.name]
    kids = p.children()
    if isinstance(p, AgentModal):
        agent = sigma[p.agent] if isinstance(p.agent, AgentVar) else p.agent
        return type(p)(agent, instantiate(kids[0], sigma))
    if not kids:
        return p
    return rebuild(p, (instantiate(k, sigma) for k in kids))


def pattern(text: str) -> Formula:
    """Parse a schema pattern: ``B<n>`` leaves are formula metavariables and
    agent slots named ``α<n>`` (or ``al<n>``) are agent metavariables."""
    f = parse(text)
    return _metafy(f)


def _metafy(f: Formula) -> Formula:
    if isinstance(f, Var) and re.fullmatch(r"B\d+", f.name):
        return Meta(f.name)
    if isinstance(f, AgentModal):
        agent = f.agent
        m = re.fullmatch(r"(?:α|al)(\d+)", agent)
        if m:
            agent = AgentVar(f"α{m.group(1)}")
        return type(f)(agent, _metafy(f.sub))
    kids = f.children()
    if not kids:
        return f
    return rebuild(f, (_metafy(k) for k in kids))
