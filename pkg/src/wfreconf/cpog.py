"""Conditional partial order graph expressions and their canonical form."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .boolexpr import FALSE, TRUE, BoolExpr, disj, parse_condition, var


class CpogError(ValueError):
    pass


class CpogSyntaxError(CpogError):
    pass


class UnknownName(CpogError):
    pass


# ---------------------------------------------------------------------------
# expressions


class CpogExpr:
    """Base class.  ``p + q`` is overlay, ``p >> q`` is sequence."""

    __slots__ = ()

    def __add__(self, other: CpogExpr) -> CpogExpr:
        return Parallel(self, other)

    def __rshift__(self, other: CpogExpr) -> CpogExpr:
        return Sequence(self, other)

    def actions(self) -> frozenset[str]:
        return frozenset(_actions(self))


@dataclass(frozen=True)
class Empty(CpogExpr):
    def __str__(self) -> str:
        return "eps"


@dataclass(frozen=True)
class Action(CpogExpr):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Parallel(CpogExpr):
    left: CpogExpr
    right: CpogExpr

    def __str__(self) -> str:
        return f"{self.left} + {self.right}"


@dataclass(frozen=True)
class Sequence(CpogExpr):
    left: CpogExpr
    right: CpogExpr

    def __str__(self) -> str:
        return f"{_wrap(self.left, Parallel)} -> {_wrap(self.right, (Parallel, Sequence))}"


@dataclass(frozen=True)
class Cond(CpogExpr):
    guard: BoolExpr
    body: CpogExpr

    def __str__(self) -> str:
        return f"[{self.guard}] {_wrap(self.body, (Parallel, Sequence))}"


EPS = Empty()


def _wrap(e: CpogExpr, kinds) -> str:
    return f"({e})" if isinstance(e, kinds) else str(e)


def _actions(e: CpogExpr) -> Iterator[str]:
    stack = [e]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Action):
            yield cur.name
        elif isinstance(cur, (Parallel, Sequence)):
            stack.extend((cur.left, cur.right))
        elif isinstance(cur, Cond):
            stack.append(cur.body)


def overlay(*es: CpogExpr) -> CpogExpr:
    out: CpogExpr | None = None
    for e in es:
        out = e if out is None else Parallel(out, e)
    return EPS if out is None else out


def chain(*es: CpogExpr) -> CpogExpr:
    out: CpogExpr | None = None
    for e in es:
        out = e if out is None else Sequence(out, e)
    return EPS if out is None else out


def actions(*names: str) -> list[Action]:
    return [Action(n) for n in names]


# ---------------------------------------------------------------------------
# control map and branching shorthands


@dataclass(frozen=True)
class ControlMap:
    """Variable -> the vertex whose execution decides it."""

    controllers: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "controllers", dict(sorted(dict(self.controllers).items())))

    def controlled_by(self, action: str) -> list[str]:
        return [x for x, a in self.controllers.items() if a == action]

    def variable_of(self, action: str) -> str:
        found = self.controlled_by(action)
        if len(found) != 1:
            raise UnknownName(f"no unique variable controlled by {action!r}")
        return found[0]

    def with_control(self, variable: str, action: str) -> ControlMap:
        if variable in self.controllers and self.controllers[variable] != action:
            raise CpogError(f"variable {variable!r} already controlled by {self.controllers[variable]!r}")
        return ControlMap({**self.controllers, variable: action})

    def variables(self) -> list[str]:
        return list(self.controllers)


def yes_arrow(a: str, p: CpogExpr, ctrl: ControlMap) -> CpogExpr:
    """``a -yes-> p`` is ``a -> [a OK] p``."""
    return Sequence(Action(a), Cond(var(ctrl.variable_of(a)), p))


def no_arrow(a: str, p: CpogExpr, ctrl: ControlMap) -> CpogExpr:
    return Sequence(Action(a), Cond(~var(ctrl.variable_of(a)), p))


def compose_shared(p: CpogExpr, q: CpogExpr, op: str = "->") -> CpogExpr:
    """Plain composition of expressions that may share vertices."""
    if op == "->":
        return Sequence(p, q)
    if op == "+":
        return Parallel(p, q)
    raise CpogError(f"unknown composition operator {op!r}")


# ---------------------------------------------------------------------------
# canonical form


@dataclass(frozen=True)
class CanonicalForm:
    """Vertex conditions ``f_a`` and arc conditions ``f_ab``.

    Zero conditions are never stored and every arc condition implies the
    conditions of both endpoints.
    """

    vertices: Mapping[str, BoolExpr]
    arcs: Mapping[tuple[str, str], BoolExpr]

    def __post_init__(self) -> None:
        verts = {a: f for a, f in sorted(self.vertices.items()) if not f.is_false()}
        arcs = {}
        for (a, b), f in sorted(self.arcs.items()):
            f = f & verts.get(a, FALSE) & verts.get(b, FALSE)
            if not f.is_false():
                arcs[(a, b)] = f
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "arcs", arcs)

    def vertex(self, a: str) -> BoolExpr:
        return self.vertices.get(a, FALSE)

    def arc(self, a: str, b: str) -> BoolExpr:
        return self.arcs.get((a, b), FALSE)

    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        for f in list(self.vertices.values()) + list(self.arcs.values()):
            out |= f.support()
        return frozenset(out)

    def self_loops(self) -> list[str]:
        return [a for (a, b) in self.arcs if a == b]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CanonicalForm):
            return NotImplemented
        return dict(self.vertices) == dict(other.vertices) and dict(self.arcs) == dict(other.arcs)

    def __hash__(self) -> int:
        return hash((tuple(self.vertices.items()), tuple(self.arcs.items())))

    def to_expr(self) -> CpogExpr:
        parts: list[CpogExpr] = [Cond(f, Action(a)) for a, f in self.vertices.items()]
        parts += [Cond(f, Sequence(Action(a), Action(b))) for (a, b), f in self.arcs.items()]
        return overlay(*parts)

    def listing(self) -> str:
        """Vertices then arcs, one per line, sorted."""
        lines = [f"[{f}] {a}" for a, f in self.vertices.items()]
        lines.append("--")
        lines += [f"[{f}] ({a} -> {b})" for (a, b), f in self.arcs.items()]
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {
            "vertices": {a: str(f) for a, f in self.vertices.items()},
            "arcs": [[a, b, str(f)] for (a, b), f in self.arcs.items()],
        }


def _raw_form(e: CpogExpr) -> tuple[dict[str, BoolExpr], dict[tuple[str, str], BoolExpr]]:
    if isinstance(e, Empty):
        return {}, {}
    if isinstance(e, Action):
        return {e.name: TRUE}, {}
    if isinstance(e, Cond):
        v, a = _raw_form(e.body)
        g = e.guard
        return {k: f & g for k, f in v.items()}, {k: f & g for k, f in a.items()}
    if isinstance(e, (Parallel, Sequence)):
        lv, la = _raw_form(e.left)
        rv, ra = _raw_form(e.right)
        verts = dict(lv)
        for k, f in rv.items():
            verts[k] = verts.get(k, FALSE) | f
        arcs = dict(la)
        for k, f in ra.items():
            arcs[k] = arcs.get(k, FALSE) | f
        if isinstance(e, Sequence):
            for a, fa in lv.items():
                for b, fb in rv.items():
                    arcs[(a, b)] = arcs.get((a, b), FALSE) | (fa & fb)
        return verts, arcs
    raise TypeError(f"not a CPOG expression: {e!r}")


def transitive_close(cf: CanonicalForm) -> CanonicalForm:
    names = sorted(set(cf.vertices) | {x for arc in cf.arcs for x in arc})
    m = {(a, b): cf.arc(a, b) for a in names for b in names}
    for k in names:
        for i in names:
            fik = m[(i, k)]
            if fik.is_false():
                continue
            for j in names:
                fkj = m[(k, j)]
                if not fkj.is_false():
                    m[(i, j)] = m[(i, j)] | (fik & fkj)
    return CanonicalForm(cf.vertices, {k: f for k, f in m.items() if not f.is_false()})


def transitive_reduce(cf: CanonicalForm) -> CanonicalForm:
    """Drop every arc implied by a two-step path under the same condition.

    Works pointwise per assignment on the closed relation; an intermediate
    vertex only counts when it is in neither endpoint's strongly connected
    component, so cycles survive intact.
    """
    closed = transitive_close(cf)
    names = sorted(closed.vertices)
    c = closed.arc
    arcs = {}
    for (a, b), f in closed.arcs.items():
        redundant = disj(
            *(
                c(a, k) & c(k, b) & ~c(k, a) & ~c(b, k)
                for k in names
                if k != a and k != b
            )
        )
        g = f & ~redundant
        if not g.is_false():
            arcs[(a, b)] = g
    return CanonicalForm(closed.vertices, arcs)


def canonicalize(e: CpogExpr) -> CanonicalForm:
    """Canonical form with the transitively closed arc relation.

    Equivalent expressions yield equal forms; use :func:`transitive_reduce`
    for the compact listing.
    """
    verts, arcs = _raw_form(e)
    return transitive_close(CanonicalForm(verts, arcs))


def canonical_listing(e: CpogExpr) -> CanonicalForm:
    return transitive_reduce(canonicalize(e))


def equivalent(p: CpogExpr, q: CpogExpr) -> bool:
    return canonicalize(p) == canonicalize(q)


def differences(p: CpogExpr, q: CpogExpr) -> list[tuple[str, BoolExpr, BoolExpr]]:
    """Differing vertex and closed arc conditions, vertices first, each sorted."""
    cp, cq = canonicalize(p), canonicalize(q)
    out = []
    for a in sorted(set(cp.vertices) | set(cq.vertices)):
        if cp.vertex(a) != cq.vertex(a):
            out.append((f"f_{a}", cp.vertex(a), cq.vertex(a)))
    for a, b in sorted(set(cp.arcs) | set(cq.arcs)):
        if cp.arc(a, b) != cq.arc(a, b):
            out.append((f"f_{a},{b}", cp.arc(a, b), cq.arc(a, b)))
    return out


def first_difference(p: CpogExpr, q: CpogExpr) -> tuple[str, BoolExpr, BoolExpr] | None:
    diffs = differences(p, q)
    return diffs[0] if diffs else None


# ---------------------------------------------------------------------------
# text syntax

_TOKENS = re.compile(
    r"\s*(?:(?P<yes>-yes->)|(?P<no>-no->)|(?P<arrow>->)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>[+()\[\]]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        if text[pos] == "[":
            depth, end = 0, pos
            while end < len(text):
                if text[end] == "[":
                    depth += 1
                elif text[end] == "]":
                    depth -= 1
                    if depth == 0:
                        break
                end += 1
            if end >= len(text):
                raise CpogSyntaxError(f"unclosed '[' in {text!r}")
            out.append(("cond", text[pos + 1 : end]))
            pos = end + 1
            continue
        m = _TOKENS.match(text, pos)
        if not m or m.end() == pos:
            raise CpogSyntaxError(f"unexpected character {text[pos]!r} in {text!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class CpogParser:
    """``eps``, actions, ``+``, ``->``, ``[cond] p``, ``a -yes-> p``, ``a -no-> p``.

    Precedence from loosest: ``+``, the branch arrows (right associative),
    ``->``, then the condition prefix.
    """

    def __init__(
        self,
        ctrl: ControlMap | None = None,
        alphabet: Iterable[str] | None = None,
        variables: Iterable[str] | None = None,
        bindings: Mapping[str, CpogExpr] | None = None,
    ) -> None:
        self.ctrl = ctrl or ControlMap()
        self.alphabet = None if alphabet is None else set(alphabet)
        self.variables = None if variables is None else set(variables)
        self.bindings: dict[str, CpogExpr] = dict(bindings or {})

    def define(self, name: str, text: str) -> CpogExpr:
        if self.alphabet is not None and name in self.alphabet:
            raise CpogSyntaxError(f"binding {name!r} shadows an action")
        if name in self.bindings:
            raise CpogSyntaxError(f"{name!r} defined twice")
        e = self.parse(text)
        self.bindings[name] = e
        return e

    def parse(self, text: str) -> CpogExpr:
        self._toks = _tokenize(text)
        self._pos = 0
        self._text = text
        if not self._toks:
            raise CpogSyntaxError("empty expression")
        e = self._overlay()
        if self._pos != len(self._toks):
            raise CpogSyntaxError(f"unexpected {self._toks[self._pos][1]!r} in {text!r}")
        return e

    def _peek(self) -> tuple[str, str] | None:
        return self._toks[self._pos] if self._pos < len(self._toks) else None

    def _take(self) -> tuple[str, str]:
        tok = self._peek()
        if tok is None:
            raise CpogSyntaxError(f"unexpected end of {self._text!r}")
        self._pos += 1
        return tok

    def _overlay(self) -> CpogExpr:
        e = self._branch()
        while self._peek() == ("sym", "+"):
            self._take()
            e = Parallel(e, self._branch())
        return e

    def _branch(self) -> CpogExpr:
        e = self._seq()
        tok = self._peek()
        if tok and tok[0] in ("yes", "no"):
            self._take()
            if not isinstance(e, Action):
                raise CpogSyntaxError(f"left of {tok[1]} must be a single action in {self._text!r}")
            rest = self._branch()
            return (yes_arrow if tok[0] == "yes" else no_arrow)(e.name, rest, self.ctrl)
        return e

    def _seq(self) -> CpogExpr:
        e = self._prefix()
        while self._peek() and self._peek()[0] == "arrow":
            self._take()
            e = Sequence(e, self._prefix())
        return e

    def _prefix(self) -> CpogExpr:
        tok = self._peek()
        if tok and tok[0] == "cond":
            self._take()
            guard = parse_condition(tok[1], self.variables)
            return Cond(guard, self._prefix())
        return self._atom()

    def _atom(self) -> CpogExpr:
        kind, text = self._take()
        if kind == "sym" and text == "(":
            e = self._overlay()
            if self._take() != ("sym", ")"):
                raise CpogSyntaxError(f"expected ')' in {self._text!r}")
            return e
        if kind == "ident":
            if text == "eps":
                return EPS
            if text in self.bindings:
                return self.bindings[text]
            if self.alphabet is not None and text not in self.alphabet:
                raise UnknownName(f"unknown action or binding {text!r}")
            return Action(text)
        raise CpogSyntaxError(f"unexpected {text!r} in {self._text!r}")


def parse_cpog(text: str, ctrl: ControlMap | None = None, **kwargs) -> CpogExpr:
    return CpogParser(ctrl, **kwargs).parse(text)
