"""Boolean conditions as reduced ordered decision diagrams.

Every :class:`BoolExpr` is a handle on a node of one process-wide diagram
store.  Variables are ordered by name, so two expressions denoting the same
function always share a node and compare equal in O(1).
"""

from __future__ import annotations

import itertools
import re
import threading
from typing import Iterable, Mapping


class UnknownVariable(KeyError):
    """Raised when an assignment does not cover a variable of an expression."""


class ConditionSyntaxError(ValueError):
    pass


_FALSE = 0
_TRUE = 1


class _Store:
    """Unique table plus operation caches.  Node 0 is false, node 1 is true."""

    def __init__(self) -> None:
        self.var: list[str | None] = [None, None]
        self.lo: list[int] = [0, 1]
        self.hi: list[int] = [0, 1]
        self.unique: dict[tuple[str, int, int], int] = {}
        self.apply_cache: dict[tuple[str, int, int], int] = {}
        self.not_cache: dict[int, int] = {}
        self.support_cache: dict[int, frozenset[str]] = {}
        self.lock = threading.RLock()

    def node(self, var: str, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (var, lo, hi)
        found = self.unique.get(key)
        if found is not None:
            return found
        idx = len(self.var)
        self.var.append(var)
        self.lo.append(lo)
        self.hi.append(hi)
        self.unique[key] = idx
        return idx

    def negate(self, u: int) -> int:
        if u <= 1:
            return 1 - u
        cached = self.not_cache.get(u)
        if cached is not None:
            return cached
        r = self.node(self.var[u], self.negate(self.lo[u]), self.negate(self.hi[u]))
        self.not_cache[u] = r
        self.not_cache[r] = u
        return r

    def apply(self, op: str, u: int, v: int) -> int:
        if op == "and":
            if u == 0 or v == 0:
                return 0
            if u == 1:
                return v
            if v == 1 or u == v:
                return u
        elif op == "or":
            if u == 1 or v == 1:
                return 1
            if u == 0:
                return v
            if v == 0 or u == v:
                return u
        elif op == "xor":
            if u == v:
                return 0
            if u == 0:
                return v
            if v == 0:
                return u
            if u == 1:
                return self.negate(v)
            if v == 1:
                return self.negate(u)
        if u > v:
            u, v = v, u  # all three operators commute
        key = (op, u, v)
        cached = self.apply_cache.get(key)
        if cached is not None:
            return cached
        xu = self.var[u] if u > 1 else None
        xv = self.var[v] if v > 1 else None
        if xv is None or (xu is not None and xu < xv):
            top = xu
            r = self.node(top, self.apply(op, self.lo[u], v), self.apply(op, self.hi[u], v))
        elif xu is None or xv < xu:
            top = xv
            r = self.node(top, self.apply(op, u, self.lo[v]), self.apply(op, u, self.hi[v]))
        else:
            r = self.node(
                xu,
                self.apply(op, self.lo[u], self.lo[v]),
                self.apply(op, self.hi[u], self.hi[v]),
            )
        self.apply_cache[key] = r
        return r

    def restrict(self, u: int, name: str, value: int, memo: dict[int, int]) -> int:
        if u <= 1:
            return u
        if u in memo:
            return memo[u]
        x = self.var[u]
        if x == name:
            r = self.hi[u] if value else self.lo[u]
        elif x > name:
            r = u
        else:
            r = self.node(
                x,
                self.restrict(self.lo[u], name, value, memo),
                self.restrict(self.hi[u], name, value, memo),
            )
        memo[u] = r
        return r


_STORE = _Store()


class BoolExpr:
    """Immutable canonical Boolean function over named variables."""

    __slots__ = ("_u",)

    def __init__(self, node: int) -> None:
        self._u = node

    # construction -----------------------------------------------------
    @staticmethod
    def const(value: bool | int) -> BoolExpr:
        return TRUE if value else FALSE

    @staticmethod
    def var(name: str) -> BoolExpr:
        if not name or not isinstance(name, str):
            raise ValueError(f"bad variable name {name!r}")
        with _STORE.lock:
            return BoolExpr(_STORE.node(name, 0, 1))

    def _bin(self, op: str, other: BoolExpr) -> BoolExpr:
        if not isinstance(other, BoolExpr):
            return NotImplemented
        with _STORE.lock:
            return BoolExpr(_STORE.apply(op, self._u, other._u))

    def __and__(self, other: BoolExpr) -> BoolExpr:
        return self._bin("and", other)

    def __or__(self, other: BoolExpr) -> BoolExpr:
        return self._bin("or", other)

    def __xor__(self, other: BoolExpr) -> BoolExpr:
        return self._bin("xor", other)

    def __invert__(self) -> BoolExpr:
        with _STORE.lock:
            return BoolExpr(_STORE.negate(self._u))

    def implies(self, other: BoolExpr) -> BoolExpr:
        return ~self | other

    # queries ----------------------------------------------------------
    def is_false(self) -> bool:
        return self._u == _FALSE

    def is_tautology(self) -> bool:
        return self._u == _TRUE

    def equiv(self, other: BoolExpr) -> bool:
        return self._u == other._u

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BoolExpr) and self._u == other._u

    def __hash__(self) -> int:
        return hash(("BoolExpr", self._u))

    def __bool__(self) -> bool:
        raise TypeError("use is_false()/is_tautology() instead of truth-testing a BoolExpr")

    def support(self) -> frozenset[str]:
        cached = _STORE.support_cache.get(self._u)
        if cached is not None:
            return cached
        seen: set[int] = set()
        out: set[str] = set()
        stack = [self._u]
        while stack:
            u = stack.pop()
            if u <= 1 or u in seen:
                continue
            seen.add(u)
            out.add(_STORE.var[u])
            stack.append(_STORE.lo[u])
            stack.append(_STORE.hi[u])
        result = frozenset(out)
        _STORE.support_cache[self._u] = result
        return result

    def eval(self, assignment: Mapping[str, int | bool]) -> int:
        for name in sorted(self.support()):
            if name not in assignment:
                raise UnknownVariable(name)
        u = self._u
        while u > 1:
            u = _STORE.hi[u] if assignment[_STORE.var[u]] else _STORE.lo[u]
        return u

    def restrict(self, name: str, value: bool | int) -> BoolExpr:
        with _STORE.lock:
            return BoolExpr(_STORE.restrict(self._u, name, 1 if value else 0, {}))

    def substitute(self, values: Mapping[str, bool | int]) -> BoolExpr:
        e = self
        for name, value in values.items():
            e = e.restrict(name, value)
        return e

    def truth_table(self, variables: Iterable[str]) -> int:
        """Bit ``i`` is the value under the assignment encoded by ``i``.

        ``variables[0]`` is the most significant bit of the index.  Variables
        outside the list must not occur in the expression.
        """
        names = list(variables)
        if names != sorted(names):
            raise ValueError("truth-table variables must be sorted")
        missing = self.support() - set(names)
        if missing:
            raise UnknownVariable(sorted(missing)[0])
        n = len(names)
        memo: dict[tuple[int, int], int] = {}

        def tt(u: int, i: int) -> int:
            width = 1 << (n - i)
            if u <= 1:
                return (1 << width) - 1 if u else 0
            key = (u, i)
            if key in memo:
                return memo[key]
            half = width >> 1
            if _STORE.var[u] == names[i]:
                r = tt(_STORE.lo[u], i + 1) | (tt(_STORE.hi[u], i + 1) << half)
            else:
                sub = tt(u, i + 1)
                r = sub | (sub << half)
            memo[key] = r
            return r

        return tt(self._u, 0)

    def sat_assignments(self, variables: Iterable[str]) -> list[dict[str, int]]:
        names = sorted(variables)
        out = []
        for values in itertools.product((0, 1), repeat=len(names)):
            a = dict(zip(names, values))
            if self.eval(a):
                out.append(a)
        return out

    # rendering --------------------------------------------------------
    def cubes(self) -> list[dict[str, int]]:
        """An irredundant sum-of-products cover, deterministic."""
        if self._u <= 1:
            return [{}] if self._u else []
        names = sorted(self.support())
        if len(names) > 8:
            return self._path_cubes()
        return _prime_cover(self, names)

    def _path_cubes(self) -> list[dict[str, int]]:
        out: list[dict[str, int]] = []

        def walk(u: int, acc: dict[str, int]) -> None:
            if u == 0:
                return
            if u == 1:
                out.append(dict(acc))
                return
            x = _STORE.var[u]
            acc[x] = 0
            walk(_STORE.lo[u], acc)
            acc[x] = 1
            walk(_STORE.hi[u], acc)
            del acc[x]

        walk(self._u, {})
        return out

    def __str__(self) -> str:
        if self._u == _TRUE:
            return "1"
        if self._u == _FALSE:
            return "0"
        terms = []
        for cube in self.cubes():
            lits = [name if cube[name] else "!" + name for name in sorted(cube)]
            terms.append(" & ".join(lits))
        return " | ".join(terms)

    def __repr__(self) -> str:
        return f"BoolExpr({str(self)!r})"


def _prime_cover(e: BoolExpr, names: list[str]) -> list[dict[str, int]]:
    minterms = {
        i
        for i, values in enumerate(itertools.product((0, 1), repeat=len(names)))
        if e.eval(dict(zip(names, values)))
    }

    def covered(cube: dict[str, int]) -> set[int]:
        free = [k for k, n in enumerate(names) if n not in cube]
        base = 0
        for k, n in enumerate(names):
            if cube.get(n):
                base |= 1 << (len(names) - 1 - k)
        out = set()
        for bits in itertools.product((0, 1), repeat=len(free)):
            m = base
            for k, b in zip(free, bits):
                if b:
                    m |= 1 << (len(names) - 1 - k)
            out.add(m)
        return out

    implicants = []
    for spec in itertools.product((None, 0, 1), repeat=len(names)):
        cube = {n: v for n, v in zip(names, spec) if v is not None}
        if covered(cube) <= minterms:
            implicants.append(cube)
    primes = [
        c
        for c in implicants
        if not any(d is not c and len(d) < len(c) and d.items() <= c.items() for d in implicants)
    ]

    def key(c: dict[str, int]) -> tuple:
        return (len(c), [(n, -c[n]) for n in sorted(c)])

    primes.sort(key=key)
    # essential-first greedy cover, then drop redundant cubes
    chosen: list[dict[str, int]] = []
    remaining = set(minterms)
    cover = {id(c): covered(c) for c in primes}
    for m in sorted(minterms):
        holders = [c for c in primes if m in cover[id(c)]]
        if len(holders) == 1 and holders[0] not in chosen:
            chosen.append(holders[0])
    for c in chosen:
        remaining -= cover[id(c)]
    while remaining:
        best = max(primes, key=lambda c: (len(cover[id(c)] & remaining), -len(c)))
        chosen.append(best)
        remaining -= cover[id(best)]
    for c in list(chosen):
        rest = set().union(*(cover[id(d)] for d in chosen if d is not c)) if len(chosen) > 1 else set()
        if cover[id(c)] <= rest:
            chosen.remove(c)
    chosen.sort(key=key)
    return chosen


TRUE = BoolExpr(_TRUE)
FALSE = BoolExpr(_FALSE)


def var(name: str) -> BoolExpr:
    return BoolExpr.var(name)


def conj(*es: BoolExpr) -> BoolExpr:
    out = TRUE
    for e in es:
        out = out & e
    return out


def disj(*es: BoolExpr) -> BoolExpr:
    out = FALSE
    for e in es:
        out = out | e
    return out


def mk(structure) -> BoolExpr:
    """Canonicalize a nested structure.

    Accepted shapes: ``0``/``1``/bools, a variable name, ``("var", x)``,
    ``("not", e)``, ``("and", e1, e2, ...)``, ``("or", e1, e2, ...)`` and
    existing :class:`BoolExpr` values.
    """
    if isinstance(structure, BoolExpr):
        return structure
    if isinstance(structure, bool) or structure in (0, 1):
        return BoolExpr.const(structure)
    if isinstance(structure, str):
        return var(structure)
    if isinstance(structure, tuple) and structure:
        head, *args = structure
        if head == "var" and len(args) == 1:
            return var(args[0])
        if head == "not" and len(args) == 1:
            return ~mk(args[0])
        if head == "and":
            return conj(*(mk(a) for a in args))
        if head == "or":
            return disj(*(mk(a) for a in args))
    raise ValueError(f"not a Boolean structure: {structure!r}")


def is_false(e: BoolExpr) -> bool:
    return e.is_false()


def is_tautology(e: BoolExpr) -> bool:
    return e.is_tautology()


def equiv(e1: BoolExpr, e2: BoolExpr) -> bool:
    return e1.equiv(e2)


def evaluate(e: BoolExpr, assignment: Mapping[str, int | bool]) -> int:
    return e.eval(assignment)


# parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(\d+)|(.))")


def _tokens(text: str) -> list[str]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        pos = m.end()
        tok = m.group(1) or m.group(2) or m.group(3)
        if tok and not tok.isspace():
            out.append(tok)
    return out


def parse_condition(text: str, universe: Iterable[str] | None = None) -> BoolExpr:
    """Parse ``1``, ``0``, identifiers, ``!e``, ``e & e``, ``e | e`` and parentheses.

    When ``universe`` is given every identifier must belong to it.
    """
    allowed = None if universe is None else set(universe)
    toks = _tokens(text)
    pos = 0

    def peek() -> str | None:
        return toks[pos] if pos < len(toks) else None

    def take(expected: str | None = None) -> str:
        nonlocal pos
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise ConditionSyntaxError(f"expected {expected or 'a term'} in condition {text!r}")
        pos += 1
        return tok

    def parse_or() -> BoolExpr:
        e = parse_and()
        while peek() == "|":
            take("|")
            e = e | parse_and()
        return e

    def parse_and() -> BoolExpr:
        e = parse_not()
        while peek() == "&":
            take("&")
            e = e & parse_not()
        return e

    def parse_not() -> BoolExpr:
        if peek() == "!":
            take("!")
            return ~parse_not()
        return parse_atom()

    def parse_atom() -> BoolExpr:
        tok = take()
        if tok == "(":
            e = parse_or()
            take(")")
            return e
        if tok in ("0", "1"):
            return BoolExpr.const(tok == "1")
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            if allowed is not None and tok not in allowed:
                raise UnknownVariable(tok)
            return var(tok)
        raise ConditionSyntaxError(f"unexpected {tok!r} in condition {text!r}")

    if not toks:
        raise ConditionSyntaxError("empty condition")
    e = parse_or()
    if pos != len(toks):
        raise ConditionSyntaxError(f"trailing input {toks[pos]!r} in condition {text!r}")
    return e
