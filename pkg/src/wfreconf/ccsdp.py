"""Basic CCS with fraction processes: terms, parser, transitions and matching.

Terms are hash-consed, so structurally equal terms are the same object and
compare by identity.  Analysis works on *states*: terms whose parallel
compositions are flattened into a sorted multiset with ``0`` dropped and
whose unguarded constants are unfolded.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence


class CcsError(Exception):
    pass


class CcsSyntaxError(CcsError):
    pass


class UnknownConstant(CcsError):
    pass


class UnguardedRecursion(CcsError):
    pass


class UnfoldBoundExceeded(CcsError):
    pass


class DepthUnbounded(CcsError):
    pass


# ---------------------------------------------------------------------------
# labels


@dataclass(frozen=True)
class Port:
    name: str
    output: bool = False

    def complement(self) -> "Port":
        return Port(self.name, not self.output)

    def __str__(self) -> str:
        return ("'" if self.output else "") + self.name


@dataclass(frozen=True)
class Tau:
    def __str__(self) -> str:
        return "tau"


TAU = Tau()


@dataclass(frozen=True)
class Create:
    """``rho_X``: a fraction offering to replace something matching ``den``."""

    den: "Term"

    def __str__(self) -> str:
        return f"rho[{self.den}]"


@dataclass(frozen=True)
class Delete:
    """``rho'_X``: the complementary deletion of a positive process."""

    den: "Term"

    def __str__(self) -> str:
        return f"rho'[{self.den}]"


Prefix = Port | Tau
Label = Port | Tau | Create | Delete


# ---------------------------------------------------------------------------
# terms

_INTERN: dict = {}


class Term:
    __slots__ = ("_str",)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self}>"

    def __str__(self) -> str:
        s = self._str
        if s is None:
            s = self._str = self._render()
        return s

    def _render(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError

    def __or__(self, other: "Term") -> "Term":
        return Par((self, other))

    def __add__(self, other: "Term") -> "Term":
        return choice(self, other)

    def __truediv__(self, other: "Term") -> "Term":
        return Frac(self, other)


def _interned(cls, key):
    t = _INTERN.get((cls, key))
    if t is None:
        t = object.__new__(cls)
        t._str = None
        t._setup(*key)
        _INTERN[(cls, key)] = t
    return t


class Nil(Term):
    __slots__ = ()

    def __new__(cls) -> "Nil":
        return _interned(cls, ())

    def _setup(self) -> None:
        pass

    def _render(self) -> str:
        return "0"


NIL = Nil()


class Sum(Term):
    """Guarded choice ``a1.P1 + ... + an.Pn``; a prefix is a one-branch sum."""

    __slots__ = ("branches",)

    def __new__(cls, branches: Iterable[tuple[Prefix, Term]]) -> "Sum":
        branches = tuple((l, p) for l, p in branches)
        if not branches:
            raise CcsError("a sum needs at least one branch")
        for l, p in branches:
            if not isinstance(l, (Port, Tau)):
                raise CcsError(f"prefix must be a port or tau, got {l!r}")
            if not isinstance(p, Term):
                raise CcsError(f"continuation must be a term, got {p!r}")
        return _interned(cls, (branches,))

    def _setup(self, branches) -> None:
        self.branches = branches

    def _render(self) -> str:
        return " + ".join(_render_prefix(l, p) for l, p in self.branches)


def _render_prefix(l: Prefix, p: Term) -> str:
    if p is NIL:
        return str(l)
    if isinstance(p, Par) or (isinstance(p, Sum) and len(p.branches) > 1):
        return f"{l}.({p})"
    return f"{l}.{p}"


class Par(Term):
    __slots__ = ("items",)

    def __new__(cls, items: Iterable[Term]) -> "Par":
        items = tuple(items)
        if len(items) < 2:
            raise CcsError("a parallel composition needs two or more components")
        return _interned(cls, (items,))

    def _setup(self, items) -> None:
        self.items = items

    def _render(self) -> str:
        return " | ".join(f"({x})" if isinstance(x, Par) else str(x) for x in self.items)


class Frac(Term):
    __slots__ = ("num", "den")

    def __new__(cls, num: Term, den: Term) -> "Frac":
        return _interned(cls, (num, den))

    def _setup(self, num, den) -> None:
        self.num = num
        self.den = den

    def _render(self) -> str:
        return f"[{self.num} / {self.den}]"


class Const(Term):
    __slots__ = ("name", "args")

    def __new__(cls, name: str, args: Sequence[str] = ()) -> "Const":
        return _interned(cls, (name, tuple(args)))

    def _setup(self, name, args) -> None:
        self.name = name
        self.args = args

    def _render(self) -> str:
        return f"{self.name}<{', '.join(self.args)}>" if self.args else self.name


def prefix(label: Prefix | str, cont: Term = NIL) -> Sum:
    if isinstance(label, str):
        label = parse_label(label)
    return Sum(((label, cont),))


def choice(*ts: Term) -> Term:
    branches = []
    for t in ts:
        if t is NIL:
            continue
        if not isinstance(t, Sum):
            raise CcsError(f"summand {t} is not guarded by a prefix")
        branches.extend(t.branches)
    return Sum(branches) if branches else NIL


def par(*ts: Term) -> Term:
    if not ts:
        return NIL
    return ts[0] if len(ts) == 1 else Par(ts)


def parse_label(text: str) -> Prefix:
    text = text.strip()
    if text == "tau":
        return TAU
    if text.startswith("'"):
        return Port(text[1:], True)
    return Port(text)


def label_text(l: Label) -> str:
    return str(l)


# ---------------------------------------------------------------------------
# definitions


def _rename(t: Term, f: Callable[[str], str]) -> Term:
    """Apply ``f`` to every port name and constant argument in ``t``."""
    if t is NIL:
        return t
    if isinstance(t, Sum):
        return Sum(
            (Port(f(l.name), l.output) if isinstance(l, Port) else l, _rename(p, f)) for l, p in t.branches
        )
    if isinstance(t, Par):
        return Par(_rename(x, f) for x in t.items)
    if isinstance(t, Frac):
        return Frac(_rename(t.num, f), _rename(t.den, f))
    if isinstance(t, Const):
        return Const(t.name, tuple(f(a) for a in t.args))
    raise CcsError(f"not a term: {t!r}")


class DefEnv:
    """Constant definitions plus the caches of every analysis over them.

    The environment is immutable after construction, which keeps the caches
    valid.
    """

    def __init__(
        self,
        defs: Mapping[str, tuple[Sequence[str], Term]] | None = None,
        orders: Sequence[str] = ("o1",),
        bound: int = 20_000,
    ) -> None:
        self.defs = {k: (tuple(ps), body) for k, (ps, body) in (defs or {}).items()}
        self.orders = tuple(orders)
        self.bound = bound
        self._inst: dict = {}
        self._norm: dict = {}
        self._pos: dict = {}
        self._local: dict = {}
        self._moves: dict = {}
        self._sig: dict = {}
        self._match: dict = {}
        self._bk: dict = {}
        self._strong: dict = {}
        self._depth: dict = {}
        for name, (ps, body) in self.defs.items():
            self._check_refs(body, name)

    def _check_refs(self, t: Term, where: str) -> None:
        if isinstance(t, Sum):
            for _, p in t.branches:
                self._check_refs(p, where)
        elif isinstance(t, Par):
            for x in t.items:
                self._check_refs(x, where)
        elif isinstance(t, Frac):
            self._check_refs(t.num, where)
            self._check_refs(t.den, where)
        elif isinstance(t, Const):
            if t.name not in self.defs:
                raise UnknownConstant(f"{t.name} (used in {where}) is not defined")
            if len(t.args) != len(self.defs[t.name][0]):
                raise CcsError(f"{t.name} expects {len(self.defs[t.name][0])} arguments, got {len(t.args)}")

    def check(self, t: Term) -> Term:
        self._check_refs(t, "expression")
        return t

    def instantiate(self, c: Const) -> Term:
        out = self._inst.get(c)
        if out is None:
            if c.name not in self.defs:
                raise UnknownConstant(f"{c.name} is not defined")
            params, body = self.defs[c.name]
            if len(params) != len(c.args):
                raise CcsError(f"{c.name} expects {len(params)} arguments, got {len(c.args)}")
            if params:
                m = dict(zip(params, c.args))
                body = _rename(body, lambda n: m.get(n, n))
            out = self._inst[c] = body
        return out


# ---------------------------------------------------------------------------
# normal forms


def _sort_key(t: Term) -> str:
    return str(t)


def _mkpar(parts: Iterable[Term]) -> Term:
    flat: list[Term] = []
    for p in parts:
        if p is NIL:
            continue
        if isinstance(p, Par):
            flat.extend(p.items)
        else:
            flat.append(p)
    if not flat:
        return NIL
    if len(flat) == 1:
        return flat[0]
    return Par(sorted(flat, key=_sort_key))


def normalize(t: Term, env: DefEnv) -> Term:
    return _norm(env, t, frozenset())


def _norm(env: DefEnv, t: Term, stack: frozenset) -> Term:
    hit = env._norm.get(t)
    if hit is not None:
        return hit
    if t is NIL:
        out = NIL
    elif isinstance(t, Sum):
        # a guarded constant stays folded until its prefix fires
        out = Sum((l, p if isinstance(p, Const) else _norm(env, p, frozenset())) for l, p in t.branches)
    elif isinstance(t, Par):
        out = _mkpar(_norm(env, x, stack) for x in t.items)
    elif isinstance(t, Frac):
        out = Frac(_norm(env, t.num, stack), _norm(env, t.den, stack))
    elif isinstance(t, Const):
        body = env.instantiate(t)
        if isinstance(body, Sum):
            out = t
        else:
            if t in stack:
                raise UnguardedRecursion(f"{t} is defined through itself without a prefix")
            out = _norm(env, body, stack | {t})
    else:
        raise CcsError(f"not a term: {t!r}")
    env._norm[t] = out
    return out


def components(s: Term) -> tuple[Term, ...]:
    if s is NIL:
        return ()
    if isinstance(s, Par):
        return s.items
    return (s,)


# ---------------------------------------------------------------------------
# positive processes (least fixpoint over constants)


def is_positive(p: Term, env: DefEnv) -> bool:
    return _positive(env, p, frozenset())


def _positive(env: DefEnv, t: Term, stack: frozenset) -> bool:
    hit = env._pos.get(t)
    if hit is not None:
        return hit
    if t is NIL:
        out = False
    elif isinstance(t, Sum):
        out = True
    elif isinstance(t, Par):
        out = any(_positive(env, x, stack) for x in t.items)
    elif isinstance(t, Frac):
        out = _positive(env, t.den, stack)
    elif isinstance(t, Const):
        if t in stack:
            return False
        out = _positive(env, env.instantiate(t), stack | {t})
    else:
        raise CcsError(f"not a term: {t!r}")
    if not stack:
        env._pos[t] = out
    return out


# ---------------------------------------------------------------------------
# transitions


@dataclass(frozen=True)
class Step:
    label: Label
    target: Term
    rule: str  # "act", "react", "reconf", "create", "delete"


def _local(env: DefEnv, c: Term) -> tuple[tuple[Label, Term], ...]:
    """Moves of a single (non-parallel) component."""
    hit = env._local.get(c)
    if hit is not None:
        return hit
    if isinstance(c, Sum):
        out = tuple((l, _norm(env, p, frozenset())) for l, p in c.branches)
    elif isinstance(c, Const):
        out = _local(env, _norm(env, env.instantiate(c), frozenset()))
    elif isinstance(c, Frac):
        out = ((Create(c.den), c.num),) if _positive(env, c.den, frozenset()) else ()
    elif c is NIL:
        out = ()
    else:
        raise CcsError(f"not a component: {c!r}")
    env._local[c] = out
    return out


def _signature(env: DefEnv, c: Term) -> frozenset:
    """Initial labels of a component, with every creation collapsed to ``"R"``."""
    hit = env._sig.get(c)
    if hit is None:
        hit = env._sig[c] = frozenset("R" if isinstance(l, Create) else l for l, _ in _local(env, c))
    return hit


def _without(comps: Sequence[Term], drop: Iterable[int], add: Iterable[Term]) -> Term:
    dropped = set(drop)
    return _mkpar([c for k, c in enumerate(comps) if k not in dropped] + list(add))


def _sub_multisets(idx: Sequence[int], comps: Sequence[Term]) -> Iterator[tuple[int, ...]]:
    """Non-empty sub-multisets of ``comps[idx]``, one index tuple per multiset."""
    groups: dict[Term, list[int]] = {}
    for j in idx:
        groups.setdefault(comps[j], []).append(j)
    keys = sorted(groups, key=_sort_key)
    for counts in itertools.product(*(range(len(groups[k]) + 1) for k in keys)):
        if not any(counts):
            continue
        yield tuple(j for k, n in zip(keys, counts) for j in groups[k][:n])


def _targets(env: DefEnv, comps: Sequence[Term], i: int) -> list[tuple[int, ...]]:
    """Index sets ``T`` (excluding ``i``) that the fraction ``comps[i]`` may replace."""
    den = comps[i].den
    allowed = _state_signature(env, den)
    cand = [j for j in range(len(comps)) if j != i and _signature(env, comps[j]) <= allowed]
    out = []
    for T in _sub_multisets(cand, comps):
        pt = _mkpar(comps[j] for j in T)
        if _positive(env, pt, frozenset()) and _of_match(env, pt, den):
            out.append(T)
    return out


def _state_signature(env: DefEnv, s: Term) -> frozenset:
    return frozenset("R" if isinstance(st.label, Create) else st.label for st in _moves(env, s))


def _moves(env: DefEnv, s: Term) -> tuple[Step, ...]:
    """All ``I`` and ``R`` steps of a state (deletion labels excluded)."""
    hit = env._moves.get(s)
    if hit is not None:
        return hit
    comps = components(s)
    seen: dict[tuple[Label, Term], Step] = {}

    def emit(label: Label, target: Term, rule: str) -> None:
        seen.setdefault((label, target), Step(label, target, rule))

    local = [_local(env, c) for c in comps]
    for i, moves in enumerate(local):
        for l, p in moves:
            emit(l, _without(comps, (i,), (p,)), "create" if isinstance(l, Create) else "act")
    for i, j in itertools.combinations(range(len(comps)), 2):
        for l1, p1 in local[i]:
            if not isinstance(l1, Port):
                continue
            for l2, p2 in local[j]:
                if isinstance(l2, Port) and l2 == l1.complement():
                    emit(TAU, _without(comps, (i, j), (p1, p2)), "react")
    for i, c in enumerate(comps):
        if isinstance(c, Frac) and _positive(env, c.den, frozenset()):
            for T in _targets(env, comps, i):
                emit(TAU, _without(comps, (i,) + T, (c.num,)), "reconf")
    out = tuple(seen.values())
    env._moves[s] = out
    return out


def steps(p: Term, env: DefEnv) -> tuple[Step, ...]:
    """Steps of ``p`` with their rule tags, deletion labels excluded."""
    return _moves(env, normalize(p, env))


def transitions(p: Term, env: DefEnv, include_delete: bool = True, max_components: int = 16) -> set[tuple[Label, Term]]:
    """The full transition relation of ``p`` on normal forms.

    Deletion steps range over every positive sub-multiset of the parallel
    components, which is exponential; ``max_components`` guards it.
    """
    s = normalize(p, env)
    out = {(st.label, st.target) for st in _moves(env, s)}
    if include_delete:
        comps = components(s)
        if len(comps) > max_components:
            raise UnfoldBoundExceeded(f"{len(comps)} components exceed the deletion enumeration limit")
        for T in _sub_multisets(range(len(comps)), comps):
            pt = _mkpar(comps[j] for j in T)
            if _positive(env, pt, frozenset()):
                out.add((Delete(pt), _without(comps, T, ())))
    return out


# ---------------------------------------------------------------------------
# strong of-bisimulation


def _label_match(env: DefEnv, a: Label, b: Label) -> bool:
    if isinstance(a, Create) and isinstance(b, Create):
        return _strong(env, a.den, b.den)
    return a == b


def _bisim_k(env: DefEnv, p: Term, q: Term, k: int) -> bool:
    if p is q or k == 0:
        return True
    key = (p, q, k)
    hit = env._bk.get(key)
    if hit is not None:
        return hit
    mp, mq = _moves(env, p), _moves(env, q)
    out = all(
        any(_label_match(env, a.label, b.label) and _bisim_k(env, a.target, b.target, k - 1) for b in mq)
        for a in mp
    ) and all(
        any(_label_match(env, b.label, a.label) and _bisim_k(env, b.target, a.target, k - 1) for a in mp)
        for b in mq
    )
    env._bk[key] = out
    return out


def _explore(env: DefEnv, roots: Iterable[Term], succ: Callable[[Term], Iterable[Term]], bound: int) -> list[Term]:
    seen: dict[Term, None] = {}
    todo = deque()
    for r in roots:
        if r not in seen:
            seen[r] = None
            todo.append(r)
    while todo:
        s = todo.popleft()
        for t in succ(s):
            if t not in seen:
                if len(seen) >= bound:
                    raise UnfoldBoundExceeded(f"more than {bound} states")
                seen[t] = None
                todo.append(t)
    return list(seen)


def _refine(states: list[Term], edges: Callable[[Term], Iterable[tuple[object, Term]]]) -> dict[Term, int]:
    """Coarsest partition where equal blocks have equal (label, block) successor sets."""
    block = {s: 0 for s in states}
    succ = {s: list(edges(s)) for s in states}
    count = 1
    while True:
        sigs: dict = {}
        new = {}
        for s in states:
            sig = (block[s], frozenset((l, block[t]) for l, t in succ[s]))
            new[s] = sigs.setdefault(sig, len(sigs))
        if len(sigs) == count:
            return new
        block, count = new, len(sigs)


def _strong(env: DefEnv, p: Term, q: Term) -> bool:
    if p is q:
        return True
    key = (p, q) if _sort_key(p) <= _sort_key(q) else (q, p)
    hit = env._strong.get(key)
    if hit is not None:
        return hit
    if not _bisim_k(env, p, q, 3):
        out = False
    else:
        states = _explore(env, (p, q), lambda s: (st.target for st in _moves(env, s)), env.bound)
        reps: list[Term] = []

        def cls(l: Label):
            if not isinstance(l, Create):
                return l
            for k, r in enumerate(reps):
                if _strong(env, r, l.den):
                    return ("R", k)
            reps.append(l.den)
            return ("R", len(reps) - 1)

        blocks = _refine(states, lambda s: [(cls(st.label), st.target) for st in _moves(env, s)])
        out = blocks[p] == blocks[q]
    env._strong[key] = out
    return out


def _of_match(env: DefEnv, pt: Term, den: Term) -> bool:
    """Staged ``pt ~of den``: identity, label sets, 3-step bisimilarity, full check."""
    if pt is den:
        return True
    key = (pt, den)
    hit = env._match.get(key)
    if hit is not None:
        return hit
    if _state_signature(env, pt) != _state_signature(env, den):
        out = False
    else:
        out = _strong(env, pt, den)
    env._match[key] = out
    return out


def strong_of_bisim(p: Term, q: Term, env: DefEnv) -> bool:
    return _strong(env, normalize(p, env), normalize(q, env))


# ---------------------------------------------------------------------------
# depth of fractional recursion


def _active_fractions(env: DefEnv, p: Term) -> list[Frac]:
    """Fractions that can sit at top level in some successor of ``p``.

    Every prefix can fire in an open system, so continuations are reachable;
    numerators become active once their fraction creates.
    """
    seen: set[Term] = set()
    found: dict[Frac, None] = {}
    stack = [p]
    while stack:
        t = stack.pop()
        if t in seen:
            continue
        seen.add(t)
        if isinstance(t, Sum):
            stack.extend(c for _, c in t.branches)
        elif isinstance(t, Par):
            stack.extend(t.items)
        elif isinstance(t, Frac):
            if _positive(env, t.den, frozenset()):
                found[t] = None
                stack.append(t.num)
        elif isinstance(t, Const):
            stack.append(env.instantiate(t))
    return list(found)


def sfdrdepth(p: Term, env: DefEnv) -> int:
    return _sfdr(env, p, frozenset())


def _sfdr(env: DefEnv, p: Term, stack: frozenset) -> int:
    hit = env._depth.get(p)
    if hit is not None:
        return hit
    if p in stack:
        raise DepthUnbounded(f"fractional recursion through {p} never bottoms out")
    out = 0
    for f in _active_fractions(env, p):
        out = max(out, 1 + _sfdr(env, f.den, stack | {p}))
    env._depth[p] = out
    return out


def fdrdepth(p: Term, env: DefEnv) -> int:
    dens = [st.label.den for st in steps(p, env) if isinstance(st.label, Create)]
    return 1 + max(sfdrdepth(d, env) for d in dens) if dens else 0


# ---------------------------------------------------------------------------
# weak observational bisimulation


@dataclass(frozen=True)
class Witness:
    """``side`` can weakly perform ``prefix`` then ``label``; the other side cannot.

    ``path`` is a shortest concrete run of the offering side, taus included.
    """

    prefix: tuple[str, ...]
    label: str
    side: str
    path: tuple[str, ...]

    def __str__(self) -> str:
        pre = ", ".join(self.prefix) or "(nothing)"
        return (
            f"after {pre} the {self.side} side can weakly perform {self.label}; "
            f"the other side cannot (path: {' -> '.join(self.path)})"
        )


@dataclass(frozen=True)
class BisimResult:
    bisimilar: bool
    witness: Optional[Witness] = None
    method: str = ""

    def __bool__(self) -> bool:
        return self.bisimilar


class _Weak:
    def __init__(self, env: DefEnv, observe: frozenset | None, bound: int) -> None:
        self.env = env
        self.observe = observe
        self.bound = bound
        self._closure: dict = {}

    def edges(self, s: Term) -> list[tuple[Label, Term]]:
        out = []
        for st in _moves(self.env, s):
            l = st.label
            if isinstance(l, Tau) or (isinstance(l, Port) and (self.observe is None or str(l) in self.observe)):
                out.append((l, st.target))
        return out

    def closure(self, states: Iterable[Term]) -> frozenset:
        out: set[Term] = set()
        for s in states:
            c = self._closure.get(s)
            if c is None:
                c = self._closure[s] = frozenset(
                    _explore(self.env, (s,), lambda x: (t for l, t in self.edges(x) if l is TAU), self.bound)
                )
            out |= c
        return frozenset(out)

    def offers(self, S: frozenset) -> dict[str, list[Term]]:
        out: dict[str, list[Term]] = {}
        for s in S:
            for l, t in self.edges(s):
                if isinstance(l, Port):
                    out.setdefault(str(l), []).append(t)
        return out

    def trace_witness(self, p: Term, q: Term, depth: int) -> Optional[Witness]:
        start = (self.closure((p,)), self.closure((q,)))
        seen = {start}
        todo = deque([(start, ())])
        while todo:
            (L, R), pre = todo.popleft()
            lo, ro = self.offers(L), self.offers(R)
            for side, mine, theirs, root in (("left", lo, ro, p), ("right", ro, lo, q)):
                only = sorted(set(mine) - set(theirs))
                if only:
                    return Witness(pre, only[0], side, self.path(root, pre + (only[0],)))
            if len(pre) >= depth:
                continue
            for a in sorted(lo):
                nxt = (self.closure(lo[a]), self.closure(ro[a]))
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append((nxt, pre + (a,)))
        return None

    def path(self, root: Term, word: tuple[str, ...]) -> tuple[str, ...]:
        start = (root, 0)
        parent: dict = {start: None}
        todo = deque([start])
        while todo:
            s, i = node = todo.popleft()
            if i == len(word):
                labels = []
                while parent[node] is not None:
                    node, l = parent[node]
                    labels.append(l)
                return tuple(reversed(labels))
            for l, t in self.edges(s):
                if l is TAU:
                    nxt = (t, i)
                elif str(l) == word[i]:
                    nxt = (t, i + 1)
                else:
                    continue
                if nxt not in parent:
                    parent[nxt] = (node, str(l))
                    todo.append(nxt)
        raise CcsError("witness word is not a run")  # pragma: no cover

    def full(self, p: Term, q: Term, milner: bool) -> bool:
        states = _explore(self.env, (p, q), lambda s: (t for _, t in self.edges(s)), self.bound)
        weak: dict[Term, list[tuple[object, Term]]] = {}
        for s in states:
            pairs = []
            for a, targets in self.offers(self.closure((s,))).items():
                for t in self.closure(targets):
                    pairs.append((a, t))
            if milner:
                pairs.extend(("", t) for t in self.closure((s,)))
            weak[s] = pairs
        blocks = _refine(states, lambda s: weak[s])
        return blocks[p] == blocks[q]


def weak_obs_bisim(
    p: Term,
    q: Term,
    env: DefEnv,
    observe: Iterable[str] | None = None,
    depth: int = 4,
    bound: int | None = None,
    milner: bool = False,
) -> BisimResult:
    """Weak observational bisimilarity, per visible action up to taus.

    ``observe`` restricts the visible ports a test context can synchronise
    with; other visible steps are blocked.  A trace witness is searched
    first (up to ``depth`` visible steps); if none exists the finite
    saturated systems are compared by partition refinement.  ``milner``
    adds the matching of tau-only moves.
    """
    sp, sq = normalize(p, env), normalize(q, env)
    if sp is sq:
        return BisimResult(True, None, "normal form")
    w = _Weak(env, None if observe is None else frozenset(observe), bound or env.bound)
    wit = w.trace_witness(sp, sq, depth)
    if wit is not None:
        return BisimResult(False, wit, "trace")
    return BisimResult(w.full(sp, sq, milner), None, "partition")


def elaborate(p: Term, goal: Term, env: DefEnv, max_steps: int = 8) -> Optional[list[Step]]:
    """Shortest chain of reconfiguration taus from ``p`` to the normal form of ``goal``.

    Only ``reconf`` steps are followed, so the chain is the pure rewiring
    part of a run.  Returns ``None`` when no chain of at most ``max_steps``
    exists.
    """
    start, target = normalize(p, env), normalize(goal, env)
    if start is target:
        return []
    parent: dict[Term, tuple[Term, Step] | None] = {start: None}
    frontier = [start]
    for _ in range(max_steps):
        nxt = []
        for s in frontier:
            for st in _moves(env, s):
                if st.rule != "reconf" or st.target in parent:
                    continue
                parent[st.target] = (s, st)
                if st.target is target:
                    path = []
                    cur = st.target
                    while parent[cur] is not None:
                        prev, step = parent[cur]
                        path.append(step)
                        cur = prev
                    return path[::-1]
                nxt.append(st.target)
        if len(parent) > env.bound:
            raise UnfoldBoundExceeded(f"more than {env.bound} states while elaborating")
        frontier = nxt
    return None


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"\s*(?:(?P<assign>:=)|(?P<name>'?[A-Za-z_][A-Za-z0-9_]*)|(?P<num>0)|(?P<sym>[()\[\]/|+.<>,{}]))"
)


def _tokenize(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise CcsSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
        out.append(m.group(m.lastgroup))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, toks: list[str], known: set[str], orders: Sequence[str]) -> None:
        self.toks = toks
        self.pos = 0
        self.known = known
        self.orders = orders

    def peek(self, k: int = 0) -> str | None:
        i = self.pos + k
        return self.toks[i] if i < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise CcsSyntaxError("unexpected end of process expression")
        if expected is not None and tok != expected:
            raise CcsSyntaxError(f"expected {expected!r}, found {tok!r}")
        self.pos += 1
        return tok

    def done(self) -> None:
        if self.peek() is not None:
            raise CcsSyntaxError(f"unexpected {self.peek()!r}")

    def par(self) -> Term:
        parts = [self.sum()]
        while self.peek() == "|":
            self.take()
            parts.append(self.sum())
        return par(*parts)

    def sum(self) -> Term:
        parts = [self.pre()]
        while self.peek() == "+":
            self.take()
            parts.append(self.pre())
        return parts[0] if len(parts) == 1 else choice(*parts)

    def pre(self) -> Term:
        tok = self.peek()
        if tok is not None and _is_ident(tok) and tok not in ("sum",):
            nxt = self.peek(1)
            if nxt == ".":
                self.take()
                self.take(".")
                return prefix(parse_label(tok), self.pre())
            if tok.startswith("'") or tok == "tau":
                self.take()
                return prefix(parse_label(tok))
            if nxt != "<" and tok not in self.known:
                self.take()
                return prefix(parse_label(tok))
        return self.atom()

    def atom(self) -> Term:
        tok = self.take()
        if tok == "0":
            return NIL
        if tok == "(":
            t = self.par()
            self.take(")")
            return t
        if tok == "[":
            num = self.par()
            self.take("/")
            den = self.par()
            self.take("]")
            return Frac(num, den)
        if tok == "sum":
            var = self.take()
            self.take("in")
            self.take()
            self.take("{")
            start = self.pos
            body = self.par()
            self.take("}")
            suffix = "_" + var
            parts = []
            for o in self.orders:
                parts.append(_rename(body, lambda n, o=o: n[: -len(suffix)] + "_" + o if n.endswith(suffix) else n))
            del start
            return choice(*parts)
        if _is_ident(tok) and not tok.startswith("'"):
            args: list[str] = []
            if self.peek() == "<":
                self.take()
                while self.peek() != ">":
                    args.append(self.take())
                    if self.peek() == ",":
                        self.take()
                self.take(">")
            if tok not in self.known:
                raise UnknownConstant(f"{tok} is not defined")
            return Const(tok, args)
        raise CcsSyntaxError(f"unexpected {tok!r}")


def _is_ident(tok: str) -> bool:
    return bool(re.fullmatch(r"'?[A-Za-z_][A-Za-z0-9_]*", tok))


def parse_process(text: str, known: Iterable[str] = (), orders: Sequence[str] = ("o1",)) -> Term:
    """Parse one process expression; bare identifiers that name a known
    constant are invocations, any other bare identifier is a prefix ending in 0."""
    p = _Parser(_tokenize(text), set(known), orders)
    t = p.par()
    p.done()
    return t


_DEF = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(([^)]*)\))?\s*:=(.*)$", re.S)


def _logical_lines(text: str) -> list[str]:
    lines: list[str] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if raw[:1].isspace() and lines:
            lines[-1] += " " + line.strip()
        else:
            lines.append(line.strip())
    return lines


def parse_definitions(text: str, orders: Sequence[str] | None = None, bound: int = 20_000) -> DefEnv:
    """Parse ``orders o1, o2`` and ``Name(params) := body`` lines into an environment."""
    heads = []
    order_set = list(orders) if orders is not None else None
    for line in _logical_lines(text):
        if line.startswith("orders"):
            vals = [v.strip() for v in line[len("orders"):].replace(",", " ").split()]
            if not vals:
                raise CcsSyntaxError("orders needs at least one identifier")
            if orders is None:
                order_set = vals
            continue
        m = _DEF.match(line)
        if not m:
            raise CcsSyntaxError(f"expected a definition, got {line!r}")
        name, params, body = m.group(1), m.group(2), m.group(3)
        ps = tuple(x.strip() for x in params.split(",") if x.strip()) if params else ()
        heads.append((name, ps, body))
    order_set = order_set or ["o1"]
    known = {h[0] for h in heads}
    if len(known) != len(heads):
        dup = sorted({h[0] for h in heads if [x[0] for x in heads].count(h[0]) > 1})
        raise CcsSyntaxError(f"duplicate definitions: {', '.join(dup)}")
    defs = {name: (ps, parse_process(body, known, order_set)) for name, ps, body in heads}
    return DefEnv(defs, order_set, bound)


def parse_in(env: DefEnv, text: str) -> Term:
    return env.check(parse_process(text, env.defs.keys(), env.orders))
