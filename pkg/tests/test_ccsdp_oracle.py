"""The fused reconfiguration step against the literal rules on small terms.

The literal rules see one binary tree, so a deletion may depend on which
components happen to be siblings.  The package works on the flattened
multiset, which corresponds to the union over every tree of the same
components.
"""

import itertools
from functools import lru_cache

from hypothesis import given, settings
from hypothesis import strategies as st

from wfreconf.ccsdp import (
    NIL,
    TAU,
    Create,
    DefEnv,
    Delete,
    Frac,
    Port,
    choice,
    normalize,
    par,
    parse_process,
    prefix,
    transitions,
)

from .oracles import ccs_literal as L

ENV = DefEnv({})
NAMES = ("a", "b")


def labels():
    return st.sampled_from(NAMES + tuple("'" + n for n in NAMES) + ("tau",))


def guarded(depth=2):
    """A prefix or a sum of two prefixes, continuations at most ``depth`` deep."""
    cont = st.just(L.NIL) if depth == 0 else st.one_of(st.just(L.NIL), guarded(depth - 1))
    prefixed = st.builds(L.pre, labels(), cont)
    return st.one_of(prefixed, st.builds(lambda p, q: ("sum", p, q), prefixed, prefixed))


def plain():
    """Fraction-free terms of at most two parallel parts."""
    part = st.one_of(st.just(L.NIL), guarded(1))
    return st.one_of(part, st.builds(lambda p, q: ("par", p, q), part, part))


def component():
    frac = st.builds(lambda n, d: ("frac", n, d), plain(), plain())
    return st.one_of(st.just(L.NIL), guarded(), frac)


def trees(comps):
    """Every binary bracketing of ``comps`` in the given order."""
    if len(comps) == 1:
        yield comps[0]
        return
    for k in range(1, len(comps)):
        for left in trees(comps[:k]):
            for right in trees(comps[k:]):
                yield ("par", left, right)


def _unordered(idx):
    if len(idx) == 1:
        yield idx[0]
        return
    head, rest = idx[0], idx[1:]
    for k in range(len(rest)):
        for picked in itertools.combinations(rest, k):
            right = tuple(i for i in rest if i not in picked)
            for left in _unordered((head, *picked)):
                for r in _unordered(right):
                    yield (left, r)


def shapes(comps):
    """Every bracketing up to the order of siblings; the calculus treats them as one system.

    The rules are mirror-symmetric (React both ways, L-/R-React), so swapping
    the children of a node only mirrors its transitions.
    """
    def build(s):
        return comps[s] if isinstance(s, int) else ("par", build(s[0]), build(s[1]))

    seen = set()
    for s in _unordered(tuple(range(len(comps)))):
        t = build(s)
        if t not in seen:
            seen.add(t)
            yield t


@lru_cache(maxsize=None)
def _term(t):
    """Oracle tuple to package term, built directly rather than through text."""
    kind = t[0]
    if kind == "nil":
        return NIL
    if kind == "pre":
        return prefix(t[1], _term(t[2]))
    if kind == "sum":
        return choice(_term(t[1]), _term(t[2]))
    if kind == "par":
        return par(_term(t[1]), _term(t[2]))
    return Frac(_term(t[1]), _term(t[2]))


@lru_cache(maxsize=None)
def _norm(t):
    return normalize(_term(t), ENV)


def _oracle_label(l):
    if l[0] == "tau":
        return TAU
    if l[0] == "port":
        name = l[1]
        return Port(name.lstrip("'"), name.startswith("'"))
    cls = Create if l[0] == "create" else Delete
    return cls(_norm(l[1]))


def oracle_transitions(t):
    out = {(_oracle_label(l), _norm(t2)) for l, t2 in L.moves(t)}
    out |= {(Delete(_norm(r)), _norm(t2)) for r, t2 in L.deletes(t)}
    return out


def fused_transitions(t):
    """Transitions of the rendered text, so the parser is on this route."""
    got = set()
    for l, t2 in transitions(parse_process(L.render(t)), ENV):
        if isinstance(l, (Create, Delete)):
            l = type(l)(normalize(l.den, ENV))
        got.add((l, t2))
    return got


def _split(ts):
    kinds = {"tau": set(), "port": set(), "create": set(), "delete": set()}
    for l, t in ts:
        key = "tau" if l is TAU else type(l).__name__.lower()
        kinds[key].add((l, t))
    return kinds


@settings(max_examples=150)
@given(st.lists(component(), min_size=1, max_size=4))
def test_fused_step_matches_literal_rules(comps):
    want = set()
    for t in shapes(comps):
        want |= oracle_transitions(t)
    want = _split(want)
    got = _split(fused_transitions(next(trees(comps))))
    assert got["tau"] == want["tau"]
    assert got["port"] == want["port"]
    assert got["create"] == want["create"]
    assert got["delete"] == want["delete"]


def test_l_react_example():
    # the fraction deletes a.0 beside it and c.0 on the other side of the tree
    t = ("par", ("par", ("frac", L.pre("b"), ("par", L.pre("a"), L.pre("c"))), L.pre("a")), L.pre("c"))
    taus = {t2 for l, t2 in oracle_transitions(t) if l is TAU}
    assert _norm(L.pre("b")) in taus
    assert taus == {t2 for l, t2 in fused_transitions(t) if l is TAU}
