"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

VARS = ("x", "y", "z")
ACTS = ("a", "b", "c", "d")


def bool_tuples(names=VARS, max_leaves=8):
    leaf = st.one_of(st.sampled_from(names), st.sampled_from((0, 1)))
    return st.recursive(
        leaf,
        lambda kids: st.one_of(
            st.tuples(st.just("not"), kids),
            st.tuples(st.just("and"), kids, kids),
            st.tuples(st.just("or"), kids, kids),
        ),
        max_leaves=max_leaves,
    )


def cpog_tuples(max_leaves=6):
    leaf = st.one_of(st.just(("eps",)), st.tuples(st.just("act"), st.sampled_from(ACTS)))
    return st.recursive(
        leaf,
        lambda kids: st.one_of(
            st.tuples(st.just("par"), kids, kids),
            st.tuples(st.just("seq"), kids, kids),
            st.tuples(st.just("cond"), bool_tuples(max_leaves=3), kids),
        ),
        max_leaves=max_leaves,
    )


def to_cpog(t):
    from wfreconf.boolexpr import mk
    from wfreconf.cpog import EPS, Action, Cond, Parallel, Sequence

    kind = t[0]
    if kind == "eps":
        return EPS
    if kind == "act":
        return Action(t[1])
    if kind == "par":
        return Parallel(to_cpog(t[1]), to_cpog(t[2]))
    if kind == "seq":
        return Sequence(to_cpog(t[1]), to_cpog(t[2]))
    return Cond(mk(t[1]), to_cpog(t[2]))
