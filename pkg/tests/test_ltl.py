import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wfreconf.ltl import (
    ATOMS,
    And,
    Atom,
    Globally,
    LtlSyntaxError,
    MalformedRun,
    Not,
    Or,
    Until,
    annotated_runs,
    cf1,
    cf2,
    check,
    parse_formula,
    reconfigured_runs,
    rf,
    run_for_trace,
    trace_to_kripke,
)
from wfreconf.workflow import (
    CHOICE_ACTIONS,
    CONFIGURATION1,
    CONFIGURATION2,
    TERMINATE,
    RunEvent,
    run_annotated,
)

from .case_data import AT1, AT2
from .oracles import ltl_unroll


def ks_of(w, trace):
    return trace_to_kripke(run_for_trace(w, trace))


def to_tuple(f):
    if isinstance(f, Atom):
        return ("atom", f.name)
    if isinstance(f, Not):
        return ("not", to_tuple(f.arg))
    if isinstance(f, Globally):
        return ("G", to_tuple(f.arg))
    tag = {And: "and", Or: "or", Until: "U"}[type(f)]
    return (tag, to_tuple(f.left), to_tuple(f.right))


def oracle_check(ks, f):
    labels = [ks.labels(i) for i in range(ks.start, len(ks.states))]
    return ltl_unroll.holds(to_tuple(f), ltl_unroll.word(labels))


def test_kripke_of_short_reject_run():
    ks = ks_of(CONFIGURATION1, AT1[1])
    assert len(ks.states) == 5
    assert [ks.labels(i) for i in range(1, 5)] == [{"or"}, {"icf"}, {"rj"}, {"tr"}]
    assert ks.successor(4) == 4


def test_malformed_runs():
    with pytest.raises(MalformedRun):
        trace_to_kripke([])
    with pytest.raises(MalformedRun):
        trace_to_kripke([RunEvent("OrderReceipt", "Simple")])
    with pytest.raises(MalformedRun):
        run_for_trace(CONFIGURATION1, ("Reject", TERMINATE))


def test_rc_marks_first_event_after_reconfiguration():
    c = dict.fromkeys(CHOICE_ACTIONS, True) | {"InventoryCheck": False}
    run = run_annotated(CONFIGURATION1, c, reconfigure_after="InventoryCheck", new_workflow=CONFIGURATION2.next.on_false)
    ks = trace_to_kripke(run)
    flagged = [i for i in range(len(ks.states)) if "rc" in ks.labels(i)]
    assert flagged == [3]
    assert ks.states[3].action == "SupplierCheck"
    assert check(ks, rf())


@pytest.mark.parametrize("k", range(3))
def test_cf1_on_configuration1(k):
    assert check(ks_of(CONFIGURATION1, AT1[k]), cf1())


@pytest.mark.parametrize("k", range(7))
def test_cf2_on_configuration2(k):
    ks = ks_of(CONFIGURATION2, AT2[k])
    assert check(ks, cf2())
    assert check(ks, rf())


def test_cf2_fails_on_full_configuration1_run():
    ks = ks_of(CONFIGURATION1, AT1[0])
    assert not check(ks, cf2())
    assert not oracle_check(ks, cf2())


def test_formula_shapes():
    first = cf1().left.left
    assert first.right == Globally(Not(Atom("rj")))
    assert rf() == Or(cf2(), And(Not(cf2()), cf1()))


def test_rf_false_when_both_fail():
    # chains tolerate skipped steps, so only an out-of-order event breaks them
    broken = trace_to_kripke(
        [RunEvent("Billing", "Simple"), RunEvent("OrderReceipt", "Simple"), RunEvent(TERMINATE, "Terminate")]
    )
    assert not check(broken, cf1()) and not check(broken, cf2())
    assert not check(broken, rf())


def test_reconfigured_runs_satisfy_rf():
    runs = reconfigured_runs()
    assert len(runs) == 19
    for run in runs:
        assert any(e.reconfigured for e in run)
        assert check(trace_to_kripke(run), rf())


def test_unreconfigured_runs_satisfy_cf1():
    for run in annotated_runs(CONFIGURATION1):
        assert check(trace_to_kripke(run), cf1())


def test_parser():
    assert parse_formula("G !rj") == Globally(Not(Atom("rj")))
    assert parse_formula("or U ict U tr") == Until(Atom("or"), Until(Atom("ict"), Atom("tr")))
    assert parse_formula("or & ict | tr") == Or(And(Atom("or"), Atom("ict")), Atom("tr"))
    assert parse_formula("RF") == rf()
    assert parse_formula("X | rj", {"X": Atom("sh")}) == Or(Atom("sh"), Atom("rj"))
    for bad in ("1", "G", "(rj", "rj rj", "nope"):
        with pytest.raises(LtlSyntaxError):
            parse_formula(bad)


def test_str_roundtrip():
    for f in (cf1(), cf2(), rf()):
        assert parse_formula(str(f)) == f


# --- properties -------------------------------------------------------------

def formulas():
    leaf = st.sampled_from(ATOMS).map(Atom)
    return st.recursive(
        leaf,
        lambda kids: st.one_of(
            kids.map(Not),
            kids.map(Globally),
            st.builds(And, kids, kids),
            st.builds(Or, kids, kids),
            st.builds(Until, kids, kids),
        ),
        max_leaves=8,
    )


ALL_RUNS = annotated_runs(CONFIGURATION1) + annotated_runs(CONFIGURATION2)


@settings(max_examples=500)
@given(formulas(), st.sampled_from(ALL_RUNS))
def test_check_matches_unrolling(f, run):
    ks = trace_to_kripke(run)
    assert check(ks, f) == oracle_check(ks, f)


@settings(max_examples=200)
@given(formulas(), st.sampled_from(ALL_RUNS))
def test_globally_means_everywhere(f, run):
    ks = trace_to_kripke(run)
    assert check(ks, Globally(f)) == all(check(ks, f, at=i) for i in range(ks.start, len(ks.states)))
