import itertools
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wfreconf.workflow import (
    CHOICE_ACTIONS,
    CONFIGURATION1,
    CONFIGURATION2,
    TERMINATE,
    Branch,
    EmptyInput,
    Interpreter,
    InterpState,
    InvariantViolation,
    Par,
    PreconditionFailed,
    ScriptedPicker,
    SeededPicker,
    Simple,
    StepOnTerminated,
    WorkflowError,
    branch_check,
    first,
    first_picker,
    format_workflow,
    last,
    make_choices,
    parse_workflow,
    prefixof,
    reachable_workflows,
    reconfiguration_report,
    render_trace,
    second_picker,
    tracesof,
)

from .case_data import AT1, AT2

GOLDEN = Path(__file__).parent / "golden"
ALL_TRUE = dict.fromkeys(CHOICE_ACTIONS, True)


def choices(**kw):
    return make_choices({**ALL_TRUE, **kw})


def test_traces_of_configurations():
    assert sorted(tracesof(CONFIGURATION1)) == sorted(AT1)
    assert sorted(tracesof(CONFIGURATION2)) == sorted(AT2)
    assert tracesof(None) == [(TERMINATE,)]


def test_prefixof():
    assert prefixof((), ("OrderReceipt",))
    assert prefixof(("OrderReceipt",), ("OrderReceipt", "InventoryCheck"))
    assert not prefixof(("Reject",), ("OrderReceipt",))
    assert not prefixof(("OrderReceipt", "Reject"), ("OrderReceipt",))


def test_first_and_last():
    assert first(Par("Billing", "Shipping", None)) == {"Billing", "Shipping"}
    assert first(Simple("Reject", None)) == {"Reject"}
    assert last(("OrderReceipt", "Reject")) == "Reject"
    with pytest.raises(EmptyInput):
        last(())
    with pytest.raises(EmptyInput):
        first(None)


def test_init():
    interp = Interpreter()
    assert interp.init(CONFIGURATION1) == InterpState((), CONFIGURATION1)
    assert interp.init(None) == InterpState((), None)
    dup = Simple("Shipping", Simple("Shipping", None))
    with pytest.raises(InvariantViolation):
        Interpreter(configurations=None).init(dup)


def test_init_outside_configurations():
    with pytest.raises(InvariantViolation):
        Interpreter().init(Simple("Billing", None))


def test_step_rules():
    interp = Interpreter()
    s = interp.init(CONFIGURATION1)
    event, s = interp.step(s, ALL_TRUE)
    assert event == "OrderReceipt"
    event, rule, s2 = interp.step_annotated(s, choices(InventoryCheck=False))
    assert (event, rule) == ("InventoryCheck", "Branch-F")
    assert s2.workflow == Simple("Reject", None)


def test_par_second():
    interp = Interpreter(configurations=None)
    w = Par("Billing", "Shipping", Simple("Archiving", None))
    event, rule, s = interp.step_annotated(interp.init(w), ALL_TRUE, second_picker)
    assert (event, rule) == ("Shipping", "Par-2")
    assert s.workflow == Simple("Billing", Simple("Archiving", None))


def test_execute_examples():
    interp = Interpreter()
    s = interp.execute(interp.init(CONFIGURATION1), ALL_TRUE)
    assert s.trace == AT1[0]
    s = interp.execute(interp.init(CONFIGURATION1), choices(CreditCheck=False))
    assert s.trace == AT1[2]
    assert interp.execute(interp.init(None), ALL_TRUE).trace == (TERMINATE,)
    with pytest.raises(StepOnTerminated):
        interp.execute(s, ALL_TRUE)
    with pytest.raises(StepOnTerminated):
        interp.step(s, ALL_TRUE)


def test_branch_check():
    cc2 = CONFIGURATION2.next.on_true
    sc2 = CONFIGURATION2.next.on_false
    assert branch_check(("OrderReceipt", "InventoryCheck"), Simple("Reject", None), sc2)
    assert branch_check(
        ("OrderReceipt", "InventoryCheck", "CreditCheck"),
        Simple("Shipping", None),
        Par("Billing", "Shipping", None),
    )
    assert not branch_check(("OrderReceipt", "InventoryCheck"), Simple("Reject", None), cc2)


def test_reconfigure_success():
    interp = Interpreter()
    c = choices(InventoryCheck=False)
    s = interp.init(CONFIGURATION1)
    for _ in range(2):
        _, s = interp.step(s, c)
    s = interp.reconfigure(s, CONFIGURATION2.next.on_false)
    final = interp.execute(s, c)
    assert final.trace == AT2[4]


def test_reconfigure_fail_reports_double_shipping():
    interp = Interpreter()
    s = interp.init(CONFIGURATION1)
    for _ in range(4):
        _, s = interp.step(s, ALL_TRUE)
    assert s.trace[-1] == "Shipping"
    with pytest.raises(PreconditionFailed) as err:
        interp.reconfigure(s, Par("Billing", "Shipping", Simple("Archiving", None)))
    bad = err.value.invalid_traces
    assert len(bad) == 2
    assert all(t.count("Shipping") == 2 for t in bad)


def test_reconfigure_to_same_remainder():
    interp = Interpreter()
    s = interp.init(CONFIGURATION2)
    _, s = interp.step(s, ALL_TRUE)
    assert interp.reconfigure(s, s.workflow) == s


def test_reconfigure_rejects_terminal_and_branch_violation():
    interp = Interpreter()
    c = choices(InventoryCheck=False)
    s = interp.init(CONFIGURATION1)
    for _ in range(2):
        _, s = interp.step(s, c)
    with pytest.raises(PreconditionFailed):
        interp.reconfigure(s, None)
    with pytest.raises(PreconditionFailed) as err:
        interp.reconfigure(s, CONFIGURATION2.next.on_true)
    assert not err.value.invalid_traces


def _run_cli_style(ok_expected, *args, **kw):
    ok, text = reconfiguration_report(*args, **kw)
    assert ok is ok_expected
    return text + "\n"


def test_listing_outputs():
    assert (
        _run_cli_style(True, CONFIGURATION1, choices(InventoryCheck=False), "InventoryCheck", CONFIGURATION2.next.on_false)
        == (GOLDEN / "reconfig_success.txt").read_text()
    )
    par = Par("Billing", "Shipping", Simple("Archiving", None))
    assert _run_cli_style(False, CONFIGURATION1, ALL_TRUE, "Shipping", par) == (GOLDEN / "reconfig_fail.txt").read_text()


def test_render_trace():
    assert render_trace(()) == "[]"
    assert render_trace(["OrderReceipt"]) == "[<OrderReceipt>]"
    assert render_trace(AT1[0], indent=2).splitlines()[1].startswith("   <Shipping>")


def test_make_choices_domain():
    with pytest.raises(WorkflowError):
        make_choices({"InventoryCheck": True})
    with pytest.raises(WorkflowError):
        make_choices({**ALL_TRUE, "Billing": True})


def test_parse_and_format_roundtrip():
    for w in (CONFIGURATION1, CONFIGURATION2, None):
        assert parse_workflow(format_workflow(w)) == w
    with pytest.raises(WorkflowError):
        parse_workflow("simple(Nope, end)")
    with pytest.raises(WorkflowError):
        parse_workflow("branch(Reject, end)")


def test_reachable_remainders():
    rem = reachable_workflows(CONFIGURATION2)
    assert CONFIGURATION2 in rem and None in rem
    assert Simple("Billing", Simple("Archiving", None)) in rem


# --- properties -------------------------------------------------------------

def _all_runs(w):
    interp = Interpreter()
    out = set()
    for bits in itertools.product((True, False), repeat=3):
        c = dict(zip(CHOICE_ACTIONS, bits))
        for picker in (first_picker, second_picker):
            out.add(interp.execute(interp.init(w), c, picker).trace)
    return out


def test_replay_soundness():
    for w in (CONFIGURATION1, CONFIGURATION2):
        assert _all_runs(w) == set(tracesof(w))


@given(st.sampled_from([CONFIGURATION1, CONFIGURATION2]), st.lists(st.booleans(), min_size=3, max_size=3), st.integers(0, 1000))
def test_step_conservation(w, bits, seed):
    interp = Interpreter()
    c = dict(zip(CHOICE_ACTIONS, bits))
    picker = SeededPicker(seed)
    s = interp.init(w)
    while s.workflow is not None:
        head = first(s.workflow)
        event, s2 = interp.step(s, c, picker)
        assert event in head
        assert s2.trace[: len(s.trace)] == s.trace and len(s2.trace) == len(s.trace) + 1
        assert interp.state_invariant(s2)
        s = s2


@given(st.lists(st.booleans(), min_size=3, max_size=3), st.lists(st.booleans(), max_size=2), st.integers(1, 6))
def test_reconfiguration_keeps_invariant(bits, decisions, at):
    interp = Interpreter()
    c = dict(zip(CHOICE_ACTIONS, bits))
    s = interp.init(CONFIGURATION1)
    for _ in range(at):
        if s.workflow is None:
            break
        _, s = interp.step(s, c, ScriptedPicker(decisions))
    for w2 in reachable_workflows(CONFIGURATION2):
        try:
            s2 = interp.reconfigure(s, w2)
        except PreconditionFailed:
            continue
        assert interp.state_invariant(s2)
        final = interp.execute(s2, c, ScriptedPicker(decisions))
        assert final.trace in set(tracesof(CONFIGURATION2))
