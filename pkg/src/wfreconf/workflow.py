"""Workflow trees, their traces, and a stepping interpreter with guarded reconfiguration."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Union

ACTIONS = (
    "OrderReceipt",
    "InventoryCheck",
    "Reject",
    "CreditCheck",
    "SupplierCheck",
    "Shipping",
    "Billing",
    "Archiving",
    "Confirmation",
)
TERMINATE = "TERMINATE"
CHOICE_ACTIONS = ("CreditCheck", "InventoryCheck", "SupplierCheck")

Trace = tuple  # of event names


class WorkflowError(Exception):
    pass


class InvariantViolation(WorkflowError):
    pass


class StepOnTerminated(WorkflowError):
    pass


class EmptyInput(WorkflowError):
    pass


class TraceLimitExceeded(WorkflowError):
    pass


class PreconditionFailed(WorkflowError):
    def __init__(self, message: str, invalid_traces: Iterable[Trace] = ()) -> None:
        super().__init__(message)
        self.invalid_traces = list(invalid_traces)


def _check_action(a: str) -> str:
    if a not in ACTIONS:
        raise WorkflowError(f"unknown action {a!r}")
    return a


@dataclass(frozen=True)
class Simple:
    action: str
    next: Optional["Element"] = None

    def __post_init__(self) -> None:
        _check_action(self.action)


@dataclass(frozen=True)
class Branch:
    action: str
    on_true: Optional["Element"] = None
    on_false: Optional["Element"] = None

    def __post_init__(self) -> None:
        _check_action(self.action)


@dataclass(frozen=True)
class Par:
    b1: str
    b2: str
    next: Optional["Element"] = None

    def __post_init__(self) -> None:
        _check_action(self.b1)
        _check_action(self.b2)


Element = Union[Simple, Branch, Par]
Workflow = Optional[Element]


MAX_TRACES = 10_000


def tracesof(e: Workflow, limit: int = MAX_TRACES) -> list[Trace]:
    """All traces of ``e`` in a fixed order (true arm before false arm)."""
    if e is None:
        return [(TERMINATE,)]
    if isinstance(e, Simple):
        out = [(e.action,) + t for t in tracesof(e.next, limit)]
    elif isinstance(e, Branch):
        out = [(e.action,) + t for t in tracesof(e.on_true, limit)]
        out += [(e.action,) + t for t in tracesof(e.on_false, limit)]
    elif isinstance(e, Par):
        rest = tracesof(e.next, limit)
        out = [(e.b1, e.b2) + t for t in rest] + [(e.b2, e.b1) + t for t in rest]
    else:
        raise WorkflowError(f"not a workflow element: {e!r}")
    out = list(dict.fromkeys(out))
    if len(out) > limit:
        raise TraceLimitExceeded(f"more than {limit} traces")
    return out


def prefixof(a: Iterable[str], b: Iterable[str]) -> bool:
    a, b = tuple(a), tuple(b)
    return len(a) <= len(b) and b[: len(a)] == a


def first(w: Workflow) -> frozenset[str]:
    if w is None:
        raise EmptyInput("first of a terminated workflow")
    if isinstance(w, Par):
        return frozenset((w.b1, w.b2))
    return frozenset((w.action,))


def last(tr: Iterable[str]) -> str:
    tr = tuple(tr)
    if not tr:
        raise EmptyInput("last of an empty trace")
    return tr[-1]


def is_valid_workflow(w: Workflow) -> bool:
    return all(len(set(t)) == len(t) for t in tracesof(w))


# ---------------------------------------------------------------------------
# the two case-study configurations

CONFIGURATION1: Element = Simple(
    "OrderReceipt",
    Branch(
        "InventoryCheck",
        Branch(
            "CreditCheck",
            Simple("Shipping", Simple("Billing", Simple("Archiving", Simple("Confirmation", None)))),
            Simple("Reject", None),
        ),
        Simple("Reject", None),
    ),
)

_CC2 = Branch("CreditCheck", Par("Billing", "Shipping", Simple("Archiving", None)), Simple("Reject", None))

CONFIGURATION2: Element = Simple(
    "OrderReceipt",
    Branch(
        "InventoryCheck",
        _CC2,
        Branch("SupplierCheck", _CC2, Simple("Reject", None)),
    ),
)

Choices = Mapping[str, bool]

CHOICE_PRESETS: dict[str, dict[str, bool]] = {
    "NoProblems": {"InventoryCheck": True, "SupplierCheck": True, "CreditCheck": True},
    "NoStock": {"InventoryCheck": False, "SupplierCheck": False, "CreditCheck": False},
    "NoCredit": {"InventoryCheck": True, "SupplierCheck": False, "CreditCheck": False},
    "ExternalStock": {"InventoryCheck": False, "SupplierCheck": True, "CreditCheck": True},
    "ExternalStockNoCredit": {"InventoryCheck": False, "SupplierCheck": True, "CreditCheck": False},
}


def make_choices(values: Mapping[str, bool]) -> dict[str, bool]:
    if set(values) != set(CHOICE_ACTIONS):
        raise WorkflowError(f"choices must cover exactly {', '.join(CHOICE_ACTIONS)}")
    return {k: bool(values[k]) for k in CHOICE_ACTIONS}


# ---------------------------------------------------------------------------
# order pickers for Par: return True to emit the first action


OrderPicker = Callable[[str, str], bool]


def first_picker(b1: str, b2: str) -> bool:
    return True


def second_picker(b1: str, b2: str) -> bool:
    return False


class SeededPicker:
    def __init__(self, seed: int) -> None:
        self._rng = random.Random(seed)

    def __call__(self, b1: str, b2: str) -> bool:
        return self._rng.random() < 0.5


class ScriptedPicker:
    """Replays a fixed sequence of decisions, then falls back to the first action."""

    def __init__(self, decisions: Iterable[bool]) -> None:
        self._decisions = list(decisions)

    def __call__(self, b1: str, b2: str) -> bool:
        return self._decisions.pop(0) if self._decisions else True


# ---------------------------------------------------------------------------
# interpreter


@dataclass(frozen=True)
class InterpState:
    trace: Trace = ()
    workflow: Workflow = None

    @property
    def terminated(self) -> bool:
        return bool(self.trace) and self.trace[-1] == TERMINATE


def branch_check(tr: Iterable[str], w: Workflow, w2: Workflow) -> bool:
    """Reconfiguration must respect the outcome of the last branching action."""
    tr = tuple(tr)
    if not tr:
        return True
    lst = tr[-1]
    fw = first(w) if w is not None else frozenset()
    fw2 = first(w2) if w2 is not None else frozenset()
    if lst == "InventoryCheck" and fw == {"Reject"} and "SupplierCheck" not in fw2:
        return False
    if lst == "InventoryCheck" and fw == {"CreditCheck"} and "CreditCheck" not in fw2:
        return False
    if lst == "CreditCheck" and fw == {"Reject"} and "Reject" not in fw2:
        return False
    if lst == "CreditCheck" and fw == {"Shipping"} and not fw2 <= {"Billing", "Shipping"}:
        return False
    return True


class Interpreter:
    """Value-style operations over :class:`InterpState`.

    ``configurations`` is the family the state invariant refers to and
    ``target`` the configuration that reconfigured runs must conform to.
    Passing ``configurations=None`` disables the state invariant.
    """

    def __init__(
        self,
        configurations: Iterable[Workflow] | None = (CONFIGURATION1, CONFIGURATION2),
        target: Workflow = CONFIGURATION2,
    ) -> None:
        self.configurations = None if configurations is None else tuple(configurations)
        self.target = target
        self._allowed = (
            None
            if self.configurations is None
            else [t for c in self.configurations for t in tracesof(c)]
        )
        self._target_traces = set(tracesof(target))

    def state_invariant(self, s: InterpState) -> bool:
        if self._allowed is None or s.workflow is None:
            return True
        return all(
            any(prefixof(s.trace + t, full) for full in self._allowed) for t in tracesof(s.workflow)
        )

    def _checked(self, s: InterpState) -> InterpState:
        if not self.state_invariant(s):
            raise InvariantViolation(f"state invariant fails after trace {render_trace(s.trace)}")
        return s

    def init(self, w: Workflow) -> InterpState:
        if not is_valid_workflow(w):
            raise InvariantViolation("workflow has a trace with duplicate events")
        return self._checked(InterpState((), w))

    def step_annotated(
        self, s: InterpState, c: Choices, order_picker: OrderPicker = first_picker
    ) -> tuple[str, str, InterpState]:
        """One interpreter step: (event, rule tag, new state)."""
        w = s.workflow
        if w is None:
            raise StepOnTerminated("no workflow left to step")
        if isinstance(w, Simple):
            event, rule, rest = w.action, "Simple", w.next
        elif isinstance(w, Branch):
            outcome = bool(c[w.action])
            event = w.action
            rule = "Branch-T" if outcome else "Branch-F"
            rest = w.on_true if outcome else w.on_false
        else:
            if order_picker(w.b1, w.b2):
                event, rule, rest = w.b1, "Par-1", Simple(w.b2, w.next)
            else:
                event, rule, rest = w.b2, "Par-2", Simple(w.b1, w.next)
        return event, rule, self._checked(InterpState(s.trace + (event,), rest))

    def step(self, s: InterpState, c: Choices, order_picker: OrderPicker = first_picker) -> tuple[str, InterpState]:
        event, _, new = self.step_annotated(s, c, order_picker)
        return event, new

    def terminate(self, s: InterpState) -> InterpState:
        if s.workflow is not None or s.terminated:
            raise WorkflowError("only a finished, unterminated run can terminate")
        return InterpState(s.trace + (TERMINATE,), None)

    def execute(self, s: InterpState, c: Choices, order_picker: OrderPicker = first_picker) -> InterpState:
        if s.workflow is None and s.terminated:
            raise StepOnTerminated("run already terminated")
        while s.workflow is not None:
            _, s = self.step(s, c, order_picker)
        return self.terminate(s)

    def invalid_traces(self, s: InterpState, w2: Workflow) -> list[Trace]:
        return [s.trace + t for t in tracesof(w2) if s.trace + t not in self._target_traces]

    def reconfigure(self, s: InterpState, w2: Workflow) -> InterpState:
        if w2 is None:
            raise PreconditionFailed("cannot reconfigure to a terminated workflow")
        if not branch_check(s.trace, s.workflow, w2):
            raise PreconditionFailed("reconfiguration contradicts the outcome of the last branching action")
        bad = self.invalid_traces(s, w2)
        if bad:
            raise PreconditionFailed("reconfiguration could generate invalid traces", bad)
        return self._checked(InterpState(s.trace, w2))


# ---------------------------------------------------------------------------
# annotated runs


@dataclass(frozen=True)
class RunEvent:
    event: str
    rule: str
    reconfigured: bool = False


def run_annotated(
    w: Workflow,
    c: Choices,
    order_picker: OrderPicker = first_picker,
    reconfigure_after: str | None = None,
    new_workflow: Workflow = None,
    interp: Interpreter | None = None,
) -> list[RunEvent]:
    """Execute to termination, optionally reconfiguring once ``reconfigure_after`` was emitted.

    The first event emitted after a reconfiguration carries the flag.
    """
    interp = interp or Interpreter()
    s = interp.init(w)
    out: list[RunEvent] = []
    pending = False
    done = reconfigure_after is None
    while s.workflow is not None:
        event, rule, s = interp.step_annotated(s, c, order_picker)
        out.append(RunEvent(event, rule, pending))
        pending = False
        if not done and event == reconfigure_after:
            s = interp.reconfigure(s, new_workflow)
            pending = done = True
    s = interp.terminate(s)
    out.append(RunEvent(TERMINATE, "Terminate", pending))
    return out


# ---------------------------------------------------------------------------
# rendering in the console style of the original model


def render_trace(trace: Iterable[str], indent: int = 0, width: int = 60, first_prefix: str | None = None) -> str:
    """``[<A>, <B>, ...]`` wrapped greedily; continuation lines align after ``[``."""
    items = [f"<{e}>" for e in trace]
    head = first_prefix if first_prefix is not None else " " * indent
    cont = " " * (len(head) + 1)
    if not items:
        return head + "[]"
    lines = []
    cur = head + "["
    for i, item in enumerate(items):
        piece = item + ("]" if i == len(items) - 1 else ",")
        if cur.endswith("[") :
            cur += piece
        elif len(cur) + 1 + len(piece) <= width:
            cur += " " + piece
        else:
            lines.append(cur)
            cur = cont + piece
    lines.append(cur)
    return "\n".join(lines)


def reconfiguration_report(
    w: Workflow,
    c: Choices,
    at: str,
    new_workflow: Workflow,
    order_picker: OrderPicker = first_picker,
    interp: Interpreter | None = None,
    source_name: str = "Configuration1",
    target_name: str = "Configuration2",
) -> tuple[bool, str]:
    """Step until ``at`` is emitted, then try to reconfigure and finish the run."""
    interp = interp or Interpreter()
    s = interp.init(w)
    while s.workflow is not None:
        event, s = interp.step(s, c, order_picker)
        if event == at:
            break
    else:
        raise WorkflowError(f"{at} never occurred")
    lines = [render_trace(s.trace), f"Reconfiguring {source_name} to {target_name}..."]
    try:
        s = interp.reconfigure(s, new_workflow)
    except PreconditionFailed as err:
        if err.invalid_traces:
            lines.append(f"These potential traces are not valid under {target_name}:")
            for t in err.invalid_traces:
                shown = t[:-1] if t and t[-1] == TERMINATE else t
                lines.append(render_trace(shown, first_prefix="* "))
        else:
            lines.append(f"Reconfiguration rejected: {err}")
        return False, "\n".join(lines)
    s = interp.execute(s, c, order_picker)
    lines.append(render_trace(s.trace))
    return True, "\n".join(lines)


# ---------------------------------------------------------------------------
# text syntax: simple(A, w), branch(A, w, w), par(A, A, w), end, names


_WTOK = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|([(),]))")


def parse_workflow(text: str, bindings: Mapping[str, Workflow] | None = None) -> Workflow:
    bindings = dict(bindings or {})
    toks: list[str] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _WTOK.match(text, pos)
        if not m or m.end() == pos:
            raise WorkflowError(f"unexpected character {text[pos]!r} in workflow")
        toks.append(m.group(1) or m.group(2))
        pos = m.end()
    i = 0

    def take(expected: str | None = None) -> str:
        nonlocal i
        if i >= len(toks):
            raise WorkflowError("unexpected end of workflow")
        tok = toks[i]
        if expected is not None and tok != expected:
            raise WorkflowError(f"expected {expected!r}, found {tok!r}")
        i += 1
        return tok

    def element() -> Workflow:
        tok = take()
        if tok in ("end", "nil"):
            return None
        if tok in ("simple", "branch", "par"):
            take("(")
            a = take()
            take(",")
            if tok == "simple":
                rest = element()
                take(")")
                return Simple(a, rest)
            if tok == "branch":
                t = element()
                take(",")
                f = element()
                take(")")
                return Branch(a, t, f)
            b = take()
            take(",")
            rest = element()
            take(")")
            return Par(a, b, rest)
        if tok in bindings:
            return bindings[tok]
        raise WorkflowError(f"unknown workflow name {tok!r}")

    w = element()
    if i != len(toks):
        raise WorkflowError(f"trailing input {toks[i]!r} in workflow")
    return w


def format_workflow(w: Workflow) -> str:
    if w is None:
        return "end"
    if isinstance(w, Simple):
        return f"simple({w.action}, {format_workflow(w.next)})"
    if isinstance(w, Branch):
        return f"branch({w.action}, {format_workflow(w.on_true)}, {format_workflow(w.on_false)})"
    return f"par({w.b1}, {w.b2}, {format_workflow(w.next)})"


def reachable_workflows(w: Workflow) -> list[Workflow]:
    """Every remaining workflow some run of ``w`` can reach, ``w`` included."""
    seen: dict[Workflow, None] = {}
    stack = [w]
    while stack:
        cur = stack.pop()
        if cur in seen:
            continue
        seen[cur] = None
        if isinstance(cur, Simple):
            stack.append(cur.next)
        elif isinstance(cur, Branch):
            stack += [cur.on_false, cur.on_true]
        elif isinstance(cur, Par):
            stack += [Simple(cur.b1, cur.next), Simple(cur.b2, cur.next)]
    return list(seen)
