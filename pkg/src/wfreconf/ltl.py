"""LTL over the lasso-shaped Kripke structures of interpreter runs."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .workflow import (
    CHOICE_ACTIONS,
    CONFIGURATION1,
    CONFIGURATION2,
    TERMINATE,
    Branch,
    Interpreter,
    Par,
    PreconditionFailed,
    RunEvent,
    Simple,
    Workflow,
    first_picker,
    reachable_workflows,
    second_picker,
)


class LtlError(Exception):
    pass


class LtlSyntaxError(LtlError):
    pass


class MalformedRun(LtlError):
    pass


RULES = ("Init", "Terminate", "Reset", "Simple", "Branch-T", "Branch-F", "Par-1", "Par-2", "Reconfigure")


@dataclass(frozen=True)
class KripkeState:
    action: Optional[str]
    rule: str
    reconfigure: bool = False

    def __post_init__(self) -> None:
        if self.rule not in RULES:
            raise MalformedRun(f"unknown rule tag {self.rule!r}")


_PLAIN = {
    "or": "OrderReceipt",
    "rj": "Reject",
    "tr": TERMINATE,
    "sh": "Shipping",
    "bi": "Billing",
    "ar": "Archiving",
    "cf": "Confirmation",
}
_BRANCHING = {
    "ict": ("InventoryCheck", "Branch-T"),
    "icf": ("InventoryCheck", "Branch-F"),
    "cct": ("CreditCheck", "Branch-T"),
    "ccf": ("CreditCheck", "Branch-F"),
    "sct": ("SupplierCheck", "Branch-T"),
    "scf": ("SupplierCheck", "Branch-F"),
}
ATOMS = tuple(sorted(set(_PLAIN) | set(_BRANCHING) | {"rc"}))


def holds_atom(name: str, s: KripkeState) -> bool:
    if name in _PLAIN:
        return s.action == _PLAIN[name]
    if name in _BRANCHING:
        action, rule = _BRANCHING[name]
        return s.action == action and s.rule == rule
    if name == "rc":
        return s.reconfigure
    raise LtlError(f"unknown atomic proposition {name!r}")


@dataclass(frozen=True)
class KripkeStructure:
    """A chain ``S_0 .. S_n`` whose last state loops on itself.

    ``S_0`` is the Init state; formulas are evaluated from ``start``.
    """

    states: tuple[KripkeState, ...]
    start: int = 1

    def successor(self, i: int) -> int:
        return min(i + 1, len(self.states) - 1)

    def labels(self, i: int) -> frozenset[str]:
        return frozenset(a for a in ATOMS if holds_atom(a, self.states[i]))

    def to_text(self) -> str:
        out = []
        for i, s in enumerate(self.states):
            props = ",".join(sorted(self.labels(i)))
            loop = " (loop)" if i == len(self.states) - 1 else ""
            out.append(f"S{i}: {s.action or '-'} by {s.rule} {{{props}}}{loop}")
        return "\n".join(out)


def trace_to_kripke(run: Sequence[RunEvent]) -> KripkeStructure:
    run = list(run)
    if not run or run[-1].event != TERMINATE:
        raise MalformedRun("a run must end with TERMINATE")
    if any(e.event == TERMINATE for e in run[:-1]):
        raise MalformedRun("TERMINATE may only occur last")
    states = [KripkeState(None, "Init")]
    states += [KripkeState(e.event, e.rule, e.reconfigured) for e in run]
    return KripkeStructure(tuple(states))


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self) -> str:
        return f"!{_wrap(self.arg)}"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} & {_wrap(self.right)}"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} | {_wrap(self.right)}"


@dataclass(frozen=True)
class Until:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} U {_wrap(self.right)}"


@dataclass(frozen=True)
class Globally:
    arg: "Formula"

    def __str__(self) -> str:
        return f"G {_wrap(self.arg)}"


Formula = Atom | Not | And | Or | Until | Globally


def _wrap(f: Formula) -> str:
    return str(f) if isinstance(f, (Atom, Not, Globally)) else f"({f})"


def any_of(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def _chain(*fs: Formula) -> Formula:
    """``f1 U (f2 U (... U G tr))``"""
    out: Formula = Globally(Atom("tr"))
    for f in reversed(fs):
        out = Until(f, out)
    return out


def _never(a: str) -> Formula:
    return Globally(Not(Atom(a)))


def _a(n: str) -> Atom:
    return Atom(n)


def cf1() -> Formula:
    return any_of(
        [
            And(_chain(*map(_a, ("or", "ict", "cct", "sh", "bi", "ar", "cf"))), _never("rj")),
            And(_chain(*map(_a, ("or", "icf", "rj"))), _never("cf")),
            And(_chain(*map(_a, ("or", "ict", "ccf", "rj"))), _never("cf")),
        ]
    )


def cf2() -> Formula:
    bs = Or(Atom("bi"), Atom("sh"))
    return any_of(
        [
            And(_chain(_a("or"), _a("ict"), _a("cct"), bs, _a("ar")), _never("rj")),
            And(_chain(*map(_a, ("or", "icf", "scf", "rj"))), _never("ar")),
            And(_chain(*map(_a, ("or", "icf", "sct", "ccf", "rj"))), _never("ar")),
            And(_chain(_a("or"), _a("icf"), _a("sct"), _a("cct"), bs, _a("ar")), _never("rj")),
            And(_chain(*map(_a, ("or", "ict", "ccf", "rj"))), _never("ar")),
        ]
    )


def rf() -> Formula:
    return Or(cf2(), And(Not(cf2()), cf1()))


PRESETS = {"CF1": cf1, "CF2": cf2, "RF": rf}


# ---------------------------------------------------------------------------
# evaluation: backwards over the chain, the last state loops on itself


def _table(ks: KripkeStructure, f: Formula, memo: dict) -> list[bool]:
    if f in memo:
        return memo[f]
    n = len(ks.states)
    if isinstance(f, Atom):
        if f.name not in ATOMS:
            raise LtlError(f"unknown atomic proposition {f.name!r}")
        out = [holds_atom(f.name, s) for s in ks.states]
    elif isinstance(f, Not):
        out = [not v for v in _table(ks, f.arg, memo)]
    elif isinstance(f, And):
        out = [a and b for a, b in zip(_table(ks, f.left, memo), _table(ks, f.right, memo))]
    elif isinstance(f, Or):
        out = [a or b for a, b in zip(_table(ks, f.left, memo), _table(ks, f.right, memo))]
    elif isinstance(f, Globally):
        arg = _table(ks, f.arg, memo)
        out = [False] * n
        out[-1] = arg[-1]
        for i in range(n - 2, -1, -1):
            out[i] = arg[i] and out[i + 1]
    elif isinstance(f, Until):
        left, right = _table(ks, f.left, memo), _table(ks, f.right, memo)
        out = [False] * n
        out[-1] = right[-1]
        for i in range(n - 2, -1, -1):
            out[i] = right[i] or (left[i] and out[i + 1])
    else:
        raise LtlError(f"not a formula: {f!r}")
    memo[f] = out
    return out


def check(ks: KripkeStructure, f: Formula, at: int | None = None) -> bool:
    return _table(ks, f, {})[ks.start if at is None else at]


# ---------------------------------------------------------------------------
# parser: | < & < U (right assoc) < ! and G


_TOK = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(.))")


def parse_formula(text: str, named: dict[str, Formula] | None = None) -> Formula:
    named = dict(named or {})
    toks = [m.group(1) or m.group(2) for m in _TOK.finditer(text) if (m.group(1) or m.group(2) or "").strip()]
    pos = 0

    def peek() -> str | None:
        return toks[pos] if pos < len(toks) else None

    def take() -> str:
        nonlocal pos
        if pos >= len(toks):
            raise LtlSyntaxError("unexpected end of formula")
        pos += 1
        return toks[pos - 1]

    def disj() -> Formula:
        f = conj()
        while peek() == "|":
            take()
            f = Or(f, conj())
        return f

    def conj() -> Formula:
        f = until()
        while peek() == "&":
            take()
            f = And(f, until())
        return f

    def until() -> Formula:
        f = unary()
        if peek() == "U":
            take()
            return Until(f, until())
        return f

    def unary() -> Formula:
        tok = take()
        if tok == "!":
            return Not(unary())
        if tok == "G":
            return Globally(unary())
        if tok == "(":
            f = disj()
            if take() != ")":
                raise LtlSyntaxError("expected ')'")
            return f
        if tok in named:
            return named[tok]
        if tok in PRESETS:
            return PRESETS[tok]()
        if tok in ATOMS:
            return Atom(tok)
        raise LtlSyntaxError(f"unexpected token {tok!r}")

    f = disj()
    if pos != len(toks):
        raise LtlSyntaxError(f"trailing input {toks[pos]!r}")
    return f


# ---------------------------------------------------------------------------
# runs of the interpreter


def annotated_runs(w: Workflow) -> list[tuple[RunEvent, ...]]:
    """Every run of ``w`` with its rule tags, in the order of ``tracesof``."""
    if w is None:
        return [(RunEvent(TERMINATE, "Terminate"),)]
    if isinstance(w, Simple):
        return [(RunEvent(w.action, "Simple"),) + r for r in annotated_runs(w.next)]
    if isinstance(w, Branch):
        return [(RunEvent(w.action, "Branch-T"),) + r for r in annotated_runs(w.on_true)] + [
            (RunEvent(w.action, "Branch-F"),) + r for r in annotated_runs(w.on_false)
        ]
    if isinstance(w, Par):
        rest = annotated_runs(w.next)
        return [(RunEvent(w.b1, "Par-1"), RunEvent(w.b2, "Simple")) + r for r in rest] + [
            (RunEvent(w.b2, "Par-2"), RunEvent(w.b1, "Simple")) + r for r in rest
        ]
    raise LtlError(f"not a workflow element: {w!r}")


def run_for_trace(w: Workflow, trace: Sequence[str]) -> tuple[RunEvent, ...]:
    trace = tuple(trace)
    for r in annotated_runs(w):
        if tuple(e.event for e in r) == trace:
            return r
    raise MalformedRun("trace is not a run of the workflow")


def all_choices() -> list[dict[str, bool]]:
    return [dict(zip(CHOICE_ACTIONS, bits)) for bits in itertools.product((True, False), repeat=len(CHOICE_ACTIONS))]


def reconfigured_runs(
    source: Workflow = CONFIGURATION1,
    target: Workflow = CONFIGURATION2,
    interp: Interpreter | None = None,
) -> list[tuple[RunEvent, ...]]:
    """Runs of ``source`` reconfigured once to a remainder of ``target``.

    Every choice set, interleaving and reconfiguration point after the first
    event is tried against every non-terminal remainder that ``target`` can
    reach; only reconfigurations whose pre-condition holds are kept.
    """
    interp = interp or Interpreter(target=target)
    candidates = [w for w in reachable_workflows(target) if w is not None]
    found: dict[tuple[RunEvent, ...], None] = {}
    pickers = (first_picker, second_picker)
    for c in all_choices():
        for before in pickers:
            prefix: list[RunEvent] = []
            s = interp.init(source)
            while s.workflow is not None:
                event, rule, s = interp.step_annotated(s, c, before)
                prefix.append(RunEvent(event, rule))
                for w2 in candidates:
                    try:
                        s2 = interp.reconfigure(s, w2)
                    except PreconditionFailed:
                        continue
                    for after in pickers:
                        rest: list[RunEvent] = []
                        cur = s2
                        while cur.workflow is not None:
                            ev, rl, cur = interp.step_annotated(cur, c, after)
                            rest.append(RunEvent(ev, rl, not rest))
                        rest.append(RunEvent(TERMINATE, "Terminate", not rest))
                        found[tuple(prefix) + tuple(rest)] = None
    return list(found)
