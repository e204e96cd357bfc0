"""Labelled transition systems of canonical CPOGs.

A state is a history of executed actions together with the current variable
assignment.  The controlling action of a variable decides its value when it
fires; both outcomes are explored.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .cpog import CanonicalForm, ControlMap


class UnknownAction(KeyError):
    pass


class StateBoundExceeded(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class CpogState:
    history: frozenset[str]
    psi: tuple[tuple[str, int], ...]

    @staticmethod
    def make(history: Iterable[str], psi: Mapping[str, int]) -> CpogState:
        return CpogState(frozenset(history), tuple(sorted((k, int(v)) for k, v in psi.items())))

    @property
    def assignment(self) -> dict[str, int]:
        return dict(self.psi)

    def sort_key(self) -> tuple:
        return (len(self.history), sorted(self.history), self.psi)

    def __str__(self) -> str:
        h = ",".join(sorted(self.history))
        p = ",".join(f"{k}={v}" for k, v in self.psi)
        return f"({{{h}}}, {p or '-'})"


def _universe(cf: CanonicalForm, ctrl: ControlMap) -> list[str]:
    return sorted(set(cf.variables()) | set(ctrl.controllers))


def initial_state(cf: CanonicalForm, ctrl: ControlMap) -> CpogState:
    return CpogState.make((), {x: 0 for x in _universe(cf, ctrl)})


def preset(v: str, psi: Mapping[str, int], cf: CanonicalForm) -> set[str]:
    if v not in cf.vertices:
        raise UnknownAction(v)
    return {
        u
        for u, fu in cf.vertices.items()
        if fu.eval(psi) and cf.arc(u, v).eval(psi)
    }


def _enabled(v: str, s: CpogState, cf: CanonicalForm) -> bool:
    psi = s.assignment
    return v not in s.history and bool(cf.vertex(v).eval(psi)) and preset(v, psi, cf) <= s.history


def _outcomes(actions: Iterable[str], psi: Mapping[str, int], ctrl: ControlMap) -> list[dict[str, int]]:
    controlled = sorted({x for a in actions for x in ctrl.controlled_by(a)})
    out = []
    for values in itertools.product((0, 1), repeat=len(controlled)):
        new = dict(psi)
        new.update(zip(controlled, values))
        out.append(new)
    return out


def enabled_actions(s: CpogState, cf: CanonicalForm) -> list[str]:
    return [v for v in cf.vertices if _enabled(v, s, cf)]


def step_single(s: CpogState, cf: CanonicalForm, ctrl: ControlMap) -> list[tuple[str, CpogState]]:
    out = []
    for w in enabled_actions(s, cf):
        for psi in _outcomes([w], s.assignment, ctrl):
            out.append((w, CpogState.make(s.history | {w}, psi)))
    return out


def step_set(
    s: CpogState, cf: CanonicalForm, ctrl: ControlMap, actions: Iterable[str]
) -> list[CpogState]:
    """Targets of the concurrent step ``W``; empty when it is not enabled.

    ``W`` fires as one step only if every member stays enabled whichever
    other members fire first and whatever values they decide, so that the
    interleavings close into a diamond.
    """
    w_set = frozenset(actions)
    if not w_set:
        raise ValueError("a set step needs at least one action")
    members = sorted(w_set)
    for k in range(len(members)):
        for done in itertools.combinations(members, k):
            for psi in _outcomes(done, s.assignment, ctrl):
                mid = CpogState.make(s.history | set(done), psi)
                for w in members:
                    if w not in done and not _enabled(w, mid, cf):
                        return []
    return [CpogState.make(s.history | w_set, psi) for psi in _outcomes(members, s.assignment, ctrl)]


@dataclass
class CpogLts:
    initial: CpogState
    states: list[CpogState]
    transitions: list[tuple[CpogState, frozenset[str], CpogState]]
    deadlocks: list[CpogState] = field(default_factory=list)

    def successors(self, s: CpogState) -> list[tuple[frozenset[str], CpogState]]:
        return [(lab, t) for (src, lab, t) in self.transitions if src == s]

    def to_text(self) -> str:
        lines = [f"initial {self.initial}"]
        for src, lab, dst in self.transitions:
            lines.append(f"{src} --{{{','.join(sorted(lab))}}}--> {dst}")
        for d in self.deadlocks:
            lines.append(f"deadlock {d}")
        return "\n".join(lines)

    def to_dot(self) -> str:
        ids = {s: f"s{i}" for i, s in enumerate(self.states)}
        lines = ["digraph cpog_lts {"]
        for s, i in ids.items():
            shape = "doublecircle" if s == self.initial else "box" if s in self.deadlocks else "ellipse"
            lines.append(f'  {i} [label="{s}", shape={shape}];')
        for src, lab, dst in self.transitions:
            lines.append(f'  {ids[src]} -> {ids[dst]} [label="{",".join(sorted(lab))}"];')
        lines.append("}")
        return "\n".join(lines)


def _transition_key(t: tuple[CpogState, frozenset[str], CpogState]) -> tuple:
    return (t[0].sort_key(), sorted(t[1]), t[2].sort_key())


def reachable(
    cf: CanonicalForm,
    ctrl: ControlMap,
    true_concurrency: bool = False,
    bound: int = 16,
) -> CpogLts:
    if len(cf.vertices) > bound:
        raise StateBoundExceeded(f"{len(cf.vertices)} vertices exceed the bound of {bound}")
    init = initial_state(cf, ctrl)
    seen = {init}
    frontier = [init]
    transitions = []
    deadlocks = []
    while frontier:
        nxt = []
        for s in frontier:
            succ: list[tuple[frozenset[str], CpogState]] = []
            if true_concurrency:
                enabled = enabled_actions(s, cf)
                for k in range(1, len(enabled) + 1):
                    for w in itertools.combinations(enabled, k):
                        succ.extend((frozenset(w), t) for t in step_set(s, cf, ctrl, w))
            else:
                succ = [(frozenset([w]), t) for w, t in step_single(s, cf, ctrl)]
            if not succ:
                psi = s.assignment
                if any(f.eval(psi) for a, f in cf.vertices.items() if a not in s.history):
                    deadlocks.append(s)
            for lab, t in succ:
                transitions.append((s, lab, t))
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    states = sorted(seen, key=CpogState.sort_key)
    transitions.sort(key=_transition_key)
    deadlocks.sort(key=CpogState.sort_key)
    return CpogLts(init, states, transitions, deadlocks)
