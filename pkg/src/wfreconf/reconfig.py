"""Consistent histories and safe reconfiguration points of CPOG specifications."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from . import kernels
from .boolexpr import FALSE, TRUE, BoolExpr, var
from .cpog import Action, CanonicalForm, Cond, ControlMap, CpogExpr, Parallel, Sequence, canonicalize, overlay


class BoundExceeded(RuntimeError):
    pass


History = frozenset


def _closed(S: CpogExpr | CanonicalForm) -> CanonicalForm:
    return S if isinstance(S, CanonicalForm) else canonicalize(S)


def consistency(H: Iterable[str], S: CpogExpr | CanonicalForm, alphabet: Iterable[str] | None = None) -> BoolExpr:
    """Condition under which ``H`` could be the set of executed actions of ``S``.

    Every action of ``H`` must be present and no dependency may lead from an
    action outside ``H`` into ``H``.  Dependencies are taken from the closed
    canonical form.
    """
    cf = _closed(S)
    h = frozenset(H)
    if alphabet is not None:
        unknown = h - set(alphabet)
        if unknown:
            raise ValueError(f"history mentions unknown actions {sorted(unknown)}")
    out = TRUE
    for a in sorted(h):
        out = out & cf.vertex(a)
        if out.is_false():
            return FALSE
    for (a, b), f in cf.arcs.items():
        if a not in h and b in h:
            out = out & ~f
            if out.is_false():
                return FALSE
    return out


def compatible(H: Iterable[str], S1: CpogExpr | CanonicalForm, S2: CpogExpr | CanonicalForm) -> bool:
    return not (consistency(H, S1) & consistency(H, S2)).is_false()


@dataclass(frozen=True)
class ReconfigSpec:
    """``r + [!flag] from_cfg + [flag] to_cfg`` with ``flag`` decided by ``r``."""

    r: str
    flag: str
    from_cfg: CpogExpr
    to_cfg: CpogExpr

    @property
    def combined(self) -> CpogExpr:
        f = var(self.flag)
        return Parallel(Parallel(Action(self.r), Cond(~f, self.from_cfg)), Cond(f, self.to_cfg))

    def control(self, base: ControlMap | None = None) -> ControlMap:
        return (base or ControlMap()).with_control(self.flag, self.r)

    def alphabet(self) -> list[str]:
        names = set(self.from_cfg.actions()) | set(self.to_cfg.actions()) | {self.r}
        return sorted(names)

    def reversed(self) -> ReconfigSpec:
        return ReconfigSpec(self.r, self.flag, self.to_cfg, self.from_cfg)


def _tables(cf: CanonicalForm, names: list[str], variables: list[str]):
    idx = {a: i for i, a in enumerate(names)}
    vert = [cf.vertex(a).truth_table(variables) for a in names]
    arcs = [
        (idx[a], idx[b], f.truth_table(variables))
        for (a, b), f in cf.arcs.items()
        if a in idx and b in idx
    ]
    return vert, arcs


def _subsets(names: list[str], specs, universe: Iterable[str], backend: str) -> list[frozenset[str]]:
    """Run the kernel; ``specs`` hold (closed form, forced actions)."""
    variables = sorted(set().union(*(cf.variables() for cf, _ in specs)) if specs else set())
    nbits = 1 << len(variables)
    idx = {a: i for i, a in enumerate(names)}
    prepared = []
    for cf, forced in specs:
        vert, arcs = _tables(cf, names, variables)
        mask = 0
        for a in forced:
            mask |= 1 << idx[a]
        prepared.append((vert, arcs, mask))
    umask = 0
    for a in universe:
        umask |= 1 << idx[a]
    if backend == "kernel":
        fn = kernels.consistent_subsets
    elif backend == "python":
        from . import _histkern_py

        fn = _histkern_py.consistent_subsets
    else:
        raise ValueError(f"unknown backend {backend!r}")
    masks = fn(len(names), nbits, prepared, umask)
    return [frozenset(a for a in names if m >> idx[a] & 1) for m in masks]


def _sorted_histories(hs: Iterable[frozenset[str]]) -> list[frozenset[str]]:
    return sorted(set(hs), key=lambda h: (len(h), sorted(h)))


def _check_bound(names: list[str], bound: int) -> None:
    if len(names) > bound:
        raise BoundExceeded(f"alphabet of {len(names)} actions exceeds the bound of {bound}")


def _powerset(names: list[str]):
    for m in range(1 << len(names)):
        yield frozenset(a for i, a in enumerate(names) if m >> i & 1)


def enumerate_consistent(
    S: CpogExpr,
    alphabet: Iterable[str] | None = None,
    bound: int = 16,
    backend: str = "kernel",
) -> list[frozenset[str]]:
    """All histories ``H`` whose consistency condition is satisfiable."""
    cf = canonicalize(S)
    names = sorted(alphabet if alphabet is not None else cf.vertices)
    _check_bound(names, bound)
    if backend == "bdd":
        return _sorted_histories(h for h in _powerset(names) if not consistency(h, cf).is_false())
    return _sorted_histories(_subsets(names, [(cf, ())], names, backend))


def _flag_views(spec: ReconfigSpec) -> tuple[CanonicalForm, CanonicalForm]:
    cf = canonicalize(spec.combined)
    before = CanonicalForm(
        {a: f.restrict(spec.flag, 0) for a, f in cf.vertices.items()},
        {k: f.restrict(spec.flag, 0) for k, f in cf.arcs.items()},
    )
    after = CanonicalForm(
        {a: f.restrict(spec.flag, 1) for a, f in cf.vertices.items()},
        {k: f.restrict(spec.flag, 1) for k, f in cf.arcs.items()},
    )
    return before, after


def safe_histories(
    spec: ReconfigSpec,
    alphabet: Iterable[str] | None = None,
    bound: int = 16,
    backend: str = "kernel",
) -> list[frozenset[str]]:
    """Histories at which ``r`` may fire without reaching an impossible state.

    ``H`` (without ``r``) qualifies when some outcome of the branching actions
    makes ``H`` consistent before the reconfiguration (flag unset) and
    ``H + r`` consistent after it (flag set).
    """
    names = sorted(set(alphabet) | {spec.r}) if alphabet is not None else spec.alphabet()
    _check_bound(names, bound)
    before, after = _flag_views(spec)
    universe = [a for a in names if a != spec.r]
    if backend == "bdd":
        return _sorted_histories(
            h
            for h in _powerset(universe)
            if not (consistency(h, before) & consistency(h | {spec.r}, after)).is_false()
        )
    return _sorted_histories(_subsets(names, [(before, ()), (after, (spec.r,))], universe, backend))


def safety_condition(spec: ReconfigSpec, H: Iterable[str]) -> BoolExpr:
    """``C(H)`` with the flag unset conjoined with ``C(H + r)`` with it set."""
    before, after = _flag_views(spec)
    h = frozenset(H) - {spec.r}
    return consistency(h, before) & consistency(h | {spec.r}, after)


def consistent_before(
    spec: ReconfigSpec,
    alphabet: Iterable[str] | None = None,
    bound: int = 16,
    backend: str = "kernel",
) -> list[frozenset[str]]:
    """Histories without ``r`` that are consistent with the running configuration."""
    names = sorted(set(alphabet) | {spec.r}) if alphabet is not None else spec.alphabet()
    _check_bound(names, bound)
    before, _ = _flag_views(spec)
    universe = [a for a in names if a != spec.r]
    if backend == "bdd":
        return _sorted_histories(h for h in _powerset(universe) if not consistency(h, before).is_false())
    return _sorted_histories(_subsets(names, [(before, ())], universe, backend))


@dataclass(frozen=True)
class GuidelineResult:
    ok: bool
    counterexample: frozenset[str] | None
    checked: int

    def __bool__(self) -> bool:
        return self.ok


def check_forbidden_guideline(
    spec: ReconfigSpec,
    forbidden: Iterable[str],
    alphabet: Iterable[str] | None = None,
    bound: int = 16,
    backend: str = "kernel",
) -> GuidelineResult:
    """Does firing ``r`` before every forbidden action guarantee safety?

    Every consistent history avoiding the forbidden actions must be a safe
    reconfiguration history.  On failure the smallest violating history is
    returned (ties broken by sorted action names).
    """
    bad = frozenset(forbidden)
    safe = set(safe_histories(spec, alphabet, bound, backend))
    candidates = [h for h in consistent_before(spec, alphabet, bound, backend) if not (h & bad)]
    for h in candidates:
        if h not in safe:
            return GuidelineResult(False, h, len(candidates))
    return GuidelineResult(True, None, len(candidates))


def make_safe(spec: ReconfigSpec, forbidden: Iterable[str]) -> CpogExpr:
    """Add the dependencies ``r -> a`` for every forbidden action ``a``."""
    bad = sorted(set(forbidden))
    if not bad:
        return spec.combined
    return Parallel(spec.combined, Sequence(Action(spec.r), overlay(*(Action(a) for a in bad))))
