"""``wfreconf`` command line.

Exit status: 0 success or property holds, 1 property fails, 2 usage or
parse error, 3 a resource bound was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import ccsdp, cpog_lts, ltl, reconfig, workflow
from .boolexpr import ConditionSyntaxError
from .cpog import CpogError, canonical_listing, canonicalize, differences, transitive_close
from .project import Project, ProjectError, bundled, bundled_names, parse_project

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BOUND = 0, 1, 2, 3

_BOUND_ERRORS = (
    reconfig.BoundExceeded,
    cpog_lts.StateBoundExceeded,
    ccsdp.UnfoldBoundExceeded,
    workflow.TraceLimitExceeded,
)
_USAGE_ERRORS = (
    ProjectError,
    CpogError,
    ConditionSyntaxError,
    ccsdp.CcsError,
    ltl.LtlError,
    workflow.WorkflowError,
    cpog_lts.UnknownAction,
)


class Output:
    def __init__(self, fmt: str) -> None:
        self.fmt = fmt
        self.lines: list[str] = []
        self.data: dict = {}

    def line(self, text: str = "") -> None:
        self.lines.append(text)

    def emit(self) -> None:
        if self.fmt == "json":
            print(json.dumps(self.data, indent=2))
        elif self.lines:
            print("\n".join(self.lines))


def _load(args) -> Project:
    name = args.file
    if name is None:
        name = "case_study.wfr"
    path = Path(name)
    if path.exists():
        text = path.read_text()
    else:
        candidate = name if name.endswith(".wfr") else name + ".wfr"
        if candidate not in bundled_names():
            raise ProjectError(f"no such project file {name!r} (bundled: {', '.join(bundled_names())})")
        text = bundled(candidate)
    orders = args.orders.split(",") if getattr(args, "orders", None) else None
    return parse_project(text, orders=orders, bound=getattr(args, "state_bound", None))


def _hist(h) -> str:
    return "{" + ", ".join(sorted(h)) + "}"


def _names(text: str | None) -> list[str]:
    return [n.strip() for n in (text or "").split(",") if n.strip()]


# ---------------------------------------------------------------------------
# CPOG commands


def cmd_canonicalize(args, out: Output) -> int:
    proj = _load(args)
    e = proj.cpog(args.name)
    cf = canonicalize(e) if args.closed else canonical_listing(e)
    out.data = {"name": args.name, "closed": args.closed, **cf.as_dict()}
    out.line(cf.listing())
    return EXIT_OK


def cmd_equiv(args, out: Output) -> int:
    proj = _load(args)
    diffs = differences(proj.cpog(args.a), proj.cpog(args.b))
    if not diffs:
        out.data = {"equivalent": True, "differences": []}
        out.line(f"{args.a} and {args.b} are equivalent")
        return EXIT_OK
    where, fa, fb = diffs[0]
    out.data = {
        "equivalent": False,
        "differences": [{"at": w, "left": str(l), "right": str(r)} for w, l, r in diffs],
    }
    out.line(f"{args.a} and {args.b} differ at {where}: {fa} vs {fb}")
    if args.all:
        for w, l, r in diffs[1:]:
            out.line(f"  also {w}: {l} vs {r}")
    else:
        out.line(f"{len(diffs)} differing conditions")
    return EXIT_FAIL


def cmd_histories(args, out: Output) -> int:
    proj = _load(args)
    e = proj.cpog(args.name)
    cf = transitive_close(canonicalize(e))
    hs = reconfig.enumerate_consistent(e, proj.alphabet if args.full_alphabet else None, args.bound)
    rows = [(h, reconfig.consistency(h, cf)) for h in hs]
    out.data = {"count": len(rows), "histories": [{"history": sorted(h), "condition": str(c)} for h, c in rows]}
    for h, c in rows:
        out.line(f"{_hist(h)}  [{c}]")
    out.line(f"{len(rows)} consistent histories")
    return EXIT_OK


def cmd_safe_reconfig(args, out: Output) -> int:
    proj = _load(args)
    spec = proj.spec(args.spec)
    hs = reconfig.safe_histories(spec, bound=args.bound)
    rows = [(h, reconfig.safety_condition(spec, h)) for h in hs]
    out.data = {"count": len(rows), "histories": [{"history": sorted(h), "condition": str(c)} for h, c in rows]}
    for h, c in rows:
        out.line(f"{_hist(h)}  [{c}]")
    out.line(f"{len(rows)} safe reconfiguration histories")
    if args.history is not None:
        h = frozenset(_names(args.history))
        ok = h in set(hs)
        out.data["query"] = {"history": sorted(h), "safe": ok}
        out.line(f"{_hist(h)} is {'a safe' if ok else 'not a safe'} reconfiguration history")
        return EXIT_OK if ok else EXIT_FAIL
    return EXIT_OK


def cmd_guideline(args, out: Output) -> int:
    proj = _load(args)
    spec = proj.spec(args.spec)
    forbidden = _names(args.forbidden)
    res = reconfig.check_forbidden_guideline(spec, forbidden, bound=args.bound)
    out.data = {
        "forbidden": sorted(forbidden),
        "pass": res.ok,
        "checked": res.checked,
        "counterexample": None if res.counterexample is None else sorted(res.counterexample),
    }
    if res.ok:
        out.line(f"PASS: {res.checked} consistent histories avoid {_hist(forbidden)} and are all safe")
        return EXIT_OK
    out.line(f"FAIL: counterexample {_hist(res.counterexample)}")
    return EXIT_FAIL


def cmd_lts(args, out: Output) -> int:
    proj = _load(args)
    if args.target in proj.specs:
        spec = proj.spec(args.target)
        ctrl = spec.control(proj.control)
        e = reconfig.make_safe(spec, _names(args.forbidden))
    else:
        if args.forbidden:
            raise ProjectError("--forbidden needs a reconfiguration spec as target")
        ctrl, e = proj.control, proj.cpog(args.target)
    lts = cpog_lts.reachable(canonicalize(e), ctrl, args.concurrent, args.bound)
    out.data = {
        "initial": str(lts.initial),
        "states": [str(s) for s in lts.states],
        "transitions": [[str(a), sorted(l), str(b)] for a, l, b in lts.transitions],
        "deadlocks": [str(s) for s in lts.deadlocks],
    }
    out.line(lts.to_dot() if args.dot else lts.to_text())
    return EXIT_OK


# ---------------------------------------------------------------------------
# workflow commands


def _picker(args):
    if args.picker == "first":
        return workflow.first_picker
    if args.picker == "second":
        return workflow.second_picker
    return workflow.SeededPicker(args.seed)


def _interp(proj: Project, args) -> workflow.Interpreter:
    target = proj.workflow(args.target) if getattr(args, "target", None) else workflow.CONFIGURATION2
    return workflow.Interpreter(target=target)


def cmd_simulate(args, out: Output) -> int:
    proj = _load(args)
    w = proj.workflow(args.workflow)
    c = proj.choice_set(args.choices)
    picker = _picker(args)
    interp = _interp(proj, args)
    if args.reconfigure_at is None:
        s = interp.execute(interp.init(w), c, picker)
        out.data = {"trace": list(s.trace)}
        if args.label:
            out.line(f"Test`{args.label}() =")
            out.line(workflow.render_trace(s.trace, indent=2))
        else:
            out.line(workflow.render_trace(s.trace))
        return EXIT_OK
    if args.new is None:
        raise ProjectError("--reconfigure-at needs --new WORKFLOW")
    new = proj.workflow(args.new)
    ok, text = workflow.reconfiguration_report(w, c, args.reconfigure_at, new, picker, interp)
    out.data = {"accepted": ok, "report": text.splitlines()}
    out.line(text)
    if not ok:
        print("Reconfiguration could generate invalid traces; pre-condition will fail.", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _runs(proj: Project, args) -> list[tuple[workflow.RunEvent, ...]]:
    w = proj.workflow(args.workflow)
    if args.all:
        return ltl.annotated_runs(w)
    if args.reconfigured:
        interp = _interp(proj, args)
        return ltl.reconfigured_runs(w, interp.target, interp)
    if args.trace is not None:
        trace = _names(args.trace)
        if not trace or trace[-1] != workflow.TERMINATE:
            trace.append(workflow.TERMINATE)
        return [ltl.run_for_trace(w, trace)]
    c = proj.choice_set(args.choices or "NoProblems")
    new = proj.workflow(args.new) if args.new else None
    interp = _interp(proj, args)
    return [tuple(workflow.run_annotated(w, c, _picker(args), args.reconfigure_at, new, interp))]


def cmd_ltl(args, out: Output) -> int:
    proj = _load(args)
    f = proj.formula(args.formula)
    results = []
    for run in _runs(proj, args):
        ks = ltl.trace_to_kripke(run)
        results.append((run, ltl.check(ks, f)))
    ok = all(r for _, r in results)
    out.data = {
        "formula": str(f),
        "holds": ok,
        "runs": [{"trace": [e.event for e in run], "holds": r} for run, r in results],
    }
    for run, r in results:
        marks = [e.event + ("*" if e.reconfigured else "") for e in run]
        out.line(f"{'holds' if r else 'fails'}: [{', '.join(marks)}]")
    out.line(f"{sum(r for _, r in results)}/{len(results)} runs satisfy the formula")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# process commands


def cmd_bisim(args, out: Output) -> int:
    proj = _load(args)
    env = proj.env
    p, q = proj.process(args.p), proj.process(args.q)
    if args.kind == "strong-of":
        ok = ccsdp.strong_of_bisim(p, q, env)
        out.data = {"kind": args.kind, "bisimilar": ok}
        out.line("bisimilar" if ok else "not bisimilar")
        return EXIT_OK if ok else EXIT_FAIL
    observe = _names(args.observe) if args.observe is not None else None
    res = ccsdp.weak_obs_bisim(p, q, env, observe=observe, depth=args.depth, milner=args.milner)
    wit = res.witness
    out.data = {
        "kind": args.kind,
        "bisimilar": res.bisimilar,
        "method": res.method,
        "witness": None
        if wit is None
        else {"prefix": list(wit.prefix), "label": wit.label, "side": wit.side, "path": list(wit.path)},
    }
    out.line("bisimilar" if res else "not bisimilar")
    if wit is not None:
        out.line(f"witness: {wit}")
    return EXIT_OK if res else EXIT_FAIL


def cmd_elaborate(args, out: Output) -> int:
    proj = _load(args)
    env = proj.env
    p, goal = proj.process(args.p), proj.process(args.goal)
    path = ccsdp.elaborate(p, goal, env, args.max_steps)
    if path is None:
        out.data = {"reached": False}
        out.line(f"no chain of at most {args.max_steps} reconfiguration steps reaches {args.goal}")
        return EXIT_FAIL
    out.data = {"reached": True, "steps": len(path), "states": [str(s.target) for s in path]}
    for i, st in enumerate(path, 1):
        out.line(f"{i}: tau -> {st.target}")
    out.line(f"reached {args.goal} in {len(path)} reconfiguration steps")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--file", help="project file, or the name of a bundled example (default: case_study)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--bound", type=int, default=16, help="largest alphabet enumerated exhaustively")

    ap = argparse.ArgumentParser(prog="wfreconf", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canonicalize", parents=[common], help="canonical form of a CPOG")
    p.add_argument("name")
    p.add_argument("--closed", action="store_true", help="print the transitively closed form")
    p.set_defaults(func=cmd_canonicalize)

    p = sub.add_parser("equiv", parents=[common], help="compare two CPOGs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--all", action="store_true", help="list every differing condition")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("histories", parents=[common], help="consistent histories of a CPOG")
    p.add_argument("name")
    p.add_argument("--full-alphabet", action="store_true", help="enumerate over the declared alphabet")
    p.set_defaults(func=cmd_histories)

    p = sub.add_parser("safe-reconfig", parents=[common], help="safe reconfiguration histories")
    p.add_argument("spec")
    p.add_argument("--history", help="comma separated history to test")
    p.set_defaults(func=cmd_safe_reconfig)

    p = sub.add_parser("guideline-check", parents=[common], help="check a forbidden-action guideline")
    p.add_argument("spec")
    p.add_argument("--forbidden", default="", help="comma separated actions")
    p.set_defaults(func=cmd_guideline)

    p = sub.add_parser("lts", parents=[common], help="LTS of a CPOG or reconfiguration spec")
    p.add_argument("target")
    p.add_argument("--forbidden", default="", help="apply the guideline before exploring")
    p.add_argument("--concurrent", action="store_true", help="action-set steps")
    p.add_argument("--dot", action="store_true")
    p.set_defaults(func=cmd_lts)

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--picker", choices=("first", "second", "seeded"), default="seeded")
    run.add_argument("--reconfigure-at", help="reconfigure right after this action")
    run.add_argument("--new", help="workflow installed by the reconfiguration")
    run.add_argument("--target", help="configuration reconfigured runs must conform to")

    p = sub.add_parser("simulate", parents=[common, run], help="run the workflow interpreter")
    p.add_argument("workflow")
    p.add_argument("--choices", default="NoProblems", help="preset name or A=true,B=false,...")
    p.add_argument("--label", help="print as the result of a named test operation")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ltl", parents=[common, run], help="check an LTL formula on interpreter runs")
    p.add_argument("formula")
    p.add_argument("--workflow", default="Configuration1")
    p.add_argument("--choices")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--trace", help="comma separated events of one run")
    g.add_argument("--all", action="store_true", help="every run of the workflow")
    g.add_argument("--reconfigured", action="store_true", help="every accepted reconfigured run")
    p.set_defaults(func=cmd_ltl)

    proc = argparse.ArgumentParser(add_help=False)
    proc.add_argument("--orders", help="comma separated order identifiers")
    proc.add_argument("--state-bound", type=int, help="state bound for process exploration")

    p = sub.add_parser("bisim", parents=[common, proc], help="compare two processes")
    p.add_argument("kind", choices=("strong-of", "weak"))
    p.add_argument("p")
    p.add_argument("q")
    p.add_argument("--observe", help="visible labels a test context offers, e.g. Receipt_o,'RejectIC_o")
    p.add_argument("--depth", type=int, default=4, help="visible steps searched for a witness")
    p.add_argument("--milner", action="store_true", help="also match tau-only moves")
    p.set_defaults(func=cmd_bisim)

    p = sub.add_parser("elaborate", parents=[common, proc], help="reconfiguration steps towards a process")
    p.add_argument("p")
    p.add_argument("goal")
    p.add_argument("--max-steps", type=int, default=8)
    p.set_defaults(func=cmd_elaborate)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    out = Output(args.format)
    try:
        code = args.func(args, out)
    except _BOUND_ERRORS as err:
        print(f"error: bound exceeded: {err}", file=sys.stderr)
        return EXIT_BOUND
    except _USAGE_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    out.emit()
    return code


if __name__ == "__main__":
    sys.exit(main())
