"""Sectioned project files tying the three engines to one alphabet.

A file is a sequence of ``[section]`` headers, each followed by lines.  ``#``
starts a comment and indented lines continue the previous line.  Sections:

``alphabet``, ``variables``
    whitespace or comma separated names
``control``
    ``x1 = InventoryCheck``
``cpog``
    ``name = expr`` (``let name = expr`` is accepted too)
``reconfig``
    ``S = r r_done from to`` builds ``r + [!r_done] from + [r_done] to``
``process``
    CCS^dp definitions, passed through verbatim
``workflow``
    ``Name = simple(A, ...)``
``choices``
    ``Name = InventoryCheck=true, CreditCheck=false, SupplierCheck=true``
``formulas``
    ``Name = G !rj``
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import ccsdp, ltl, workflow
from .cpog import ControlMap, CpogError, CpogExpr, CpogParser
from .reconfig import ReconfigSpec

SECTIONS = ("alphabet", "variables", "control", "cpog", "reconfig", "process", "workflow", "choices", "formulas")

_HEADER = re.compile(r"^\[([a-z]+)\]\s*$")
_ASSIGN = re.compile(r"^(?:let\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*=(.*)$", re.S)


class ProjectError(ValueError):
    """Malformed project file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None) -> None:
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class UnknownName(ProjectError):
    pass


@dataclass
class Project:
    alphabet: list[str] | None = None
    variables: list[str] | None = None
    control: ControlMap = field(default_factory=ControlMap)
    cpogs: dict[str, CpogExpr] = field(default_factory=dict)
    specs: dict[str, ReconfigSpec] = field(default_factory=dict)
    env: ccsdp.DefEnv | None = None
    workflows: dict[str, workflow.Workflow] = field(default_factory=dict)
    choices: dict[str, dict[str, bool]] = field(default_factory=dict)
    formulas: dict[str, ltl.Formula] = field(default_factory=dict)
    process_text: str = ""

    def cpog(self, name: str) -> CpogExpr:
        """A named expression, or an inline expression over the declared names."""
        if name in self.cpogs:
            return self.cpogs[name]
        try:
            return self.cpog_parser().parse(name)
        except CpogError as err:
            raise UnknownName(f"unknown cpog {name!r} ({err})") from None

    def cpog_parser(self) -> CpogParser:
        return CpogParser(self.control, self.alphabet, self.variables, self.cpogs)

    def spec(self, name: str) -> ReconfigSpec:
        try:
            return self.specs[name]
        except KeyError:
            raise UnknownName(f"unknown reconfiguration spec {name!r}") from None

    def workflow(self, name: str) -> workflow.Workflow:
        if name in self.workflows:
            return self.workflows[name]
        builtin = {"Configuration1": workflow.CONFIGURATION1, "Configuration2": workflow.CONFIGURATION2}
        if name in builtin:
            return builtin[name]
        try:
            return workflow.parse_workflow(name, self.workflows)
        except workflow.WorkflowError as err:
            raise UnknownName(f"unknown workflow {name!r} ({err})") from None

    def choice_set(self, name: str) -> dict[str, bool]:
        if name in self.choices:
            return self.choices[name]
        if name in workflow.CHOICE_PRESETS:
            return dict(workflow.CHOICE_PRESETS[name])
        return parse_choices(name)

    def formula(self, text: str) -> ltl.Formula:
        return ltl.parse_formula(text, self.formulas)

    def process(self, text: str) -> ccsdp.Term:
        if self.env is None:
            raise UnknownName("the project has no [process] section")
        return ccsdp.parse_in(self.env, text)


def parse_choices(text: str) -> dict[str, bool]:
    """``A=true,B=false,...`` with every choice action given exactly once."""
    out: dict[str, bool] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, val = part.partition("=")
        key, val = key.strip(), val.strip().lower()
        if not sep or val not in ("true", "false", "1", "0"):
            raise ProjectError(f"bad choice {part!r}; expected Action=true|false")
        if key in out:
            raise ProjectError(f"choice {key!r} given twice")
        out[key] = val in ("true", "1")
    try:
        return workflow.make_choices(out)
    except workflow.WorkflowError as err:
        raise ProjectError(str(err)) from None


def _split_names(text: str) -> list[str]:
    return [n for n in re.split(r"[\s,]+", text) if n]


def _logical(lines: list[tuple[int, str]]) -> list[tuple[int, str]]:
    out: list[tuple[int, str]] = []
    for no, raw in lines:
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line[0].isspace() and out:
            out[-1] = (out[-1][0], out[-1][1] + " " + line.strip())
        else:
            out.append((no, line.strip()))
    return out


def _assignments(lines: list[tuple[int, str]], section: str) -> list[tuple[int, str, str]]:
    out = []
    for no, line in _logical(lines):
        m = _ASSIGN.match(line)
        if not m:
            raise ProjectError(f"expected 'name = ...' in [{section}]", no)
        out.append((no, m.group(1), m.group(2).strip()))
    return out


def parse_project(text: str, orders: list[str] | None = None, bound: int | None = None) -> Project:
    sections: dict[str, list[tuple[int, str]]] = {}
    current: str | None = None
    for no, raw in enumerate(text.splitlines(), 1):
        m = _HEADER.match(raw.strip()) if not raw[:1].isspace() else None
        if m:
            current = m.group(1)
            if current not in SECTIONS:
                raise ProjectError(f"unknown section [{current}]", no)
            if current in sections:
                raise ProjectError(f"section [{current}] appears twice", no)
            sections[current] = []
            continue
        if current is None:
            if raw.split("#", 1)[0].strip():
                raise ProjectError("content before the first section header", no)
            continue
        sections[current].append((no, raw))

    proj = Project()
    if "alphabet" in sections:
        proj.alphabet = [n for _, l in _logical(sections["alphabet"]) for n in _split_names(l)]
    if "variables" in sections:
        proj.variables = [n for _, l in _logical(sections["variables"]) for n in _split_names(l)]

    ctrl = ControlMap()
    for no, x, a in _assignments(sections.get("control", []), "control"):
        if proj.alphabet is not None and a not in proj.alphabet:
            raise UnknownName(f"control action {a!r} is not in the alphabet", no)
        try:
            ctrl = ctrl.with_control(x, a)
        except CpogError as err:
            raise ProjectError(str(err), no) from None
    proj.control = ctrl

    parser = CpogParser(ctrl, proj.alphabet, proj.variables)
    for no, name, body in _assignments(sections.get("cpog", []), "cpog"):
        try:
            parser.define(name, body)
        except (CpogError, ValueError) as err:
            raise ProjectError(str(err), no) from None
    proj.cpogs = dict(parser.bindings)

    for no, name, body in _assignments(sections.get("reconfig", []), "reconfig"):
        parts = body.split()
        if len(parts) != 4:
            raise ProjectError("expected 'S = r flag from to'", no)
        r, flag, src, dst = parts
        for ref in (src, dst):
            if ref not in proj.cpogs:
                raise UnknownName(f"unknown cpog {ref!r}", no)
        proj.specs[name] = ReconfigSpec(r, flag, proj.cpogs[src], proj.cpogs[dst])

    if "process" in sections:
        proj.process_text = "\n".join(raw for _, raw in sections["process"])
        kwargs = {} if bound is None else {"bound": bound}
        try:
            proj.env = ccsdp.parse_definitions(proj.process_text, orders, **kwargs)
        except ccsdp.CcsError as err:
            raise ProjectError(f"[process]: {err}") from None

    for no, name, body in _assignments(sections.get("workflow", []), "workflow"):
        try:
            proj.workflows[name] = workflow.parse_workflow(body, proj.workflows)
        except workflow.WorkflowError as err:
            raise ProjectError(str(err), no) from None

    for no, name, body in _assignments(sections.get("choices", []), "choices"):
        try:
            proj.choices[name] = parse_choices(body)
        except ProjectError as err:
            raise ProjectError(str(err), no) from None

    for no, name, body in _assignments(sections.get("formulas", []), "formulas"):
        try:
            proj.formulas[name] = ltl.parse_formula(body, proj.formulas)
        except ltl.LtlError as err:
            raise ProjectError(str(err), no) from None
    return proj


def load_project(path: str | Path, **kwargs) -> Project:
    return parse_project(Path(path).read_text(), **kwargs)


def bundled(name: str) -> str:
    """Text of a project file shipped with the package."""
    return resources.files("wfreconf").joinpath("data", name).read_text()


def bundled_names() -> list[str]:
    return sorted(p.name for p in resources.files("wfreconf").joinpath("data").iterdir() if p.name.endswith(".wfr"))
