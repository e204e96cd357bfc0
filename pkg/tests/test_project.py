import pytest

from wfreconf.cpog import canonicalize
from wfreconf.ltl import Atom, Globally, Not
from wfreconf.project import ProjectError, UnknownName, bundled, bundled_names, parse_choices, parse_project
from wfreconf.workflow import CONFIGURATION1, CONFIGURATION2

MINI = """
# comment line
[alphabet]
a b, c
[variables]
x
[control]
x = a
[cpog]
let P = a -yes-> b
Q = P
  + c
[reconfig]
S = c x P Q
[workflow]
W = simple(Reject, end)
[choices]
C = InventoryCheck=1, SupplierCheck=0, CreditCheck=true
[formulas]
F = G !rj
"""


def test_mini_project():
    proj = parse_project(MINI)
    assert proj.alphabet == ["a", "b", "c"]
    assert proj.control.controlled_by("a") == ["x"]
    assert set(canonicalize(proj.cpog("Q")).vertices) == {"a", "b", "c"}
    assert proj.spec("S").r == "c"
    assert proj.choice_set("C") == {"CreditCheck": True, "InventoryCheck": True, "SupplierCheck": False}
    assert proj.formula("F") == Globally(Not(Atom("rj")))
    assert proj.env is None


def test_inline_expressions():
    proj = parse_project(MINI)
    assert set(canonicalize(proj.cpog("a -> c")).arcs) == {("a", "c")}
    with pytest.raises(UnknownName):
        proj.cpog("a -> nope")
    with pytest.raises(UnknownName):
        proj.spec("T")
    with pytest.raises(UnknownName):
        proj.process("0")


def test_case_study(case):
    assert set(case.cpogs) == {"c1", "cc", "c2"}
    assert set(case.specs) == {"S", "Srev"}
    assert case.workflow("Config1") == CONFIGURATION1
    assert case.workflow("Config2") == CONFIGURATION2
    assert case.workflow("Configuration2") is CONFIGURATION2
    assert case.env.orders == ("o",)


@pytest.mark.parametrize(
    "text, line",
    [
        ("a b", 1),
        ("[alphabet]\na\n[nope]", 3),
        ("[alphabet]\na\n[alphabet]\nb", 3),
        ("[cpog]\nP a", 2),
        ("[alphabet]\na\n[control]\nx = b", 4),
        ("[cpog]\nP = a ->", 2),
        ("[cpog]\nP = a\n[reconfig]\nS = r x P", 4),
        ("[cpog]\nP = a\n[reconfig]\nS = r x P Q", 4),
        ("[workflow]\nW = simple(Nope, end)", 2),
        ("[formulas]\nF = G", 2),
    ],
)
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ProjectError) as err:
        parse_project(text)
    assert err.value.line == line


def test_process_errors_are_project_errors():
    with pytest.raises(ProjectError):
        parse_project("[process]\nX := [a.0 /")


def test_parse_choices():
    with pytest.raises(ProjectError):
        parse_choices("InventoryCheck=yes")
    with pytest.raises(ProjectError):
        parse_choices("InventoryCheck=1,InventoryCheck=0,CreditCheck=1,SupplierCheck=1")
    with pytest.raises(ProjectError):
        parse_choices("InventoryCheck=1")


@pytest.mark.parametrize("name", bundled_names())
def test_bundled_files_load(name):
    parse_project(bundled(name))


def test_bundled_set():
    assert {"case_study.wfr", "shared_vertices.wfr", "choice_timing.wfr", "three_actions.wfr"} <= set(bundled_names())
