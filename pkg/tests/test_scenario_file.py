import numpy as np
import pytest

from phcov.runner import execute
from phcov.runner.scenario_file import ScenarioError, parse_scenario

ROT = """
[scenario]
name = rotating-frame
[integrator]
dt = 1e-3
"""

CUSTOM = """
[system]
n = 2
m = 1
J = 0 1, -1 0
R = 0 0, 0 0.5
G = 0 1
Q = 1 0, 0 1
[connection]
c0 = 0.1 0
c1 = 0 -0.2
[integrator]
method = rk4
dt = 0.01
t0 = 0
t1 = 1
[initial]
x = 1 0
[input]
kind = sinusoid
amplitude = 1
frequency = 2
"""


def test_builtin_defaults_filled_in():
    scn = parse_scenario(ROT)
    assert scn.config.method == "implicit-midpoint"
    assert scn.config.t_span == (0.0, 10.0)
    assert scn.params["omega"] == 0.5 and scn.params["p0"] == (1.0, 0.0)


def test_overrides():
    scn = parse_scenario(ROT + "[parameters]\nomega = 0.25\np0 = 2 0\n", dt=0.01, method="rk4")
    assert scn.config.dt == 0.01 and scn.config.method == "explicit-rk4"
    assert scn.params["omega"] == 0.25 and scn.params["p0"] == (2.0, 0.0)


def test_custom_parsed():
    scn = parse_scenario(CUSTOM)
    assert scn.name == "custom" and scn.system["n"] == 2
    assert np.array_equal(scn.connection["c1"], [0.0, -0.2])
    assert scn.input.input_dim == 1
    res = execute(scn)
    assert res.passed, [str(c) for c in res.checks]


@pytest.mark.parametrize("text,key", [
    ("[scenario]\nname = rotating-frame\n[integrator]\nmethod = rk4\n", "dt"),
    (CUSTOM.replace("t1 = 1\n", ""), "t1"),
    (CUSTOM.replace("method = rk4\n", ""), "method"),
    (CUSTOM.replace("Q = 1 0, 0 1\n", ""), "Q"),
    (CUSTOM.replace("[initial]\nx = 1 0\n", "[initial]\n"), "x"),
    (CUSTOM.replace("amplitude = 1\n", ""), "amplitude"),
])
def test_missing_keys_are_named(text, key):
    with pytest.raises(ScenarioError, match=f"missing key '{key}'"):
        parse_scenario(text)


@pytest.mark.parametrize("text,fragment", [
    (ROT + "[bogus]\na = 1\n", "unknown section"),
    (ROT.replace("rotating-frame", "nope"), "unknown scenario"),
    (ROT + "[parameters]\nspin = 2\n", "unknown parameter 'spin'"),
    (ROT.replace("dt = 1e-3", "dt = fast"), "'dt' is not a valid float"),
    (ROT.replace("dt = 1e-3", "dt = -1"), "dt must be positive"),
    (CUSTOM.replace("J = 0 1, -1 0", "J = 0 1 -1"), "[system] J: expected 4 values"),
    (CUSTOM.replace("Q = 1 0, 0 1", "Q = 1 1, 0 1"), "symmetric"),
    (CUSTOM.replace("x = 1 0", "x = 1 0 3"), "[initial] x: expected 2"),
    (CUSTOM.replace("kind = sinusoid", "kind = square"), "kind must be"),
    ("[integrator]\ndt = 1\n", "need [scenario] name"),
    ("this is not ini", "<string>"),
])
def test_malformed_input(text, fragment):
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert fragment in str(exc.value)


def test_builtin_consistency_errors():
    with pytest.raises(ScenarioError, match="no inputs"):
        execute(parse_scenario(ROT + "[input]\nkind = constant\nvalue = 1\n"))
    with pytest.raises(ScenarioError, match="expected 4 values"):
        execute(parse_scenario(ROT + "[initial]\nx = 1 2\n"))
