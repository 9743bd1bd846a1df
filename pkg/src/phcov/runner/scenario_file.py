"""Scenario files: INI-style key/value documents with one level of sections.

Example::

    [scenario]
    name = rotating-frame

    [integrator]
    method = midpoint
    dt = 1e-3
    t0 = 0
    t1 = 10

    [parameters]
    omega = 0.5

A user-defined system replaces ``[scenario]`` by ``[system]`` (``n``,
``m``, row-major ``J``, ``R``, ``G``, ``Q`` and optional ``b``) plus
optional ``[connection]`` (``c0``, ``c1`` for ``Gamma = c0 + c1 t``).
``[initial]`` holds ``x``; ``[input]`` has ``kind = zero | constant |
sinusoid`` with ``value`` or ``amplitude``, ``frequency``, ``phase``,
``offset``.  Vectors and matrices are whitespace- or comma-separated.
"""

import configparser
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..systems import InputSignal
from .integrators import IntegratorConfig, canonical_method
from .scenarios import BUILTINS

SECTIONS = {"scenario", "integrator", "parameters", "system", "connection", "initial", "input"}


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario file."""


@dataclass
class Scenario:
    name: str
    config: IntegratorConfig
    params: dict = field(default_factory=dict)
    system: Optional[dict] = None
    connection: dict = field(default_factory=dict)
    initial: Optional[np.ndarray] = None
    input: Optional[InputSignal] = None
    source: str = "<string>"

    @property
    def is_builtin(self):
        return self.name in BUILTINS


def _numbers(text, where):
    parts = [p for p in re.split(r"[\s,]+", text.strip()) if p]
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ScenarioError(f"{where}: expected numbers, got {text!r}") from None


def _scalar(section, key, where, cast=float):
    try:
        return cast(section[key])
    except ValueError:
        raise ScenarioError(f"{where}: key {key!r} is not a valid {cast.__name__}: {section[key]!r}") from None


def _require(parser, sect, key):
    if not parser.has_option(sect, key):
        raise ScenarioError(f"missing key {key!r} in section [{sect}]")
    return parser[sect][key]


def parse_scenario(text, source="<string>", dt=None, method=None) -> Scenario:
    """Parse scenario text; ``dt`` and ``method`` override the file values."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError(f"{source}: {exc}") from None

    unknown = set(parser.sections()) - SECTIONS
    if unknown:
        raise ScenarioError(f"{source}: unknown section(s) {sorted(unknown)}")

    if parser.has_option("scenario", "name"):
        name = parser["scenario"]["name"].strip()
        if name != "custom" and name not in BUILTINS:
            raise ScenarioError(f"unknown scenario {name!r}; builtins: {', '.join(BUILTINS)}")
    elif parser.has_section("system"):
        name = "custom"
    else:
        raise ScenarioError(f"{source}: need [scenario] name or a [system] block")

    if not parser.has_section("integrator"):
        raise ScenarioError("missing section [integrator]")
    integ = parser["integrator"]
    if dt is None:
        _require(parser, "integrator", "dt")
        dt = _scalar(integ, "dt", "[integrator]")
    builtin = BUILTINS.get(name)
    default_method = builtin.method if builtin else None
    default_span = builtin.t_span if builtin else (None, None)
    if method is None:
        method = integ.get("method", default_method)
        if method is None:
            raise ScenarioError("missing key 'method' in section [integrator]")
    t_span = []
    for key, default in zip(("t0", "t1"), default_span):
        if key in integ:
            t_span.append(_scalar(integ, key, "[integrator]"))
        elif default is None:
            raise ScenarioError(f"missing key {key!r} in section [integrator]")
        else:
            t_span.append(default)
    try:
        cfg = IntegratorConfig(canonical_method(method.strip()), dt, tuple(t_span),
                               _scalar(integ, "newton_tol", "[integrator]") if "newton_tol" in integ else 1e-12,
                               _scalar(integ, "newton_max_iter", "[integrator]", int)
                               if "newton_max_iter" in integ else 50)
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"[integrator]: {exc}") from None

    scn = Scenario(name, cfg, source=source)
    if parser.has_section("parameters"):
        if not builtin:
            raise ScenarioError("[parameters] only applies to builtin scenarios")
        for key, raw in parser["parameters"].items():
            if key not in builtin.defaults:
                raise ScenarioError(f"unknown parameter {key!r} for {name}; "
                                    f"known: {', '.join(builtin.defaults)}")
            vals = _numbers(raw, f"[parameters] {key}")
            scn.params[key] = tuple(vals) if np.ndim(builtin.defaults[key]) else float(vals[0])
    if builtin:
        scn.params = {**builtin.defaults, **scn.params}

    if name == "custom":
        scn.system = _system_block(parser)
        if parser.has_section("connection"):
            n = scn.system["n"]
            for key, raw in parser["connection"].items():
                if key not in ("c0", "c1"):
                    raise ScenarioError(f"unknown key {key!r} in section [connection]")
                vals = _numbers(raw, f"[connection] {key}")
                if vals.size != n:
                    raise ScenarioError(f"[connection] {key}: expected {n} values, got {vals.size}")
                scn.connection[key] = vals

    if parser.has_section("initial"):
        scn.initial = _numbers(_require(parser, "initial", "x"), "[initial] x")
    elif name == "custom":
        raise ScenarioError("missing section [initial]")
    if name == "custom" and scn.initial.size != scn.system["n"]:
        raise ScenarioError(f"[initial] x: expected {scn.system['n']} values, got {scn.initial.size}")

    if parser.has_section("input"):
        scn.input = _input_block(parser)
    return scn


def _system_block(parser):
    sect = "system"
    block = {}
    for key in ("n", "m"):
        block[key] = _scalar(parser[sect], key, "[system]", int) if parser.has_option(sect, key) \
            else _require(parser, sect, key)
    n, m = block["n"], block["m"]
    if n < 1 or m < 0:
        raise ScenarioError(f"[system]: need n >= 1 and m >= 0, got n={n}, m={m}")
    sizes = {"J": n * n, "R": n * n, "G": n * m, "Q": n * n}
    for key, size in sizes.items():
        if key == "G" and m == 0 and not parser.has_option(sect, key):
            block[key] = np.zeros(0)
            continue
        vals = _numbers(_require(parser, sect, key), f"[system] {key}")
        if vals.size != size:
            raise ScenarioError(f"[system] {key}: expected {size} values, got {vals.size}")
        block[key] = vals
    if parser.has_option(sect, "b"):
        b = _numbers(parser[sect]["b"], "[system] b")
        if b.size != n:
            raise ScenarioError(f"[system] b: expected {n} values, got {b.size}")
        block["b"] = b
    Q = block["Q"].reshape(n, n)
    if np.max(np.abs(Q - Q.T), initial=0.0) > 1e-12:
        raise ScenarioError("[system] Q must be symmetric")
    return block


def _input_block(parser):
    sect = parser["input"]
    kind = sect.get("kind", "constant").strip()
    if kind == "zero":
        return None
    if kind == "constant":
        return InputSignal.constant(_numbers(_require(parser, "input", "value"), "[input] value"))
    if kind == "sinusoid":
        args = {}
        for key, default in (("amplitude", None), ("frequency", None), ("phase", "0"), ("offset", "0")):
            raw = sect.get(key, default)
            if raw is None:
                raise ScenarioError(f"missing key {key!r} in section [input]")
            args[key] = _numbers(raw, f"[input] {key}")
        try:
            return InputSignal.sinusoid(**args)
        except ValueError as exc:
            raise ScenarioError(f"[input]: {exc}") from None
    raise ScenarioError(f"[input] kind must be zero, constant or sinusoid, got {kind!r}")


def load_scenario(path, dt=None, method=None) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text, str(path), dt, method)
