"""Integration, builtin scenarios and scenario-file execution."""

from pathlib import Path

import numpy as np

from .integrators import (IntegrationError, IntegratorConfig, NewtonDivergence, Trajectory,
                          integrate)
from .output import write_ledger_csv, write_trajectory_csv
from .scenario_file import Scenario, ScenarioError, load_scenario, parse_scenario
from .scenarios import (BUILTINS, Check, FrameEquivalenceReport, RotatingFrameSpec,
                        ScenarioResult, coriolis_residual, custom_system,
                        frame_equivalence_check, rotating_frame_scenario, run_custom)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


def execute(scn: Scenario) -> ScenarioResult:
    """Run a parsed scenario; raises :class:`ScenarioError` on inconsistent input."""
    if scn.is_builtin:
        builtin = BUILTINS[scn.name]
        if scn.initial is not None:
            n = 2 if scn.name in ("tracking-demo", "damped-oscillator") else 4
            if scn.initial.size != n:
                raise ScenarioError(f"[initial] x: expected {n} values, got {scn.initial.size}")
        if scn.input is not None and scn.name == "rotating-frame":
            raise ScenarioError("rotating-frame has no inputs; remove the [input] section")
        if scn.input is not None and scn.input.input_dim != 1:
            raise ScenarioError(f"{scn.name} takes 1 input, [input] gives {scn.input.input_dim}")
        return builtin.runner(scn.params, scn.config, scn.initial, scn.input)
    try:
        sys = custom_system(scn.system, scn.connection)
    except ValueError as exc:
        raise ScenarioError(f"[system]: {exc}") from None
    m = scn.system["m"]
    if scn.input is not None and scn.input.input_dim != m:
        raise ScenarioError(f"[input] gives {scn.input.input_dim} components, system has m={m}")
    return run_custom(sys, scn.config, scn.initial, scn.input)


def run_scenario(path, out_dir=None, dt=None, method=None, write=True, echo=print):
    """Execute a scenario file; returns ``(exit_code, result_or_None)``.

    Writes ``<name>_trajectory.csv`` and ``<name>_ledger.csv`` into
    ``out_dir`` (default: current directory) unless ``write`` is false.
    """
    try:
        scn = load_scenario(path, dt, method)
        result = execute(scn)
    except ScenarioError as exc:
        echo(f"error: {exc}")
        return EXIT_INPUT_ERROR, None
    except (IntegrationError, np.linalg.LinAlgError, ArithmeticError) as exc:
        echo(f"numerical failure: {exc}")
        return EXIT_NUMERICAL_FAILURE, None

    echo(f"scenario {result.name}: {result.config.method}, dt={result.config.dt:g}, "
         f"t in [{result.config.t_span[0]:g}, {result.config.t_span[1]:g}], {len(result.trajectory)} samples")
    for note in result.notes:
        echo(f"  note: {note}")
    for check in result.checks:
        echo(f"  {check}")
    if write:
        out = Path(out_dir) if out_dir is not None else Path.cwd()
        out.mkdir(parents=True, exist_ok=True)
        tpath = out / f"{result.name}_trajectory.csv"
        lpath = out / f"{result.name}_ledger.csv"
        write_trajectory_csv(result.trajectory, tpath)
        write_ledger_csv(result.trajectory, lpath)
        echo(f"  wrote {tpath} and {lpath}")
    return (EXIT_OK if result.passed else EXIT_CHECK_FAILED), result


__all__ = [
    "BUILTINS", "Check", "FrameEquivalenceReport", "IntegrationError", "IntegratorConfig",
    "NewtonDivergence", "RotatingFrameSpec", "Scenario", "ScenarioError", "ScenarioResult",
    "Trajectory", "coriolis_residual", "execute", "frame_equivalence_check", "integrate",
    "load_scenario", "parse_scenario", "rotating_frame_scenario", "run_scenario",
]
