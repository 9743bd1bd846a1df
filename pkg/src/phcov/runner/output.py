"""CSV emission for trajectories and power ledgers (17 significant digits)."""

import csv

from .integrators import Trajectory

LEDGER_COLUMNS = ["t", "horizontal", "dissipation", "supplied", "total", "fd_total", "residual"]


def _fmt(v):
    return format(float(v), ".17g")


def trajectory_columns(traj: Trajectory):
    n = traj.states.shape[1]
    m_in = traj.inputs.shape[1]
    m_out = traj.outputs.shape[1]
    return (["t"] + [f"x_{k + 1}" for k in range(n)] + [f"u_{k + 1}" for k in range(m_in)]
            + [f"y_{k + 1}" for k in range(m_out)])


def write_trajectory_csv(traj: Trajectory, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trajectory_columns(traj))
        for t, x, u, y in zip(traj.times, traj.states, traj.inputs, traj.outputs):
            w.writerow([_fmt(t)] + [_fmt(v) for v in x] + [_fmt(v) for v in u] + [_fmt(v) for v in y])


def write_ledger_csv(traj: Trajectory, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LEDGER_COLUMNS)
        for row in traj.ledger_table():
            w.writerow([_fmt(v) for v in row])
