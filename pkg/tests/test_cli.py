import subprocess
import sys

import pytest

from phcov.cli import main

FAST = {
    "damped-oscillator": "[scenario]\nname = damped-oscillator\n[integrator]\ndt = 1e-3\nt1 = 2\n",
    "tracking-demo": "[scenario]\nname = tracking-demo\n[integrator]\ndt = 1e-3\n",
    "controlled-rotating": "[scenario]\nname = controlled-rotating\n[integrator]\ndt = 1e-3\nt1 = 2\n",
    "rotating-frame": "[scenario]\nname = rotating-frame\n[integrator]\ndt = 1e-3\nt1 = 1\n",
}


def _write(tmp_path, name, text):
    path = tmp_path / f"{name}.ini"
    path.write_text(text)
    return path


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in FAST:
        assert name in out


@pytest.mark.parametrize("name", sorted(FAST))
def test_builtin_run_writes_csv(tmp_path, name, capsys):
    path = _write(tmp_path, name, FAST[name])
    assert main(["run", str(path), "--out-dir", str(tmp_path / "out")]) == 0
    traj = (tmp_path / "out" / f"{name}_trajectory.csv").read_text().splitlines()
    ledger = (tmp_path / "out" / f"{name}_ledger.csv").read_text().splitlines()
    assert traj[0].startswith("t,") and ledger[0] == "t,horizontal,dissipation,supplied,total,fd_total,residual"
    assert len(traj) == len(ledger) > 100
    assert "[PASS]" in capsys.readouterr().out


def test_csv_bit_identical(tmp_path):
    path = _write(tmp_path, "d", FAST["controlled-rotating"])
    outs = []
    for k in range(2):
        assert main(["run", str(path), "--out-dir", str(tmp_path / f"o{k}")]) == 0
        outs.append([(tmp_path / f"o{k}" / f"controlled-rotating_{s}.csv").read_bytes()
                     for s in ("trajectory", "ledger")])
    assert outs[0] == outs[1]


def test_missing_dt_exit_2(tmp_path, capsys):
    path = _write(tmp_path, "bad", "[scenario]\nname = rotating-frame\n[integrator]\nmethod = rk4\n")
    assert main(["run", str(path), "--out-dir", str(tmp_path)]) == 2
    assert "missing key 'dt' in section [integrator]" in capsys.readouterr().out
    assert not list(tmp_path.glob("*.csv"))


def test_missing_file_and_bad_args(tmp_path, capsys):
    assert main(["check", str(tmp_path / "none.ini")]) == 2
    assert main(["run", "x.ini", "--method", "euler"]) == 2
    assert main([]) == 2


def test_dt_override(tmp_path, capsys):
    path = _write(tmp_path, "d", FAST["damped-oscillator"])
    assert main(["check", str(path), "--dt", "0.002", "--method", "midpoint"]) == 0
    assert "implicit-midpoint, dt=0.002" in capsys.readouterr().out


def test_custom_scenario(tmp_path):
    text = """
[system]
n = 2
m = 1
J = 0 1, -1 0
R = 0 0, 0 0.5
G = 0 1
Q = 2 0, 0 1
[integrator]
method = rk4
dt = 0.001
t0 = 0
t1 = 3
[initial]
x = 1 0
[input]
kind = constant
value = 0.2
"""
    path = _write(tmp_path, "custom", text)
    assert main(["run", str(path), "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "custom_trajectory.csv").exists()


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numerical_failure_exit_3(tmp_path, capsys):
    text = """
[system]
n = 1
m = 0
J = 0
R = -1000
Q = 1
[integrator]
method = rk4
dt = 0.1
t0 = 0
t1 = 100
[initial]
x = 1
"""
    path = _write(tmp_path, "blow", text)
    assert main(["check", str(path)]) == 3
    assert "numerical failure" in capsys.readouterr().out


def test_failed_check_exit_1(tmp_path):
    # negative dissipation integrates fine but violates R >= 0
    text = """
[system]
n = 2
m = 0
J = 0 1, -1 0
R = 0 0, 0 -0.1
Q = 1 0, 0 1
[integrator]
method = rk4
dt = 0.01
t0 = 0
t1 = 1
[initial]
x = 1 0
"""
    assert main(["check", str(_write(tmp_path, "neg", text))]) == 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "phcov.cli", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "rotating-frame" in proc.stdout


def test_shipped_scenario_files_parse():
    from pathlib import Path
    from phcov.runner.scenario_file import load_scenario
    files = sorted((Path(__file__).parent.parent / "scenarios").glob("*.ini"))
    assert len(files) >= 5
    for path in files:
        assert load_scenario(path).config.dt == 1e-3
