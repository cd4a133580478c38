import csv
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from minmove.cli import EXIT_CHECK, EXIT_INPUT, EXIT_OK, main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL_RUN = """
[problem]
isotherm = freundlich-transport
p = 1/3
m_components = 2
a = -1
b = 1
T = 0.1
dx = 0.05
dt = 0.02

[initial]
kind = bump
bumps_1 = -0.3:0.3:1.0
bumps_2 = 0.3:0.3:0.5

[output]
snapshot_stride = 1
"""

SMALL_CONVERGE = """
[problem]
a = -2
b = 2
T = 0.2

[initial]
kind = zkb
C = 0.2
t0 = 0.25

[converge]
dx_sweep = 0.08, 0.04
pme_exponents = 2
dt_over_dx = 2
"""


def write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_outputs(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, SMALL_RUN)), "--out", str(out), "--quiet"]) == EXIT_OK
    for name in ("snapshots.csv", "diagnostics.csv", "report.txt", "effective.ini"):
        assert (out / name).exists()
    rows = read_rows(out / "snapshots.csv")
    assert set(rows[0]) == {"t", "x", "u_1", "u_2"}
    assert len(rows) == 6 * 41
    assert "energy audit: PASS" in (out / "report.txt").read_text()
    diag = read_rows(out / "diagnostics.csv")
    assert [int(r["step"]) for r in diag] == list(range(6))


def test_zero_initial_condition_snapshots(tmp_path):
    text = SMALL_RUN.replace("kind = bump", "kind = zero")
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, text)), "--out", str(out), "--quiet"]) == EXIT_OK
    rows = read_rows(out / "snapshots.csv")
    assert all(float(r["u_1"]) == 0.0 and float(r["u_2"]) == 0.0 for r in rows)


def test_rerun_from_effective_config_is_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(write(tmp_path, SMALL_RUN)), "--out", str(a), "--quiet"]) == EXIT_OK
    assert main(["run", str(a / "effective.ini"), "--out", str(b), "--quiet"]) == EXIT_OK
    assert (a / "snapshots.csv").read_bytes() == (b / "snapshots.csv").read_bytes()
    assert (a / "effective.ini").read_text() == (b / "effective.ini").read_text()


def test_file_initial_condition(tmp_path):
    x = np.linspace(-1, 1, 41)
    u = np.maximum(0, 1 - (x / 0.3) ** 2)
    np.savetxt(tmp_path / "ic.csv", np.column_stack([x, u, 0.5 * u]), delimiter=",",
               header="x,u_1,u_2", comments="")
    text = SMALL_RUN.replace("kind = bump", "kind = file\npath = ic.csv")
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, text)), "--out", str(out), "--quiet"]) == EXIT_OK
    rows = [r for r in read_rows(out / "snapshots.csv") if float(r["t"]) == 0.0]
    np.testing.assert_allclose([float(r["u_1"]) for r in rows], u)


@pytest.mark.parametrize("mutation", [
    ("dx = 0.05", "dx = 0.03"),          # does not divide the interval
    ("p = 1/3", "p = 1.5"),              # outside (0, 1)
    ("kind = bump", "kind = spline"),
    ("bumps_1 = -0.3:0.3:1.0", "bumps_1 = -0.3:0.3"),
    ("bumps_1 = -0.3:0.3:1.0", "bumps_1 = -1.0:0.3:1.0"),  # nonzero at the boundary
])
def test_invalid_run_configs(tmp_path, mutation):
    text = SMALL_RUN.replace(*mutation)
    assert main(["run", str(write(tmp_path, text)), "--out", str(tmp_path / "o"),
                 "--quiet"]) == EXIT_INPUT


def test_missing_config_file(tmp_path):
    assert main(["run", str(tmp_path / "nope.ini"), "--quiet"]) == EXIT_INPUT


def test_bad_arguments():
    assert main(["frobnicate"]) == EXIT_INPUT


def test_converge_small_sweep(tmp_path):
    out = tmp_path / "out"
    cfg = write(tmp_path, SMALL_CONVERGE)
    assert main(["converge", str(cfg), "--out", str(out), "--quiet"]) == EXIT_OK
    errs = read_rows(out / "errors.csv")
    assert len(errs) == 2
    e = [float(r["e2"]) for r in errs]
    assert e[1] < e[0]
    rates = read_rows(out / "rates.csv")
    assert float(rates[0]["rate"]) > 0.5


def test_converge_parallel_matches_serial(tmp_path):
    cfg = write(tmp_path, SMALL_CONVERGE)
    assert main(["converge", str(cfg), "--out", str(tmp_path / "s"), "--quiet"]) == EXIT_OK
    assert main(["converge", str(cfg), "--out", str(tmp_path / "p"), "--jobs", "2",
                 "--quiet"]) == EXIT_OK
    assert (tmp_path / "s/errors.csv").read_bytes() == (tmp_path / "p/errors.csv").read_bytes()


def test_converge_single_point_sweep_rejected(tmp_path):
    text = SMALL_CONVERGE.replace("dx_sweep = 0.08, 0.04", "dx_sweep = 0.04")
    assert main(["converge", str(write(tmp_path, text)), "--quiet"]) == EXIT_INPUT


def test_converge_profile_touching_boundary_rejected(tmp_path):
    text = SMALL_CONVERGE.replace("C = 0.2", "C = 5")
    assert main(["converge", str(write(tmp_path, text)), "--quiet"]) == EXIT_INPUT


def test_run_and_converge_are_not_interchangeable(tmp_path):
    assert main(["run", str(write(tmp_path, SMALL_CONVERGE)), "--quiet"]) == EXIT_INPUT
    assert main(["converge", str(write(tmp_path, SMALL_RUN, "r.ini")), "--quiet"]) == EXIT_INPUT


def test_validate_exit_codes(tmp_path):
    assert main(["validate", "--out", str(tmp_path / "v"), "--quiet"]) == EXIT_OK
    text = (tmp_path / "v" / "validate.txt").read_text()
    assert "FAIL" not in text and text.count("PASS") >= 10
    assert main(["validate", "--perturb-gradient", "1e-3", "--quiet"]) == EXIT_CHECK
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["validate", "--out", str(blocker / "sub"), "--quiet"]) == EXIT_INPUT


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "minmove", "validate", "--quiet"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_OK


@pytest.mark.slow
def test_two_component_config_snapshot_times(tmp_path):
    out = tmp_path / "hole"
    assert main(["run", str(CONFIGS / "two_component_hole.ini"), "--out", str(out),
                 "--quiet"]) == EXIT_OK
    times = sorted({float(r["t"]) for r in read_rows(out / "snapshots.csv")})
    np.testing.assert_allclose(times, np.arange(11) * 0.05, atol=1e-12)
