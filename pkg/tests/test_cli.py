import subprocess
import sys

import numpy as np
import pytest

from swabsim import __version__
from swabsim.cli import main
from swabsim.pose import save_depth, save_intrinsics, save_landmarks, synthetic_scene
from swabsim.tactile import offset_to_force


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_help_lists_commands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    for cmd in ("run", "calibrate", "pose"):
        assert cmd in out


def test_run_compliance_scenario(tmp_path, capsys):
    assert main(["run", "--scenario", "compliance", "--out", str(tmp_path), "--seed", "3"]) == 0
    assert (tmp_path / "trace.csv").exists() and (tmp_path / "metrics.txt").exists()
    assert "compliance latency" in capsys.readouterr().out


def test_run_exit_code_reflects_timeout(tmp_path):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("[simulation]\napproach_distance = 0\n[cavity]\nfree_space = true\n[phase.Initial]\nduration_cap = 0.2\ndwell = 5\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_bad_config_reports_constraint(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[simulation]\ndt = -1\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "dt > 0" in capsys.readouterr().err


def test_calibrate_writes_loadable_snippet(tmp_path):
    x = np.linspace(5, 45, 40)
    samples = tmp_path / "s.csv"
    samples.write_text("offset_mm,force_n\n" + "".join(f"{a},{offset_to_force(a)}\n" for a in x.tolist()))
    out = tmp_path / "cal.cfg"
    assert main(["calibrate", "--samples", str(samples), "--out", str(out)]) == 0
    from swabsim.config import load_config

    c2, c1, c0 = load_config(out)["calibration"]["offset_quadratic"]
    assert (c2, c1, c0) == pytest.approx((1.337e-4, 2.5e-3, 0.0), abs=1e-9)


def test_calibrate_rejects_degenerate_samples(tmp_path):
    samples = tmp_path / "s.csv"
    samples.write_text("1,0.1\n")
    assert main(["calibrate", "--samples", str(samples), "--out", str(tmp_path / "c")]) == 2


def test_pose_command(tmp_path, capsys):
    lm, depth, _ = synthetic_scene(yaw_deg=10.0)
    save_landmarks(lm, tmp_path / "lm.txt")
    save_depth(depth, tmp_path / "d.pgm")
    save_intrinsics(depth.intrinsics, tmp_path / "i.txt")
    args = ["pose", "--landmarks", str(tmp_path / "lm.txt"), "--depth", str(tmp_path / "d.pgm"), "--intrinsics", str(tmp_path / "i.txt")]
    assert main(args) == 0
    lines = dict(line.split(" ", 1) for line in capsys.readouterr().out.splitlines())
    direction = np.array(lines["direction"].split(), dtype=float)
    truth = [-np.sin(np.radians(10)), 0, -np.cos(np.radians(10))]
    assert np.degrees(np.arccos(min(1.0, direction @ truth / np.linalg.norm(direction)))) < 0.5


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "swabsim", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
