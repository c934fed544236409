import json

import numpy as np
import pytest

from umcf import cli
from umcf.cli_io import read_diagnostics_csv, read_field_dump, read_pgm


def test_usage_errors_exit_2(capsys):
    assert cli.main([]) == 2
    assert cli.main(["no-such-command"]) == 2
    assert cli.main(["run"]) == 2
    assert cli.main(["run", "--config", "does/not/exist.cfg"]) == 2
    assert cli.main(["run", "--config", "circle2d", "--threads", "0"]) == 2
    assert cli.main(["run", "--config", "circle2d", "--override", "model.eps=-1"]) == 2
    assert "config error" in capsys.readouterr().err


def test_help_exits_0(capsys):
    assert cli.main(["--help"]) == 0
    assert "validate-circle2d" in capsys.readouterr().out


def test_presets_parse():
    from umcf.cli_io import load_config
    names = cli.preset_names()
    assert {"circle2d", "sphere3d", "sigma_study", "triple2d", "dumbbell3d",
            "ring3d"} <= set(names)
    for name in names:
        load_config(cli.resolve_config_path(cli.Path(name)))


def test_run_writes_outputs_2d(tmp_path):
    code = cli.main(["run", "--config", "circle2d", "--out", str(tmp_path),
                     "--override", "grid.n=64", "--override", "model.epsRule=3/N",
                     "--override", "run.steps=30",
                     "--override", "run.diagEvery=10", "--override", "run.snapshotEvery=20",
                     "--override", "model.dtRule=0.1*eps^2"])
    assert code == 0
    out = tmp_path / "circle2d"
    rows = read_diagnostics_csv(out / "diagnostics.csv")
    assert [r["step"] for r in rows] == [0, 10, 20, 30]
    assert all(r["radius_est"] == pytest.approx(0.3, abs=0.02) for r in rows)
    for step in (0, 20, 30):
        grid, u, meta = read_field_dump(out / f"u_{step:08d}.f64")
        assert meta["step"] == step and grid.n == (64, 64)
        assert np.all(u <= 0.25)
        assert read_pgm(out / f"u_{step:08d}.pgm").shape == (64, 64)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["halted"] == "maxSteps" and manifest["finalStep"] == 30
    assert manifest["resolved"]["grid"]["n"] == [64, 64]


def test_run_writes_masks_3d(tmp_path):
    code = cli.main(["run", "--config", "sphere3d", "--out", str(tmp_path),
                     "--override", "grid.n=32", "--override", "run.steps=4",
                     "--override", "run.snapshotEvery=4", "--override", "run.diagEvery=2"])
    assert code == 0
    out = tmp_path / "sphere3d"
    _, mask, _ = read_field_dump(out / "mask_00000004.f64")
    assert mask.shape == (32, 32, 32) and mask.any()
    assert not (out / "mask_00000005.f64").exists()


def test_divergent_run_exits_1(tmp_path):
    code = cli.main(["run", "--config", "circle2d", "--out", str(tmp_path),
                     "--override", "grid.n=32", "--override", "run.steps=400",
                     "--override", "model.epsRule=3/N",
                     "--override", "model.projection=false",
                     "--override", "model.dtRule=5*eps^2"])
    assert code == 1


def test_validate_profile1d_passes(capsys):
    assert cli.main(["validate-profile1d"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
