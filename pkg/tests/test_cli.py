import json

import numpy as np
import pytest

from spvertex import csvio
from spvertex.cli import main, parse_grid, read_config_file
from spvertex.errors import ConfigError


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_grid_parsing():
    assert np.allclose(parse_grid("0:0.4:0.1"), [0, 0.1, 0.2, 0.3])
    assert len(parse_grid("-4.4:0.4:0.1")) == 48
    with pytest.raises(ConfigError):
        parse_grid("1:0:0.1")


def test_verify_pass_and_config_error(capsys):
    code, out, _ = run(capsys, "verify", "--n", "3", "--seed", "42")
    assert code == 0 and json.loads(out)["passed"]
    code, _, err = run(capsys, "verify", "--n", "0")
    assert code == 2 and "--n" in err


def test_verify_unreachable_tolerance(capsys):
    code, out, _ = run(capsys, "verify", "--n", "4", "--tol", "1e-15")
    assert code == 1 and json.loads(out)["max_residual"] > 1e-15


def test_spectrum(capsys):
    code, out, _ = run(capsys, "spectrum", "--n", "3", "--L", "3", "--level", "2", "--lambda", "0.25")
    rows = csvio.read_csv("samples", out)
    assert code == 0 and len(rows) == 1 and rows[0]["residual"] <= 1e-10


def test_zeros_sp4(capsys, tmp_path):
    path = tmp_path / "z.csv"
    code, out, _ = run(capsys, "zeros", "--n", "2", "--L", "4", "--level", "1", "--out", str(path))
    assert code == 0 and "centerline_count=2" in out
    z = np.array([r["zero_re"] + 1j * r["zero_im"] for r in csvio.read_csv("zeros", path.read_text())])
    assert max(np.min(np.abs(z - (-3 - w))) for w in z) < 1e-6


def test_compare_start(capsys):
    code, out, _ = run(capsys, "compare", "--n", "3", "--L", "2", "--level", "1", "--grid", "0.0:0.4:0.1")
    rows = csvio.read_csv("compare", out)
    assert code == 0 and len(rows) == 4 and abs(rows[0]["kappa_inf"] - 4) < 1e-9


def test_compare_rejects_cut(capsys):
    code, _, err = run(capsys, "compare", "--n", "3", "--L", "2", "--grid", "-2.5:-1.5:0.5")
    assert code == 2 and "cut" in err


def test_thermo_sweep(capsys):
    code, out, _ = run(capsys, "thermo", "--n", "5", "--level", "5", "--grid", "-5.9:0.4:0.1")
    rows = csvio.read_csv("thermo", out)
    assert code == 0 and len(rows) == 63
    assert all(np.isfinite(r["kappa"]) and np.isfinite(r["omega"]) for r in rows)


def test_fusion_check(capsys):
    code, out, _ = run(capsys, "fusion-check", "--n", "3", "--L", "2,3,4", "--lambda", "0.2")
    rows = csvio.read_csv("verify", out)
    assert code == 0 and len(rows) == 15


def test_config_file_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nn = 3\nlevel = 3\ngrid = 0.0:0.2:0.1\n")
    assert read_config_file(str(cfg))["level"] == "3"
    code, out, _ = run(capsys, "thermo", "--config", str(cfg), "--level", "1")
    rows = csvio.read_csv("thermo", out)
    assert code == 0 and all(r["m"] == 1 for r in rows) and len(rows) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(capsys, "thermo", "--config", str(bad))[0] == 2


def test_byte_identical_reruns(capsys):
    args = ("spectrum", "--n", "2", "--L", "3", "--lambda", "0.1,0.3", "--threads", "1", "--seed", "5")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_csv_round_trip_precision():
    x = 0.1 + 2e-17
    text = csvio.write_csv("compare", [(x, 1 / 3, 2.0, 1e-300)])
    row = csvio.read_csv("compare", text)[0]
    assert row["kappa_L"] == 1 / 3 and row["rel_err"] == 1e-300
    with pytest.raises(ValueError):
        csvio.read_csv("zeros", text)
