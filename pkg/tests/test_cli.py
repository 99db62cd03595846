import csv
import json
import math
import os

import pytest

from wplab import cli
from wplab.series import ConvergenceError

SQUARE = "1.9248473002384139:0"


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_parse_grid_and_slopes():
    g = cli.parse_grid("0.5, 1.2:0.3")
    assert g[0] == 0.5 and (g[1].l_alpha, g[1].tau) == (1.2, 0.3)
    assert cli.parse_slopes("1/0, 2/3") == [(1, 0), (2, 3)]
    for bad in ("", "x", "1:2:3"):
        with pytest.raises(cli.ConfigError):
            cli.parse_grid(bad)
    with pytest.raises(cli.ConfigError):
        cli.parse_slopes("1-2")


def test_config_file_and_flags_win(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("[series]\ntruncation = 6\nquad-tol = 1e-4\n[random]\nseed = 5\nsamples = 3\n")
    values = cli.read_config(str(cfg_file))
    cfg = cli.build_config("gradient", values, {"seed": 9, "truncation": None})
    assert (cfg.truncation, cfg.quad_tol, cfg.seed, cfg.samples) == (6, 1e-4, 9, 3)
    # a file without headers is one section
    flat = tmp_path / "flat.cfg"
    flat.write_text("modes = 12\ncurves = 1/0,1/1\n")
    cfg = cli.build_config("hessian-modes", cli.read_config(str(flat)), {})
    assert cfg.modes == 12 and cfg.curves == [(1, 0), (1, 1)]


@pytest.mark.parametrize("text", ["bogus = 1\n", "truncation = many\n", "curves = 2/4\n", "quad_tol = -1\n"])
def test_bad_config_is_rejected(tmp_path, text):
    f = tmp_path / "bad.cfg"
    f.write_text(text)
    with pytest.raises(cli.ConfigError):
        cli.build_config("l1", cli.read_config(str(f)), {})


def test_exit_code_config_errors(tmp_path):
    assert cli.main(["l1", "--grid", "abc", "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert cli.main(["l1", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert cli.main(["nosuch"]) == cli.EXIT_CONFIG


def test_exit_code_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    out = str(blocker / "sub")
    assert cli.main(["hessian-modes", "--grid", "1.0", "--modes", "2", "--out", out]) == cli.EXIT_CANTCREAT


def test_l1_suite_outputs(tmp_path):
    code = cli.main(["l1", "--grid", SQUARE, "--out", str(tmp_path)])
    assert code == cli.EXIT_PASS
    summary = json.loads((tmp_path / "l1.json").read_text())
    assert summary["suite"] == "l1" and summary["pass"] is True and summary["cases"] == 3
    assert summary["claim"] == cli.CLAIMS["l1"]
    assert set(summary) >= {"suite", "pass", "cases", "worst_margin", "params"}
    rows = list(csv.DictReader(open(tmp_path / "l1.csv")))
    assert [r["slope"] for r in rows] == ["1/0", "0/1", "1/1"]
    assert all(float(r["rel_error"]) < 1e-3 and r["status"] == "ok" for r in rows)


def test_floats_round_trip():
    for x in (math.pi, 1e-17 / 3, -2.5e300, 0.1):
        assert float(cli.fmt(x)) == x


def test_violation_carries_margin(tmp_path):
    code = cli.main(["l1", "--grid", SQUARE, "--curves", "1/0", "--quad-tol", "1e-300", "--out", str(tmp_path)])
    assert code == cli.EXIT_VIOLATION
    row = next(csv.DictReader(open(tmp_path / "l1.csv")))
    assert float(row["margin"]) < 0 and row["status"].startswith("violated")


def test_convergence_failure_exit_code(tmp_path, monkeypatch):
    def broken(cfg):
        raise ConvergenceError("tail too large")
    monkeypatch.setattr(cli, "suite_l1", broken)
    assert cli.main(["l1", "--out", str(tmp_path)]) == cli.EXIT_CONVERGENCE
    assert json.loads((tmp_path / "l1.json").read_text())["convergence_failures"] == 1


def test_nan_margin_fails_unless_degenerate(monkeypatch):
    monkeypatch.setattr(cli, "suite_l1", lambda cfg: (["margin"], [[1.0], [math.nan]], {}))
    assert not cli.run_suite(cli.ExperimentConfig("l1")).passed
    monkeypatch.setattr(cli, "suite_l1", lambda cfg: (["margin", "degenerate"], [[1.0, False], [math.nan, True]], {}))
    res = cli.run_suite(cli.ExperimentConfig("l1"))
    assert res.passed and res.rows[1][-1] == "degenerate"


def test_hessian_modes_suite_full_grid(tmp_path):
    assert cli.main(["hessian-modes", "--out", str(tmp_path)]) == cli.EXIT_PASS
    rows = list(csv.DictReader(open(tmp_path / "hessian_modes.csv")))
    assert len(rows) == 5 * 33
    assert all(float(r["hessian"]) > 0 and 1 <= float(r["ratio"]) <= 3 for r in rows)
    assert (tmp_path / "ratio_vs_ell.csv").exists() and (tmp_path / "ratio_vs_ell.gp").exists()


def test_convexity_zero_length_is_flagged(tmp_path):
    code = cli.main(["convexity", "--length", "0", "--samples", "2", "--out", str(tmp_path)])
    assert code == cli.EXIT_PASS
    rows = list(csv.DictReader(open(tmp_path / "convexity.csv")))
    assert len(rows) == 6
    assert all(r["degenerate"] == "1" and r["status"] == "degenerate" for r in rows)


def test_determinism_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["hessian-modes", "--seed", "3", "--modes", "8", "--out", str(out)]) == cli.EXIT_PASS
        assert cli.main(["l1", "--grid", SQUARE, "--out", str(out)]) == cli.EXIT_PASS
    names = sorted(os.listdir(a))
    assert names == sorted(os.listdir(b))
    for name in names:
        assert _read(a / name) == _read(b / name)
    # a different seed changes the random cases
    c = tmp_path / "c"
    cli.main(["hessian-modes", "--seed", "4", "--modes", "8", "--out", str(c)])
    assert _read(c / "hessian_modes.csv") != _read(a / "hessian_modes.csv")


def test_stratum_plot_manifest(tmp_path):
    cols = ["ell", "tau", "d", "bound", "margin", "residual", "c_quadratic", "c_three_halves", "status"]
    rows = [[1e-2, 0.0, 0.2506, 0.25066, 1e-3, -1e-9, 1e-5, 1e-2, "ok"],
            [1e-3, 0.0, 0.07926, 0.07927, 1e-3, -1e-10, 1e-4, 1e-1, "ok"]]
    res = cli.SuiteResult("stratum", True, cols, rows, {}, 1e-3, 0, 0.0, {})
    files = cli.emit_plots(res, str(tmp_path))
    assert files == ["distance_vs_sqrt.csv", "distance_vs_sqrt.gp"]
    with open(tmp_path / "distance_vs_sqrt.csv") as fh:
        header = next(csv.reader(fh))
    assert header == ["ell", "d", "bound"]


def test_empty_result_has_empty_manifest(tmp_path):
    assert cli.emit_plots(None, str(tmp_path)) == []
    empty = cli.SuiteResult("stratum", True, ["ell", "d", "bound", "margin"], [], {}, math.nan, 0, 0.0, {})
    assert cli.emit_plots(empty, str(tmp_path)) == []
    assert empty.exit_code == cli.EXIT_PASS
