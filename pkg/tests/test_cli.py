import csv
import math
import subprocess
import sys

import pytest

from gridprice.cli import EXIT_CONFIG, EXIT_IO, EXIT_MODEL, EXIT_OK, eval_pi, main
from gridprice.recipes import RECIPES

SCENARIO = """
name = "cli-demo"
horizon = 96
[controller]
eta = 0.5
[attack]
amplitude = 0.2
omega = 1.0
rho = 0.5
start = 48
"""


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "sc.toml"
    p.write_text(SCENARIO)
    return p


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("tok, val", [("pi", math.pi), ("2pi", 2 * math.pi), ("pi/8", math.pi / 8),
                                      ("3*pi/2", 1.5 * math.pi), ("0.25", 0.25)])
def test_eval_pi(tok, val):
    assert eval_pi(tok) == pytest.approx(val, rel=1e-15)


def test_simulate_writes_csv_and_svg(cfg, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    trace = rows(out / "cli-demo.csv")
    assert len(trace) == 96
    assert (out / "cli-demo.svg").read_text().startswith("<svg")
    assert "cli-demo.csv" in capsys.readouterr().out


def test_simulate_filter_mode_writes_coefficients(tmp_path):
    p = tmp_path / "f.toml"
    p.write_text("horizon = 20\n[controller]\nmode = 'robust_with_filter'\n")
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")]) == EXIT_OK
    assert rows(tmp_path / "o" / "filter_coefficients.csv")[0]["index"] == "0"


def test_seed_override_changes_noise(tmp_path):
    p = tmp_path / "n.toml"
    p.write_text("horizon = 30\nnoise_mw = 1.0\n")
    for seed in ("1", "2"):
        assert main(["simulate", "--config", str(p), "--out", str(tmp_path / seed),
                     "--seed", seed]) == EXIT_OK
    assert (tmp_path / "1" / "trace.csv").read_bytes() != (tmp_path / "2" / "trace.csv").read_bytes()


def test_simulate_deterministic(cfg, tmp_path):
    for d in ("a", "b"):
        main(["simulate", "--config", str(cfg), "--out", str(tmp_path / d)])
    for f in ("cli-demo.csv", "cli-demo.svg"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


@pytest.mark.parametrize("name", sorted(RECIPES))
def test_every_recipe_runs(name, tmp_path, capsys):
    assert main(["simulate", "--recipe", name, "--out", str(tmp_path)]) == EXIT_OK
    printed = capsys.readouterr().out.split()
    assert printed and all(p.endswith((".csv", ".svg")) for p in printed)


def test_sweep_sensitivity(cfg, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep-sensitivity", "--config", str(cfg), "--out", str(out),
                 "--curve", "error-price", "--grid", "33"]) == EXIT_OK
    r = rows(out)
    assert len(r) == 33 and float(r[0]["omega_rad_per_h"]) == 0.0
    assert float(r[-1]["omega_rad_per_h"]) == pytest.approx(2 * math.pi)


def test_detect_sweep(cfg, tmp_path):
    out = tmp_path / "d.csv"
    assert main(["detect-sweep", "--config", str(cfg), "--out", str(out),
                 "--omegas", "pi/2,2pi", "--etas", "0.5"]) == EXIT_OK
    assert len(rows(out)) == 2


def test_compare_channels(cfg, tmp_path):
    out = tmp_path / "c.csv"
    assert main(["compare-channels", "--config", str(cfg), "--out", str(out),
                 "--fractions", "0,1", "--etas", "0.5"]) == EXIT_OK
    assert len(rows(out)) == 2


def test_gen_baseline_round_trips_into_config(tmp_path):
    b = tmp_path / "b.csv"
    assert main(["gen-baseline", "--out", str(b), "--days", "2", "--seed", "3"]) == EXIT_OK
    assert len(rows(b)) == 96
    cfg = tmp_path / "sc.toml"
    cfg.write_text("horizon = 96\n[market]\nbaseline_csv = 'b.csv'\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK


def test_list_recipes(capsys):
    assert main(["list-recipes"]) == EXIT_OK
    assert {l.split("\t")[0] for l in capsys.readouterr().out.splitlines()} == set(RECIPES)


@pytest.mark.parametrize("text, code", [
    ("[controller]\neta = 1.2\n", EXIT_CONFIG),
    ("[controller\n", EXIT_CONFIG),
    ("bogus = 1\n", EXIT_CONFIG),
    ("[market]\nbaseline_csv = 'missing.csv'\n", EXIT_IO),
    ("[market]\nD = 0.0\nbaseline = 400.0\n", EXIT_MODEL),
])
def test_exit_codes(tmp_path, capsys, text, code):
    p = tmp_path / "bad.toml"
    p.write_text(text)
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")]) == code
    assert capsys.readouterr().err.strip()


def test_missing_config_file_is_io_error(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.toml"),
                 "--out", str(tmp_path)]) == EXIT_IO


def test_config_required(tmp_path):
    assert main(["simulate", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_syntax_error_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text("horizon = 5\n[controller\n")
    main(["simulate", "--config", str(p), "--out", str(tmp_path)])
    assert "line 2" in capsys.readouterr().err


def test_unknown_curve(cfg, tmp_path):
    assert main(["sweep-sensitivity", "--config", str(cfg), "--out", str(tmp_path / "x.csv"),
                 "--curve", "nope"]) == EXIT_CONFIG


def test_bad_omega_list(cfg, tmp_path):
    assert main(["detect-sweep", "--config", str(cfg), "--out", str(tmp_path / "x.csv"),
                 "--omegas", "pi/zz"]) == EXIT_CONFIG


def test_threads_env_same_output(cfg, tmp_path, monkeypatch):
    outs = []
    for n in ("1", "4"):
        monkeypatch.setenv("GRIDPRICE_THREADS", n)
        out = tmp_path / f"d{n}.csv"
        assert main(["detect-sweep", "--config", str(cfg), "--out", str(out),
                     "--etas", "0.1,0.5,0.8"]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_bad_threads_env(cfg, tmp_path, monkeypatch):
    monkeypatch.setenv("GRIDPRICE_THREADS", "many")
    assert main(["detect-sweep", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) \
        == EXIT_CONFIG


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "gridprice", "list-recipes"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "fig-convergence" in res.stdout
