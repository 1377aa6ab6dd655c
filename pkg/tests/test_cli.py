import csv
import io
import json
import math
import subprocess
import sys

import pytest

from ctoa.cli import RunConfig, TASKS, main, parse_args, run


def _run(argv):
    buf = io.StringIO()
    code = run(parse_args(argv), stdout=buf)
    return code, buf.getvalue()


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_defaults_filled():
    cfg = parse_args(["spectrum", "--gamma", "0", "--count", "7"])
    assert cfg == RunConfig(task="spectrum", count=7)
    assert (cfg.mu, cfg.hbar, cfg.l, cfg.N, cfg.K, cfg.dt) == (1.0, 1.0, 1.0, 2000, 200, 1e-4)


def test_table3_single_row_config():
    cfg = parse_args(["evolve", "--gamma", "0.01", "--n", "4", "--modes", "601"])
    assert (cfg.gamma, cfg.n, cfg.K) == (0.01, 4, 300)


def test_gamma_snaps_to_antiperiodic():
    assert parse_args(["spectrum", "--gamma", "1.5708"]).gamma == math.pi / 2
    assert parse_args(["commutator"]).gamma == math.pi / 8


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--gamma", "x"],
        ["spectrum", "--N", "-3"],
        ["spectrum", "--gamma", "2.0"],
        ["spectrum", "--bogus"],
        ["nothing"],
        ["evolve", "--modes", "400"],
        ["commutator", "--N-fine", "100"],
        ["spectrum", "--gamma", "0.3", "--family", "even"],
        ["spectrum", "--dt", "nan"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        parse_args(argv)
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_numeric_spectrum_with_family_is_usage_error(capsys):
    code, _ = _run(["spectrum", "--family", "even", "--method", "numeric"])
    assert code == 2


def test_spectrum_antiperiodic_first_even_root():
    import scipy.optimize
    import scipy.special

    code, out = _run(["spectrum", "--gamma", "1.5708", "--count", "3"])
    assert code == 0
    rows = _rows(out)
    assert [r["case"] for r in rows][:1] and {r["case"] for r in rows} <= {
        "antiperiodic_even", "antiperiodic_odd"
    }
    r1 = scipy.optimize.brentq(lambda x: scipy.special.jv(-0.75, x), 0.5, 2.5, xtol=1e-15)
    even = [r for r in rows if r["case"] == "antiperiodic_even" and r["sign"] == "1"]
    assert float(even[0]["analytic"]) == pytest.approx(0.25 / r1, rel=1e-11)


def test_spectrum_both_methods_pass():
    code, out = _run(["spectrum", "--gamma", "0.3", "--count", "3", "--method", "both", "--N", "400"])
    rows = _rows(out)
    assert code == 0
    assert len(rows) == 6 and all(r["pass"] == "pass" for r in rows)


def test_table2_first_row():
    code, out = _run(["table2", "--rows", "5"])
    rows = _rows(out)
    assert code == 0 and len(rows) == 5
    assert float(rows[0]["eigenvalue"]) == pytest.approx(0.12460751, abs=5e-9)
    assert float(rows[0]["min_variance"]) == pytest.approx(0.1610, rel=5e-3)
    assert all(r["pass"] == "pass" for r in rows)


@pytest.mark.slow
def test_table4_exact_column():
    code, out = _run(["table4"])
    rows = [r for r in _rows(out) if r["column"] == "g0"]
    assert code == 0
    assert [float(r["ref_exact"]) for r in rows[:2]] == [0.124608, 0.111438]


def test_evolve_csv_schema_and_json_shape(tmp_path):
    argv = ["evolve", "--n", "2", "--modes", "101", "--dt", "1e-3", "--N", "400"]
    code, out = _run(argv)
    assert code == 0
    assert out.splitlines()[0] == "t,mean_q,var_q"
    code, js = _run(argv + ["--format", "json"])
    doc = json.loads(js)
    assert set(doc) == {"config", "results", "residuals"}
    assert doc["config"]["K"] == 50
    assert set(doc["results"][0]) == {"t", "mean_q", "var_q"}
    assert doc["residuals"]["min_variance"] > 0
    assert len(doc["results"]) == len(_rows(out))


def test_output_is_deterministic(tmp_path):
    argv = ["evolve", "--n", "3", "--modes", "101", "--dt", "1e-3", "--N", "400", "--no-figures"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["-o", str(a)]) == 0
    assert main(argv + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert not a.with_suffix(".png").exists()


def test_figure_written_next_to_output(tmp_path):
    out = tmp_path / "sym" / "report.json"
    assert main(["symmetry", "--count", "3", "--format", "json", "-o", str(out)]) == 0
    png = out.with_suffix(".png")
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    doc = json.loads(out.read_text())
    assert all(r["pass"] is True for r in doc["results"])


def test_figures_are_byte_identical(tmp_path):
    paths = [tmp_path / "a.png", tmp_path / "b.png"]
    for p in paths:
        assert main(["spectrum", "--count", "3", "--figure", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_commutator_task():
    code, out = _run(["commutator"])
    rows = _rows(out)
    assert code == 0
    assert [r["name"] for r in rows] == ["canonical_h=1", "canonical_h=1", "probe_nonzero_integral"]
    assert float(rows[1]["residual"]) < float(rows[0]["residual"]) < 1e-3
    assert float(rows[2]["residual"]) > 0.1


def test_numerical_mismatch_exits_1(capsys):
    # a very coarse Nystrom grid cannot meet the 5e-4 agreement tolerance
    code, out = _run(["spectrum", "--gamma", "0.3", "--count", "3", "--method", "both", "--N", "8", "--no-extrapolate"])
    assert code == 1
    assert "fail" in out
    assert "outside tolerance" in capsys.readouterr().err


def test_library_errors_exit_1(capsys):
    cfg = parse_args(["evolve", "--modes", "801", "--N", "100"])
    assert run(cfg, stdout=io.StringIO()) == 1
    assert "evolve failed" in capsys.readouterr().err


def test_every_task_is_dispatched():
    from ctoa.cli import _TASKS

    assert set(_TASKS) == set(TASKS)


def test_console_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "ctoa.cli", "spectrum", "--count", "2"], capture_output=True, text=True
    )
    assert res.returncode == 0
    assert res.stdout.startswith("n,sign,case,root,analytic")
