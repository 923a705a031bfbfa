import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dysthe import dynamics
from dysthe.cli import DEFAULTS, RUNNERS, dumps, emit_plotdata, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_every_subcommand_has_defaults():
    assert set(RUNNERS) == set(DEFAULTS)


def test_resonance_example(capsys):
    code, out, _ = run(capsys, "resonance", "--N", "1", "--n", "0", "--j", "-4", "--method", "both", "--format", "csv")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["N", "n", "j", "count", "method", "runtime_ms"]
    assert [r["count"] for r in table] == ["6", "6"]
    assert [r["method"] for r in table] == ["brute", "divisor"]


def test_resonance_json(capsys):
    code, out, _ = run(capsys, "resonance", "--N", "5", "--n", "0", "--j", "0")
    report = json.loads(out)["report"]
    assert code == 0
    assert [r["count"] for r in report["results"]] == [4, 4]
    assert "runtime_ms" not in report["results"][0]


def test_illposed_single_m(capsys):
    code, out, _ = run(capsys, "illposed", "--m", "16", "--s", "-0.5", "--t-factor", "0.1")
    report = json.loads(out)["report"]
    lib = dynamics.illposedness_experiment(16, -0.5, 0.1)
    assert report["peak_abs"] == lib.peak_abs
    assert report["rel_dev"] == lib.rel_dev
    # exit status reports the closed-form check
    assert report["passed"] == (lib.rel_dev <= 0.1)
    assert code == (0 if report["passed"] else 1)


def test_illposed_sweep_and_plotdata(capsys, tmp_path):
    plot = tmp_path / "slope.csv"
    code, out, _ = run(capsys, "illposed", "--m", "8", "16", "32", "64", "--plotdata", str(plot))
    report = json.loads(out)["report"]
    assert code == 0
    assert report["fitted_slope"] == pytest.approx(1.0, abs=0.1)
    pts = rows(plot.read_text())
    assert len(pts) == 4
    assert float(pts[0]["x"]) == pytest.approx(np.log(8))


def test_picard(capsys):
    code, out, _ = run(capsys, "picard", "--m", "8")
    report = json.loads(out)["report"]
    assert code == 0
    assert report["max_rel_diff"] <= 1e-6
    assert report["quadrature_nodes"] > 32


def test_missing_seed_is_usage_error(capsys):
    code, out, err = run(capsys, "strichartz-l6", "--N", "2", "--trials", "2")
    assert code == 2
    assert "usage:" in err and "--seed" in err
    assert out == ""


@pytest.mark.parametrize(
    "argv, estimate",
    [
        (["strichartz-l6", "--N", "2", "4", "--trials", "4"], "strichartz_l6"),
        (["strichartz-lr", "--N", "2", "4", "--trials", "4", "--r", "8"], "strichartz_l8"),
        (["l4", "--N", "2", "4", "--trials", "4"], "l4_x013"),
        (["l4", "--N", "3", "--spread", "1", "4", "--vary", "spread", "--trials", "4"], "l4_x013"),
        (["dyadic", "--N", "2", "--j-max", "2", "--k-max", "2", "--trials", "2"], "dyadic_bilinear"),
        (["bilinear", "--N", "2", "4", "--trials", "5", "--variant", "x-product", "--s", "0"], "bilinear_x-product"),
        (["trilinear", "--N", "2", "--T", "0.5", "0.25"], "trilinear_Z"),
    ],
)
def test_ratio_subcommands_csv(capsys, argv, estimate):
    code, out, _ = run(capsys, *argv, "--seed", "3", "--format", "csv")
    assert code in (0, 1)
    table = rows(out)
    assert list(table[0]) == ["estimate_id", "size_param", "trial", "lhs", "rhs", "ratio"]
    assert {r["estimate_id"] for r in table} == {estimate}
    for r in table:
        assert float(r["ratio"]) == pytest.approx(float(r["lhs"]) / float(r["rhs"]), rel=1e-15)


def test_ratio_json_has_report_fields(capsys):
    code, out, _ = run(capsys, "dyadic", "--N", "2", "--j-max", "1", "--k-max", "1", "--trials", "2", "--seed", "1")
    report = json.loads(out)["report"]
    assert code == 0
    assert report["passed"] is True
    assert {"estimate_id", "samples", "max_ratio", "mean_ratio", "trend", "seed"} <= set(report)


def test_failed_check_exits_one(capsys):
    code, out, _ = run(capsys, "dyadic", "--N", "2", "--j-max", "1", "--k-max", "1", "--trials", "2",
                       "--seed", "1", "--constant", "1e-6")
    assert code == 1
    assert json.loads(out)["report"]["passed"] is False


def test_viscous_trajectory_csv(capsys):
    code, out, _ = run(capsys, "viscous", "--seed", "2", "--steps", "3", "--dt", "0.01", "--record-energy",
                       "--format", "csv")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["step", "time", "h2_norm", "I_value"]
    assert [r["step"] for r in table] == ["0", "1", "2", "3"]
    assert all(r["I_value"] for r in table)


def test_viscous_blowup_exits_one(capsys):
    code, out, _ = run(capsys, "viscous", "--seed", "2", "--amp", "1e4", "--steps", "50", "--dt", "0.05",
                       "--mu", "0.01")
    assert code == 1
    assert json.loads(out)["report"]["blew_up"] is True


def test_energy(capsys):
    code, out, _ = run(capsys, "energy", "--n", "4", "6", "--f", "64", "216")
    report = json.loads(out)["report"]
    assert code == 0
    assert [r["I_value"] for r in report["rows"]] == pytest.approx(
        [dynamics.I_vn_closed_form(4, 64), dynamics.I_vn_closed_form(6, 216)], rel=1e-12)


def test_energy_length_mismatch(capsys):
    code, _, err = run(capsys, "energy", "--n", "4", "6", "--f", "64")
    assert code == 2 and "same number" in err


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N": 2, "n": 0, "j": -4, "method": "divisor"}))
    code, out, _ = run(capsys, "resonance", "--config", str(cfg))
    report = json.loads(out)["report"]
    assert code == 0 and report["N"] == 2
    assert [r["method"] for r in report["results"]] == ["divisor"]
    code, out, _ = run(capsys, "resonance", "--config", str(cfg), "--N", "1")
    assert json.loads(out)["report"]["N"] == 1


@pytest.mark.parametrize(
    "content, message",
    [("{not json", "cannot read config"), ('{"bogus": 1}', "unknown config keys"), ("[1, 2]", "JSON object"),
     ('{"tolerance": -1}', "positive")],
)
def test_bad_config(capsys, tmp_path, content, message):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(content)
    code, _, err = run(capsys, "illposed", "--config", str(cfg))
    assert code == 2 and message in err


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "resonance", "--format", "xml")[0] == 2
    assert run(capsys, "dyadic", "--seed", "1", "--threads", "0")[0] == 2
    assert run(capsys, "dyadic", "--seed", "-1")[0] == 2
    code, _, err = run(capsys, "illposed", "--m", "2")
    assert code == 2 and "m must be" in err


def test_unwritable_output(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(capsys, "resonance", "--output", str(blocker / "out.json"))
    assert code == 2 and "cannot write" in err


def test_output_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("DYSTHE_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "resonance", "--output", "sub/res.json")
    assert code == 0 and out == ""
    assert json.loads((tmp_path / "sub" / "res.json").read_text())["report"]["N"] == 1


def test_json_is_byte_identical_across_runs_and_threads(capsys):
    argv = ["strichartz-l6", "--N", "2", "3", "--trials", "5", "--seed", "12345"]
    first = run(capsys, *argv)[1]
    again = run(capsys, *argv)[1]
    threaded = run(capsys, *argv, "--threads", "3")[1]
    assert first == again == threaded


def test_emit_plotdata_empty_and_rows(tmp_path):
    empty = emit_plotdata([], tmp_path / "e.csv")
    assert empty.read_text() == "x,y\n"
    p = emit_plotdata([(1, 2.5), (2, 3.5)], tmp_path / "p.csv")
    assert p.read_text().splitlines()[1:] == ["1,2.5", "2,3.5"]


def test_ratio_plotdata_one_row_per_size(capsys, tmp_path):
    plot = tmp_path / "trend.csv"
    run(capsys, "l4", "--N", "2", "3", "4", "--trials", "3", "--seed", "1", "--plotdata", str(plot))
    assert [r["x"] for r in rows(plot.read_text())] == ["2", "3", "4"]


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_dumps_round_trips_floats(x):
    assert json.loads(dumps({"v": x}))["v"] == x


def test_dumps_types():
    text = dumps({"c": 1 + 2j, "a": np.arange(3), "b": (True, None), "nan": float("nan"), "e": [], "d": {}})
    data = json.loads(text)
    assert data == {"c": [1.0, 2.0], "a": [0, 1, 2], "b": [True, None], "nan": "nan", "e": [], "d": {}}
    assert dumps(0.1) == "0.10000000000000001"
    with pytest.raises(TypeError):
        dumps(object())


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dysthe", "resonance", "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "N,n,j,count,method,runtime_ms"
