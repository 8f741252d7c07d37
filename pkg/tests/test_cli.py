import json
from fractions import Fraction

import pytest

from finfree.cli import main, read_config
from finfree.poly_core import MonicPoly, Poly


def write_poly(path, coeffs):
    path.write_text(MonicPoly(coeffs).dumps())
    return str(path)


def test_convolve_square_and_rect(tmp_path, capsys):
    p = write_poly(tmp_path / "p.json", [1, 0, -1])
    assert main(["convolve", p, p]) == 0
    assert Poly.from_json(capsys.readouterr().out) == MonicPoly([1, 0, -2])
    out = tmp_path / "r.json"
    q = write_poly(tmp_path / "q.json", [1, -3])
    assert main(["convolve", q, q, "--n", "2", "--out", str(out)]) == 0
    assert Poly.from_json(out.read_text()) == MonicPoly([1, -6])


def test_transform_outputs(tmp_path, capsys):
    p = write_poly(tmp_path / "p.json", [1, 0, -2])
    assert main(["transform", p]) == 0
    assert json.loads(capsys.readouterr().out)["coeffs"] == ["0", "4"]
    assert main(["transform", p, "--what", "cumulants"]) == 0
    assert json.loads(capsys.readouterr().out)["values"] == ["0", "4"]
    assert main(["transform", p, "--n", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "rect_R"


def test_appell_subcommand(tmp_path, capsys):
    data = tmp_path / "f.json"
    data.write_text(json.dumps({"c": "0", "sigma2": "1", "roots": []}))
    assert main(["appell", str(data), "--d", "2"]) == 0
    assert Poly.from_json(capsys.readouterr().out) == MonicPoly([1, 0, -1])
    data.write_text(json.dumps({"c": "0", "sigma2": "0", "roots": ["2"]}))
    assert main(["appell", str(data), "--d", "3", "--normalized", "--tail-bound", "1/4"]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.err)["included_inverse_square_sum"] == "1/4"
    lpi = tmp_path / "g.json"
    lpi.write_text(json.dumps({"sigma2": "1", "roots_sq": []}))
    assert main(["appell", str(lpi), "--d", "2", "--n", "0"]) == 0
    assert Poly.from_json(capsys.readouterr().out) == MonicPoly([1, -4, 2])


def test_measure_subcommand(tmp_path, capsys):
    p = write_poly(tmp_path / "p.json", [1, 0, -1])
    table = tmp_path / "cdf.csv"
    assert main(["measure", p, "--law", "cauchy", "--csv", str(table)]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["ks"] == pytest.approx(0.25)
    assert table.read_text().splitlines()[0] == "location,weight,F_empirical,F_reference"


def test_mc_subcommand_is_deterministic(capsys):
    args = ["mc", "--check", "compress", "--d", "3", "--ell", "2", "--samples", "5000", "--seed", "1"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    assert json.loads(first)["samples"] == 5000


def test_read_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ndegrees = 50, 60\nerr_max = 0.1  ; inline\n")
    assert read_config(cfg) == {"degrees": "50, 60", "err_max": "0.1"}


def test_run_with_config_writes_outputs(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("degrees = 40, 80\n")
    out = tmp_path / "res"
    assert main(["run", "mn-laguerre", "--config", str(cfg), "--out", str(out)]) == 0
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["pass"] is True
    saved = (out / "mn-laguerre.verdict.json").read_text()
    assert json.loads(saved) == verdict
    assert (out / "mn-laguerre.timing.json").exists()


def test_run_is_byte_deterministic(tmp_path):
    for tag in ("a", "b"):
        assert main(["run", "appell-domain", "--d", "40", "--set", "two_root_degrees=10, 20", "--out", str(tmp_path / tag)]) == 0
    a = (tmp_path / "a" / "appell-domain.verdict.json").read_bytes()
    b = (tmp_path / "b" / "appell-domain.verdict.json").read_bytes()
    assert a == b


def test_failing_gate_exits_one(tmp_path, capsys):
    code = main(["run", "mn-laguerre", "--set", "err_max=1e-9", "--out", str(tmp_path)])
    assert code == 1
    assert "FAIL" in capsys.readouterr().err


def test_bad_inputs_exit_two(tmp_path, capsys):
    assert main(["run", "mn-laguerre", "--set", "bogus=1", "--out", str(tmp_path)]) == 2
    assert "unknown key" in capsys.readouterr().err
    assert main(["run", "mn-laguerre", "--set", "degrees=200, 100", "--out", str(tmp_path)]) == 2
    assert main(["convolve", str(tmp_path / "missing.json"), str(tmp_path / "missing.json")]) == 2
    with pytest.raises(SystemExit):
        main(["run", "no-such-scenario"])
