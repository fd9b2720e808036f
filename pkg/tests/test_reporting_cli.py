import csv
import io
import json
import math

import numpy as np
import pytest

from fractalc.cli import main
from fractalc.reporting import FIGURES, csv_text, fmt, json_text, run_suite, svg_plot, Series


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, -2.5e-300, 123456789.123):
        assert float(fmt(x)) == x
    assert fmt(0.0) == "0"


def test_csv_and_json_text():
    text = csv_text(("a", "b"), [(1.0, 0.5)])
    assert text == "a,b\n1,0.5\n"
    assert "\r" not in text
    assert json_text({"b": 1, "a": 2}) == json_text({"b": 1, "a": 2})
    assert list(json.loads(json_text({"b": 1, "a": 2}))) == ["b", "a"]


def test_svg_is_self_contained():
    svg = svg_plot([Series("y", [0.0, 0.5, 1.0], [0.0, 1.0, 0.5])], "demo")
    assert svg.startswith("<?xml") or svg.startswith("<svg")
    assert "<polyline" in svg and "http://www.w3.org/2000/svg" in svg
    assert "href=\"http" not in svg


def test_staircase_identity_at_half(capsys):
    code, out, _ = run(capsys, "staircase", "--ratio", "0.5", "--samples", "10", "--out", "-")
    assert code == 0
    rows = rows_of(out)
    assert rows[0] == ["t", "S"] and len(rows) == 11
    assert all(float(t) == float(s) for t, s in rows[1:])


def test_solve_iu657_csv(capsys):
    code, out, _ = run(capsys, "solve", "--preset", "iu657", "--cprime", "1", "--depth", "20", "--samples", "512")
    assert code == 0
    rows = rows_of(out)
    assert rows[0] == ["t", "S", "y"]
    for _, s, y in rows[1:]:
        s, y = float(s), float(y)
        assert y == pytest.approx(s * math.log(s), abs=1e-14)


def test_susy_coulomb_partner_relation(capsys):
    code, out, _ = run(capsys, "susy", "--preset", "coulomb", "--ell", "2", "--samples", "64")
    assert code == 0
    rows = rows_of(out)
    assert rows[0] == ["t", "S", "W", "V", "psi0", "V_minus", "V_plus"]
    for r in rows[1:]:
        s = float(r[1])
        w_prime = 3.0 / s**2  # W = -3/s + 1/3
        assert float(r[6]) - float(r[5]) == pytest.approx(2 * w_prime, rel=1e-12)


def test_determinism_and_seed(capsys):
    a = run(capsys, "staircase", "--seed", "7", "--samples", "50")[1]
    b = run(capsys, "staircase", "--seed", "7", "--samples", "50")[1]
    c = run(capsys, "staircase", "--seed", "8", "--samples", "50")[1]
    assert a == b and a != c


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample config\nratio=0.5\nsamples=4\n")
    _, out, _ = run(capsys, "staircase", "--config", str(cfg))
    assert len(rows_of(out)) == 5
    _, out, _ = run(capsys, "staircase", "--config", str(cfg), "--samples", "6")
    assert len(rows_of(out)) == 7


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["staircase", "--ratio", "0.7"], "--ratio"),
        (["staircase", "--ratio", "0.3", "--alpha", "0.5"], "--ratio/--alpha"),
        (["staircase", "--samples", "0"], "--samples"),
        (["derive", "--expr", "(sin s"], "--expr"),
        (["solve"], "--preset"),
        (["solve", "--preset", "r1", "--const", "zz=1"], "--const"),
        (["susy", "--preset", "coulomb", "--ell", "-1"], "--ell"),
    ],
)
def test_validation_errors_exit_2(capsys, argv, needle):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert needle in err


def test_numerical_failure_exit_3(capsys):
    # c = 1 moves the tan pole to π/2 - 1, inside the staircase image; RK4 cannot step across it
    code, _, err = run(capsys, "solve", "--preset", "9oo", "--route", "numeric", "--c", "1", "--samples", "16")
    assert code == 3
    assert "numerical failure" in err


def test_integrate_and_derive(capsys):
    code, out, _ = run(capsys, "integrate", "--expr", "(/ 1 s)", "--lo", "0.1", "--hi", "0.8")
    assert code == 0
    assert float(json.loads(out)["integral"]) == pytest.approx(math.log(8), abs=1e-10)
    code, out, _ = run(capsys, "derive", "--expr", "(* s s)", "--depth", "16", "--samples", "20")
    rows = rows_of(out)
    assert rows[0] == ["t", "S", "f", "D_numeric", "D_conjugacy"]
    for r in rows[1:]:
        assert float(r[3]) == pytest.approx(float(r[4]), abs=1e-3)


def test_residual_report(capsys):
    code, out, _ = run(capsys, "residual", "--preset", "r1", "--route", "closed", "--samples", "128")
    rep = json.loads(out)
    assert code == 0 and float(rep["max_abs_residual"]) < 1e-9 and rep["sample_count"] == 128


@pytest.mark.parametrize("name", ["staircase", "algebra", "susy", "solvers"])
def test_suites_pass_and_repeat(name):
    a, b = run_suite(name, 7), run_suite(name, 7)
    assert a["passed"] and json_text(a) == json_text(b)


def test_figure_specs():
    assert [FIGURES[k].preset for k in ("fig1", "fig2", "fig3", "fig4")] == ["iu657", "9oo", "r10", "e1"]
    assert FIGURES["fig4"].constants == {"c": 1.0}


def test_figure_fig1(tmp_path):
    from fractalc.reporting import reproduce_figure

    res = reproduce_figure("fig1", tmp_path)
    rows = rows_of(res.csv_path.read_text())
    assert rows[0] == ["alpha", "t", "S", "y"]
    S = np.array([float(r[2]) for r in rows[1:]])
    y = np.array([float(r[3]) for r in rows[1:]])
    assert np.all(np.diff(S) >= 0)
    assert y[1] < 0 and np.all(np.diff(y[S > math.exp(-1)]) >= 0)
