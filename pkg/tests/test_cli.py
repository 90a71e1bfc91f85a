import csv
import io
import json
import subprocess
import sys

import pytest

from resum.cli import UsageError, parse_polynomial, run
from resum.exact_oracle import euler_exact
from resum.series_core import FormalSeries


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestGrammar:
    @pytest.mark.parametrize(
        "text,coeffs",
        [
            ("x", [0, 1]),
            ("x + x^2 - eps", [-0.04, 1, 1]),
            ("3/2*x^3 - 0.5x", [0, -0.5, 0, 1.5]),
            ("-x^2 + 2*eps*x", [0, 0.08, -1]),
            ("1 + x + x", [1, 2]),
        ],
    )
    def test_parse(self, text, coeffs):
        g = parse_polynomial(text, 0.04)
        assert g.offset == 0 and list(g.coeffs.real) == pytest.approx(coeffs)

    @pytest.mark.parametrize("text", ["", "sin(x)", "x^", "2y", "x**2", "1e-3*x"])
    def test_rejects(self, text):
        with pytest.raises(UsageError):
            parse_polynomial(text, 0.04)

    def test_eps_requires_value(self):
        with pytest.raises(UsageError):
            parse_polynomial("x - eps")


class TestSubcommands:
    def test_truncate_csv(self, capsys):
        code, out, _ = invoke(capsys, "truncate", "--x", "0.1", "--k-max", "20", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 21
        assert float(rows[10]["actual_error"]) <= float(rows[10]["bound"])

    def test_borel_sum(self, capsys):
        code, out, _ = invoke(capsys, "borel-sum", "--x", "0.1", "--theta", "0", "--order", "24")
        d = json.loads(out)
        assert code == 0 and abs(d["value"][0] - euler_exact(0.1).value.real) < 1e-12

    def test_borel_sum_series_file(self, capsys, tmp_path):
        f = tmp_path / "s.json"
        f.write_text(FormalSeries(1, [0.3**n for n in range(60)]).to_json())
        code, out, _ = invoke(capsys, "borel-sum", "--x", "1", "--series-file", str(f))
        assert code == 0 and abs(json.loads(out)["value"][0] - 1 / 0.7) < 1e-10

    def test_stokes(self, capsys):
        code, out, _ = invoke(capsys, "stokes")
        lines = out.strip().split("\n")
        assert code == 0 and lines[0] == "sing_re,sing_im,theta" and len(lines) == 2

    def test_stokes_jump_json(self, capsys):
        code, out, _ = invoke(capsys, "stokes", "--format", "json", "--jump-x", "-0.1")
        d = json.loads(out)
        assert code == 0 and abs(d["jump"]["value"][1] + 2.852561716306e-4) < 1e-12

    def test_axioms_table(self, capsys):
        code, out, _ = invoke(capsys, "axioms")
        assert code == 0 and out.count("PASS") == 6

    def test_axioms_json_records_seed(self, capsys):
        code, out, _ = invoke(capsys, "axioms", "--format", "json", "--seed", "11")
        assert code == 0 and json.loads(out)["seed"] == 11

    def test_unfold_resonance(self, capsys):
        code, out, err = invoke(capsys, "unfold", "--eps", "0.0625", "--g", "x")
        assert code == 1 and out == "" and "ResonanceError" in err and "n=2" in err

    def test_unfold_exact(self, capsys):
        code, out, _ = invoke(capsys, "unfold", "--eps", "0.04", "--g", "x + x^2 - eps")
        d = json.loads(out)
        assert code == 0 and d["abs_C2"] < 1e-8

    def test_unfold_g_file(self, capsys, tmp_path):
        f = tmp_path / "g.json"
        f.write_text(FormalSeries(0, [0, 1]).to_json())
        code, out, _ = invoke(capsys, "unfold", "--eps", "0.04", "--g-file", str(f))
        assert code == 0 and json.loads(out)["abs_C2"] > 1

    def test_sweep(self, capsys):
        code, out, err = invoke(capsys, "sweep", "--g", "x", "--eps", "0.04,0.0625")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 2
        assert rows[1]["C2_re"] == "" and "eps=0.0625" in err

    def test_euler_table(self, capsys):
        code, out, _ = invoke(capsys, "euler-table", "--n", "3", "--format", "json")
        rows = json.loads(out)["rows"]
        assert code == 0 and all(abs(r["f_laplace"] - r["f_direct"]) < 1e-12 for r in rows)

    def test_out_file(self, capsys, tmp_path):
        f = tmp_path / "o.csv"
        code, out, _ = invoke(capsys, "stokes", "--out", str(f))
        assert code == 0 and out == "" and f.read_text().startswith("sing_re")


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ["truncate", "--x", "2"],
            ["truncate", "--x", "-0.1"],
            ["borel-sum", "--x", "0.1", "--order", "1"],
            ["borel-sum", "--x", "0.1", "--tol", "1e-20"],
            ["unfold", "--eps", "0.04", "--g", "sin(x)"],
            ["unfold", "--eps", "-1", "--g", "x"],
            ["unfold", "--eps", "0.04", "--g", "x", "--radius", "0.5"],
            ["borel-sum", "--x", "0.1", "--bogus", "1"],
            ["nonsense"],
        ],
    )
    def test_validation(self, capsys, argv):
        code, _, err = invoke(capsys, *argv)
        assert code == 2 and err

    def test_numeric_failure(self, capsys):
        code, _, err = invoke(capsys, "borel-sum", "--x", "-0.1", "--theta", "3.14159")
        assert code == 1 and "StokesError" in err

    def test_help_names_equations(self, capsys):
        for sub, formula in [("truncate", "x^2 y' + y = x"), ("unfold", "(x^2 - eps) y' + y = g(x)")]:
            assert run([sub, "--help"]) == 0
            assert formula in capsys.readouterr().out


class TestDeterminism:
    @pytest.mark.parametrize(
        "argv",
        [
            ["axioms", "--format", "json"],
            ["truncate", "--x", "0.1", "--k-max", "12"],
            ["sweep", "--g", "x", "--eps", "0.04,0.03"],
        ],
    )
    def test_byte_identical(self, argv):
        outs = [
            subprocess.run([sys.executable, "-m", "resum.cli", *argv], capture_output=True, check=True).stdout
            for _ in range(2)
        ]
        assert outs[0] == outs[1] and outs[0]

    def test_console_script(self):
        res = subprocess.run(["resum", "stokes"], capture_output=True, text=True)
        assert res.returncode == 0 and res.stdout.startswith("sing_re")
