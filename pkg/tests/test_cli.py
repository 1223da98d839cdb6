import io
import json

import pytest

from weierstrass_dim.cli import build_parser, run

SUBCOMMANDS = ["eval", "lambdab", "boxdim", "localdim", "telescope", "scaling", "theta-stats",
               "bernoulli", "schedule", "concentration"]


def call(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_lambdab_json():
    code, out, _ = call(["lambdab", "--b", "3"])
    assert code == 0
    data = json.loads(out)
    assert data["b"] == 3
    assert abs(data["lambda_b"] - 0.7269) <= 5e-4
    assert data["residual"] < 1e-10
    assert data["config"]["subcommand"] == "lambdab"


def test_eval_example():
    code, out, _ = call(["eval", "--b", "2", "--lambda", "0.6", "--ridge", "cos", "--x", "0"])
    assert code == 0
    assert json.loads(out)["W"] == pytest.approx(2.5, abs=1e-11)


def test_eval_csv_many_points():
    code, out, _ = call(["eval", "--b", "2", "--lambda", "0.6", "--x", "0", "0.5", "--format", "csv"])
    lines = out.split("\n")
    assert lines[0] == "x,W" and len(lines) == 4 and lines[-1] == ""
    assert float(lines[2].split(",")[1]) == pytest.approx(0.5, abs=1e-11)


def test_boxdim_csv_and_slope():
    code, out, err = call(["boxdim", "--b", "3", "--lambda", "0.8", "--nmin", "3", "--nmax", "6", "--seed", "42"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "N,log_scale,box_count" and len(lines) == 5
    assert "slope" in err
    code, out, _ = call(["boxdim", "--nmin", "3", "--nmax", "6", "--seed", "42", "--format", "json"])
    assert abs(json.loads(out)["slope"] - 1.79688) <= 0.05


@pytest.mark.parametrize("argv, header", [
    (["telescope", "--N", "2", "--mc-samples", "2000"], "N,lhs,rhs,z_score"),
    (["localdim", "--N", "2", "3", "--mc-samples", "2000"], "N,mu_VN,ratio"),
    (["concentration", "--mc-samples", "2000"], "z,r,p_hat,stderr"),
    (["bernoulli", "--samples", "1000", "--bins", "8"], "bin_left,bin_right,density"),
    (["theta-stats", "--samples", "1000", "--bins", "8"], "bin_left,bin_right,density"),
    (["scaling", "--points", "1", "--N", "2", "3", "4", "--mc-samples", "2000"], "point,N,measure,stderr"),
])
def test_csv_headers(argv, header):
    code, out, _ = call(argv)
    assert code == 0
    assert out.split("\n", 1)[0] == header
    assert "\r" not in out


def test_seventeen_digits():
    _, out, _ = call(["lambdab", "--b", "2", "--format", "csv"])
    value = out.splitlines()[1].split(",")[1]
    assert value == "%.17g" % float(value)


def test_schedule_json():
    code, out, _ = call(["schedule"])
    data = json.loads(out)
    assert data["n_levels"] == [1, 2, 4, 8] and data["N_cap"] == 10


def test_domain_error_exit_1():
    code, out, err = call(["eval", "--b", "3", "--lambda", "0.2"])
    assert code == 1 and out == "" and "lambda" in err
    code, _, err = call(["schedule", "--r", "0.05", "--z", "0.1"])
    assert code == 1 and "trivial" in err


def test_usage_error_exit_2(capsys):
    assert call(["eval", "--bogus"])[0] == 2
    assert call(["nosuchcommand"])[0] == 2
    assert call([])[0] == 2
    assert call(["eval", "--threads", "0"])[0] == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("name", SUBCOMMANDS)
def test_help_lists_flags_with_defaults(name, capsys):
    assert call([name, "--help"])[0] == 0
    text = capsys.readouterr().out
    sub = build_parser()._subparsers._group_actions[0].choices[name]
    for action in sub._actions:
        for flag in action.option_strings:
            assert flag in text
        if action.option_strings and action.default is not None and action.help and "--help" not in action.option_strings:
            assert "default" in action.help or "(default:" in text


def test_output_file(tmp_path):
    path = tmp_path / "out.csv"
    code, out, _ = call(["bernoulli", "--samples", "1000", "--bins", "4", "--output", str(path)])
    assert code == 0 and out == ""
    data = path.read_bytes()
    assert data.startswith(b"bin_left,bin_right,density\n") and b"\r" not in data
