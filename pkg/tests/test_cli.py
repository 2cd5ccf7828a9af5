import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from prime_ldp.cli import main
from prime_ldp.experiments import load_edge_list, read_pi_csv, write_pi_csv

DATA = Path(__file__).parent / "data"
GRAPH = str(DATA / "tiny_two_block.txt")


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_csv_is_byte_identical(tmp_path, capsys):
    argv = ["simulate", "--n", "200", "--bn", "4,5", "--eps", "6,inf", "--reps", "2", "--seed", "7"]
    assert run(argv + ["--out", str(tmp_path / "a")], capsys)[0] == 0
    assert run(argv + ["--out", str(tmp_path / "b")], capsys)[0] == 0
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_simulate_svg(tmp_path, capsys):
    argv = ["simulate", "--n", "200", "--bn", "4,5", "--eps", "6,8", "--reps", "1", "--seed", "1",
            "--out", str(tmp_path), "--formats", "csv,svg"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert {Path(p).name for p in out.split()} == {"sweep.csv", "loss_vs_bn.svg", "loss_vs_eps.svg"}


def test_simulate_requires_seed(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--out", str(tmp_path)])
    assert info.value.code == 1


def test_unknown_format_is_usage_error(tmp_path, capsys):
    code, _, err = run(["simulate", "--seed", "1", "--out", str(tmp_path), "--formats", "png",
                        "--n", "50", "--reps", "1"], capsys)
    assert code == 1 and "png" in err


def test_bad_epsilon_is_usage_error(tmp_path, capsys):
    code, _, _ = run(["privatize", GRAPH, str(tmp_path / "o.txt"), "--epsilon", "-1"], capsys)
    assert code == 1


def test_missing_input_is_data_error(tmp_path, capsys):
    code, _, err = run(["estimate", str(tmp_path / "nope.txt"), str(tmp_path / "pi.csv"), "--K", "2"],
                       capsys)
    assert code == 2 and "data error" in err


def test_malformed_edge_list_is_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n3\n")
    code, _, err = run(["estimate", str(bad), str(tmp_path / "pi.csv"), "--K", "2"], capsys)
    assert code == 2 and "line 2" in err


def test_privatize_then_estimate(tmp_path, capsys):
    rel = tmp_path / "released.txt"
    assert run(["privatize", GRAPH, str(rel), "--epsilon", "4", "--seed", "2"], capsys)[0] == 0
    released = load_edge_list(rel)
    assert released.n <= 120
    pi_path = tmp_path / "pi.csv"
    code, out, _ = run(["estimate", str(rel), str(pi_path), "--K", "2", "--already-private", "4"], capsys)
    assert code == 0
    labels, pi = read_pi_csv(pi_path)
    assert pi.shape == (released.n, 2)
    np.testing.assert_allclose(pi.sum(1), 1.0, atol=1e-12)


def test_estimate_with_labels(tmp_path, capsys):
    lab = tmp_path / "labels.csv"
    code, out, _ = run(["estimate", GRAPH, str(tmp_path / "pi.csv"), "--K", "2", "--epsilon", "4",
                        "--labels", str(lab), "--scheme", "five_bin"], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["n"] == 120 and summary["edges"] == 816
    rows = lab.read_text().splitlines()
    assert rows[0] == "node,label" and len(rows) == 121


def test_estimate_flags_exclusive(tmp_path, capsys):
    code, _, _ = run(["estimate", GRAPH, str(tmp_path / "pi.csv"), "--K", "2", "--epsilon", "4",
                      "--already-private", "4"], capsys)
    assert code == 1


def test_evaluate(tmp_path, capsys):
    labels = ["a", "b"]
    write_pi_csv(tmp_path / "est.csv", labels, np.array([[0.9, 0.1], [0.2, 0.8]]))
    write_pi_csv(tmp_path / "true.csv", labels[::-1], np.array([[0.0, 1.0], [1.0, 0.0]]))
    code, out, _ = run(["evaluate", str(tmp_path / "est.csv"), str(tmp_path / "true.csv")], capsys)
    assert code == 0
    assert abs(json.loads(out)["loss"] - 0.3) < 1e-15


def test_evaluate_shape_mismatch(tmp_path, capsys):
    write_pi_csv(tmp_path / "a.csv", ["x"], np.array([[0.5, 0.5]]))
    write_pi_csv(tmp_path / "b.csv", ["x"], np.array([[0.2, 0.3, 0.5]]))
    assert run(["evaluate", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")], capsys)[0] == 2


@pytest.mark.parametrize("mode", ["literal", "expected"])
def test_diagnose(mode, capsys):
    code, out, _ = run(["diagnose", "--n", "400", "--bn", "6", "--epsilon", "4",
                        "--degree-mode", mode], capsys)
    assert code == 0
    doc = json.loads(out)
    assert set(doc["audit"]) >= {"community_mass_ok", "alpha_ok", "beta_ok"}
    if doc["theory"] is not None:
        assert doc["theory"]["lower_integral"] <= doc["theory"]["risk_integral"]


def test_curve(capsys):
    code, out, _ = run(["curve", GRAPH, "--K", "2", "--eps", "2,40", "--reps", "2"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "epsilon,mean_distance,reps,failures,max_tau" and len(lines) == 3


def test_numerical_failure_exit_code(tmp_path, capsys):
    # an edgeless graph cannot be regularized
    g = tmp_path / "iso.txt"
    g.write_text("".join(f"{i} {i}\n" for i in range(6)))
    code, _, err = run(["estimate", str(g), str(tmp_path / "pi.csv"), "--K", "2"], capsys)
    assert code == 3 and "numerical failure" in err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "prime_ldp", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "simulate" in out.stdout
