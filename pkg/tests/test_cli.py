import json
import math
import subprocess
import sys
from fractions import Fraction

import pytest

from qwgt_lab.cli import main
from qwgt_lab.graph import graph_to_json, grid_graph, path_graph
from qwgt_lab.report import MethodResult, RunReport
from qwgt_lab.scalars import discrepancy, parse_scalar

TRIANGLE = {"vertices": 3, "edges": [[0, 1], [1, 2], [0, 2]]}


@pytest.fixture
def write(tmp_path):
    def _write(name, obj):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)

    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, (json.loads(out) if out else None), err


def test_z_eval_triangle(capsys, write):
    g = write("tri.json", TRIANGLE)
    code, out, _ = run_json(capsys, "z-eval", g, "--betaJ", "0.6931471805599453", "--method", "kernel")
    assert code == 0
    assert float(out["Z"]) == pytest.approx(19, rel=1e-14)
    assert float(out["logZ"]) == pytest.approx(math.log(19), rel=1e-14)
    assert out["kernel_dim"] == 1 and out["terms_evaluated"] == 2
    assert out["elapsed_ms"] is not None

    code, out, _ = run_json(capsys, "z-eval", g, "--lambda", "3/5", "--w", "111", "--no-timing")
    assert out["Z"] == "49/4" and out["elapsed_ms"] is None


@pytest.mark.parametrize("method", ["direct", "fourier", "kernel", "series", "qwgt"])
def test_z_eval_methods_agree(capsys, write, method):
    g = write("tri.json", TRIANGLE)
    code, out, _ = run_json(capsys, "z-eval", g, "--lambda", "3/5", "--method", method)
    assert code == 0 and out["Z"] == "19" and out["method"] == method


def test_z_eval_lambda_zero(capsys, write):
    G, _ = grid_graph(2, 3)
    g = write("grid.json", graph_to_json(G))
    code, out, _ = run_json(capsys, "z-eval", g, "--lambda", "0")
    assert code == 0 and out["Z"] == str(2**6)


def test_z_eval_complex_coupling(capsys, write):
    g = write("edge.json", {"vertices": 2, "edges": [[0, 1]]})
    code, out, _ = run_json(capsys, "z-eval", g, "--betaJ", '{"re": 0, "im": 0.5}')
    assert code == 0
    z = parse_scalar(out["Z"])
    assert abs(z - 4 * math.cos(0.5)) <= 1e-14


def test_direct_on_large_graph_hits_guard(capsys, write):
    g = write("path.json", graph_to_json(path_graph(25)))
    code, out, err = run(capsys, "z-eval", g, "--betaJ", "0.5", "--method", "direct")
    assert code == 3
    assert "instance too large" in err and "cap is" in err
    assert out == ""


def test_cap_flag_and_env(capsys, write, monkeypatch):
    G, _ = grid_graph(3, 3, periodic=True)
    g = write("torus.json", graph_to_json(G))
    code, _, err = run(capsys, "z-eval", g, "--betaJ", "0.5", "--cap", "64")
    assert code == 3 and "1024" in err
    monkeypatch.setenv("QWGT_LAB_CAP", "64")
    code, _, _ = run(capsys, "z-eval", g, "--betaJ", "0.5")
    assert code == 3


def test_zero_temperature_is_domain_error(capsys, write):
    g = write("tri.json", TRIANGLE)
    code, _, err = run(capsys, "z-eval", g, "--lambda", "1")
    assert code == 4 and "zero-temperature" in err


@pytest.mark.parametrize(
    "text",
    [
        '{"vertices": 3, "edges": [[0, 1],,]}',
        '{"vertices": 3',
        "",
        '{"vertices": 3, "edges": [[0, 0]]}',
        '{"vertices": 3, "edges": [[0, 1]], "w": [5]}',
    ],
)
def test_malformed_input_exits_2(capsys, write, text):
    g = write("bad.json", text)
    code, out, err = run(capsys, "z-eval", g, "--betaJ", "1")
    assert code == 2 and out == ""
    assert "bad.json" in err


def test_malformed_json_reports_location(capsys, write):
    g = write("bad.json", '{\n  "vertices": 3,\n  "edges": [[0, 1] [1, 2]]\n}')
    code, _, err = run(capsys, "z-eval", g, "--betaJ", "1")
    assert code == 2 and "bad.json:3:" in err


def test_bad_scalar_and_w_exit_2(capsys, write):
    g = write("tri.json", TRIANGLE)
    assert run(capsys, "z-eval", g, "--betaJ", "abc")[0] == 2
    assert run(capsys, "z-eval", g, "--betaJ", "1", "--w", "01")[0] == 2
    assert run(capsys, "z-eval", g, "--betaJ", '{"re": 1,')[0] == 2
    assert run(capsys, "z-eval", str(write("x", "{}")) + "-missing", "--betaJ", "1")[0] == 2


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["z-eval"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_qwgt_eval(capsys, write):
    inst = write("q.json", {"A": [[0, 0, 0]], "B": [[0, 0, 0], [1, 0, 0], [0, 1, 0]], "x": 1, "y": 1})
    code, out, _ = run_json(capsys, "qwgt-eval", inst, "--no-timing")
    assert code == 0
    values = {m["name"]: m["value"] for m in out["methods"]}
    # form b2 (b1 + b3) is odd for exactly two of the eight b, so S = 6 - 2
    assert values == {"kernel": "4", "bruteforce": "4"}
    assert out["bound_holds"] is True and out["n"] == 3
    assert out["discrepancies"] == [{"a": "kernel", "b": "bruteforce", "abs": 0.0, "rel": 0.0}]


def test_kl_sign_cli(capsys, write):
    m = write("i2.json", {"A": [[1, 0], [0, 1]]})
    code, out, _ = run_json(capsys, "kl-sign", m, "1", "2")
    assert code == 0
    assert (out["sign"], out["value"], out["promise_holds"]) == ("+", "4", True)
    bare = write("bare.json", [[1, 0], [0, 1]])
    assert run_json(capsys, "kl-sign", bare, "1", "2")[1]["value"] == "4"
    zero = write("z.json", {"A": [[0, 0], [0, 0]]})
    code, _, err = run(capsys, "kl-sign", zero, "1", "1")
    assert code == 4 and "diag" in err


def test_kauffman_cli(capsys, write):
    A = {"re": math.cos(math.pi / 8), "im": math.sin(math.pi / 8)}
    f = write("k.json", {"lattice": {"vertices": 2, "edges": [[0, 1]]}, "crossings": [1], "A": A})
    code, out, _ = run_json(capsys, "kauffman", f)
    assert code == 0
    value = parse_scalar(out["value"])
    assert abs(value - (2 + 2j)) <= 1e-12
    assert {m["name"] for m in out["methods"]} == {"qwgt", "potts_direct"}
    assert out["discrepancies"][0]["rel"] <= 1e-12
    assert out["bracket_up_to_constant"] is True
    assert abs(parse_scalar(out["q"]) - 2) <= 1e-12


def test_kernel_basis_cli(capsys, write):
    code, out, _ = run_json(capsys, "kernel-basis", write("tri.json", TRIANGLE))
    assert code == 0 and out["dim"] == 1 and out["basis"] == [[1, 1, 1]] and out["source"] == "incidence"
    code, out, _ = run_json(capsys, "kernel-basis", write("q.json", {"A": [], "B": [[0, 0], [0, 0]]}))
    assert out["dim"] == 2 and out["source"] == "A"
    assert run(capsys, "kernel-basis", write("n.json", {"x": 1}))[0] == 2


def test_series_cli(capsys, write):
    g = write("tri.json", TRIANGLE)
    code, out, _ = run_json(capsys, "series", g, "--lambda", "3/5", "--order", "3")
    assert code == 0
    assert out["coefficients"] == [1, 0, 0, 1]
    assert out["exact"] == "19"
    assert out["partial_sums"][0] == out["partial_sums"][2]
    code, out, _ = run_json(capsys, "series", g, "--lambda", "3/5", "--order", "1")
    assert out["exact"] is None


def test_verify_triangle_passes(capsys, write):
    g = write("tri.json", TRIANGLE)
    code, out, _ = run_json(capsys, "verify", g, "--trials", "50", "--seed", "3")
    assert code == 0 and out["passed"]
    assert out["max_discrepancy"] < 1e-10
    assert set(out["methods"]) == {"direct", "fourier", "kernel", "qwgt", "series"}


def test_verify_is_byte_identical(capsys, write, tmp_path):
    G, _ = grid_graph(2, 3)
    g = write("grid.json", graph_to_json(G))
    outputs = []
    for threads in ("1", "1", "3"):
        code, out, _ = run(capsys, "verify", g, "--trials", "10", "--seed", "11", "--no-timing", "--threads", threads)
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1] == outputs[2]

    j1, j2 = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "z-eval", g, "--betaJ", "0.3", "--no-timing", "--json-out", str(j1))
    run(capsys, "z-eval", g, "--betaJ", "0.3", "--no-timing", "--json-out", str(j2), "--threads", "2")
    assert j1.read_bytes() == j2.read_bytes()


def test_verify_zero_tolerance_fails_and_dumps(capsys, write, tmp_path):
    G, _ = grid_graph(3, 3)
    g = write("grid.json", graph_to_json(G))
    dump = tmp_path / "fail.json"
    code, out, _ = run_json(capsys, "verify", g, "--trials", "5", "--tolerance", "0", "--dump", str(dump))
    assert code == 1 and not out["passed"]
    failure = json.loads(dump.read_text())
    assert failure["tolerance"] == 0 and failure["max_rel"] > 0
    assert failure["instance"]["vertices"] == 9 and len(failure["instance"]["w"]) == G.num_edges


def test_report_discrepancies_recompute():
    rep = RunReport("t")
    rep.add(MethodResult("a", Fraction(19)))
    rep.add(MethodResult("b", 19.000000000000004))
    rep.add(MethodResult("c", complex(19, 1e-13)))
    js = rep.to_json()
    values = {m["name"]: parse_scalar(m["value"]) for m in js["methods"]}
    for d in js["discrepancies"]:
        assert d["rel"] == discrepancy(values[d["a"]], values[d["b"]])
    assert rep.max_discrepancy() == max(d["rel"] for d in js["discrepancies"])


def test_module_entry_point(write):
    g = write("tri.json", TRIANGLE)
    proc = subprocess.run(
        [sys.executable, "-m", "qwgt_lab", "z-eval", g, "--lambda", "3/5", "--method", "direct"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["Z"] == "19"
    proc = subprocess.run(
        [sys.executable, "-m", "qwgt_lab", "z-eval", g, "--lambda", "1"], capture_output=True, text=True
    )
    assert proc.returncode == 4
