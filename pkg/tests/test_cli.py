"""命令行测试"""
import io
import json
from contextlib import redirect_stderr, redirect_stdout

from bcnq.cli import UsageError, main, parse_index_list
from bcnq.control import verify_stabilizes
from bcnq.data import example1_truth_table, lac_operon_network, lac_operon_target
from bcnq.formats import dump_network, dump_truth_table, parse_feedback, parse_partition, parse_solution
from bcnq.network import Bcn

EXAMPLE1_NETWORK_TEXT = """bcnq-network v1
states 8
inputs 2
columns
2 1 1 5 6 7 8 5
1 1 1 8 6 7 8 7
"""


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def test_parse_index_list():
    assert parse_index_list("1,5-8") == [1, 5, 6, 7, 8]
    assert parse_index_list("387") == [387]
    assert parse_index_list(" 2, 3 ,") == [2, 3]
    assert parse_index_list("4-4") == [4]
    for bad in ("1,x", "3-1", "8-5,2"):
        try:
            parse_index_list(bad)
        except UsageError:
            continue
        raise AssertionError(f"应当拒绝 '{bad}'")


def test_convert_builtin_to_file(tmp_path):
    out = tmp_path / "example1.bcn"
    code, stdout, _ = _run("convert", "builtin:example1", "-o", str(out))
    assert code == 0
    assert out.read_text(encoding="utf-8") == EXAMPLE1_NETWORK_TEXT
    assert "N=8, M=2" in stdout


def test_convert_file_to_stdout(tmp_path):
    table = tmp_path / "example1.tt"
    table.write_text(dump_truth_table(example1_truth_table()), encoding="utf-8")
    code, stdout, stderr = _run("convert", str(table))
    assert code == 0
    assert stdout == EXAMPLE1_NETWORK_TEXT
    assert "[Convert]" in stderr


def test_refine_example3():
    code, stdout, stderr = _run("refine", "builtin:example1", "builtin:example3")
    assert code == 0
    assert parse_partition(stdout).blocks == ((1,), (2, 3), (4,), (5, 6, 7, 8))
    assert "k*=2" in stderr


def test_refine_json_summary(tmp_path):
    out = tmp_path / "r.part"
    code, stdout, _ = _run("--format", "json", "refine", "builtin:example1", "builtin:example3", "-o", str(out))
    assert code == 0
    summary = json.loads(stdout)
    assert summary == {"command": "refine", "k_star": 2, "seed_blocks": 3, "blocks": 4}


def test_quotient_rejects_non_congruence():
    code, stdout, stderr = _run("quotient", "builtin:example1", "builtin:example3")
    assert code == 2
    assert stdout == ""
    assert "u=1" in stderr


def test_quotient_with_classes_out(tmp_path):
    classes = tmp_path / "classes.txt"
    code, stdout, _ = _run(
        "quotient", "builtin:example1", "builtin:example1",
        "--class-order", "lexicographic", "--classes-out", str(classes),
    )
    assert code == 0
    assert "1 1 4 3\n1 1 4 4\n" in stdout
    assert classes.read_text(encoding="utf-8").endswith("4 3 3 2 1 1 1 1\n")


def test_stabilize_lac_operon(tmp_path):
    out = tmp_path / "k.fb"
    code, stdout, _ = _run("stabilize", "builtin:lac-operon", "--target", "387",
                           "--class-order", "lexicographic", "-o", str(out))
    assert code == 0
    assert "τ=3" in stdout
    fb = parse_feedback(out.read_text(encoding="utf-8"))
    assert fb.classes is not None
    assert verify_stabilizes(lac_operon_network(), fb, lac_operon_target())


def test_stabilize_direct_mode(tmp_path):
    out = tmp_path / "k.fb"
    code, _, _ = _run("stabilize", "builtin:example1", "--target", "1,5-8", "--direct", "-o", str(out))
    assert code == 0
    fb = parse_feedback(out.read_text(encoding="utf-8"))
    assert fb.law == (2, 1, 1, 1, 1, 1, 1, 1)
    assert fb.classes is None


def test_stabilize_unreachable_target(tmp_path):
    network = tmp_path / "counter.bcn"
    network.write_text(dump_network(Bcn.from_columns(4, 2, [1, 1, 4, 3, 1, 2, 4, 3])), encoding="utf-8")
    code, stdout, stderr = _run("--format", "json", "stabilize", str(network), "--target", "1")
    assert code == 2
    assert stdout == ""
    summary = json.loads(stderr.strip().splitlines()[-1])
    assert summary["stabilizable"] is False
    assert summary["unstabilizable"] == [3, 4]


def test_optctl_lac_operon(tmp_path):
    out = tmp_path / "sol.txt"
    code, stdout, _ = _run("--format", "json", "optctl", "builtin:lac-operon", "builtin:lac-operon",
                           "--x0", "10", "--horizon", "3", "--class-order", "lexicographic", "-o", str(out))
    assert code == 0
    summary = json.loads(stdout)
    assert summary["cost"] == "5"
    assert summary["inputs"] == [2, 2, 1]
    assert summary["quotient_states"] == 12
    solution = parse_solution(out.read_text(encoding="utf-8"))
    assert solution.inputs == (2, 2, 1)
    assert solution.cost == 5


def test_optctl_direct_matches_quotient(tmp_path):
    direct, via = tmp_path / "direct.txt", tmp_path / "via.txt"
    assert _run("optctl", "builtin:example1", str(_example_cost(tmp_path)),
                "--x0", "4", "--horizon", "3", "--direct", "-o", str(direct))[0] == 0
    assert _run("optctl", "builtin:example1", str(_example_cost(tmp_path)),
                "--x0", "4", "--horizon", "3", "-o", str(via))[0] == 0
    assert direct.read_text(encoding="utf-8") == via.read_text(encoding="utf-8")


def _example_cost(tmp_path):
    path = tmp_path / "cost.txt"
    path.write_text(
        "bcnq-cost v1\nstates 8\ninputs 2\nl 0 1 1 0 2 2 2 2\nl 1 1 1 1 1 1 1 1\ng 0 3 3 1 4 4 4 4\n",
        encoding="utf-8",
    )
    return path


def test_simulate_open_loop():
    code, stdout, _ = _run("simulate", "builtin:example1", "--x0", "1", "--inputs", "1,1")
    assert code == 0
    assert stdout == "trajectory 1 2 1\n"


def test_simulate_closed_loop(tmp_path):
    fb = tmp_path / "k.fb"
    fb.write_text("bcnq-feedback v1\nstates 8\ninputs 2\nsettling 0\nlaw 2 2 2 2 2 2 2 2\n", encoding="utf-8")
    code, stdout, _ = _run("--format", "json", "simulate", "builtin:example1", "--x0", "3",
                           "--feedback", str(fb), "--steps", "2")
    assert code == 0
    assert json.loads(stdout) == {"command": "simulate", "trajectory": [3, 1, 1]}


def test_usage_errors(tmp_path):
    assert _run("simulate", "builtin:example1", "--x0", "1")[0] == 1
    assert _run("stabilize", "builtin:example1", "--target", "1", "--direct", "--via-quotient")[0] == 1
    assert _run("frobnicate")[0] == 1
    assert _run("refine", "builtin:nonexistent", "builtin:example3")[0] == 1
    assert _run("refine", str(tmp_path / "missing.bcn"), "builtin:example3")[0] == 1
    assert _run("--workers", "0", "refine", "builtin:example1", "builtin:example3")[0] == 1
    assert _run("--seed", "-1", "bench", "--count", "1", "--n-bits", "2", "--m-bits", "1")[0] == 1
    assert _run("bench", "--count", "1", "--n-bits", "2", "--m-bits", "1", "--k", "0")[0] == 1
    code, _, stderr = _run("stabilize", "builtin:example1", "--target", "3-1")
    assert code == 1
    assert "3-1" in stderr
    code, _, stderr = _run("stabilize", "builtin:example1", "--target", "9")
    assert code == 1
    assert "9" in stderr


def test_bench_small(tmp_path):
    out = tmp_path / "bench.json"
    code, _, _ = _run("--format", "json", "--seed", "3", "bench", "--count", "2", "--n-bits", "3",
                      "--m-bits", "1", "--k", "1", "4", "--horizon", "4", "-o", str(out))
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["config"]["seed"] == 3
    assert len(report["records"]) == 2 * 3
    assert all(r["results_match"] for r in report["records"])
