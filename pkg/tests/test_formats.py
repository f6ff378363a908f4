"""文件格式测试"""
from fractions import Fraction

from bcnq.control import optimal_control
from bcnq.data import EXAMPLE1_PARTITION, LAC_OPERON_NETWORK, example1_network, example1_truth_table, example4_cost
from bcnq.errors import FormatError, MalformedTable
from bcnq.formats import (
    dump_classes,
    dump_cost,
    dump_feedback,
    dump_network,
    dump_partition,
    dump_solution,
    dump_truth_table,
    parse_classes,
    parse_cost,
    parse_feedback,
    parse_network,
    parse_partition,
    parse_solution,
    parse_truth_table,
    read_text,
)
from bcnq.models import CostSpec, StateFeedback
from bcnq.partitions import class_matrix

EXAMPLE1_NETWORK_TEXT = """bcnq-network v1
states 8
inputs 2
columns
2 1 1 5 6 7 8 5
1 1 1 8 6 7 8 7
"""


def _format_error(fn, text):
    try:
        fn(text, "bad.txt")
    except FormatError as e:
        return e
    raise AssertionError("应当抛出 FormatError")


def test_network_canonical_dump():
    assert dump_network(example1_network()) == EXAMPLE1_NETWORK_TEXT
    assert parse_network(EXAMPLE1_NETWORK_TEXT) == example1_network()


def test_network_with_comments_and_blank_lines():
    text = "# 例 1\n\nbcnq-network v1\nstates 8   # N\ninputs 2\ncolumns\n2 1 1 5 6 7 8 5\n\n1 1 1 8 6 7 8 7  # u=2\n"
    bcn = parse_network(text)
    assert bcn == example1_network()
    assert dump_network(bcn) == EXAMPLE1_NETWORK_TEXT


def test_bundled_lac_network_is_canonical_after_comments():
    text = read_text(LAC_OPERON_NETWORK)
    bcn = parse_network(text)
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#")) + "\n"
    assert dump_network(bcn) == body


def test_network_errors_carry_line_numbers():
    e = _format_error(parse_network, "bcnq-network v1\nstates 2\ninputs 1\ncolumns\n1 3\n")
    assert e.line == 5
    assert e.source == "bad.txt"
    assert "bad.txt:5" in str(e)

    e = _format_error(parse_network, "bcnq-network v1\nstates 2\ninputs 1\ncolumns\n1 2 1\n")
    assert e.line == 5

    e = _format_error(parse_network, "bcnq-network v1\nstates two\n")
    assert e.line == 2

    e = _format_error(parse_network, "bcnq-partition v1\nstates 2\n")
    assert e.line == 1

    e = _format_error(parse_network, "bcnq-network v1\nstates 2\ninputs 1\ncolumns\n1 2\n1 2\n")
    assert e.line == 6

    e = _format_error(parse_network, "bcnq-network v1\nstates 2\ninputs 2\ncolumns\n1 2\n")
    assert "文件意外结束" in str(e)


def test_truth_table_round_trip_on_bundled_file():
    tt = example1_truth_table()
    assert tt.n == 3 and tt.m == 1
    assert parse_truth_table(dump_truth_table(tt)) == tt


def test_truth_table_rejects_wrong_input_order():
    text = "bcnq-truth-table v1\nn 1\nm 0\n0 -> 1\n1 -> 0\n"
    e = _format_error(parse_truth_table, text)
    assert e.line == 4


def test_truth_table_wrong_row_count():
    text = "bcnq-truth-table v1\nn 1\nm 1\n1 1 -> 1\n1 0 -> 0\n0 1 -> 1\n"
    try:
        parse_truth_table(text)
    except MalformedTable as e:
        assert "2^(n+m) = 4" in str(e)
    else:
        raise AssertionError("应当抛出 MalformedTable")


def test_partition_format():
    text = dump_partition(EXAMPLE1_PARTITION)
    assert text == "bcnq-partition v1\nstates 8\n1\n2 3\n4\n5 6 7 8\n"
    assert parse_partition(text) == EXAMPLE1_PARTITION
    # 块的书写顺序与块内顺序无关
    assert parse_partition("bcnq-partition v1\nstates 8\n8 7 6 5\n4\n3 2\n1\n") == EXAMPLE1_PARTITION
    e = _format_error(parse_partition, "bcnq-partition v1\nstates 3\n1 2\n2 3\n")
    assert "多个块" in str(e)


def test_classes_format():
    c = class_matrix(EXAMPLE1_PARTITION)
    text = dump_classes(c)
    assert text == "bcnq-classes v1\nstates 8\nclasses 4\n1 2 2 3 4 4 4 4\n"
    assert parse_classes(text) == c
    _format_error(parse_classes, "bcnq-classes v1\nstates 3\nclasses 3\n1 1 2\n")


def test_cost_format():
    cost = CostSpec(n_states=2, n_inputs=2, l=((1, "1/2"), (0, 3)), g=("5/4", 0))
    text = dump_cost(cost)
    assert text == "bcnq-cost v1\nstates 2\ninputs 2\nl 1 1/2\nl 0 3\ng 5/4 0\n"
    assert parse_cost(text) == cost
    assert parse_cost("bcnq-cost v1\nstates 2\ninputs 1\nl 0.5 1\ng 0 0\n").l == ((Fraction(1, 2), 1),)
    assert parse_cost(dump_cost(example4_cost())) == example4_cost()
    e = _format_error(parse_cost, "bcnq-cost v1\nstates 2\ninputs 1\nl 1 x\ng 0 0\n")
    assert e.line == 4


def test_feedback_format():
    fb = StateFeedback(n_states=3, n_inputs=2, law=(2, 1, 1), settling_bound=2, classes=(1, 1, 2))
    text = dump_feedback(fb)
    assert text == "bcnq-feedback v1\nstates 3\ninputs 2\nsettling 2\nlaw 2 1 1\nclasses 1 1 2\n"
    assert parse_feedback(text) == fb
    plain = fb.model_copy(update={"classes": None})
    assert parse_feedback(dump_feedback(plain)) == plain
    _format_error(parse_feedback, "bcnq-feedback v1\nstates 3\ninputs 2\nsettling 0\nlaw 2 1 3\n")


def test_solution_format():
    cost = CostSpec(n_states=8, n_inputs=2, l=((0,) * 8, (1,) * 8), g=(0,) + ("1/2",) * 7)
    solution = optimal_control(example1_network(), cost, x0=4, horizon=2)
    text = dump_solution(solution)
    assert text.startswith("bcnq-solution v1\nstates 8\nhorizon 2\nx0 4\n")
    assert parse_solution(text) == solution


def test_solution_with_zero_horizon():
    cost = CostSpec(n_states=8, n_inputs=2, l=((0,) * 8, (0,) * 8), g=(3,) * 8)
    solution = optimal_control(example1_network(), cost, x0=1, horizon=0)
    text = dump_solution(solution)
    assert "\ninputs\n" in text
    assert parse_solution(text) == solution


def test_read_text_missing_file(tmp_path):
    try:
        read_text(tmp_path / "missing.bcn")
    except FormatError as e:
        assert "missing.bcn" in str(e)
    else:
        raise AssertionError("应当抛出 FormatError")
