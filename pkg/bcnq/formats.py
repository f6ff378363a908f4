"""
文件格式读写

所有格式都是按行的文本：第一行（去掉注释和空行后）是格式标签，
'#' 之后为注释，下标一律从 1 开始。dump_* 输出规范形式，
对规范文件 dump(parse(text)) == text。
"""
from fractions import Fraction
from pathlib import Path

from bcnq.algebra import LogicalMatrix
from bcnq.errors import BcnError, FormatError, MalformedTable
from bcnq.models import CostSpec, OptimalSolution, StateFeedback, TruthTable, to_fraction
from bcnq.network import Bcn, decode
from bcnq.partitions import ClassMatrix, Partition

NETWORK_TAG = "bcnq-network v1"
PARTITION_TAG = "bcnq-partition v1"
CLASSES_TAG = "bcnq-classes v1"
COST_TAG = "bcnq-cost v1"
FEEDBACK_TAG = "bcnq-feedback v1"
SOLUTION_TAG = "bcnq-solution v1"
TRUTH_TABLE_TAG = "bcnq-truth-table v1"


class _Reader:
    """逐行读取，跳过空行与注释，出错时带行号"""

    def __init__(self, text: str, source: str):
        self.source = source
        self.lines = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            content = raw.split("#", 1)[0].strip()
            if content:
                self.lines.append((lineno, content))
        self.pos = 0
        self.lineno = self.lines[0][0] if self.lines else None

    def error(self, message: str, line: int | None = None) -> FormatError:
        return FormatError(message, self.source, line if line is not None else self.lineno)

    def has_more(self) -> bool:
        return self.pos < len(self.lines)

    def next_line(self, what: str) -> str:
        if not self.has_more():
            raise self.error(f"文件意外结束, 缺少 {what}")
        self.lineno, content = self.lines[self.pos]
        self.pos += 1
        return content

    def peek_keyword(self) -> str | None:
        if not self.has_more():
            return None
        return self.lines[self.pos][1].split()[0]

    def tag(self, expected: str) -> None:
        content = self.next_line("格式标签")
        if " ".join(content.split()) != expected:
            raise self.error(f"格式标签应为 '{expected}', 实际为 '{content}'")

    def row(self, keyword: str | None = None) -> list[str]:
        tokens = self.next_line(keyword or "数据行").split()
        if keyword is not None:
            if tokens[0] != keyword:
                raise self.error(f"应为 '{keyword} ...' 行, 实际为 '{tokens[0]}'")
            tokens = tokens[1:]
        return tokens

    def integer(self, keyword: str, minimum: int = 1) -> int:
        tokens = self.row(keyword)
        if len(tokens) != 1:
            raise self.error(f"'{keyword}' 行只能有一个整数")
        value = self.to_int(tokens[0])
        if value < minimum:
            raise self.error(f"'{keyword}' 必须 ≥ {minimum}, 实际为 {value}")
        return value

    def to_int(self, token: str) -> int:
        try:
            return int(token)
        except ValueError:
            raise self.error(f"不是整数: '{token}'") from None

    def indices(self, tokens, upper: int, what: str) -> list[int]:
        values = [self.to_int(t) for t in tokens]
        for v in values:
            if not 1 <= v <= upper:
                raise self.error(f"{what} {v} 超出 [1, {upper}]")
        return values

    def rationals(self, tokens) -> tuple[Fraction, ...]:
        try:
            return tuple(to_fraction(t) for t in tokens)
        except (ValueError, ZeroDivisionError):
            raise self.error(f"无法解析为有理数: {' '.join(tokens)}") from None

    def end(self) -> None:
        if self.has_more():
            self.lineno = self.lines[self.pos][0]
            raise self.error("存在多余的行")


def _join(values) -> str:
    return " ".join(str(v) for v in values)


def read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(f"无法读取文件: {e.strerror}", str(path)) from e


# ============ 真值表 ============

def parse_truth_table(text: str, source: str = "<string>") -> TruthTable:
    reader = _Reader(text, source)
    reader.tag(TRUTH_TABLE_TAG)
    n = reader.integer("n")
    m = reader.integer("m", minimum=0)
    expected = 2 ** (n + m)
    rows = []
    while reader.has_more():
        content = reader.next_line("真值表行")
        if "->" not in content:
            raise reader.error("真值表行应为 'u.. x.. -> f1..fn'")
        left, right = content.split("->", 1)
        if len(rows) >= expected:
            raise MalformedTable(f"{source}: 真值表应有 2^(n+m) = {expected} 行, 实际更多")
        inputs = tuple(reader.to_int(t) for t in left.split())
        if inputs != decode(len(rows) + 1, n + m):
            raise reader.error(
                f"第 {len(rows) + 1} 行的输入组合应为 {_join(decode(len(rows) + 1, n + m))}"
            )
        outputs = tuple(reader.to_int(t) for t in right.split())
        if len(outputs) != n or any(b not in (0, 1) for b in outputs):
            raise reader.error(f"输出应为 {n} 个 0/1 值")
        rows.append(outputs)
    if len(rows) != expected:
        raise MalformedTable(f"{source}: 真值表应有 2^(n+m) = {expected} 行, 实际 {len(rows)} 行")
    return TruthTable(n=n, m=m, rows=tuple(rows))


def dump_truth_table(tt: TruthTable) -> str:
    lines = [TRUTH_TABLE_TAG, f"n {tt.n}", f"m {tt.m}"]
    for r, outputs in enumerate(tt.rows, start=1):
        lines.append(f"{_join(decode(r, tt.n + tt.m))} -> {_join(outputs)}")
    return "\n".join(lines) + "\n"


# ============ 网络 ============

def parse_network(text: str, source: str = "<string>") -> Bcn:
    reader = _Reader(text, source)
    reader.tag(NETWORK_TAG)
    n = reader.integer("states")
    m = reader.integer("inputs")
    if reader.row("columns"):
        raise reader.error("'columns' 行之后才是数据")
    columns = []
    for _ in range(m):
        tokens = reader.row()
        if len(tokens) != n:
            raise reader.error(f"每个输入块应有 {n} 列, 实际 {len(tokens)} 列")
        columns.extend(reader.indices(tokens, n, "列下标"))
    reader.end()
    return Bcn.from_columns(n, m, columns)


def dump_network(bcn: Bcn) -> str:
    lines = [NETWORK_TAG, f"states {bcn.n_states}", f"inputs {bcn.n_inputs}", "columns"]
    for k in range(1, bcn.n_inputs + 1):
        lines.append(_join(bcn.input_block(k).col_index))
    return "\n".join(lines) + "\n"


# ============ 划分 / 类矩阵 ============

def parse_partition(text: str, source: str = "<string>") -> Partition:
    reader = _Reader(text, source)
    reader.tag(PARTITION_TAG)
    n = reader.integer("states")
    blocks = []
    while reader.has_more():
        blocks.append(tuple(reader.indices(reader.row(), n, "状态")))
    try:
        return Partition(n=n, blocks=tuple(blocks))
    except BcnError as e:
        raise reader.error(str(e)) from e


def dump_partition(p: Partition) -> str:
    lines = [PARTITION_TAG, f"states {p.n}"] + [_join(block) for block in p.blocks]
    return "\n".join(lines) + "\n"


def parse_classes(text: str, source: str = "<string>") -> ClassMatrix:
    reader = _Reader(text, source)
    reader.tag(CLASSES_TAG)
    n = reader.integer("states")
    k = reader.integer("classes")
    tokens = reader.row()
    if len(tokens) != n:
        raise reader.error(f"类分配向量应有 {n} 项, 实际 {len(tokens)} 项")
    labels = reader.indices(tokens, k, "类下标")
    reader.end()
    try:
        return ClassMatrix(matrix=LogicalMatrix(k, labels))
    except BcnError as e:
        raise reader.error(str(e)) from e


def dump_classes(c: ClassMatrix) -> str:
    lines = [CLASSES_TAG, f"states {c.n_states}", f"classes {c.n_classes}", _join(c.matrix.col_index)]
    return "\n".join(lines) + "\n"


# ============ 代价 ============

def parse_cost(text: str, source: str = "<string>") -> CostSpec:
    reader = _Reader(text, source)
    reader.tag(COST_TAG)
    n = reader.integer("states")
    m = reader.integer("inputs")
    table = []
    for _ in range(m):
        values = reader.rationals(reader.row("l"))
        if len(values) != n:
            raise reader.error(f"'l' 行应有 {n} 个值, 实际 {len(values)} 个")
        table.append(values)
    g = reader.rationals(reader.row("g"))
    if len(g) != n:
        raise reader.error(f"'g' 行应有 {n} 个值, 实际 {len(g)} 个")
    reader.end()
    return CostSpec(n_states=n, n_inputs=m, l=tuple(table), g=g)


def dump_cost(cost: CostSpec) -> str:
    lines = [COST_TAG, f"states {cost.n_states}", f"inputs {cost.n_inputs}"]
    lines += [f"l {_join(row)}" for row in cost.l]
    lines.append(f"g {_join(cost.g)}")
    return "\n".join(lines) + "\n"


# ============ 反馈 / 最优解 ============

def parse_feedback(text: str, source: str = "<string>") -> StateFeedback:
    reader = _Reader(text, source)
    reader.tag(FEEDBACK_TAG)
    n = reader.integer("states")
    m = reader.integer("inputs")
    tau = reader.integer("settling", minimum=0)
    law = reader.indices(reader.row("law"), m, "输入下标")
    classes = None
    if reader.peek_keyword() == "classes":
        classes = tuple(reader.indices(reader.row("classes"), n, "类下标"))
    reader.end()
    try:
        return StateFeedback(n_states=n, n_inputs=m, law=tuple(law), settling_bound=tau, classes=classes)
    except BcnError as e:
        raise reader.error(str(e)) from e


def dump_feedback(fb: StateFeedback) -> str:
    lines = [
        FEEDBACK_TAG,
        f"states {fb.n_states}",
        f"inputs {fb.n_inputs}",
        f"settling {fb.settling_bound}",
        f"law {_join(fb.law)}",
    ]
    if fb.classes is not None:
        lines.append(f"classes {_join(fb.classes)}")
    return "\n".join(lines) + "\n"


def _labelled(keyword: str, values) -> str:
    return f"{keyword} {_join(values)}" if values else keyword


def parse_solution(text: str, source: str = "<string>") -> OptimalSolution:
    reader = _Reader(text, source)
    reader.tag(SOLUTION_TAG)
    n = reader.integer("states")
    horizon = reader.integer("horizon", minimum=0)
    x0 = reader.integer("x0")
    cost = reader.rationals(reader.row("cost"))
    inputs = tuple(reader.to_int(t) for t in reader.row("inputs"))
    trajectory = tuple(reader.indices(reader.row("trajectory"), n, "状态"))
    if len(cost) != 1 or len(inputs) != horizon or len(trajectory) != horizon + 1:
        raise reader.error("cost / inputs / trajectory 的长度与 horizon 不符")
    values = []
    for _ in range(horizon + 1):
        row = reader.rationals(reader.row("value"))
        if len(row) != n:
            raise reader.error(f"'value' 行应有 {n} 个值")
        values.append(row)
    policy = []
    for _ in range(horizon):
        row = tuple(reader.to_int(t) for t in reader.row("policy"))
        if len(row) != n:
            raise reader.error(f"'policy' 行应有 {n} 个值")
        policy.append(row)
    reader.end()
    return OptimalSolution(
        x0=x0,
        horizon=horizon,
        inputs=inputs,
        trajectory=trajectory,
        cost=cost[0],
        value_table=tuple(values),
        policy=tuple(policy),
    )


def dump_solution(solution: OptimalSolution) -> str:
    lines = [
        SOLUTION_TAG,
        f"states {len(solution.value_table[0])}",
        f"horizon {solution.horizon}",
        f"x0 {solution.x0}",
        f"cost {solution.cost}",
        _labelled("inputs", solution.inputs),
        _labelled("trajectory", solution.trajectory),
    ]
    lines += [f"value {_join(row)}" for row in solution.value_table]
    lines += [f"policy {_join(row)}" for row in solution.policy]
    return "\n".join(lines) + "\n"
