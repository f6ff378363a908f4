"""
状态集上的等价关系

划分 ↔ 关系矩阵 A_𝓡 ↔ 类矩阵 C 之间的转换，以及同余条件检查
（同一块内的状态在每个输入下后继都落在同一块）。
"""
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from bcnq.algebra import BooleanMatrix, LogicalMatrix
from bcnq.errors import DimensionMismatch, IndexOutOfRange, InvalidPartition
from bcnq.models import ClassOrder
from bcnq.network import Bcn


class Partition(BaseModel):
    """
    状态集 [1, n] 的划分

    构造时自动规范化：块内升序，块按最小元升序排列。
    """
    model_config = ConfigDict(frozen=True)

    n: int
    blocks: tuple[tuple[int, ...], ...]

    @model_validator(mode="before")
    @classmethod
    def _canonicalize(cls, data):
        if not isinstance(data, dict):
            return data
        n = int(data["n"])
        blocks = [tuple(sorted(int(x) for x in block)) for block in data["blocks"]]
        if n < 1:
            raise InvalidPartition(f"状态数必须为正: {n}")
        seen = set()
        for block in blocks:
            if not block:
                raise InvalidPartition("划分中不能有空块")
            for x in block:
                if not 1 <= x <= n:
                    raise IndexOutOfRange(f"状态 {x} 超出 [1, {n}]")
                if x in seen:
                    raise InvalidPartition(f"状态 {x} 出现在多个块中")
                seen.add(x)
        if len(seen) != n:
            missing = sorted(set(range(1, n + 1)) - seen)
            raise InvalidPartition(f"划分未覆盖全部状态, 缺少 {missing[:5]}")
        blocks.sort(key=lambda b: b[0])
        return {"n": n, "blocks": tuple(blocks)}

    @classmethod
    def identity(cls, n: int) -> "Partition":
        return cls(n=n, blocks=tuple((x,) for x in range(1, n + 1)))

    @classmethod
    def single_block(cls, n: int) -> "Partition":
        return cls(n=n, blocks=(tuple(range(1, n + 1)),))

    @classmethod
    def from_labels(cls, labels: Sequence) -> "Partition":
        """labels[x-1] 相同的状态归为一块，标签本身的取值无关紧要"""
        groups: dict = {}
        for x, label in enumerate(labels, start=1):
            groups.setdefault(label, []).append(x)
        return cls(n=len(labels), blocks=tuple(tuple(g) for g in groups.values()))

    def __len__(self) -> int:
        return len(self.blocks)

    def labels(self) -> np.ndarray:
        """每个状态所在块的编号（从 0 开始，规范块序）"""
        out = np.empty(self.n, dtype=np.int64)
        for q, block in enumerate(self.blocks):
            out[np.asarray(block) - 1] = q
        return out

    def block_of(self, x: int) -> tuple[int, ...]:
        if not 1 <= x <= self.n:
            raise IndexOutOfRange(f"状态 {x} 超出 [1, {self.n}]")
        return self.blocks[int(self.labels()[x - 1])]


class ClassMatrix(BaseModel):
    """类矩阵 C（Ñ×N，满行秩）：Cx = Cx' 当且仅当 x 与 x' 同类"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: LogicalMatrix

    @model_validator(mode="after")
    def _check(self) -> "ClassMatrix":
        if not self.matrix.is_full_row_rank():
            raise InvalidPartition("类矩阵不是满行秩: 存在没有成员的类")
        return self

    @property
    def n_classes(self) -> int:
        return self.matrix.rows

    @property
    def n_states(self) -> int:
        return self.matrix.cols

    def class_of(self, x: int) -> int:
        return self.matrix.column(x)

    def members(self, q: int) -> tuple[int, ...]:
        if not 1 <= q <= self.n_classes:
            raise IndexOutOfRange(f"类 {q} 超出 [1, {self.n_classes}]")
        return tuple(int(x) + 1 for x in np.flatnonzero(self.matrix.indices == q - 1))

    def representatives(self) -> tuple[int, ...]:
        """每个类的最小成员，按类编号排列"""
        reps = [0] * self.n_classes
        for x in range(self.n_states, 0, -1):
            reps[self.matrix.col_index[x - 1] - 1] = x
        return tuple(reps)

    def project(self, states) -> tuple[int, ...]:
        """C·x(t)，逐项映射"""
        return tuple(self.class_of(int(x)) for x in states)


# ============ 转换 ============

def relation_matrix(p: Partition) -> BooleanMatrix:
    """A_𝓡：(A)_ij = 1 当且仅当 i 与 j 同块"""
    labels = p.labels()
    return BooleanMatrix.from_dense(labels[:, None] == labels[None, :])


def class_matrix(p: Partition, order: ClassOrder = ClassOrder.FIRST_OCCURRENCE) -> ClassMatrix:
    """
    A_𝓡 去掉重复行得到 C

    FIRST_OCCURRENCE：按首次出现保留，即类按最小成员升序。
    LEXICOGRAPHIC：不同行按字典序升序，即类按最小成员降序。
    """
    labels = p.labels()
    if ClassOrder(order) is ClassOrder.LEXICOGRAPHIC:
        labels = len(p) - 1 - labels
    return ClassMatrix(matrix=LogicalMatrix(len(p), labels + 1))


def partition_from_class_matrix(c: ClassMatrix | LogicalMatrix) -> Partition:
    matrix = c.matrix if isinstance(c, ClassMatrix) else c
    return Partition.from_labels(matrix.col_index)


def partition_from_relation(a: BooleanMatrix) -> Partition:
    """
    关系矩阵 → 划分

    要求 A 是等价关系：自反，且 A_ij = 1 当且仅当第 i、j 行相同。
    """
    if a.rows != a.cols:
        raise DimensionMismatch(f"关系矩阵必须是方阵: {a.shape}")
    dense = a.to_dense()
    if not np.all(np.diag(dense)):
        raise InvalidPartition("关系不是自反的")
    _, inverse = np.unique(a.packed, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    if not np.array_equal(dense, inverse[:, None] == inverse[None, :]):
        raise InvalidPartition("关系不是对称传递的, 不是等价关系")
    return Partition.from_labels(inverse.tolist())


def relation_from_pairs(n: int, pairs) -> BooleanMatrix:
    dense = np.zeros((n, n), dtype=bool)
    for a, b in pairs:
        dense[a - 1, b - 1] = True
    return BooleanMatrix.from_dense(dense)


def relation_pairs(p: Partition) -> set[tuple[int, int]]:
    return {(a, b) for block in p.blocks for a in block for b in block}


# ============ 判定 ============

class CongruenceCheck(BaseModel):
    """同余检查结果；失败时 witness = (u, a, b)"""
    model_config = ConfigDict(frozen=True)

    holds: bool
    witness: tuple[int, int, int] | None = None

    def __bool__(self) -> bool:
        return self.holds


def is_congruence(bcn: Bcn, p: Partition) -> CongruenceCheck:
    """
    检查每个块在每个输入下的像是否落在同一块内

    失败时返回最小的违例输入 u，以及该输入下最小的违例状态 b
    和 b 所在块的最小成员 a。
    """
    if p.n != bcn.n_states:
        raise DimensionMismatch(f"划分的状态数 {p.n} 与网络 {bcn.n_states} 不一致")
    labels = p.labels()
    first = np.asarray([block[0] - 1 for block in p.blocks])
    table = bcn.successors()
    for u in range(bcn.n_inputs):
        image = labels[table[u]]
        bad = np.flatnonzero(image != image[first][labels])
        if bad.size:
            b = int(bad[0])
            return CongruenceCheck(holds=False, witness=(u + 1, int(first[labels[b]]) + 1, b + 1))
    return CongruenceCheck(holds=True)


def refines(p: Partition, q: Partition) -> bool:
    """p 的每个块都包含在 q 的某个块中"""
    if p.n != q.n:
        raise DimensionMismatch(f"划分的状态数不一致: {p.n} vs {q.n}")
    q_labels = q.labels()
    return all(len({int(q_labels[x - 1]) for x in block}) == 1 for block in p.blocks)
