"""
逻辑矩阵代数

功能:
1. 规范向量 δ_k^i 与逻辑矩阵（只存每列 1 所在的行号，从 1 开始）
2. 0/1 布尔矩阵（numpy 按行打包成位串），布尔积 ⊙ 与逐元素交 ∧
3. 精确有理矩阵（fractions.Fraction），Kronecker 积与半张量积 ⋉
4. 满行秩逻辑矩阵的伪逆 C⁺ = Cᵀ(CCᵀ)⁻¹
"""
import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from bcnq.errors import DimensionMismatch, IndexOutOfRange, RankDeficient

# 一般布尔积每批处理的字节上限
_CHUNK_BYTES = 1 << 24


class CanonicalVector(BaseModel):
    """规范向量 δ_dim^index"""
    model_config = ConfigDict(frozen=True)

    dim: int
    index: int

    @model_validator(mode="after")
    def _check(self) -> "CanonicalVector":
        if self.dim < 1:
            raise DimensionMismatch(f"规范向量维数必须为正: {self.dim}")
        if not 1 <= self.index <= self.dim:
            raise IndexOutOfRange(f"δ_{self.dim}^{self.index}: 下标超出 [1, {self.dim}]")
        return self

    def as_matrix(self) -> "LogicalMatrix":
        return LogicalMatrix(self.dim, [self.index])


def delta(k: int, i: int) -> "LogicalMatrix":
    """δ_k^i，作为 k×1 逻辑矩阵"""
    return CanonicalVector(dim=k, index=i).as_matrix()


class LogicalMatrix:
    """
    逻辑矩阵 𝓛^{rows×cols}

    第 j 列为 δ_rows^{col_index[j-1]}。不可变。
    """
    __slots__ = ("rows", "cols", "col_index", "_indices")

    def __init__(self, rows: int, col_index: Iterable[int]):
        cols = tuple(int(i) for i in col_index)
        if rows < 1:
            raise DimensionMismatch(f"逻辑矩阵行数必须为正: {rows}")
        if not cols:
            raise DimensionMismatch("逻辑矩阵至少要有一列")
        for j, i in enumerate(cols, start=1):
            if not 1 <= i <= rows:
                raise IndexOutOfRange(f"第 {j} 列的下标 {i} 超出 [1, {rows}]")
        indices = np.asarray(cols, dtype=np.int64) - 1
        indices.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", len(cols))
        object.__setattr__(self, "col_index", cols)
        object.__setattr__(self, "_indices", indices)

    def __setattr__(self, name, value):
        raise AttributeError("LogicalMatrix 不可修改")

    # ---------- 构造 ----------

    @classmethod
    def identity(cls, n: int) -> "LogicalMatrix":
        return cls(n, range(1, n + 1))

    @classmethod
    def from_dense(cls, dense) -> "LogicalMatrix":
        """从 0/1 稠密矩阵构造，要求每列恰有一个 1"""
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise DimensionMismatch("需要二维矩阵")
        nonzero = arr != 0
        counts = nonzero.sum(axis=0)
        if np.any(counts != 1):
            j = int(np.flatnonzero(counts != 1)[0]) + 1
            raise DimensionMismatch(f"第 {j} 列不是规范向量")
        return cls(arr.shape[0], np.argmax(nonzero, axis=0) + 1)

    @classmethod
    def hstack(cls, blocks: Sequence["LogicalMatrix"]) -> "LogicalMatrix":
        """[B1 B2 ... Bk]，各块行数必须相同"""
        rows = {b.rows for b in blocks}
        if len(rows) != 1:
            raise DimensionMismatch(f"拼接的逻辑矩阵行数不一致: {sorted(rows)}")
        return cls(rows.pop(), [i for b in blocks for i in b.col_index])

    # ---------- 访问 ----------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def indices(self) -> np.ndarray:
        """每列 1 所在行号（从 0 开始，只读 numpy 视图）"""
        return self._indices

    def column(self, j: int) -> int:
        if not 1 <= j <= self.cols:
            raise IndexOutOfRange(f"列号 {j} 超出 [1, {self.cols}]")
        return self.col_index[j - 1]

    def block(self, k: int, width: int) -> "LogicalMatrix":
        """第 k 个宽度为 width 的列块（k 从 1 开始）"""
        if width < 1 or self.cols % width:
            raise DimensionMismatch(f"列数 {self.cols} 不能按宽度 {width} 分块")
        if not 1 <= k <= self.cols // width:
            raise IndexOutOfRange(f"块号 {k} 超出 [1, {self.cols // width}]")
        return LogicalMatrix(self.rows, self.col_index[(k - 1) * width:k * width])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        out[self._indices, np.arange(self.cols)] = 1
        return out

    def to_boolean(self) -> "BooleanMatrix":
        return BooleanMatrix.from_dense(self.to_dense())

    def transpose(self) -> "BooleanMatrix":
        out = np.zeros((self.cols, self.rows), dtype=np.uint8)
        out[np.arange(self.cols), self._indices] = 1
        return BooleanMatrix.from_dense(out)

    def is_full_row_rank(self) -> bool:
        return len(set(self.col_index)) == self.rows

    # ---------- 运算 ----------

    def compose(self, other: "LogicalMatrix") -> "LogicalMatrix":
        """普通矩阵乘积 self · other，结果仍是逻辑矩阵"""
        if self.cols != other.rows:
            raise DimensionMismatch(f"无法相乘: {self.shape} · {other.shape}")
        return LogicalMatrix(self.rows, self._indices[other._indices] + 1)

    def kron(self, other: "LogicalMatrix") -> "LogicalMatrix":
        """Kronecker 积 self ⊗ other：δ_k^a ⊗ δ_s^b = δ_{ks}^{(a-1)s+b}"""
        a = self._indices[:, None] * other.rows + other._indices[None, :]
        return LogicalMatrix(self.rows * other.rows, a.reshape(-1) + 1)

    def __eq__(self, other) -> bool:
        if isinstance(other, LogicalMatrix):
            return self.rows == other.rows and self.col_index == other.col_index
        if isinstance(other, (BooleanMatrix, RationalMatrix)):
            return other == self
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.rows, self.col_index))

    def __repr__(self) -> str:
        if self.cols <= 16:
            body = " ".join(map(str, self.col_index))
        else:
            body = " ".join(map(str, self.col_index[:16])) + " ..."
        return f"δ_{self.rows}[{body}]"


class BooleanMatrix:
    """
    0/1 矩阵，按行打包成位串（np.packbits, axis=1）

    行 i 的第 j 位对应元素 (i+1, j+1)。打包时末尾补零位恒为 0。
    """
    __slots__ = ("rows", "cols", "_bits")

    def __init__(self, bits: np.ndarray, cols: int):
        bits = np.ascontiguousarray(bits, dtype=np.uint8)
        if bits.ndim != 2 or bits.shape[1] != (cols + 7) // 8:
            raise DimensionMismatch(f"位串形状 {bits.shape} 与列数 {cols} 不符")
        bits.flags.writeable = False
        object.__setattr__(self, "rows", bits.shape[0])
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "_bits", bits)

    def __setattr__(self, name, value):
        raise AttributeError("BooleanMatrix 不可修改")

    @classmethod
    def from_dense(cls, dense) -> "BooleanMatrix":
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise DimensionMismatch("需要二维矩阵")
        return cls(np.packbits(arr != 0, axis=1), arr.shape[1])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BooleanMatrix":
        return cls(np.zeros((rows, (cols + 7) // 8), dtype=np.uint8), cols)

    @classmethod
    def ones(cls, rows: int, cols: int) -> "BooleanMatrix":
        return cls.from_dense(np.ones((rows, cols), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "BooleanMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def packed(self) -> np.ndarray:
        return self._bits

    def to_dense(self) -> np.ndarray:
        return np.unpackbits(self._bits, axis=1, count=self.cols).astype(bool)

    def transpose(self) -> "BooleanMatrix":
        return BooleanMatrix.from_dense(self.to_dense().T)

    def count(self) -> int:
        return int(np.unpackbits(self._bits).sum())

    def is_logical(self) -> bool:
        return bool(np.all(self.to_dense().sum(axis=0) == 1))

    def to_logical(self) -> LogicalMatrix:
        return LogicalMatrix.from_dense(self.to_dense())

    def __and__(self, other: "BooleanMatrix") -> "BooleanMatrix":
        return meet(self, other)

    def __le__(self, other: "BooleanMatrix") -> bool:
        """逐元素 ≤"""
        other = _as_boolean(other)
        _same_shape(self, other)
        return not np.any(self._bits & ~other._bits)

    def __eq__(self, other) -> bool:
        if isinstance(other, LogicalMatrix):
            other = other.to_boolean()
        if not isinstance(other, BooleanMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._bits, other._bits)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._bits.tobytes()))

    def __repr__(self) -> str:
        return f"BooleanMatrix({self.rows}×{self.cols}, ones={self.count()})"


class RationalMatrix:
    """精确有理矩阵，元素为 Fraction"""
    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Iterable[Iterable]):
        table = tuple(tuple(Fraction(v) for v in row) for row in entries)
        if not table or not table[0]:
            raise DimensionMismatch("有理矩阵不能为空")
        if any(len(row) != len(table[0]) for row in table):
            raise DimensionMismatch("有理矩阵各行长度不一致")
        object.__setattr__(self, "rows", len(table))
        object.__setattr__(self, "cols", len(table[0]))
        object.__setattr__(self, "entries", table)

    def __setattr__(self, name, value):
        raise AttributeError("RationalMatrix 不可修改")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "RationalMatrix":
        return cls(arr.tolist())

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def row_vector(cls, values: Iterable) -> "RationalMatrix":
        return cls([list(values)])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def to_array(self) -> np.ndarray:
        arr = np.empty((self.rows, self.cols), dtype=object)
        for i, row in enumerate(self.entries):
            arr[i, :] = row
        return arr

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i - 1]

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(zip(*self.entries))

    def __eq__(self, other) -> bool:
        if isinstance(other, (LogicalMatrix, BooleanMatrix)):
            other = RationalMatrix.from_array(_as_object(other))
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        return f"RationalMatrix({self.rows}×{self.cols})"


Matrix = Union[LogicalMatrix, BooleanMatrix, RationalMatrix]


# ============ 布尔运算 ============

def _as_boolean(m) -> BooleanMatrix:
    if isinstance(m, BooleanMatrix):
        return m
    if isinstance(m, LogicalMatrix):
        return m.to_boolean()
    raise TypeError(f"需要布尔矩阵或逻辑矩阵, 实际为 {type(m).__name__}")


def _same_shape(a, b) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"形状不一致: {a.shape} vs {b.shape}")


def meet(first, *others) -> BooleanMatrix:
    """逐元素交 A ∧ B ∧ ..."""
    result = _as_boolean(first)
    bits = result.packed
    for other in others:
        other = _as_boolean(other)
        _same_shape(result, other)
        bits = bits & other.packed
    return BooleanMatrix(bits, result.cols)


def bool_product(c, d) -> BooleanMatrix:
    """
    布尔积 C ⊙ D：(C⊙D)_ij = OR_s (C_is AND D_sj)

    右因子为逻辑矩阵时按列取数；左因子为逻辑矩阵时把 D 的行 OR 到对应结果行；
    其余情况按行分批，把 D 的打包行 OR 进结果。
    """
    if c.cols != d.rows:
        raise DimensionMismatch(f"无法做布尔积: {c.shape} ⊙ {d.shape}")
    if isinstance(d, LogicalMatrix):
        return BooleanMatrix.from_dense(c.to_dense()[:, d.indices])

    d_bits = _as_boolean(d).packed
    out = np.zeros((c.rows, d_bits.shape[1]), dtype=np.uint8)
    if isinstance(c, LogicalMatrix):
        np.bitwise_or.at(out, c.indices, d_bits)
        return BooleanMatrix(out, d.cols)

    dense_c = _as_boolean(c).to_dense()
    chunk = max(1, _CHUNK_BYTES // max(1, c.cols * d_bits.shape[1]))
    for start in range(0, c.rows, chunk):
        rows_i, cols_s = np.nonzero(dense_c[start:start + chunk])
        if rows_i.size:
            np.bitwise_or.at(out, rows_i + start, d_bits[cols_s])
    return BooleanMatrix(out, d.cols)


# ============ 有理运算 ============

def _as_object(m) -> np.ndarray:
    if isinstance(m, RationalMatrix):
        return m.to_array()
    dense = m.to_dense()
    arr = np.empty(dense.shape, dtype=object)
    arr[...] = Fraction(0)
    arr[dense != 0] = Fraction(1)
    return arr


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker 积；两个逻辑矩阵的积仍为逻辑矩阵"""
    if isinstance(a, LogicalMatrix) and isinstance(b, LogicalMatrix):
        return a.kron(b)
    x, y = _as_object(a), _as_object(b)
    out = np.multiply.outer(x, y).transpose(0, 2, 1, 3)
    return RationalMatrix.from_array(out.reshape(x.shape[0] * y.shape[0], x.shape[1] * y.shape[1]))


def _stp2(a: Matrix, b: Matrix) -> Matrix:
    l = math.lcm(a.cols, b.rows)
    if isinstance(a, LogicalMatrix) and isinstance(b, LogicalMatrix):
        left = a.kron(LogicalMatrix.identity(l // a.cols))
        right = b.kron(LogicalMatrix.identity(l // b.rows))
        return left.compose(right)
    left = kron(a, RationalMatrix.identity(l // a.cols))
    right = kron(b, RationalMatrix.identity(l // b.rows))
    return RationalMatrix.from_array(_as_object(left) @ _as_object(right))


def stp(first: Matrix, *others: Matrix) -> Matrix:
    """
    半张量积 A ⋉ B = (A ⊗ I_{l/n})(B ⊗ I_{l/p})，l = lcm(n, p)

    多个参数时从左到右结合（运算满足结合律）。n = p 时即普通矩阵乘积。
    """
    result = first
    for other in others:
        result = _stp2(result, other)
    return result


def pseudoinverse(c: LogicalMatrix) -> RationalMatrix:
    """
    满行秩逻辑矩阵 C（Ñ×N）的伪逆 C⁺ = Cᵀ(CCᵀ)⁻¹

    CCᵀ 是对角阵，对角元为各类的大小，所以 C⁺ 的 (j, i) 元为
    [C_j = i] / |类 i|。
    """
    if not c.is_full_row_rank():
        missing = sorted(set(range(1, c.rows + 1)) - set(c.col_index))
        raise RankDeficient(f"逻辑矩阵第 {missing[0]} 行全零, 不是满行秩")
    sizes = np.bincount(c.indices, minlength=c.rows)
    table = [[Fraction(0)] * c.rows for _ in range(c.cols)]
    for j, i in enumerate(c.indices):
        table[j][i] = Fraction(1, int(sizes[i]))
    return RationalMatrix(table)


def apply_pseudoinverse(row: Sequence, c: LogicalMatrix) -> tuple[Fraction, ...]:
    """
    计算行向量 v · C⁺，不构造 C⁺ 本身

    结果第 i 个分量是 v 在类 i 上的平均值。
    """
    if len(row) != c.cols:
        raise DimensionMismatch(f"行向量长度 {len(row)} 与 C 的列数 {c.cols} 不符")
    if not c.is_full_row_rank():
        raise RankDeficient("逻辑矩阵不是满行秩")
    sums = [Fraction(0)] * c.rows
    sizes = [0] * c.rows
    for value, i in zip(row, c.col_index):
        sums[i - 1] += Fraction(value)
        sizes[i - 1] += 1
    return tuple(s / k for s, k in zip(sums, sizes))
