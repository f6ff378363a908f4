"""
布尔控制网络模型

x(t+1) = F ⋉ u(t) ⋉ x(t)，F ∈ 𝓛^{N×NM}，第 k 个宽度为 N 的列块就是 F_k。
状态与输入对外一律使用从 1 开始的下标。
"""
import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from bcnq.algebra import CanonicalVector, LogicalMatrix, delta, stp
from bcnq.errors import DimensionMismatch, IndexOutOfRange
from bcnq.models import TruthTable


def encode(bits) -> CanonicalVector:
    """
    布尔元组 → 规范向量

    1 ↦ δ₂¹，0 ↦ δ₂²，逐个变量做半张量积，
    下标 i = 1 + Σ (1 - b_k)·2^{n-k}。
    """
    bits = tuple(int(b) for b in bits)
    if not bits:
        raise DimensionMismatch("至少需要一个变量")
    index = 1
    for b in bits:
        if b not in (0, 1):
            raise IndexOutOfRange(f"布尔值只能是 0 或 1: {b}")
        index = 2 * (index - 1) + (2 - b)
    return CanonicalVector(dim=2 ** len(bits), index=index)


def decode(index: int, n: int) -> tuple[int, ...]:
    """encode 的逆：δ_{2^n}^index → n 个布尔值"""
    if not 1 <= index <= 2 ** n:
        raise IndexOutOfRange(f"下标 {index} 超出 [1, {2 ** n}]")
    k = index - 1
    return tuple(1 - ((k >> (n - 1 - i)) & 1) for i in range(n))


class Bcn(BaseModel):
    """代数形式的布尔控制网络"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_states: int
    n_inputs: int
    f: LogicalMatrix

    @model_validator(mode="after")
    def _check(self) -> "Bcn":
        if self.n_states < 1 or self.n_inputs < 1:
            raise DimensionMismatch(f"状态数与输入数必须为正: N={self.n_states}, M={self.n_inputs}")
        if self.f.rows != self.n_states or self.f.cols != self.n_states * self.n_inputs:
            raise DimensionMismatch(
                f"F 应为 {self.n_states}×{self.n_states * self.n_inputs}, 实际 {self.f.rows}×{self.f.cols}"
            )
        return self

    @classmethod
    def from_columns(cls, n_states: int, n_inputs: int, columns) -> "Bcn":
        return cls(n_states=n_states, n_inputs=n_inputs, f=LogicalMatrix(n_states, columns))

    @classmethod
    def from_blocks(cls, blocks) -> "Bcn":
        """由 F_1 .. F_M 拼出 F"""
        blocks = list(blocks)
        return cls(n_states=blocks[0].rows, n_inputs=len(blocks), f=LogicalMatrix.hstack(blocks))

    def _check_state(self, x: int) -> None:
        if not 1 <= x <= self.n_states:
            raise IndexOutOfRange(f"状态 {x} 超出 [1, {self.n_states}]")

    def _check_input(self, u: int) -> None:
        if not 1 <= u <= self.n_inputs:
            raise IndexOutOfRange(f"输入 {u} 超出 [1, {self.n_inputs}]")

    def step(self, x: int, u: int) -> int:
        """F ⋉ δ_M^u ⋉ δ_N^x 的下标"""
        self._check_state(x)
        self._check_input(u)
        return self.f.col_index[(u - 1) * self.n_states + x - 1]

    def step_algebraic(self, x: int, u: int) -> int:
        """按半张量积定义逐步相乘，用来核对 step 的查表结果"""
        self._check_state(x)
        self._check_input(u)
        result = stp(self.f, delta(self.n_inputs, u), delta(self.n_states, x))
        return result.column(1)

    def input_block(self, k: int) -> LogicalMatrix:
        """F_k = F ⋉ δ_M^k"""
        self._check_input(k)
        return self.f.block(k, self.n_states)

    def successors(self) -> np.ndarray:
        """后继表，形状 (M, N)，元素为从 0 开始的状态下标"""
        return self.f.indices.reshape(self.n_inputs, self.n_states)

    def trajectory(self, x0: int, inputs) -> tuple[int, ...]:
        self._check_state(x0)
        states = [x0]
        for u in inputs:
            states.append(self.step(states[-1], int(u)))
        return tuple(states)

    def equilibria(self) -> dict[int, tuple[int, ...]]:
        """不动点：状态 → 使其保持不变的全部输入"""
        table = self.successors()
        fixed = table == np.arange(self.n_states)[None, :]
        found = {}
        for x in np.flatnonzero(fixed.any(axis=0)):
            found[int(x) + 1] = tuple(int(u) + 1 for u in np.flatnonzero(fixed[:, x]))
        return found


def from_truth_table(tt: TruthTable) -> Bcn:
    """
    真值表 → Bcn

    真值表第 r 行的 (u, x) 组合恰好对应 u ⋉ x = δ_{MN}^r，
    所以 F 的第 r 列就是第 r 行输出的编码。
    """
    columns = [encode(row).index for row in tt.rows]
    return Bcn.from_columns(2 ** tt.n, 2 ** tt.m, columns)
