"""数据模型定义"""
from enum import Enum
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict, field_serializer, field_validator, model_validator

from bcnq.errors import DimensionMismatch, IndexOutOfRange, MalformedTable


class ClassOrder(str, Enum):
    """等价类（商状态）编号顺序"""
    FIRST_OCCURRENCE = "first-occurrence"   # 按块内最小状态升序，即 A_R 去重时保留首次出现的行
    LEXICOGRAPHIC = "lexicographic"         # A_R 的不同行按字典序升序，等价于最小状态降序


class OutputFormat(str, Enum):
    """报告输出格式"""
    TEXT = "text"
    JSON = "json"


def to_fraction(value: Any) -> Fraction:
    """把 int / str("1/4", "0.5") / Fraction 统一转成精确有理数"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


# ============ 网络模型 ============

class TruthTable(BaseModel):
    """
    真值表

    rows 只存输出 (f1..fn)，行序固定：输入在前（u 位最高），再是 x 位，
    每一位都先取 1 再取 0。
    """
    model_config = ConfigDict(frozen=True)

    n: int
    m: int
    rows: tuple[tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_shape(self) -> "TruthTable":
        if self.n < 1 or self.m < 0:
            raise MalformedTable(f"变量个数非法: n={self.n}, m={self.m}")
        expected = 2 ** (self.n + self.m)
        if len(self.rows) != expected:
            raise MalformedTable(
                f"真值表应有 2^(n+m) = {expected} 行, 实际 {len(self.rows)} 行"
            )
        for r, row in enumerate(self.rows, start=1):
            if len(row) != self.n:
                raise MalformedTable(f"第 {r} 行应有 {self.n} 个输出, 实际 {len(row)} 个")
            if any(bit not in (0, 1) for bit in row):
                raise MalformedTable(f"第 {r} 行含有非 0/1 输出")
        return self

    @classmethod
    def from_functions(cls, n: int, m: int, fn) -> "TruthTable":
        """逐行调用 fn(u_bits, x_bits) -> 输出位元组，按真值表标准行序生成"""
        from bcnq.network import decode

        rows = []
        for r in range(1, 2 ** (n + m) + 1):
            bits = decode(r, n + m)
            rows.append(tuple(int(b) for b in fn(bits[:m], bits[m:])))
        return cls(n=n, m=m, rows=tuple(rows))


class StateSet(BaseModel):
    """状态集合（1 起始下标），用作镇定目标 𝓜"""
    model_config = ConfigDict(frozen=True)

    n_states: int
    members: tuple[int, ...]

    @field_validator("members", mode="before")
    @classmethod
    def _normalize(cls, value):
        return tuple(sorted({int(x) for x in value}))

    @model_validator(mode="after")
    def _check_range(self) -> "StateSet":
        for x in self.members:
            if not 1 <= x <= self.n_states:
                raise IndexOutOfRange(f"状态 {x} 超出 [1, {self.n_states}]")
        return self

    def __contains__(self, x: int) -> bool:
        return x in self.members

    def __len__(self) -> int:
        return len(self.members)


# ============ 代价函数 ============

class CostSpec(BaseModel):
    """
    有限时域代价 J = Σ l(u(t), x(t)) + g(x(T))

    l 为 M×N 表（l[u-1][x-1]），g 为长度 N 的表。
    可选线性形式：theta 为长度 M·N 的行向量，l(δ_M^k, δ_N^j) = theta[(k-1)N + j]；
    mu 为长度 N 的行向量，g(δ_N^j) = mu[j]。两种形式同时给出时必须一致。
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_states: int
    n_inputs: int
    l: tuple[tuple[Fraction, ...], ...]
    g: tuple[Fraction, ...]
    theta: tuple[Fraction, ...] | None = None
    mu: tuple[Fraction, ...] | None = None

    @field_validator("l", mode="before")
    @classmethod
    def _coerce_table(cls, value):
        return tuple(tuple(to_fraction(v) for v in row) for row in value)

    @field_validator("g", "theta", "mu", mode="before")
    @classmethod
    def _coerce_vector(cls, value):
        if value is None:
            return None
        return tuple(to_fraction(v) for v in value)

    @model_validator(mode="after")
    def _check(self) -> "CostSpec":
        n, m = self.n_states, self.n_inputs
        if len(self.l) != m or any(len(row) != n for row in self.l):
            raise DimensionMismatch(f"阶段代价 l 应为 {m}×{n}")
        if len(self.g) != n:
            raise DimensionMismatch(f"终端代价 g 应有 {n} 个分量")
        if self.theta is not None:
            if len(self.theta) != m * n:
                raise DimensionMismatch(f"theta 应有 {m * n} 个分量")
            if any(self.theta[(k - 1) * n + j - 1] != self.l[k - 1][j - 1]
                   for k in range(1, m + 1) for j in range(1, n + 1)):
                raise DimensionMismatch("theta 与阶段代价表 l 不一致")
        if self.mu is not None:
            if len(self.mu) != n:
                raise DimensionMismatch(f"mu 应有 {n} 个分量")
            if self.mu != self.g:
                raise DimensionMismatch("mu 与终端代价表 g 不一致")
        return self

    @classmethod
    def from_linear(cls, theta, mu, n_inputs: int) -> "CostSpec":
        """由线性形式 (θ, μ) 构造"""
        theta = tuple(to_fraction(v) for v in theta)
        mu = tuple(to_fraction(v) for v in mu)
        n = len(mu)
        table = tuple(theta[k * n:(k + 1) * n] for k in range(n_inputs))
        return cls(n_states=n, n_inputs=n_inputs, l=table, g=mu, theta=theta, mu=mu)

    def with_linear_form(self) -> "CostSpec":
        """补全 θ、μ"""
        theta = tuple(v for row in self.l for v in row)
        return self.model_copy(update={"theta": theta, "mu": self.g})

    def stage(self, u: int, x: int) -> Fraction:
        return self.l[u - 1][x - 1]

    def terminal(self, x: int) -> Fraction:
        return self.g[x - 1]

    def scaled(self, factor) -> "CostSpec":
        """所有代价乘以同一个正有理数"""
        factor = to_fraction(factor)
        return CostSpec(
            n_states=self.n_states,
            n_inputs=self.n_inputs,
            l=tuple(tuple(v * factor for v in row) for row in self.l),
            g=tuple(v * factor for v in self.g),
        )


# ============ 控制器 ============

class StateFeedback(BaseModel):
    """
    时不变状态反馈 x ↦ K x

    law[x-1] 是状态（或商状态）x 上施加的输入下标；classes 非空时表示
    该反馈由商系统提升而来，classes[x-1] = C x 的下标。
    """
    model_config = ConfigDict(frozen=True)

    n_states: int
    n_inputs: int
    law: tuple[int, ...]
    settling_bound: int
    classes: tuple[int, ...] | None = None

    @model_validator(mode="after")
    def _check(self) -> "StateFeedback":
        if len(self.law) != self.n_states:
            raise DimensionMismatch(f"反馈律应有 {self.n_states} 项, 实际 {len(self.law)} 项")
        if any(not 1 <= u <= self.n_inputs for u in self.law):
            raise IndexOutOfRange(f"反馈律中的输入下标超出 [1, {self.n_inputs}]")
        return self

    def input_for(self, x: int) -> int:
        return self.law[x - 1]


class NotStabilizable(BaseModel):
    """无法镇定：unstabilizable 中的状态到达不了目标内最大控制不变子集 invariant_core"""
    model_config = ConfigDict(frozen=True)

    n_states: int
    unstabilizable: tuple[int, ...]
    invariant_core: tuple[int, ...]
    # 商系统路径失败时为 True：命题只保证单向，结论不确定
    via_quotient: bool = False

    def __bool__(self) -> bool:
        return False


class OptimalSolution(BaseModel):
    """有限时域最优控制的解（动态规划）"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x0: int
    horizon: int
    inputs: tuple[int, ...]
    trajectory: tuple[int, ...]
    cost: Fraction
    # value_table[t][x-1] = V_t(x)，t = 0..T
    value_table: tuple[tuple[Fraction, ...], ...]
    # policy[t][x-1] = u*(x, t)，t = 0..T-1
    policy: tuple[tuple[int, ...], ...]

    @field_serializer("cost")
    def _serialize_cost(self, value: Fraction) -> str:
        return str(value)

    @field_serializer("value_table")
    def _serialize_values(self, value) -> list[list[str]]:
        return [[str(v) for v in row] for row in value]
