"""内置模型数据 - 例 1 网络、lac 操纵子模型及配套代价函数"""
from functools import lru_cache
from pathlib import Path

from bcnq.errors import FormatError
from bcnq.formats import parse_network, parse_truth_table
from bcnq.models import CostSpec, StateSet, TruthTable
from bcnq.network import Bcn, from_truth_table
from bcnq.partitions import Partition

BUNDLED_DIR = Path(__file__).parent / "bundled"
EXAMPLE1_TABLE = BUNDLED_DIR / "example1.tt"
LAC_OPERON_NETWORK = BUNDLED_DIR / "lac_operon.bcn"

# lac 操纵子的两个稳态，以及使其保持不变的输入
LAC_STEADY_STATES = {387: 2, 414: 1}
# 状态 1..54 对应操纵子处于 ON（诱导）状态
LAC_ON_STATES = range(1, 55)

# ============ 例 1 ============

# 例 1 的同余划分与例 3 的初始关系 S
EXAMPLE1_PARTITION = Partition(n=8, blocks=((1,), (2, 3), (4,), (5, 6, 7, 8)))
EXAMPLE3_SEED = Partition(n=8, blocks=((1,), (2, 3, 4), (5, 6, 7, 8)))


@lru_cache
def example1_truth_table() -> TruthTable:
    return parse_truth_table(EXAMPLE1_TABLE.read_text(encoding="utf-8"), str(EXAMPLE1_TABLE))


@lru_cache
def example1_network() -> Bcn:
    return from_truth_table(example1_truth_table())


def example4_cost() -> CostSpec:
    """M=2, N=4：只有状态 2、3 代价相同"""
    return CostSpec(
        n_states=4,
        n_inputs=2,
        l=((1, 2, 2, 2), (3, 3, 3, 3)),
        g=(1, 1, 1, 2),
    )


# ============ lac 操纵子 ============

@lru_cache
def lac_operon_network() -> Bcn:
    return parse_network(LAC_OPERON_NETWORK.read_text(encoding="utf-8"), str(LAC_OPERON_NETWORK))


def lac_operon_cost() -> CostSpec:
    """l(δ₂¹, ·) = 1，l(δ₂², ·) = 2；g 在 ON 状态为 0，其余为 5"""
    n = 432
    return CostSpec(
        n_states=n,
        n_inputs=2,
        l=((1,) * n, (2,) * n),
        g=tuple(0 if x in LAC_ON_STATES else 5 for x in range(1, n + 1)),
    )


def lac_operon_target(state: int = 387) -> StateSet:
    return StateSet(n_states=432, members=(state,))


# ============ 内置名称 ============

BUILTIN_NETWORKS = {
    "example1": example1_network,
    "lac-operon": lac_operon_network,
}

BUILTIN_COSTS = {
    "example4": example4_cost,
    "lac-operon": lac_operon_cost,
}

BUILTIN_PARTITIONS = {
    "example1": lambda: EXAMPLE1_PARTITION,
    "example3": lambda: EXAMPLE3_SEED,
}

BUILTIN_TRUTH_TABLES = {
    "example1": example1_truth_table,
}


def get_builtin(kind: dict, name: str, what: str):
    """按名称取内置对象，名称未知时抛出 FormatError"""
    factory = kind.get(name)
    if factory is None:
        raise FormatError(f"未知的内置{what}: '{name}', 可选: {', '.join(sorted(kind))}", f"builtin:{name}")
    return factory()
