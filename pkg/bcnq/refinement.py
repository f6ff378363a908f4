"""
划分细化

在给定等价关系 S 内求满足同余条件的最大等价关系：
1. refine            矩阵不动点迭代 A_{k+1} = A_k ∧ ⋀_u (F_uᵀ ⊙ A_k ⊙ F_u)（主路径）
2. refine_relational 同一迭代在二元组集合上用关系复合 / 逆 / 交实现
3. refine_signature  Moore 式签名细化，仅作交叉核对
4. maximality_oracle 用同余闭包验证结果确实是最大的
"""
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, ConfigDict

from bcnq.algebra import BooleanMatrix, bool_product, meet
from bcnq.errors import BcnError, DimensionMismatch, PreconditionError
from bcnq.network import Bcn
from bcnq.partitions import (
    Partition,
    is_congruence,
    partition_from_relation,
    refines,
    relation_from_pairs,
    relation_matrix,
    relation_pairs,
)

logger = logging.getLogger(__name__)


class RefinementTrace(BaseModel):
    """迭代序列 A_1, A_2, ..., A_{k*+1}（最后两项相等）"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    iterates: tuple[BooleanMatrix, ...]
    k_star: int


def _check_sizes(bcn: Bcn, s: Partition) -> None:
    if s.n != bcn.n_states:
        raise DimensionMismatch(f"划分的状态数 {s.n} 与网络 {bcn.n_states} 不一致")


def _conjunct(a: BooleanMatrix, f_k) -> BooleanMatrix:
    """F_kᵀ ⊙ A ⊙ F_k"""
    return bool_product(bool_product(f_k.transpose(), a), f_k)


def refine(bcn: Bcn, s: Partition, workers: int = 1) -> tuple[Partition, RefinementTrace]:
    """
    矩阵不动点迭代

    每一轮都计算全部 M 个合取项后再取交；workers > 1 时各合取项并行计算，
    结果与串行一致。
    """
    _check_sizes(bcn, s)
    blocks = [bcn.input_block(k) for k in range(1, bcn.n_inputs + 1)]
    a = relation_matrix(s)
    iterates = [a]
    k = 1
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while True:
            if pool is not None:
                conjuncts = list(pool.map(lambda f_k: _conjunct(a, f_k), blocks))
            else:
                conjuncts = [_conjunct(a, f_k) for f_k in blocks]
            nxt = meet(a, *conjuncts)
            iterates.append(nxt)
            if nxt == a:
                break
            logger.debug(f"[Refine] A_{k + 1}: {nxt.count()} 个关系对")
            a = nxt
            k += 1
    finally:
        if pool is not None:
            pool.shutdown()

    try:
        result = partition_from_relation(a)
    except BcnError as e:
        raise BcnError(f"不动点不是等价关系: {e}") from e
    logger.info(f"[Refine] k*={k}, {len(s)} 块 → {len(result)} 块")
    return result, RefinementTrace(iterates=tuple(iterates), k_star=k)


# ============ 关系形式 ============

def _compose(first: set, second: set) -> set:
    """关系复合：先 first 后 second，{(a, c) | (a, b) ∈ first, (b, c) ∈ second}"""
    succ: dict[int, list[int]] = {}
    for b, c in second:
        succ.setdefault(b, []).append(c)
    return {(a, c) for a, b in first for c in succ.get(b, ())}


def _inverse(relation: set) -> set:
    return {(b, a) for a, b in relation}


def refine_relational(bcn: Bcn, s: Partition) -> Partition:
    """
    二元组集合上的同一迭代

    𝓢_u = {(a, step(a, u))}，𝓡_{k+1} = 𝓡_k ∩ ⋂_u (𝓢_u ∘ 𝓡_k ∘ 𝓢_u⁻¹)，
    其中 (a, d) ∈ 𝓢_u ∘ 𝓡_k ∘ 𝓢_u⁻¹ 当且仅当 (step(a,u), step(d,u)) ∈ 𝓡_k。
    """
    _check_sizes(bcn, s)
    states = range(1, bcn.n_states + 1)
    steps = [{(a, bcn.step(a, u)) for a in states} for u in range(1, bcn.n_inputs + 1)]
    r = relation_pairs(s)
    rounds = 1
    while True:
        nxt = set(r)
        for s_u in steps:
            nxt &= _compose(_compose(s_u, r), _inverse(s_u))
        if nxt == r:
            break
        r = nxt
        rounds += 1
    logger.debug(f"[Refine] 关系形式 {rounds} 轮收敛")
    return partition_from_relation(relation_from_pairs(bcn.n_states, r))


# ============ 签名细化 ============

def refine_signature(bcn: Bcn, s: Partition) -> Partition:
    """按 (当前块, 各输入下后继所在块) 反复拆分，直到块数不再增加"""
    _check_sizes(bcn, s)
    table = bcn.successors()
    labels = s.labels()
    count = len(s)
    while True:
        signature = np.vstack([labels[None, :], labels[table]]).T
        _, labels = np.unique(signature, axis=0, return_inverse=True)
        labels = np.asarray(labels).reshape(-1)
        new_count = int(labels.max()) + 1
        if new_count == count:
            break
        count = new_count
    return Partition.from_labels(labels.tolist())


# ============ 最大性验证 ============

class _Closure:
    """并查集上的同余闭包，块一旦跨越 S 的两个块立即报告逃逸"""

    def __init__(self, bcn: Bcn, r: Partition, s_labels: np.ndarray):
        self.bcn = bcn
        self.s_labels = s_labels
        self.parent = list(range(bcn.n_states + 1))
        for block in r.blocks:
            for x in block[1:]:
                self.parent[x] = block[0]

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def escapes(self, a: int, b: int) -> bool:
        """加入 (a, b) 后做等价 + 同余闭包，是否越出 S"""
        pending = [(a, b)]
        while pending:
            x, y = pending.pop()
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            if self.s_labels[rx - 1] != self.s_labels[ry - 1]:
                return True
            self.parent[ry] = rx
            for u in range(1, self.bcn.n_inputs + 1):
                pending.append((self.bcn.step(x, u), self.bcn.step(y, u)))
        return False


def maximality_oracle(bcn: Bcn, s: Partition, r: Partition) -> bool:
    """
    r 是否为 S 内最大的同余等价关系

    对 S 同一块内、r 不同块的每一对块各取一个代表 (a, b)，
    r ∪ {(a, b)} 的同余闭包都必须越出 S。r 的块内像已落在同一块，
    所以合并两个块后只需继续合并两代表的后继。
    """
    _check_sizes(bcn, s)
    if not refines(r, s):
        raise PreconditionError("r 必须细化 s")
    if not is_congruence(bcn, r):
        raise PreconditionError("r 必须满足同余条件")
    s_labels = s.labels()
    for s_block in s.blocks:
        members = set(s_block)
        reps = [block[0] for block in r.blocks if block[0] in members]
        for i, a in enumerate(reps):
            for b in reps[i + 1:]:
                if not _Closure(bcn, r, s_labels).escapes(a, b):
                    logger.debug(f"[Oracle] 可以合并 {a} 与 {b}")
                    return False
    return True
