"""
商系统构造

给定同余划分 𝓡，约化系统 Σ_𝓡 的转移块为 F̃_k = C ⊙ F_k ⊙ Cᵀ。
实际构造按代表元直接映射 class(step(rep, k))，布尔积公式保留作核对。
"""
import logging
from concurrent.futures import ThreadPoolExecutor

from pydantic import BaseModel, ConfigDict

from bcnq.algebra import LogicalMatrix, bool_product
from bcnq.errors import BcnError, CongruenceViolation
from bcnq.models import ClassOrder
from bcnq.network import Bcn
from bcnq.partitions import ClassMatrix, Partition, class_matrix, is_congruence

logger = logging.getLogger(__name__)


class QuotientSystem(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    partition: Partition
    classes: ClassMatrix
    reduced: Bcn

    @property
    def c(self) -> LogicalMatrix:
        return self.classes.matrix

    def project(self, x: int) -> int:
        return self.classes.class_of(x)


def _formula_block(c: LogicalMatrix, f_k: LogicalMatrix) -> LogicalMatrix:
    """C ⊙ F_k ⊙ Cᵀ，必须每列恰有一个 1"""
    product = bool_product(bool_product(c, f_k), c.transpose())
    if not product.is_logical():
        raise BcnError("C ⊙ F_k ⊙ Cᵀ 不是逻辑矩阵")
    return product.to_logical()


def build_quotient(
    bcn: Bcn,
    p: Partition,
    order: ClassOrder = ClassOrder.FIRST_OCCURRENCE,
    cross_check: bool = True,
    workers: int = 1,
) -> QuotientSystem:
    """
    构造商系统

    调用方传入的划分必须满足同余条件，这里重新检查，不满足时抛出带见证的
    CongruenceViolation，调用方应先 refine。
    """
    check = is_congruence(bcn, p)
    if not check:
        raise CongruenceViolation(*check.witness)

    classes = class_matrix(p, order)
    c = classes.matrix
    reps = classes.representatives()
    blocks = []
    for k in range(1, bcn.n_inputs + 1):
        blocks.append(LogicalMatrix(classes.n_classes, [c.column(bcn.step(x, k)) for x in reps]))

    if cross_check:
        f_blocks = [bcn.input_block(k) for k in range(1, bcn.n_inputs + 1)]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                formula = list(pool.map(lambda f_k: _formula_block(c, f_k), f_blocks))
        else:
            formula = [_formula_block(c, f_k) for f_k in f_blocks]
        for k, (direct, checked) in enumerate(zip(blocks, formula), start=1):
            if direct != checked:
                raise BcnError(f"F̃_{k} 的直接映射与布尔积公式不一致")

    reduced = Bcn.from_blocks(blocks)
    logger.info(f"[Quotient] N={bcn.n_states} → Ñ={reduced.n_states}, M={bcn.n_inputs}")
    return QuotientSystem(partition=p, classes=classes, reduced=reduced)


def verify_correspondence(bcn: Bcn, q: QuotientSystem) -> bool:
    """
    双向检查转移对应

    (i) 每个 (a, u)：class(step(a, u)) = 商系统中 class(a) 在 u 下的后继；
    (ii) 每条商转移 (z, u, z') 都至少由一个原始转移实现。
    """
    c = q.classes
    reduced = q.reduced
    if c.n_states != bcn.n_states or reduced.n_states != c.n_classes or reduced.n_inputs != bcn.n_inputs:
        return False
    realized = set()
    for u in range(1, bcn.n_inputs + 1):
        for a in range(1, bcn.n_states + 1):
            z, z_next = c.class_of(a), c.class_of(bcn.step(a, u))
            if reduced.step(z, u) != z_next:
                return False
            realized.add((z, u, z_next))
    return realized == reduced_transitions(reduced)


def quotient_transition_system(bcn: Bcn, c: ClassMatrix) -> frozenset[tuple[int, int, int]]:
    """
    直接由原始转移关系枚举商转移系统

    z →ᵘ z' 当且仅当存在 a ∈ z 使 step(a, u) ∈ z'。
    """
    return frozenset(
        (c.class_of(a), u, c.class_of(bcn.step(a, u)))
        for u in range(1, bcn.n_inputs + 1)
        for a in range(1, bcn.n_states + 1)
    )


def reduced_transitions(reduced: Bcn) -> frozenset[tuple[int, int, int]]:
    return frozenset(
        (z, u, reduced.step(z, u))
        for u in range(1, reduced.n_inputs + 1)
        for z in range(1, reduced.n_states + 1)
    )
