"""
基于商系统的控制器设计

功能:
1. 集合镇定：最大控制不变子集 + 反向可达分层，得到时不变状态反馈
2. 反馈提升：商系统上的 K 提升为原系统上的 x ↦ K C x
3. 有限时域最优控制：反向动态规划，精确有理数
4. 代价诱导划分与代价投影（表格形式与 μC⁺ 线性形式互相核对）
"""
import logging
from fractions import Fraction

import numpy as np
from pydantic import BaseModel, ConfigDict

from bcnq.algebra import LogicalMatrix, apply_pseudoinverse
from bcnq.errors import BcnError, DimensionMismatch, IllDefinedCost, IndexOutOfRange, PreconditionError
from bcnq.models import ClassOrder, CostSpec, NotStabilizable, OptimalSolution, StateFeedback, StateSet
from bcnq.network import Bcn
from bcnq.partitions import ClassMatrix, Partition
from bcnq.quotient import QuotientSystem, build_quotient
from bcnq.refinement import refine

logger = logging.getLogger(__name__)


# ============ 划分 ============

def target_partition(n: int, target: StateSet) -> Partition:
    """{𝓜, Δ_N − 𝓜}"""
    if not target.members:
        raise PreconditionError("镇定目标不能为空")
    if target.n_states != n:
        raise DimensionMismatch(f"目标集的状态数 {target.n_states} 与 {n} 不一致")
    rest = tuple(x for x in range(1, n + 1) if x not in set(target.members))
    blocks = (target.members, rest) if rest else (target.members,)
    return Partition(n=n, blocks=blocks)


def cost_partition(cost: CostSpec) -> Partition:
    """按签名 (g(x), l(1,x), ..., l(M,x)) 分组"""
    signatures = [
        (cost.g[x],) + tuple(cost.l[u][x] for u in range(cost.n_inputs))
        for x in range(cost.n_states)
    ]
    return Partition.from_labels(signatures)


# ============ 镇定 ============

def _target_mask(bcn: Bcn, target: StateSet) -> np.ndarray:
    if not target.members:
        raise PreconditionError("镇定目标不能为空")
    if target.n_states != bcn.n_states:
        raise DimensionMismatch(f"目标集的状态数 {target.n_states} 与网络 {bcn.n_states} 不一致")
    mask = np.zeros(bcn.n_states, dtype=bool)
    mask[np.asarray(target.members) - 1] = True
    return mask


def stabilize(bcn: Bcn, target: StateSet) -> StateFeedback | NotStabilizable:
    """
    集合镇定

    1. 反复删去没有任何输入能留在当前集合内的状态，得到最大控制不变子集 I
    2. 从 I 出发反向分层：layer(x) = 到达 I 的最少步数
    3. K(x) 取使下一步层号最小的输入，并列时取最小输入下标
    """
    table = bcn.successors()
    core = _target_mask(bcn, target)
    while True:
        keep = core & np.any(core[table], axis=0)
        if np.array_equal(keep, core):
            break
        core = keep
    core_states = tuple(int(x) + 1 for x in np.flatnonzero(core))
    if not core.any():
        logger.info("[Stabilize] 目标内没有控制不变子集")
        return NotStabilizable(
            n_states=bcn.n_states,
            unstabilizable=tuple(range(1, bcn.n_states + 1)),
            invariant_core=(),
        )

    layer = np.where(core, 0, -1)
    depth = 0
    while True:
        reached = layer >= 0
        frontier = ~reached & np.any(reached[table], axis=0)
        if not frontier.any():
            break
        depth += 1
        layer[frontier] = depth

    if np.any(layer < 0):
        stuck = tuple(int(x) + 1 for x in np.flatnonzero(layer < 0))
        logger.info(f"[Stabilize] {len(stuck)} 个状态无法到达不变子集")
        return NotStabilizable(n_states=bcn.n_states, unstabilizable=stuck, invariant_core=core_states)

    next_layer = layer[table]
    law = np.argmin(next_layer, axis=0) + 1
    logger.info(f"[Stabilize] τ={depth}, |I|={len(core_states)}")
    return StateFeedback(
        n_states=bcn.n_states,
        n_inputs=bcn.n_inputs,
        law=tuple(int(u) for u in law),
        settling_bound=depth,
    )


def feedback_matrix(fb: StateFeedback) -> LogicalMatrix:
    """K ∈ 𝓛^{M×N}"""
    return LogicalMatrix(fb.n_inputs, fb.law)


def lift_feedback(fb: StateFeedback, c: ClassMatrix) -> StateFeedback:
    """商系统反馈 K 提升为原系统反馈 x ↦ K C x"""
    if fb.n_states != c.n_classes:
        raise DimensionMismatch(f"反馈维数 {fb.n_states} 与类数 {c.n_classes} 不一致")
    lifted = feedback_matrix(fb).compose(c.matrix)
    return StateFeedback(
        n_states=c.n_states,
        n_inputs=fb.n_inputs,
        law=lifted.col_index,
        settling_bound=fb.settling_bound,
        classes=c.matrix.col_index,
    )


def closed_loop(bcn: Bcn, fb: StateFeedback, x0: int, steps: int) -> tuple[int, ...]:
    if fb.n_states != bcn.n_states:
        raise DimensionMismatch(f"反馈维数 {fb.n_states} 与网络 {bcn.n_states} 不一致")
    states = [x0]
    for _ in range(steps):
        x = states[-1]
        states.append(bcn.step(x, fb.input_for(x)))
    return tuple(states)


def verify_stabilizes(bcn: Bcn, fb: StateFeedback, target: StateSet, horizon: int | None = None) -> bool:
    """对全部初始状态仿真 horizon 步（默认 2N），t ≥ τ 后必须一直在目标内"""
    mask = _target_mask(bcn, target)
    horizon = 2 * bcn.n_states if horizon is None else horizon
    if fb.settling_bound > horizon:
        return False
    table = bcn.successors()
    law = np.asarray(fb.law) - 1
    x = np.arange(bcn.n_states)
    for t in range(horizon + 1):
        if t >= fb.settling_bound and not mask[x].all():
            return False
        x = table[law[x], x]
    return True


class QuotientStabilization(BaseModel):
    """经商系统镇定的结果"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    quotient: QuotientSystem
    quotient_target: StateSet
    quotient_result: StateFeedback | NotStabilizable
    lifted: StateFeedback | NotStabilizable


def stabilize_via_quotient(
    bcn: Bcn,
    target: StateSet,
    order: ClassOrder = ClassOrder.FIRST_OCCURRENCE,
    workers: int = 1,
) -> QuotientStabilization:
    """
    target_partition → refine → build_quotient → stabilize → lift_feedback

    商系统不可镇定时结论不确定，lifted 为 via_quotient=True 的 NotStabilizable，
    调用方可改用 stabilize 直接求解。
    """
    s = target_partition(bcn.n_states, target)
    r, _ = refine(bcn, s, workers=workers)
    q = build_quotient(bcn, r, order=order, workers=workers)
    c = q.classes
    q_target = StateSet(n_states=c.n_classes, members={c.class_of(x) for x in target.members})
    result = stabilize(q.reduced, q_target)
    if isinstance(result, StateFeedback):
        lifted = lift_feedback(result, c)
    else:
        logger.warning("[Stabilize] 商系统不可镇定, 商方法结论不确定")
        bad = set(result.unstabilizable)
        core = set(result.invariant_core)
        lifted = NotStabilizable(
            n_states=bcn.n_states,
            unstabilizable=tuple(x for x in range(1, bcn.n_states + 1) if c.class_of(x) in bad),
            invariant_core=tuple(x for x in range(1, bcn.n_states + 1) if c.class_of(x) in core),
            via_quotient=True,
        )
    return QuotientStabilization(quotient=q, quotient_target=q_target, quotient_result=result, lifted=lifted)


# ============ 最优控制 ============

def project_cost(cost: CostSpec, c: ClassMatrix) -> CostSpec:
    """
    商代价 l_𝓡(u, Cx) = l(u, x)，g_𝓡(Cx) = g(x)

    同时用 θ_i C⁺ 与 μ C⁺ 计算线性形式，必须与表格一致。
    """
    if cost.n_states != c.n_states:
        raise DimensionMismatch(f"代价的状态数 {cost.n_states} 与 C 的列数 {c.n_states} 不一致")
    members = [c.members(q) for q in range(1, c.n_classes + 1)]

    def common(values, q: int, u: int | None) -> Fraction:
        distinct = {values[x - 1] for x in members[q - 1]}
        if len(distinct) != 1:
            raise IllDefinedCost(q, u)
        return distinct.pop()

    l_r = tuple(
        tuple(common(cost.l[u - 1], q, u) for q in range(1, c.n_classes + 1))
        for u in range(1, cost.n_inputs + 1)
    )
    g_r = tuple(common(cost.g, q, None) for q in range(1, c.n_classes + 1))

    full = cost if cost.theta is not None else cost.with_linear_form()
    n = cost.n_states
    theta_r = tuple(
        v for u in range(cost.n_inputs)
        for v in apply_pseudoinverse(full.theta[u * n:(u + 1) * n], c.matrix)
    )
    mu_r = apply_pseudoinverse(full.mu if full.mu is not None else cost.g, c.matrix)
    if mu_r != g_r or theta_r != tuple(v for row in l_r for v in row):
        raise BcnError("μC⁺ / θC⁺ 与表格形式的商代价不一致")
    return CostSpec(n_states=c.n_classes, n_inputs=cost.n_inputs, l=l_r, g=g_r, theta=theta_r, mu=mu_r)


def evaluate_cost(bcn: Bcn, cost: CostSpec, x0: int, inputs) -> Fraction:
    """按定义累加 J = Σ l(u(t), x(t)) + g(x(T))"""
    states = bcn.trajectory(x0, inputs)
    total = sum((cost.stage(u, x) for u, x in zip(inputs, states)), Fraction(0))
    return total + cost.terminal(states[-1])


def optimal_control(bcn: Bcn, cost: CostSpec, x0: int, horizon: int) -> OptimalSolution:
    """
    反向动态规划

    V_T = g，V_t(x) = min_u [l(u, x) + V_{t+1}(step(x, u))]，
    并列时取最小输入下标（np.argmin 返回第一个最小值）。
    """
    if horizon < 0:
        raise PreconditionError(f"时域必须非负: T={horizon}")
    if cost.n_states != bcn.n_states or cost.n_inputs != bcn.n_inputs:
        raise DimensionMismatch("代价函数与网络的维数不一致")
    if not 1 <= x0 <= bcn.n_states:
        raise IndexOutOfRange(f"初始状态 {x0} 超出 [1, {bcn.n_states}]")

    table = bcn.successors()
    stage = np.empty((bcn.n_inputs, bcn.n_states), dtype=object)
    for u, row in enumerate(cost.l):
        stage[u, :] = row
    value = np.empty(bcn.n_states, dtype=object)
    value[:] = cost.g
    columns = np.arange(bcn.n_states)

    values = [tuple(value)]
    policy = []
    for _ in range(horizon):
        candidates = stage + value[table]
        choice = np.argmin(candidates, axis=0)
        value = candidates[choice, columns]
        values.append(tuple(value))
        policy.append(tuple(int(u) + 1 for u in choice))
    values.reverse()
    policy.reverse()

    inputs = []
    x = x0
    for t in range(horizon):
        u = policy[t][x - 1]
        inputs.append(u)
        x = bcn.step(x, u)
    solution = OptimalSolution(
        x0=x0,
        horizon=horizon,
        inputs=tuple(inputs),
        trajectory=bcn.trajectory(x0, inputs),
        cost=values[0][x0 - 1],
        value_table=tuple(values),
        policy=tuple(policy),
    )
    logger.info(f"[OptCtl] x0={x0}, T={horizon}, J*={solution.cost}")
    return solution


def lift_policy(policy, c: ClassMatrix) -> tuple[tuple[int, ...], ...]:
    """时变策略提升：(x, t) ↦ u*(Cx, t)"""
    result = []
    for row in policy:
        if len(row) != c.n_classes:
            raise DimensionMismatch(f"策略长度 {len(row)} 与类数 {c.n_classes} 不一致")
        result.append(tuple(row[c.class_of(x) - 1] for x in range(1, c.n_states + 1)))
    return tuple(result)


class QuotientOptimization(BaseModel):
    """经商系统求解最优控制的结果"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    quotient: QuotientSystem
    quotient_cost: CostSpec
    quotient_solution: OptimalSolution
    # 提升回原系统：同一输入序列、同一最优代价
    lifted: OptimalSolution


def optimal_via_quotient(
    bcn: Bcn,
    cost: CostSpec,
    x0: int,
    horizon: int,
    order: ClassOrder = ClassOrder.FIRST_OCCURRENCE,
    workers: int = 1,
) -> QuotientOptimization:
    """cost_partition → refine → build_quotient → project_cost → optimal_control(C x0)"""
    if not 1 <= x0 <= bcn.n_states:
        raise IndexOutOfRange(f"初始状态 {x0} 超出 [1, {bcn.n_states}]")
    s = cost_partition(cost)
    r, _ = refine(bcn, s, workers=workers)
    q = build_quotient(bcn, r, order=order, workers=workers)
    c = q.classes
    q_cost = project_cost(cost, c)
    q_solution = optimal_control(q.reduced, q_cost, c.class_of(x0), horizon)

    lifted = OptimalSolution(
        x0=x0,
        horizon=horizon,
        inputs=q_solution.inputs,
        trajectory=bcn.trajectory(x0, q_solution.inputs),
        cost=q_solution.cost,
        value_table=tuple(
            tuple(row[c.class_of(x) - 1] for x in range(1, bcn.n_states + 1))
            for row in q_solution.value_table
        ),
        policy=lift_policy(q_solution.policy, c),
    )
    return QuotientOptimization(quotient=q, quotient_cost=q_cost, quotient_solution=q_solution, lifted=lifted)
