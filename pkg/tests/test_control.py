"""镇定与最优控制测试"""
import itertools
from fractions import Fraction

import numpy as np

from bcnq.algebra import LogicalMatrix
from bcnq.control import (
    closed_loop,
    cost_partition,
    evaluate_cost,
    feedback_matrix,
    lift_feedback,
    lift_policy,
    optimal_control,
    optimal_via_quotient,
    project_cost,
    stabilize,
    stabilize_via_quotient,
    target_partition,
    verify_stabilizes,
)
from bcnq.data import EXAMPLE1_PARTITION, example1_network, example4_cost
from bcnq.errors import DimensionMismatch, IllDefinedCost, IndexOutOfRange, PreconditionError
from bcnq.models import CostSpec, NotStabilizable, StateFeedback, StateSet
from bcnq.network import Bcn
from bcnq.partitions import Partition, class_matrix

LAC_QUOTIENT_COLUMNS = [2, 2, 7, 2, 4, 7, 2, 4, 1, 1, 6, 6, 3, 7, 2, 4]


def _raises(exc, fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except exc:
        return True
    return False


def _class_constant_cost(rng, n, m, n_labels=3):
    labels = rng.integers(0, n_labels, size=n)
    stage_by_label = rng.integers(0, 5, size=(m, n_labels))
    terminal_by_label = rng.integers(0, 8, size=n_labels)
    return CostSpec(
        n_states=n,
        n_inputs=m,
        l=tuple(tuple(int(stage_by_label[u, labels[x]]) for x in range(n)) for u in range(m)),
        g=tuple(int(terminal_by_label[labels[x]]) for x in range(n)),
    )


# ============ 划分 ============

def test_target_partition():
    p = target_partition(432, StateSet(n_states=432, members=(387,)))
    assert len(p) == 2
    assert p.block_of(387) == (387,)
    assert len(p.block_of(1)) == 431
    assert target_partition(3, StateSet(n_states=3, members=(1, 2, 3))) == Partition.single_block(3)
    assert _raises(PreconditionError, target_partition, 3, StateSet(n_states=3, members=()))


def test_cost_partition_example4():
    assert cost_partition(example4_cost()) == Partition(n=4, blocks=((1,), (2, 3), (4,)))


def test_project_cost_example4():
    cost = example4_cost()
    c = class_matrix(cost_partition(cost))
    projected = project_cost(cost, c)
    assert projected.l == ((1, 2, 2), (3, 3, 3))
    assert projected.g == (1, 1, 2)
    assert projected.theta == (1, 2, 2, 3, 3, 3)
    assert projected.mu == projected.g


def test_project_cost_with_linear_form():
    cost = CostSpec.from_linear(theta=[1, 2, 2, 2, 3, 3, 3, 3], mu=["1/2", "1/2", "1/2", 2], n_inputs=2)
    projected = project_cost(cost, class_matrix(cost_partition(cost)))
    assert projected.g == (Fraction(1, 2), Fraction(1, 2), Fraction(2))


def test_project_cost_rejects_non_constant_costs():
    c = class_matrix(EXAMPLE1_PARTITION)
    varying_terminal = CostSpec(n_states=8, n_inputs=2, l=((0,) * 8, (0,) * 8), g=(0, 0, 0, 0, 1, 1, 1, 2))
    try:
        project_cost(varying_terminal, c)
    except IllDefinedCost as e:
        assert (e.class_index, e.u) == (4, None)
    else:
        raise AssertionError("应当抛出 IllDefinedCost")

    varying_stage = CostSpec(n_states=8, n_inputs=2, l=((0,) * 8, (0, 1, 2, 0, 0, 0, 0, 0)), g=(0,) * 8)
    try:
        project_cost(varying_stage, c)
    except IllDefinedCost as e:
        assert (e.class_index, e.u) == (2, 2)
    else:
        raise AssertionError("应当抛出 IllDefinedCost")


# ============ 镇定 ============

def test_stabilize_example1_to_single_state_fails():
    result = stabilize(example1_network(), StateSet(n_states=8, members=(1,)))
    assert isinstance(result, NotStabilizable)
    assert not result
    assert result.unstabilizable == (4, 5, 6, 7, 8)
    assert result.invariant_core == (1,)
    assert not result.via_quotient


def test_stabilize_example1_to_larger_target():
    target = StateSet(n_states=8, members=(1, 5, 6, 7, 8))
    fb = stabilize(example1_network(), target)
    assert isinstance(fb, StateFeedback)
    assert fb.law == (2, 1, 1, 1, 1, 1, 1, 1)
    assert fb.settling_bound == 1
    assert verify_stabilizes(example1_network(), fb, target)


def test_stabilize_lac_quotient():
    reduced = Bcn.from_columns(8, 2, LAC_QUOTIENT_COLUMNS)
    fb = stabilize(reduced, StateSet(n_states=8, members=(1,)))
    assert fb.law == (2, 2, 1, 1, 1, 1, 1, 1)
    assert fb.settling_bound == 3
    assert feedback_matrix(fb) == LogicalMatrix(2, [2, 2, 1, 1, 1, 1, 1, 1])


def test_stabilize_counterexample():
    bcn = Bcn.from_columns(4, 2, [1, 1, 4, 3, 1, 2, 4, 3])
    result = stabilize(bcn, StateSet(n_states=4, members=(1,)))
    assert isinstance(result, NotStabilizable)
    assert result.unstabilizable == (3, 4)
    assert result.invariant_core == (1,)


def test_stabilize_without_invariant_subset():
    # 目标状态在任何输入下都会离开
    bcn = Bcn.from_columns(2, 1, [2, 1])
    result = stabilize(bcn, StateSet(n_states=2, members=(1,)))
    assert isinstance(result, NotStabilizable)
    assert result.invariant_core == ()
    assert result.unstabilizable == (1, 2)


def test_stabilize_whole_state_space():
    bcn = example1_network()
    fb = stabilize(bcn, StateSet(n_states=8, members=range(1, 9)))
    assert fb.settling_bound == 0
    assert fb.law == (1,) * 8


def test_stabilize_target_size_mismatch():
    assert _raises(DimensionMismatch, stabilize, example1_network(), StateSet(n_states=4, members=(1,)))
    assert _raises(PreconditionError, stabilize, example1_network(), StateSet(n_states=8, members=()))


def test_lift_feedback():
    fb = StateFeedback(n_states=4, n_inputs=2, law=(2, 1, 1, 1), settling_bound=1)
    c = class_matrix(EXAMPLE1_PARTITION)
    lifted = lift_feedback(fb, c)
    assert lifted.law == (2, 1, 1, 1, 1, 1, 1, 1)
    assert lifted.classes == c.matrix.col_index
    assert feedback_matrix(lifted) == feedback_matrix(fb).compose(c.matrix)
    assert _raises(DimensionMismatch, lift_feedback, fb, class_matrix(Partition.identity(8)))


def test_closed_loop_and_verification():
    bcn = example1_network()
    fb = StateFeedback(n_states=8, n_inputs=2, law=(2,) * 8, settling_bound=0)
    assert closed_loop(bcn, fb, 2, 3) == (2, 1, 1, 1)
    target = StateSet(n_states=8, members=(1,))
    assert not verify_stabilizes(bcn, fb, target)
    # 过短的仿真时域不足以覆盖 τ
    late = StateFeedback(n_states=8, n_inputs=2, law=(2,) * 8, settling_bound=20)
    assert not verify_stabilizes(bcn, late, target, horizon=4)


def test_stabilize_via_quotient_example1():
    bcn = example1_network()
    target = StateSet(n_states=8, members=(1, 5, 6, 7, 8))
    via = stabilize_via_quotient(bcn, target)
    assert via.quotient.partition == EXAMPLE1_PARTITION
    assert via.quotient_target.members == (1, 4)
    assert via.quotient_result.law == (2, 1, 1, 1)
    assert via.lifted.law == stabilize(bcn, target).law
    assert verify_stabilizes(bcn, via.lifted, target)


def test_stabilize_via_quotient_inconclusive():
    bcn = example1_network()
    via = stabilize_via_quotient(bcn, StateSet(n_states=8, members=(1,)))
    assert via.quotient.partition == Partition(n=8, blocks=((1,), (2, 3), (4, 5, 6, 7, 8)))
    assert isinstance(via.lifted, NotStabilizable)
    assert via.lifted.via_quotient
    assert via.lifted.unstabilizable == (4, 5, 6, 7, 8)


def test_random_quotient_stabilization_agrees_with_direct():
    rng = np.random.default_rng(21)
    for _ in range(40):
        n, m = int(rng.integers(2, 25)), int(rng.integers(1, 4))
        bcn = Bcn.from_columns(n, m, rng.integers(1, n + 1, size=n * m))
        members = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False) + 1
        target = StateSet(n_states=n, members=members.tolist())
        direct = stabilize(bcn, target)
        via = stabilize_via_quotient(bcn, target)
        if isinstance(via.lifted, StateFeedback):
            assert verify_stabilizes(bcn, via.lifted, target)
            assert isinstance(direct, StateFeedback)
            assert direct.law == via.lifted.law
        else:
            assert isinstance(direct, NotStabilizable)
            assert direct.unstabilizable == via.lifted.unstabilizable


# ============ 最优控制 ============

def test_optimal_control_example1():
    cost = CostSpec(n_states=8, n_inputs=2, l=((0,) * 8, (0,) * 8), g=(0,) + (1,) * 7)
    solution = optimal_control(example1_network(), cost, x0=2, horizon=1)
    assert solution.inputs == (1,)
    assert solution.cost == 0
    assert solution.trajectory == (2, 1)
    assert len(solution.value_table) == 2
    assert len(solution.policy) == 1


def test_optimal_control_zero_horizon():
    cost = example4_cost()
    bcn = Bcn.from_columns(4, 2, [2, 3, 4, 4, 1, 1, 1, 1])
    solution = optimal_control(bcn, cost, x0=4, horizon=0)
    assert solution.inputs == ()
    assert solution.cost == 2
    assert solution.trajectory == (4,)
    assert solution.policy == ()


def test_optimal_control_argument_checks():
    cost = example4_cost()
    bcn = Bcn.from_columns(4, 2, [2, 3, 4, 4, 1, 1, 1, 1])
    assert _raises(PreconditionError, optimal_control, bcn, cost, 1, -1)
    assert _raises(IndexOutOfRange, optimal_control, bcn, cost, 5, 2)
    assert _raises(DimensionMismatch, optimal_control, example1_network(), cost, 1, 2)


def test_optimal_control_matches_exhaustive_search():
    rng = np.random.default_rng(5)
    for _ in range(15):
        n, m = 6, int(rng.integers(2, 4))
        bcn = Bcn.from_columns(n, m, rng.integers(1, n + 1, size=n * m))
        cost = CostSpec(
            n_states=n,
            n_inputs=m,
            l=rng.integers(0, 6, size=(m, n)).tolist(),
            g=rng.integers(0, 10, size=n).tolist(),
        )
        for horizon in range(4):
            for x0 in range(1, n + 1):
                solution = optimal_control(bcn, cost, x0, horizon)
                best = min(
                    evaluate_cost(bcn, cost, x0, seq)
                    for seq in itertools.product(range(1, m + 1), repeat=horizon)
                )
                assert solution.cost == best
                assert evaluate_cost(bcn, cost, x0, solution.inputs) == best


def test_optimal_control_certificate():
    rng = np.random.default_rng(8)
    n, m, horizon = 10, 3, 5
    bcn = Bcn.from_columns(n, m, rng.integers(1, n + 1, size=n * m))
    cost = CostSpec(n_states=n, n_inputs=m, l=rng.integers(0, 4, size=(m, n)).tolist(), g=rng.integers(0, 9, size=n).tolist())
    solution = optimal_control(bcn, cost, 1, horizon)
    values = solution.value_table
    for t in range(horizon):
        for x in range(1, n + 1):
            options = [cost.stage(u, x) + values[t + 1][bcn.step(x, u) - 1] for u in range(1, m + 1)]
            assert values[t][x - 1] == min(options)
            chosen = solution.policy[t][x - 1]
            assert options[chosen - 1] == min(options)
            assert chosen == options.index(min(options)) + 1


def test_optimal_control_is_scale_invariant():
    rng = np.random.default_rng(13)
    n, m = 8, 2
    bcn = Bcn.from_columns(n, m, rng.integers(1, n + 1, size=n * m))
    cost = CostSpec(n_states=n, n_inputs=m, l=rng.integers(0, 4, size=(m, n)).tolist(), g=rng.integers(0, 9, size=n).tolist())
    base = optimal_control(bcn, cost, 3, 4)
    scaled = optimal_control(bcn, cost.scaled("3/2"), 3, 4)
    assert scaled.inputs == base.inputs
    assert scaled.cost == base.cost * Fraction(3, 2)


def test_lift_policy():
    c = class_matrix(EXAMPLE1_PARTITION)
    assert lift_policy(((2, 1, 1, 2),), c) == ((2, 1, 1, 1, 2, 2, 2, 2),)
    assert _raises(DimensionMismatch, lift_policy, ((1, 1),), c)


def test_optimal_via_quotient_identity_refinement():
    rng = np.random.default_rng(17)
    n, m = 8, 2
    bcn = Bcn.from_columns(n, m, rng.integers(1, n + 1, size=n * m))
    # 各状态终端代价互不相同，商系统就是原系统
    cost = CostSpec(n_states=n, n_inputs=m, l=((1,) * n, (2,) * n), g=tuple(range(n)))
    via = optimal_via_quotient(bcn, cost, 5, 4)
    direct = optimal_control(bcn, cost, 5, 4)
    assert via.quotient.reduced.n_states == n
    assert via.lifted == direct


def test_random_quotient_optimal_control_matches_exhaustive():
    rng = np.random.default_rng(33)
    for _ in range(10):
        n, m = 6, int(rng.integers(2, 4))
        bcn = Bcn.from_columns(n, m, rng.integers(1, n + 1, size=n * m))
        cost = _class_constant_cost(rng, n, m)
        for horizon in range(6 if m == 2 else 5):
            for x0 in range(1, n + 1):
                via = optimal_via_quotient(bcn, cost, x0, horizon)
                best = min(
                    evaluate_cost(bcn, cost, x0, seq)
                    for seq in itertools.product(range(1, m + 1), repeat=horizon)
                )
                assert via.lifted.cost == best
                assert via.quotient_solution.cost == best
                assert evaluate_cost(bcn, cost, x0, via.lifted.inputs) == best
                assert via.lifted.inputs == optimal_control(bcn, cost, x0, horizon).inputs
