"""
布尔控制网络的商系统

功能:
1. 半张量积 / 逻辑矩阵 / 布尔矩阵代数
2. 划分细化：给定关系内最大的同余等价关系
3. 商系统构造与转移对应验证
4. 经商系统的集合镇定与有限时域最优控制
"""
from bcnq.algebra import BooleanMatrix, CanonicalVector, LogicalMatrix, RationalMatrix, bool_product, meet, stp
from bcnq.control import (
    cost_partition,
    lift_feedback,
    optimal_control,
    optimal_via_quotient,
    project_cost,
    stabilize,
    stabilize_via_quotient,
    target_partition,
)
from bcnq.models import ClassOrder, CostSpec, NotStabilizable, OptimalSolution, StateFeedback, StateSet, TruthTable
from bcnq.network import Bcn, decode, encode, from_truth_table
from bcnq.partitions import ClassMatrix, Partition, class_matrix, is_congruence, refines, relation_matrix
from bcnq.quotient import QuotientSystem, build_quotient, verify_correspondence
from bcnq.refinement import maximality_oracle, refine, refine_relational

__all__ = [
    "BooleanMatrix", "CanonicalVector", "LogicalMatrix", "RationalMatrix", "bool_product", "meet", "stp",
    "Bcn", "TruthTable", "StateSet", "decode", "encode", "from_truth_table",
    "Partition", "ClassMatrix", "ClassOrder", "relation_matrix", "class_matrix", "is_congruence", "refines",
    "refine", "refine_relational", "maximality_oracle",
    "QuotientSystem", "build_quotient", "verify_correspondence",
    "CostSpec", "StateFeedback", "NotStabilizable", "OptimalSolution",
    "target_partition", "cost_partition", "stabilize", "lift_feedback", "project_cost",
    "optimal_control", "stabilize_via_quotient", "optimal_via_quotient",
]
