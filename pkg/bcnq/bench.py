"""
对比实验

随机生成 n 个内部节点、m 个控制节点的网络，分别直接求解与经商系统求解
镇定问题（目标集大小 k）和 T 步最优控制问题，记录规模、耗时以及两种结果是否一致。

随机网络：每个内部节点从 n+m 个变量中随机选 regulators 个作为输入，
更新函数取随机真值表；regulators=0 时 F 的每列独立均匀抽取。
目标集为均匀抽取的 k 元子集。
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt

from bcnq.control import optimal_control, optimal_via_quotient, stabilize, stabilize_via_quotient, verify_stabilizes
from bcnq.errors import BcnError
from bcnq.models import CostSpec, StateFeedback, StateSet, TruthTable
from bcnq.network import Bcn, from_truth_table

logger = logging.getLogger(__name__)


class BenchmarkConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    count: int = Field(default=4, ge=0)
    n_bits: int = Field(default=8, ge=1)
    m_bits: int = Field(default=2, ge=1)
    k_sizes: tuple[PositiveInt, ...] = (1, 100)
    horizon: int = Field(default=40, ge=0)
    regulators: int = Field(default=2, ge=0)
    seed: int = Field(default=0, ge=0)
    jobs: int = Field(default=1, ge=1)


class BenchmarkRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    instance: int
    task: str
    n_states: int
    quotient_states: int | None = None
    time_direct: float = 0.0
    time_quotient: float = 0.0
    results_match: bool = False
    error: str | None = None

    @property
    def within_bound(self) -> bool:
        """商系统状态数不超过原系统"""
        return self.quotient_states is None or self.quotient_states <= self.n_states


class BenchmarkReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: BenchmarkConfig
    records: tuple[BenchmarkRecord, ...] = ()

    @property
    def all_match(self) -> bool:
        return all(r.error is None and r.results_match and r.within_bound for r in self.records)

    def to_text(self, include_timing: bool = True) -> str:
        header = f"{'instance':>8}  {'task':<14}{'N':>7}{'Ñ':>7}"
        if include_timing:
            header += f"{'direct(s)':>12}{'quotient(s)':>13}"
        lines = [header + "  match"]
        for r in self.records:
            q = "-" if r.quotient_states is None else str(r.quotient_states)
            line = f"{r.instance:>8}  {r.task:<14}{r.n_states:>7}{q:>7}"
            if include_timing:
                line += f"{r.time_direct:>12.4f}{r.time_quotient:>13.4f}"
            status = f"error: {r.error}" if r.error else ("yes" if r.results_match and r.within_bound else "NO")
            lines.append(f"{line}  {status}")
        return "\n".join(lines) + "\n"


# ============ 随机实例 ============

def random_network(rng: np.random.Generator, n_bits: int, m_bits: int, regulators: int = 2) -> Bcn:
    n_states, n_inputs = 2 ** n_bits, 2 ** m_bits
    if regulators <= 0:
        columns = rng.integers(1, n_states + 1, size=n_states * n_inputs)
        return Bcn.from_columns(n_states, n_inputs, columns)

    n_vars = n_bits + m_bits
    k = min(regulators, n_vars)
    wiring = [rng.choice(n_vars, size=k, replace=False) for _ in range(n_bits)]
    tables = [rng.integers(0, 2, size=2 ** k) for _ in range(n_bits)]
    weights = 1 << np.arange(k - 1, -1, -1)

    def update(u_bits, x_bits):
        values = np.asarray(u_bits + x_bits)
        return tuple(int(table[int(values[regs] @ weights)]) for regs, table in zip(wiring, tables))

    return from_truth_table(TruthTable.from_functions(n_bits, m_bits, update))


def random_target(rng: np.random.Generator, n_states: int, k: int) -> StateSet:
    members = rng.choice(n_states, size=min(k, n_states), replace=False) + 1
    return StateSet(n_states=n_states, members=members.tolist())


def switching_cost(n_bits: int, m_bits: int) -> CostSpec:
    """l(u, x) = 1 当 u₁ = 1，否则 0；g(x) = 5 当 x₁ = 0，否则 0"""
    n_states, n_inputs = 2 ** n_bits, 2 ** m_bits
    # u₁ = 1 ⇔ 下标落在前一半
    stage = tuple(
        (1 if u <= n_inputs // 2 else 0,) * n_states for u in range(1, n_inputs + 1)
    )
    terminal = tuple(5 if x > n_states // 2 else 0 for x in range(1, n_states + 1))
    return CostSpec(n_states=n_states, n_inputs=n_inputs, l=stage, g=terminal)


# ============ 运行 ============

def _timed(fn, *args, **kwargs):
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, time.perf_counter() - start


def _stabilization_matches(bcn: Bcn, direct, via, target: StateSet) -> bool:
    lifted = via.lifted
    if isinstance(direct, StateFeedback) != isinstance(lifted, StateFeedback):
        return False
    if isinstance(direct, StateFeedback):
        return direct.law == lifted.law and verify_stabilizes(bcn, lifted, target)
    return direct.unstabilizable == lifted.unstabilizable


def run_instance(config: BenchmarkConfig, index: int) -> list[BenchmarkRecord]:
    """单个实例；随机数只由 (seed, index) 决定，与并发无关"""
    rng = np.random.default_rng([config.seed, index])
    n_states = 2 ** config.n_bits
    try:
        bcn = random_network(rng, config.n_bits, config.m_bits, config.regulators)
    except MemoryError:
        return [BenchmarkRecord(instance=index, task="generate", n_states=n_states, error="内存不足")]

    records = []
    for k in config.k_sizes:
        task = f"stabilize k={k}"
        target = random_target(rng, n_states, k)
        try:
            direct, t_direct = _timed(stabilize, bcn, target)
            via, t_quotient = _timed(stabilize_via_quotient, bcn, target)
        except (MemoryError, BcnError) as e:
            logger.warning(f"[Bench] 实例 {index} {task} 失败: {e}")
            records.append(BenchmarkRecord(instance=index, task=task, n_states=n_states, error=str(e) or "内存不足"))
            continue
        records.append(BenchmarkRecord(
            instance=index,
            task=task,
            n_states=n_states,
            quotient_states=via.quotient.reduced.n_states,
            time_direct=t_direct,
            time_quotient=t_quotient,
            results_match=_stabilization_matches(bcn, direct, via, target),
        ))

    task = f"optctl T={config.horizon}"
    cost = switching_cost(config.n_bits, config.m_bits)
    x0 = int(rng.integers(1, n_states + 1))
    try:
        direct, t_direct = _timed(optimal_control, bcn, cost, x0, config.horizon)
        via, t_quotient = _timed(optimal_via_quotient, bcn, cost, x0, config.horizon)
    except (MemoryError, BcnError) as e:
        logger.warning(f"[Bench] 实例 {index} {task} 失败: {e}")
        records.append(BenchmarkRecord(instance=index, task=task, n_states=n_states, error=str(e) or "内存不足"))
        return records
    records.append(BenchmarkRecord(
        instance=index,
        task=task,
        n_states=n_states,
        quotient_states=via.quotient.reduced.n_states,
        time_direct=t_direct,
        time_quotient=t_quotient,
        results_match=direct.cost == via.lifted.cost and direct.inputs == via.lifted.inputs,
    ))
    logger.info(f"[Bench] 实例 {index} 完成")
    return records


def run_benchmark(config: BenchmarkConfig) -> BenchmarkReport:
    indices = range(config.count)
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            batches = list(pool.map(lambda i: run_instance(config, i), indices))
    else:
        batches = [run_instance(config, i) for i in indices]
    records = tuple(r for batch in batches for r in batch)
    return BenchmarkReport(config=config, records=records)
