"""
命令行入口

子命令: convert / refine / quotient / stabilize / optctl / simulate / bench
退出码: 0 成功；2 领域失败（不可镇定、划分不同余、商代价无定义、实验结果不一致）；
1 用法或解析错误。
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from bcnq.bench import BenchmarkConfig, run_benchmark
from bcnq.config import Settings, get_settings
from bcnq.control import closed_loop, optimal_control, optimal_via_quotient, stabilize, stabilize_via_quotient
from bcnq.data import BUILTIN_COSTS, BUILTIN_NETWORKS, BUILTIN_PARTITIONS, BUILTIN_TRUTH_TABLES, get_builtin
from bcnq.errors import BcnError, CongruenceViolation, IllDefinedCost
from bcnq.formats import (
    dump_classes,
    dump_feedback,
    dump_network,
    dump_partition,
    dump_solution,
    parse_cost,
    parse_feedback,
    parse_network,
    parse_partition,
    parse_truth_table,
    read_text,
)
from bcnq.models import ClassOrder, NotStabilizable, OutputFormat, StateSet
from bcnq.network import from_truth_table
from bcnq.quotient import build_quotient, verify_correspondence
from bcnq.refinement import refine

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2


class UsageError(Exception):
    """命令行参数错误"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ============ 参数解析工具 ============

def parse_index_list(text: str) -> list[int]:
    """'1,3,5-8' → [1, 3, 5, 6, 7, 8]"""
    values = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = (int(v) for v in part.split("-", 1))
                if lo > hi:
                    raise UsageError(f"区间上界小于下界: '{part}'")
                values.extend(range(lo, hi + 1))
            else:
                values.append(int(part))
        except ValueError:
            raise UsageError(f"无法解析下标列表: '{text}'") from None
    return values


def _load(spec: str, parse, builtins: dict, what: str):
    if spec.startswith("builtin:"):
        return get_builtin(builtins, spec.removeprefix("builtin:"), what)
    return parse(read_text(spec), spec)


def _write_artifact(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _summarize(settings: Settings, args, summary: dict, line: str) -> None:
    """产物写入文件时摘要打到 stdout，否则打到 stderr，避免混入产物"""
    stream = sys.stdout if getattr(args, "output", None) else sys.stderr
    if settings.output_format is OutputFormat.JSON:
        print(json.dumps(summary, ensure_ascii=False), file=stream)
    else:
        print(line, file=stream)


def _class_order(args, settings: Settings) -> ClassOrder:
    return ClassOrder(args.class_order) if getattr(args, "class_order", None) else settings.class_order


# ============ 子命令 ============

def cmd_convert(args, settings: Settings) -> int:
    tt = _load(args.table, parse_truth_table, BUILTIN_TRUTH_TABLES, "真值表")
    bcn = from_truth_table(tt)
    _write_artifact(dump_network(bcn), args.output)
    _summarize(settings, args, {"command": "convert", "states": bcn.n_states, "inputs": bcn.n_inputs},
               f"[Convert] N={bcn.n_states}, M={bcn.n_inputs}")
    return EXIT_OK


def cmd_refine(args, settings: Settings) -> int:
    bcn = _load(args.network, parse_network, BUILTIN_NETWORKS, "网络")
    seed = _load(args.partition, parse_partition, BUILTIN_PARTITIONS, "划分")
    result, trace = refine(bcn, seed, workers=settings.workers)
    _write_artifact(dump_partition(result), args.output)
    _summarize(settings, args,
               {"command": "refine", "k_star": trace.k_star, "seed_blocks": len(seed), "blocks": len(result)},
               f"[Refine] k*={trace.k_star}, {len(seed)} 块 → {len(result)} 块")
    return EXIT_OK


def cmd_quotient(args, settings: Settings) -> int:
    bcn = _load(args.network, parse_network, BUILTIN_NETWORKS, "网络")
    p = _load(args.partition, parse_partition, BUILTIN_PARTITIONS, "划分")
    q = build_quotient(bcn, p, order=_class_order(args, settings), workers=settings.workers)
    _write_artifact(dump_network(q.reduced), args.output)
    if args.classes_out:
        Path(args.classes_out).write_text(dump_classes(q.classes), encoding="utf-8")
    ok = verify_correspondence(bcn, q)
    _summarize(settings, args,
               {"command": "quotient", "states": bcn.n_states, "quotient_states": q.reduced.n_states,
                "correspondence": ok},
               f"[Quotient] N={bcn.n_states} → Ñ={q.reduced.n_states}, 转移对应{'成立' if ok else '不成立'}")
    return EXIT_OK if ok else EXIT_DOMAIN


def _report_unstabilizable(settings: Settings, args, result: NotStabilizable) -> int:
    preview = ", ".join(map(str, result.unstabilizable[:20]))
    more = " ..." if len(result.unstabilizable) > 20 else ""
    _summarize(settings, args,
               {"command": "stabilize", "stabilizable": False, "unstabilizable": list(result.unstabilizable),
                "invariant_core": list(result.invariant_core)},
               f"[Stabilize] 无法镇定: {len(result.unstabilizable)} 个状态 ({preview}{more})")
    return EXIT_DOMAIN


def cmd_stabilize(args, settings: Settings) -> int:
    bcn = _load(args.network, parse_network, BUILTIN_NETWORKS, "网络")
    target = StateSet(n_states=bcn.n_states, members=parse_index_list(args.target))
    quotient_states = None
    if args.direct:
        result = stabilize(bcn, target)
    else:
        via = stabilize_via_quotient(bcn, target, order=_class_order(args, settings), workers=settings.workers)
        quotient_states = via.quotient.reduced.n_states
        result = via.lifted
        if isinstance(result, NotStabilizable):
            print("[Stabilize] 商系统不可镇定, 商方法结论不确定, 改为直接在原系统上求解", file=sys.stderr)
            result = stabilize(bcn, target)
    if isinstance(result, NotStabilizable):
        return _report_unstabilizable(settings, args, result)
    _write_artifact(dump_feedback(result), args.output)
    _summarize(settings, args,
               {"command": "stabilize", "stabilizable": True, "settling_bound": result.settling_bound,
                "quotient_states": quotient_states},
               f"[Stabilize] τ={result.settling_bound}"
               + ("" if quotient_states is None else f", 商系统 {quotient_states} 个状态"))
    return EXIT_OK


def cmd_optctl(args, settings: Settings) -> int:
    bcn = _load(args.network, parse_network, BUILTIN_NETWORKS, "网络")
    cost = _load(args.cost, parse_cost, BUILTIN_COSTS, "代价")
    quotient_states = None
    if args.direct:
        solution = optimal_control(bcn, cost, args.x0, args.horizon)
    else:
        via = optimal_via_quotient(bcn, cost, args.x0, args.horizon,
                                   order=_class_order(args, settings), workers=settings.workers)
        quotient_states = via.quotient.reduced.n_states
        solution = via.lifted
    _write_artifact(dump_solution(solution), args.output)
    _summarize(settings, args,
               {"command": "optctl", "cost": str(solution.cost), "inputs": list(solution.inputs),
                "quotient_states": quotient_states},
               f"[OptCtl] J*={solution.cost}, u*={' '.join(map(str, solution.inputs)) or '-'}")
    return EXIT_OK


def cmd_simulate(args, settings: Settings) -> int:
    bcn = _load(args.network, parse_network, BUILTIN_NETWORKS, "网络")
    if args.inputs is not None:
        states = bcn.trajectory(args.x0, parse_index_list(args.inputs))
    else:
        if args.feedback is None or args.steps is None:
            raise UsageError("需要 --inputs, 或同时给出 --feedback 与 --steps")
        fb = parse_feedback(read_text(args.feedback), args.feedback)
        states = closed_loop(bcn, fb, args.x0, args.steps)
    if settings.output_format is OutputFormat.JSON:
        print(json.dumps({"command": "simulate", "trajectory": list(states)}))
    else:
        print("trajectory " + " ".join(map(str, states)))
    return EXIT_OK


def cmd_bench(args, settings: Settings) -> int:
    config = BenchmarkConfig(
        count=args.count,
        n_bits=args.n_bits,
        m_bits=args.m_bits,
        k_sizes=tuple(args.k),
        horizon=args.horizon,
        regulators=args.regulators,
        seed=settings.seed,
        jobs=args.jobs,
    )
    report = run_benchmark(config)
    if settings.output_format is OutputFormat.JSON:
        text = report.model_dump_json(indent=2) + "\n"
    else:
        text = report.to_text()
    _write_artifact(text, args.output)
    return EXIT_OK if report.all_match else EXIT_DOMAIN


# ============ 解析器 ============

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bcnq", description="布尔控制网络的商系统构造与控制器设计")
    parser.add_argument("--seed", type=int, default=None, help="随机种子 (默认: BCNQ_SEED 或 0)")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=None,
                        help="报告格式 (默认: BCNQ_FORMAT 或 text)")
    parser.add_argument("--log-level", default=None, help="日志级别 (默认: BCNQ_LOG_LEVEL 或 WARNING)")
    parser.add_argument("--workers", type=int, default=None, help="并行线程数 (默认: BCNQ_WORKERS 或 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_output(p):
        p.add_argument("-o", "--output", default=None, help="输出文件 (默认: stdout)")
        return p

    def with_order(p):
        p.add_argument("--class-order", choices=[o.value for o in ClassOrder], default=None,
                       help="商状态编号顺序 (默认: BCNQ_CLASS_ORDER 或 first-occurrence)")
        return p

    def with_mode(p):
        group = p.add_mutually_exclusive_group()
        group.add_argument("--via-quotient", action="store_true", help="经商系统求解 (默认)")
        group.add_argument("--direct", action="store_true", help="直接在原系统上求解")
        return p

    p = with_output(sub.add_parser("convert", help="真值表 → 代数形式网络"))
    p.add_argument("table")
    p.set_defaults(handler=cmd_convert)

    p = with_output(sub.add_parser("refine", help="求给定划分内最大的同余划分"))
    p.add_argument("network")
    p.add_argument("partition")
    p.set_defaults(handler=cmd_refine)

    p = with_order(with_output(sub.add_parser("quotient", help="构造商系统")))
    p.add_argument("network")
    p.add_argument("partition")
    p.add_argument("--classes-out", default=None, help="类分配向量输出文件")
    p.set_defaults(handler=cmd_quotient)

    p = with_mode(with_order(with_output(sub.add_parser("stabilize", help="集合镇定"))))
    p.add_argument("network")
    p.add_argument("--target", required=True, help="目标状态, 如 387 或 1,5-8")
    p.set_defaults(handler=cmd_stabilize)

    p = with_mode(with_order(with_output(sub.add_parser("optctl", help="有限时域最优控制"))))
    p.add_argument("network")
    p.add_argument("cost")
    p.add_argument("--x0", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.set_defaults(handler=cmd_optctl)

    p = sub.add_parser("simulate", help="仿真轨迹")
    p.add_argument("network")
    p.add_argument("--x0", type=int, required=True)
    p.add_argument("--inputs", default=None, help="输入序列, 如 1,1,2")
    p.add_argument("--feedback", default=None, help="反馈文件")
    p.add_argument("--steps", type=int, default=None)
    p.set_defaults(handler=cmd_simulate)

    p = with_output(sub.add_parser("bench", help="直接法与商方法对比实验"))
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--n-bits", type=int, default=8)
    p.add_argument("--m-bits", type=int, default=2)
    p.add_argument("--k", type=int, nargs="+", default=[1, 100])
    p.add_argument("--horizon", type=int, default=40)
    p.add_argument("--regulators", type=int, default=2, help="每个节点的调控者个数, 0 表示 F 各列均匀随机")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(handler=cmd_bench)
    return parser


def _resolve_settings(args) -> Settings:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.format is not None:
        overrides["output_format"] = OutputFormat(args.format)
    if args.log_level is not None:
        overrides["log_level"] = args.log_level.upper()
    if args.workers is not None:
        overrides["workers"] = args.workers
    settings = get_settings()
    if overrides:
        settings = Settings(**(settings.model_dump() | overrides))
    return settings


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        settings = _resolve_settings(args)
    except UsageError as e:
        print(f"bcnq: 参数错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, ValueError) as e:
        print(f"bcnq: 配置错误: {e}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args, settings)
    except (CongruenceViolation, IllDefinedCost) as e:
        print(f"bcnq: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except (UsageError, BcnError, ValidationError) as e:
        print(f"bcnq: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
