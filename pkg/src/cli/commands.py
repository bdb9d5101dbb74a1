"""Command handlers and the argument parser for ``python -m src.main``."""

import argparse
import sys
import time
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ValidationError, field_validator

from src.circuit.generators import gen_benchmark
from src.circuit.model import BenchmarkKind
from src.cli.summary import (
    format_cost_model_table,
    format_fusion_summary,
    format_report_kv,
    format_report_table,
    report_values,
)
from src.core.config import (
    FUSION_PRESETS,
    CostModelSection,
    FusionConfig,
    FusionMode,
    FusionSection,
    KernelConfig,
    Precision,
    SimConfig,
    TileFuseConfig,
    build_fusion_config,
    first_error,
    resolve_cost_model_path,
    resolve_threads,
)
from src.core.errors import EXIT_OK, ConfigError
from src.core.utils import set_phase, set_run_context, setup_logging
from src.fusion.costmodel import CostModel, bench_cost_model
from src.fusion.driver import fuse_circuit, run_fusion
from src.sim.runner import plan_circuit, run_circuit
from src.sim.statevector import init_zero_state, norm
from src.store.costmodel_file import load_cost_model, save_cost_model
from src.store.qcfile import read_circuit, serialize_circuit, write_circuit
from src.store.statedump import dump_state
from src.tile.tile import build_tile

logger = setup_logging()


class CliConfig(BaseModel):
    """Everything one run/fuse invocation needs, validated before any work starts."""

    precision: Precision = Precision.F64
    simd_s: int = 0
    threads: int = 1
    fusion: FusionConfig = FusionConfig()
    kernel: KernelConfig = KernelConfig()
    cost_model_path: str = ""
    memory_budget_fraction: float = 0.8

    @field_validator("threads")
    @classmethod
    def _threads_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("threads must be >= 1")
        return v


def _validated(model, data: dict, what: str):
    try:
        return model(**data)
    except ValidationError as e:
        raise ConfigError(f"invalid {what}: {first_error(e)}") from e


def _given(args: argparse.Namespace, name: str):
    return getattr(args, name, None)


def resolve_cli_config(config: TileFuseConfig, args: argparse.Namespace) -> CliConfig:
    """Merge command-line flags over the loaded configuration (flags win)."""
    sim = config.sim.model_dump()
    for key, flag in (("precision", "precision"), ("simd_s", "simd"), ("threads", "threads")):
        if _given(args, flag) is not None:
            sim[key] = _given(args, flag)
    sim_cfg = _validated(SimConfig, sim, "simulation settings")

    kernel = config.kernel.model_dump()
    for key, flag in (("zero_tolerance", "kernel_zero_tolerance"), ("one_tolerance", "kernel_one_tolerance")):
        if _given(args, flag) is not None:
            kernel[key] = _given(args, flag)
    if _given(args, "force_dense_kernel"):
        kernel["force_dense"] = True
    if _given(args, "runtime_matrix"):
        kernel["runtime_matrix"] = True
    kernel_cfg = _validated(KernelConfig, kernel, "kernel settings")

    fusion = config.fusion.model_dump()
    if _given(args, "preset") is not None:
        fusion.update(preset=args.preset, mode=None, k_max=None, max_op_count=None)
    for key, flag in (
        ("mode", "fusion"),
        ("k_max", "k_max"),
        ("max_op_count", "max_op_count"),
        ("zero_tolerance", "zero_tolerance"),
        ("one_tolerance", "one_tolerance"),
        ("agglomerative", "agglomerative"),
        ("multi_traversal", "multi_traversal"),
        ("max_traversals", "max_traversals"),
    ):
        if _given(args, flag) is not None:
            fusion[key] = _given(args, flag)
    fusion_cfg = build_fusion_config(_validated(FusionSection, fusion, "fusion settings"))

    if sim_cfg.threads == 0:
        threads = resolve_threads(config)
    else:
        threads = sim_cfg.threads
    cost_model_path = _given(args, "cost_model") or resolve_cost_model_path(config)
    return _validated(CliConfig, {
        "precision": sim_cfg.precision,
        "simd_s": sim_cfg.simd_s,
        "threads": threads,
        "fusion": fusion_cfg,
        "kernel": kernel_cfg,
        "cost_model_path": cost_model_path,
        "memory_budget_fraction": config.app.memory_budget_fraction,
    }, "run settings")


def _load_cost_model_for(cli: CliConfig) -> Optional[CostModel]:
    if cli.fusion.mode is FusionMode.ADAPTIVE:
        if not cli.cost_model_path:
            raise ConfigError("adaptive fusion needs a cost model (--cost-model or costmodel.path)")
        return load_cost_model(cli.cost_model_path)
    return None


def cmd_run(args: argparse.Namespace, config: TileFuseConfig) -> int:
    cli = resolve_cli_config(config, args)
    name = Path(args.circuit).name
    set_run_context(name, "parse")
    start = time.perf_counter()
    circuit = read_circuit(args.circuit)
    parse_seconds = time.perf_counter() - start

    cm = _load_cost_model_for(cli)
    sv = init_zero_state(circuit.n_qubits, cli.precision, cli.memory_budget_fraction)

    fused, stats = run_fusion(circuit, cli.fusion, cm, cli.threads)
    if args.dump_plans:
        plans = plan_circuit(fused, cli.simd_s, cli.kernel.zero_tolerance, cli.kernel.one_tolerance,
                             cli.kernel.runtime_matrix, cli.kernel.force_dense)
        Path(args.dump_plans).write_text("\n".join(p.describe() for p in plans), encoding="utf-8")

    report = run_circuit(
        fused, sv, cli.threads, cli.simd_s,
        cli.kernel.zero_tolerance, cli.kernel.one_tolerance,
        cli.kernel.runtime_matrix, cli.kernel.force_dense,
    )
    report.parse_seconds = parse_seconds
    report.fusion_seconds = stats.fusion_seconds
    report.original_gate_count = len(circuit)

    values = report_values(name, report, stats, norm(sv))
    sys.stdout.write(format_report_table(values))
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        Path(args.report).write_text(format_report_kv(values), encoding="utf-8")
    if args.dump_state:
        dump_state(sv, args.dump_state)
    return EXIT_OK


def cmd_fuse(args: argparse.Namespace, config: TileFuseConfig) -> int:
    cli = resolve_cli_config(config, args)
    name = Path(args.circuit).name
    set_run_context(name, "parse")
    circuit = read_circuit(args.circuit)
    cm = _load_cost_model_for(cli)

    fused, stats, tile = fuse_circuit(circuit, cli.fusion, cm, cli.threads)
    if args.dump_tile:
        if tile is None:
            tile = build_tile(circuit, cli.fusion.hard_cap)
        Path(args.dump_tile).write_text(tile.dump(), encoding="utf-8")
    write_circuit(fused, args.output)
    sys.stdout.write(format_fusion_summary(stats))
    return EXIT_OK


def cmd_gen(args: argparse.Namespace, config: TileFuseConfig) -> int:
    set_run_context(f"{args.kind}-{args.qubits}", "generate")
    circuit = gen_benchmark(args.kind, args.qubits, args.depth, args.seed)
    if args.output:
        write_circuit(circuit, args.output)
    else:
        sys.stdout.write(serialize_circuit(circuit))
    return EXIT_OK


def cmd_costmodel(args: argparse.Namespace, config: TileFuseConfig) -> int:
    section = config.costmodel.model_dump()
    for key, flag in (("bench_n", "bench_n"), ("k_min", "k_min"), ("k_max", "k_max"),
                      ("thread_counts", "thread_counts"), ("repetitions", "repetitions")):
        if _given(args, flag) is not None:
            section[key] = _given(args, flag)
    bench = _validated(CostModelSection, section, "cost model settings")
    output = args.output or resolve_cost_model_path(config)
    if not output:
        raise ConfigError("no output path for the cost model (-o or costmodel.path)")
    precision = Precision(args.precision or config.sim.precision)

    set_run_context("costmodel", "bench")
    cm = bench_cost_model(
        bench.bench_n, range(bench.k_min, bench.k_max + 1), bench.thread_counts,
        bench.repetitions, precision, args.seed, config.app.memory_budget_fraction,
    )
    set_phase("save")
    save_cost_model(cm, output)
    sys.stdout.write(format_cost_model_table(cm))
    return EXIT_OK


def _thread_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got '{text}'") from None


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    prec = p.add_argument_group("precision")
    prec.add_argument("--precision", choices=[x.value for x in Precision], default=None,
                      help="amplitude precision (config: sim.precision)")
    prec.add_argument("--f32", dest="precision", action="store_const", const="f32", help="alias of --precision f32")
    prec.add_argument("--f64", dest="precision", action="store_const", const="f64", help="alias of --precision f64")

    p.add_argument("-S", "--simd", type=int, default=None, help="SIMD exponent s, vector length 2^s (config: sim.simd_s)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads; 0 = host logical cores (config: sim.threads, env TILEFUSE_THREADS)")

    fusion = p.add_argument_group("fusion")
    fusion.add_argument("--fusion", choices=[m.value for m in FusionMode], default=None,
                        help="fusion mode (config: fusion.mode)")
    fusion.add_argument("--preset", choices=list(FUSION_PRESETS), default=None,
                        help="named fusion preset (config: fusion.preset)")
    fusion.add_argument("--k-max", type=int, default=None, help="largest fused gate in qubits (config: fusion.k_max)")
    fusion.add_argument("--max-op-count", type=int, default=None,
                        help="adaptive cap on fused-gate op count (config: fusion.max_op_count)")
    fusion.add_argument("--zero-tolerance", type=float, default=None,
                        help="fusion zero tolerance (config: fusion.zero_tolerance)")
    fusion.add_argument("--one-tolerance", type=float, default=None,
                        help="fusion +-1 tolerance; 0 disables +-1 detection (config: fusion.one_tolerance)")
    fusion.add_argument("--agglomerative", action=argparse.BooleanOptionalAction, default=None,
                        help="raise the fused size from 2 to k-max across passes (config: fusion.agglomerative)")
    fusion.add_argument("--multi-traversal", action=argparse.BooleanOptionalAction, default=None,
                        help="repeat traversals until nothing fuses (config: fusion.multi_traversal)")
    fusion.add_argument("--max-traversals", type=int, default=None,
                        help="traversal bound per size (config: fusion.max_traversals)")
    fusion.add_argument("--cost-model", default=None,
                        help="cost model file for adaptive fusion (config: costmodel.path, env TILEFUSE_COST_MODEL)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="tilefuse",
        description="Statevector simulator with sparsity-aware gate fusion.",
        formatter_class=fmt,
    )
    parser.add_argument("--config", default=None, help="YAML config file (default: config/tilefuse.yml if present)")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    run = sub.add_parser("run", help="fuse and simulate a circuit file", formatter_class=fmt)
    run.add_argument("circuit", help="circuit file")
    _add_pipeline_flags(run)
    kernel = run.add_argument_group("kernel")
    kernel.add_argument("--kernel-zero-tolerance", type=float, default=None,
                        help="kernel zero tolerance (config: kernel.zero_tolerance)")
    kernel.add_argument("--kernel-one-tolerance", type=float, default=None,
                        help="kernel +-1 tolerance (config: kernel.one_tolerance)")
    kernel.add_argument("--force-dense-kernel", action="store_true",
                        help="plan every matrix entry as a general scalar (config: kernel.force_dense)")
    kernel.add_argument("--runtime-matrix", action="store_true",
                        help="pass matrix values at call time and validate them (config: kernel.runtime_matrix)")
    out = run.add_argument_group("output")
    out.add_argument("--report", default=None, help="write key=value report to this path")
    out.add_argument("--dump-state", default=None, help="write the final amplitudes to this path")
    out.add_argument("--dump-plans", default=None, help="write kernel plan listings to this path")
    run.set_defaults(handler=cmd_run)

    fuse = sub.add_parser("fuse", help="fuse a circuit file and write the result", formatter_class=fmt)
    fuse.add_argument("circuit", help="circuit file")
    fuse.add_argument("-o", "--output", required=True, help="fused circuit output path")
    fuse.add_argument("--dump-tile", default=None, help="write the fused tile listing to this path")
    _add_pipeline_flags(fuse)
    fuse.set_defaults(handler=cmd_fuse)

    gen = sub.add_parser("gen", help="generate a benchmark circuit", formatter_class=fmt)
    gen.add_argument("kind", help=f"benchmark family: {', '.join(k.value for k in BenchmarkKind)}")
    gen.add_argument("-n", "--qubits", type=int, required=True, help="qubit count")
    gen.add_argument("--depth", type=int, default=1, help="layers (ignored by qft)")
    gen.add_argument("--seed", type=int, default=0, help="PCG64 seed")
    gen.add_argument("-o", "--output", default=None, help="output path (default: stdout)")
    gen.set_defaults(handler=cmd_gen)

    cost = sub.add_parser("costmodel", help="benchmark this host and write a cost model", formatter_class=fmt)
    cost.add_argument("-o", "--output", default=None, help="cost model path (default: costmodel.path)")
    cost.add_argument("--bench-n", type=int, default=None, help="statevector size used for timing (config: costmodel.bench_n)")
    cost.add_argument("--k-min", type=int, default=None, help="smallest gate size (config: costmodel.k_min)")
    cost.add_argument("--k-max", type=int, default=None, help="largest gate size (config: costmodel.k_max)")
    cost.add_argument("--thread-counts", type=_thread_list, default=None,
                      help="comma-separated thread counts (config: costmodel.thread_counts)")
    cost.add_argument("--repetitions", type=int, default=None, help="timed runs per record (config: costmodel.repetitions)")
    cost.add_argument("--precision", choices=[x.value for x in Precision], default=None,
                      help="benchmark precision (config: sim.precision)")
    cost.add_argument("--seed", type=int, default=0, help="PCG64 seed for gates and state")
    cost.set_defaults(handler=cmd_costmodel)
    return parser
