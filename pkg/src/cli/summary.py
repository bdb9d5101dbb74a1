from src.fusion.costmodel import CostModel
from src.fusion.driver import FusionStats
from src.sim.runner import RunReport

# fixed, documented report keys (README "Report keys")
REPORT_KEYS = (
    "circuit",
    "n_qubits",
    "precision",
    "threads",
    "simd_s",
    "fusion_mode",
    "original_gate_count",
    "fused_block_count",
    "compression_ratio",
    "total_op_count",
    "traversals",
    "k_schedule",
    "parse_seconds",
    "fusion_seconds",
    "planning_seconds",
    "execution_seconds",
    "frontend_seconds",
    "frontend_fraction",
    "peak_memory_bytes",
    "kernel_strategies",
    "norm",
)


def _seconds(x: float) -> str:
    return f"{x:.6f}"


def report_values(circuit: str, report: RunReport, stats: FusionStats, norm: float) -> dict[str, str]:
    values = {
        "circuit": circuit,
        "n_qubits": str(report.n_qubits),
        "precision": report.precision,
        "threads": str(report.threads),
        "simd_s": str(report.simd_s),
        "fusion_mode": stats.mode,
        "original_gate_count": str(stats.original_gate_count),
        "fused_block_count": str(stats.fused_block_count),
        "compression_ratio": f"{stats.compression_ratio:.4f}",
        "total_op_count": str(report.total_op_count),
        "traversals": str(stats.traversals),
        "k_schedule": ",".join(str(k) for k in stats.k_schedule) or "-",
        "parse_seconds": _seconds(report.parse_seconds),
        "fusion_seconds": _seconds(report.fusion_seconds),
        "planning_seconds": _seconds(report.planning_seconds),
        "execution_seconds": _seconds(report.execution_seconds),
        "frontend_seconds": _seconds(report.frontend_seconds),
        "frontend_fraction": f"{report.frontend_fraction:.4f}",
        "peak_memory_bytes": str(report.peak_memory_bytes),
        "kernel_strategies": ",".join(f"{k}:{v}" for k, v in sorted(report.strategies.items())) or "-",
        "norm": f"{norm:.15f}",
    }
    return {k: values[k] for k in REPORT_KEYS}


def format_report_kv(values: dict[str, str]) -> str:
    return "".join(f"{k}={v}\n" for k, v in values.items())


def format_report_table(values: dict[str, str]) -> str:
    width = max(len(k) for k in values)
    lines = [f"{'key'.ljust(width)}  value", f"{'-' * width}  {'-' * 24}"]
    lines += [f"{k.ljust(width)}  {v}" for k, v in values.items()]
    return "\n".join(lines) + "\n"


def format_fusion_summary(stats: FusionStats) -> str:
    schedule = ",".join(str(k) for k in stats.k_schedule) or "-"
    return (
        f"{stats.line()}\n"
        f"mode={stats.mode} traversals={stats.traversals} k_schedule={schedule} "
        f"total_op_count={stats.total_op_count} fusion_seconds={stats.fusion_seconds:.6f}\n"
    )


def format_cost_model_table(cm: CostModel) -> str:
    lines = [
        f"cost model: bench_n={cm.bench_n} precision={cm.precision.value}",
        f"host: {cm.host}",
        f"{'k':>3} {'ops':>9} {'threads':>7} {'sec/group':>12} {'sec/pass':>10}",
    ]
    for r in sorted(cm.records, key=lambda r: (r.k, r.threads, r.op_count)):
        per_pass = r.seconds_per_group * (1 << (cm.bench_n - r.k))
        lines.append(f"{r.k:>3} {r.op_count:>9} {r.threads:>7} {r.seconds_per_group:>12.4e} {per_pass:>10.4f}")
    return "\n".join(lines) + "\n"
