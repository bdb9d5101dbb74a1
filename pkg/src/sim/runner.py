import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from src.circuit.model import Circuit
from src.core.errors import StateError
from src.core.utils import set_phase, setup_logging
from src.gates.core import DEFAULT_ONE_TOL, DEFAULT_ZERO_TOL
from src.kernel.apply import apply_kernel
from src.kernel.plan import KernelPlan, plan_kernel
from src.sim.statevector import Statevector, state_bytes

logger = setup_logging()

# below this many loop iterations per gate the pool costs more than it saves
MIN_PARALLEL_DOMAIN = 1 << 10


@dataclass
class RunReport:
    n_qubits: int = 0
    precision: str = "f64"
    threads: int = 1
    simd_s: int = 0
    parse_seconds: float = 0.0
    fusion_seconds: float = 0.0
    planning_seconds: float = 0.0
    execution_seconds: float = 0.0
    original_gate_count: int = 0
    gate_count: int = 0
    total_op_count: int = 0
    peak_memory_bytes: int = 0
    strategies: dict[str, int] = field(default_factory=dict)

    @property
    def frontend_seconds(self) -> float:
        return self.parse_seconds + self.fusion_seconds + self.planning_seconds

    @property
    def total_seconds(self) -> float:
        return self.frontend_seconds + self.execution_seconds

    @property
    def frontend_fraction(self) -> float:
        total = self.total_seconds
        return self.frontend_seconds / total if total > 0 else 0.0

    @property
    def compression_ratio(self) -> float:
        return self.original_gate_count / self.gate_count if self.gate_count else 1.0


def partition(domain: int, parts: int) -> list[tuple[int, int]]:
    """Contiguous equal split of [0, domain); the last chunk takes the remainder."""
    parts = max(1, min(parts, domain))
    size = domain // parts
    bounds = [(i * size, (i + 1) * size) for i in range(parts)]
    bounds[-1] = (bounds[-1][0], domain)
    return bounds


def plan_circuit(c: Circuit, s: int = 0, zero_tol: float = DEFAULT_ZERO_TOL, one_tol: float = DEFAULT_ONE_TOL,
                 runtime_matrix: bool = False, force_dense: bool = False) -> list[KernelPlan]:
    plans = []
    clamped = 0
    for g in c.gates:
        s_eff = min(s, c.n_qubits - g.k)
        if s_eff < s:
            clamped += 1
        plans.append(plan_kernel(g, c.n_qubits, s_eff, zero_tol, one_tol, runtime_matrix, force_dense))
    if clamped:
        logger.warning(f"simd exponent {s} clamped for {clamped} gate(s) too wide for {c.n_qubits} qubits")
    return plans


def execute_plans(plans: list[KernelPlan], sv: Statevector, threads: int = 1) -> None:
    def run(plan: KernelPlan, lo: int, hi: int) -> None:
        override = plan.gate.matrix if plan.runtime_matrix else None
        apply_kernel(plan, sv, override, lo, hi)

    if threads <= 1:
        for plan in plans:
            run(plan, 0, plan.domain)
        return

    with ThreadPoolExecutor(max_workers=threads) as pool:
        for plan in plans:
            if plan.domain < MIN_PARALLEL_DOMAIN:
                run(plan, 0, plan.domain)
                continue
            futures = [pool.submit(run, plan, lo, hi) for lo, hi in partition(plan.domain, threads)]
            # barrier: every chunk of this gate finishes before the next gate starts
            for f in futures:
                f.result()


def run_circuit(c: Circuit, sv: Statevector, threads: int = 1, s: int = 0,
                zero_tol: float = DEFAULT_ZERO_TOL, one_tol: float = DEFAULT_ONE_TOL,
                runtime_matrix: bool = False, force_dense: bool = False) -> RunReport:
    if c.n_qubits != sv.n:
        raise StateError(f"circuit has {c.n_qubits} qubits but the statevector has {sv.n}")
    if threads < 1:
        raise StateError(f"threads must be >= 1, got {threads}")

    set_phase("plan")
    start = time.perf_counter()
    plans = plan_circuit(c, s, zero_tol, one_tol, runtime_matrix, force_dense)
    planning = time.perf_counter() - start

    set_phase("execute")
    start = time.perf_counter()
    execute_plans(plans, sv, threads)
    execution = time.perf_counter() - start

    strategies: dict[str, int] = {}
    for p in plans:
        strategies[p.strategy] = strategies.get(p.strategy, 0) + 1
    report = RunReport(
        n_qubits=c.n_qubits,
        precision=sv.precision.value,
        threads=threads,
        simd_s=s,
        planning_seconds=planning,
        execution_seconds=execution if plans else 0.0,
        original_gate_count=len(c),
        gate_count=len(c),
        total_op_count=sum(p.op_count for p in plans),
        peak_memory_bytes=state_bytes(sv.n, sv.precision),
        strategies=strategies,
    )
    logger.info(
        f"Executed {len(plans)} gate(s) on {sv.n} qubits with {threads} thread(s): "
        f"plan {planning:.4f}s, execute {execution:.4f}s"
    )
    return report
