"""Measured cost model: seconds per amplitude group by gate size, op count and threads."""

import math
import os
import platform
import statistics
import time
from typing import Iterable, Sequence

import numpy as np
from pydantic import BaseModel, field_validator

from src.circuit.generators import make_rng
from src.core.config import Precision
from src.core.errors import ConfigError, CostModelLookupError
from src.core.utils import set_phase, setup_logging
from src.gates.core import Gate, op_count, sparsity_profile
from src.gates.library import random_diagonal, random_signed_permutation, random_unitary
from src.kernel.plan import plan_kernel
from src.sim.runner import execute_plans
from src.sim.statevector import check_memory, init_zero_state

logger = setup_logging()

COST_MODEL_VERSION = 1


class CostRecord(BaseModel):
    k: int
    op_count: int
    threads: int
    seconds_per_group: float

    @field_validator("k", "op_count", "threads")
    @classmethod
    def _positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("seconds_per_group")
    @classmethod
    def _positive_time(cls, v: float) -> float:
        if not v > 0 or not math.isfinite(v):
            raise ValueError("seconds_per_group must be a positive finite number")
        return v


class CostModel(BaseModel):
    records: list[CostRecord] = []
    bench_n: int = 22
    precision: Precision = Precision.F64
    host: str = ""

    @field_validator("host")
    @classmethod
    def _single_line(cls, v: str) -> str:
        if len(f"|{v}|".splitlines()) != 1:
            raise ValueError("host description must fit on one line")
        return v

    def sizes(self) -> list[int]:
        return sorted({r.k for r in self.records})

    def thread_counts(self, k: int) -> list[int]:
        return sorted({r.threads for r in self.records if r.k == k})

    def curve(self, k: int, threads: int) -> tuple[np.ndarray, np.ndarray]:
        """(log2 op count, seconds per group) knots for one size and thread count."""
        by_ops: dict[int, list[float]] = {}
        for r in self.records:
            if r.k == k and r.threads == threads:
                by_ops.setdefault(r.op_count, []).append(r.seconds_per_group)
        ops = sorted(by_ops)
        xs = np.log2(np.array(ops, dtype=np.float64))
        ys = np.array([statistics.fmean(by_ops[o]) for o in ops])
        return xs, ys


def seconds_per_group(cm: CostModel, k: int, ops: int, threads: int = 1) -> float:
    """Interpolate linearly in log2(ops), then between the two nearest thread counts.

    Queries outside the measured op-count or thread range clamp to the edge.
    """
    counts = cm.thread_counts(k)
    if not counts:
        raise CostModelLookupError(f"cost model has no records for {k}-qubit gates (sizes: {cm.sizes()})")
    x = math.log2(max(ops, 1))

    def at(th: int) -> float:
        xs, ys = cm.curve(k, th)
        return float(np.interp(x, xs, ys))

    if threads <= counts[0]:
        return at(counts[0])
    if threads >= counts[-1]:
        return at(counts[-1])
    hi = next(i for i, c in enumerate(counts) if c >= threads)
    t0, t1 = counts[hi - 1], counts[hi]
    if t1 == threads:
        return at(t1)
    w = (threads - t0) / (t1 - t0)
    return (1 - w) * at(t0) + w * at(t1)


def estimate_cost(b, cm: CostModel, threads: int = 1, n: int | None = None,
                  zero_tol: float = 1e-8, one_tol: float = 1e-8) -> float:
    """Estimated seconds to apply block (or gate) ``b`` to an n-qubit state."""
    n = cm.bench_n if n is None else n
    k, ops = b.k, b.profile(zero_tol, one_tol).op_count
    return seconds_per_group(cm, k, ops, threads) * 2.0 ** max(n - k, 0)


def sparsity_levels(k: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Unitaries of decreasing density: dense, dense on k-1 / k-2 qubits times a
    random diagonal, and a signed permutation."""
    levels = [random_unitary(k, rng)]
    for d in (1, 2):
        if d <= k:
            levels.append(np.kron(random_diagonal(d, rng), random_unitary(k - d, rng)))
    levels.append(random_signed_permutation(k, rng))
    return levels


def _host_description() -> str:
    return (
        f"{platform.node() or 'unknown'} {platform.machine()} {platform.system()} "
        f"cpus={os.cpu_count()} python={platform.python_version()} numpy={np.__version__}"
    )


def bench_cost_model(bench_n: int = 22, k_range: Iterable[int] = range(1, 8),
                     thread_counts: Sequence[int] = (1,), repetitions: int = 3,
                     precision: Precision | str = Precision.F64, seed: int = 0,
                     budget_fraction: float = 0.8) -> CostModel:
    precision = Precision(precision)
    ks = sorted(set(k_range))
    if not ks or ks[0] < 1 or ks[-1] >= bench_n:
        raise ConfigError(f"benchmark sizes {ks} do not fit a {bench_n}-qubit state")
    check_memory(bench_n, precision, budget_fraction)
    set_phase("bench")
    rng = make_rng(seed)

    sv = init_zero_state(bench_n, precision, budget_fraction)
    sv.re[:] = rng.standard_normal(sv.size)
    sv.im[:] = rng.standard_normal(sv.size)
    scale = 1.0 / math.sqrt(float(np.dot(sv.re, sv.re) + np.dot(sv.im, sv.im)))
    sv.re *= scale
    sv.im *= scale

    resolution = time.get_clock_info("perf_counter").resolution
    coarse = 0
    records: list[CostRecord] = []
    for k in ks:
        targets = tuple(sorted(rng.choice(bench_n, size=k, replace=False).tolist()))
        for m in sparsity_levels(k, rng):
            g = Gate(m, targets)
            ops = op_count(sparsity_profile(m))
            plan = plan_kernel(g, bench_n)
            groups = 1 << (bench_n - k)
            for threads in thread_counts:
                execute_plans([plan], sv, threads)
                samples = []
                for _ in range(repetitions):
                    start = time.perf_counter()
                    execute_plans([plan], sv, threads)
                    samples.append(time.perf_counter() - start)
                elapsed = statistics.median(samples)
                if elapsed < 100 * resolution:
                    coarse += 1
                elapsed = max(elapsed, resolution, 1e-12)
                records.append(CostRecord(k=k, op_count=ops, threads=threads,
                                          seconds_per_group=elapsed / groups))
                logger.debug(f"k={k} ops={ops} threads={threads}: {elapsed:.6f}s")
        logger.info(f"Benchmarked {k}-qubit gates on {bench_n} qubits")

    host = _host_description()
    if coarse:
        host += f" warning={coarse}-samples-near-timer-resolution"
        logger.warning(f"{coarse} measurement(s) within 100x of the timer resolution ({resolution}s)")
    return CostModel(records=records, bench_n=bench_n, precision=precision, host=host)
