import numpy as np

from src.circuit.model import Circuit
from src.core.config import Precision
from src.fusion.costmodel import CostModel, CostRecord
from src.gates.library import make_gate, matrix_gate, random_unitary
from src.kernel.apply import reference_apply
from src.sim.statevector import Statevector, init_zero_state

ONE_QUBIT = ("x", "y", "z", "h", "s", "sdg", "t", "tdg")
ROTATIONS = ("rx", "ry", "rz")
TWO_QUBIT = ("cx", "cz", "cp", "swap")


def _distinct(rng: np.random.Generator, n: int, k: int) -> list[int]:
    return [int(q) for q in rng.choice(n, size=k, replace=False)]


def random_circuit(rng: np.random.Generator, n: int, n_gates: int, max_matrix_k: int = 3) -> Circuit:
    """Mixed named gates and random unitaries on up to ``max_matrix_k`` qubits."""
    gates = []
    for _ in range(n_gates):
        r = rng.random()
        if r < 0.3 or n == 1:
            gates.append(make_gate(ONE_QUBIT[int(rng.integers(len(ONE_QUBIT)))], _distinct(rng, n, 1)))
        elif r < 0.5:
            name = ROTATIONS[int(rng.integers(len(ROTATIONS)))]
            gates.append(make_gate(name, _distinct(rng, n, 1), [float(rng.uniform(-np.pi, np.pi))]))
        elif r < 0.75:
            name = TWO_QUBIT[int(rng.integers(len(TWO_QUBIT)))]
            params = [float(rng.uniform(-np.pi, np.pi))] if name == "cp" else []
            gates.append(make_gate(name, _distinct(rng, n, 2), params))
        elif r < 0.8 and n >= 3:
            gates.append(make_gate("ccx", _distinct(rng, n, 3)))
        else:
            k = int(rng.integers(1, min(max_matrix_k, n) + 1))
            gates.append(matrix_gate(random_unitary(k, rng), _distinct(rng, n, k)))
    return Circuit(n, tuple(gates))


def random_state(rng: np.random.Generator, n: int, precision: Precision = Precision.F64) -> Statevector:
    sv = init_zero_state(n, precision)
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    v /= np.linalg.norm(v)
    sv.re[:] = v.real
    sv.im[:] = v.imag
    return sv


def reference_simulate(c: Circuit, precision: Precision = Precision.F64) -> Statevector:
    sv = init_zero_state(c.n_qubits, precision)
    for g in c.gates:
        reference_apply(g, sv)
    return sv


def synthetic_cost_model(k_max: int = 7, thread_counts=(1,), bench_n: int = 20,
                         alpha: float = 1e-9, beta: float = 1e-10) -> CostModel:
    """Per-group time alpha * 2^k + beta * ops, scaled down by thread count."""
    records = []
    for k in range(1, k_max + 1):
        for ops in sorted({2 ** k, 2 ** (2 * k), 2 ** (2 * k + 1), 2 ** (2 * k + 2)}):
            for th in thread_counts:
                records.append(CostRecord(k=k, op_count=ops, threads=th,
                                          seconds_per_group=(alpha * 2 ** k + beta * ops) / th))
    return CostModel(records=records, bench_n=bench_n, precision=Precision.F64, host="synthetic test host")


def flat_cost_model(k_max: int = 7, bench_n: int = 20) -> CostModel:
    records = [CostRecord(k=k, op_count=ops, threads=1, seconds_per_group=1e-9)
               for k in range(1, k_max + 1) for ops in (2 ** k, 2 ** (2 * k + 2))]
    return CostModel(records=records, bench_n=bench_n, host="flat")
