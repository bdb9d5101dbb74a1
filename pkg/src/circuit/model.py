from dataclasses import dataclass, field
from enum import Enum

from src.core.errors import GateError
from src.gates.core import DEFAULT_ONE_TOL, DEFAULT_ZERO_TOL, Gate


class BenchmarkKind(str, Enum):
    QFT = "qft"
    ALA = "ala"
    RQC = "rqc"
    QVC = "qvc"
    IQP = "iqp"
    HES = "hes"


SPARSE_CLASS = (BenchmarkKind.QFT, BenchmarkKind.RQC, BenchmarkKind.IQP, BenchmarkKind.HES)
DENSE_CLASS = (BenchmarkKind.ALA, BenchmarkKind.QVC)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = field(default=())

    def __post_init__(self):
        if self.n_qubits < 1:
            raise GateError(f"circuit needs at least one qubit, got {self.n_qubits}")
        gates = tuple(self.gates)
        for i, g in enumerate(gates):
            if g.targets[-1] >= self.n_qubits:
                raise GateError(
                    f"gate {i} ({g.describe()}) targets qubit {g.targets[-1]} "
                    f"but the circuit has {self.n_qubits}"
                )
        object.__setattr__(self, "gates", gates)

    def __len__(self) -> int:
        return len(self.gates)

    def total_op_count(self, zero_tol: float = DEFAULT_ZERO_TOL, one_tol: float = DEFAULT_ONE_TOL) -> int:
        return sum(g.profile(zero_tol, one_tol).op_count for g in self.gates)

    def max_gate_size(self) -> int:
        return max((g.k for g in self.gates), default=0)
