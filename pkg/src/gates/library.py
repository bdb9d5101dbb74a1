"""Named gates of the circuit file format and random unitary constructors.

Builders return matrices in operand order (bit j <-> j-th written operand,
controls first); ``make_gate`` re-indexes them onto the sorted target list.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from src.core.errors import GateError
from src.gates.core import Gate, GateLabel, embed_matrix

_SQRT1_2 = 1 / np.sqrt(2)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
HADAMARD = np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=np.complex128)
S_GATE = np.array([[1, 0], [0, 1j]], dtype=np.complex128)
T_GATE = np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=np.complex128)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=np.complex128)


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]],
        dtype=np.complex128,
    )


def phase(lam: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * lam)]], dtype=np.complex128)


def controlled(u: np.ndarray, n_controls: int = 1) -> np.ndarray:
    """Controls occupy the low operand bits, the controlled block the high ones."""
    n_targets = u.shape[0].bit_length() - 1
    dim = 1 << (n_controls + n_targets)
    m = np.eye(dim, dtype=np.complex128)
    ctrl = (1 << n_controls) - 1
    idx = [ctrl | (j << n_controls) for j in range(1 << n_targets)]
    m[np.ix_(idx, idx)] = u
    return m


SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)


@dataclass(frozen=True)
class GateSpec:
    arity: int
    n_params: int
    build: Callable[..., np.ndarray]


GATE_SPECS: dict[str, GateSpec] = {
    "x": GateSpec(1, 0, lambda: PAULI_X),
    "y": GateSpec(1, 0, lambda: PAULI_Y),
    "z": GateSpec(1, 0, lambda: PAULI_Z),
    "h": GateSpec(1, 0, lambda: HADAMARD),
    "s": GateSpec(1, 0, lambda: S_GATE),
    "sdg": GateSpec(1, 0, lambda: S_GATE.conj().T),
    "t": GateSpec(1, 0, lambda: T_GATE),
    "tdg": GateSpec(1, 0, lambda: T_GATE.conj().T),
    "rx": GateSpec(1, 1, rx),
    "ry": GateSpec(1, 1, ry),
    "rz": GateSpec(1, 1, rz),
    "u3": GateSpec(1, 3, u3),
    "cx": GateSpec(2, 0, lambda: controlled(PAULI_X)),
    "cz": GateSpec(2, 0, lambda: controlled(PAULI_Z)),
    "cp": GateSpec(2, 1, lambda lam: controlled(phase(lam))),
    "swap": GateSpec(2, 0, lambda: SWAP),
    "ccx": GateSpec(3, 0, lambda: controlled(PAULI_X, 2)),
}


def make_gate(name: str, operands: Sequence[int], params: Sequence[float] = ()) -> Gate:
    spec = GATE_SPECS.get(name)
    if spec is None:
        raise GateError(f"unknown gate '{name}'")
    operands = tuple(int(q) for q in operands)
    params = tuple(float(p) for p in params)
    if len(operands) != spec.arity:
        raise GateError(f"gate '{name}' expects {spec.arity} qubit(s), got {len(operands)}")
    if len(params) != spec.n_params:
        raise GateError(f"gate '{name}' expects {spec.n_params} parameter(s), got {len(params)}")
    if len(set(operands)) != len(operands):
        raise GateError(f"gate '{name}' has repeated qubits {operands}")
    targets = tuple(sorted(operands))
    m = spec.build(*params)
    if operands != targets:
        m = embed_matrix(m, operands, targets)
    return Gate(m, targets, GateLabel(name, params, operands))


def matrix_gate(m: np.ndarray, operands: Sequence[int]) -> Gate:
    """Unnamed gate from an explicit matrix whose bit j belongs to operands[j]."""
    operands = tuple(int(q) for q in operands)
    if len(set(operands)) != len(operands):
        raise GateError(f"matrix gate has repeated qubits {operands}")
    targets = tuple(sorted(operands))
    m = np.asarray(m, dtype=np.complex128)
    if operands != targets:
        m = embed_matrix(m, operands, targets)
    return Gate(m, targets)


def random_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-like random unitary: QR of a complex Gaussian matrix with phase-fixed R."""
    dim = 1 << k
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_diagonal(k: int, rng: np.random.Generator) -> np.ndarray:
    return np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 1 << k)))


def random_signed_permutation(k: int, rng: np.random.Generator) -> np.ndarray:
    dim = 1 << k
    m = np.zeros((dim, dim), dtype=np.complex128)
    m[rng.permutation(dim), np.arange(dim)] = rng.choice([-1.0, 1.0], dim)
    return m
