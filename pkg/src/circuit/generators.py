"""Deterministic generators for the six benchmark families.

Every generator draws from ``numpy.random.Generator(PCG64(seed))`` so a seed
names the same circuit on every platform and release.
"""

import numpy as np

from src.circuit.model import BenchmarkKind, Circuit
from src.core.errors import ConfigError
from src.core.utils import setup_logging
from src.gates.core import Gate
from src.gates.library import make_gate, matrix_gate, random_unitary

logger = setup_logging()

PRNG_ALGORITHM = "PCG64"
MAX_QUBITS = 40
MAX_DEPTH = 10_000

# transverse-field Ising step: J = h = 1, dt = 0.1
HES_COUPLING = 1.0
HES_FIELD = 1.0
HES_DT = 0.1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & 0xFFFF_FFFF_FFFF_FFFF))


def _qft(n: int) -> list[Gate]:
    gates = []
    for j in range(n):
        gates.append(make_gate("h", [j]))
        for m in range(j + 1, n):
            gates.append(make_gate("cp", [m, j], [np.pi / (1 << (m - j))]))
    for i in range(n // 2):
        gates.append(make_gate("swap", [i, n - 1 - i]))
    return gates


def _brick_pairs(n: int, offset: int) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(offset, n - 1, 2)]


def _ala(n: int, depth: int, rng: np.random.Generator) -> list[Gate]:
    gates = []
    for layer in range(depth):
        for q in range(n):
            theta, phi, lam = rng.uniform(0, 2 * np.pi, 3)
            gates.append(make_gate("u3", [q], [theta, phi, lam]))
        for a, b in _brick_pairs(n, layer % 2):
            gates.append(make_gate("cz", [a, b]))
    return gates


_RQC_CHOICES = (("rx", np.pi / 2), ("ry", np.pi / 2), ("t", None))


def _rqc(n: int, depth: int, rng: np.random.Generator) -> list[Gate]:
    gates = []
    previous = [-1] * n
    for _ in range(depth):
        for q in range(n):
            # never repeat the previous single-qubit gate on a wire
            options = [i for i in range(len(_RQC_CHOICES)) if i != previous[q]]
            pick = options[int(rng.integers(len(options)))]
            previous[q] = pick
            name, angle = _RQC_CHOICES[pick]
            gates.append(make_gate(name, [q], [] if angle is None else [angle]))
        for a, b in _brick_pairs(n, int(rng.integers(2))):
            gates.append(make_gate("cz", [a, b]))
    return gates


def _qvc(n: int, depth: int, rng: np.random.Generator) -> list[Gate]:
    gates = []
    for _ in range(depth):
        perm = rng.permutation(n)
        for i in range(n // 2):
            a, b = int(perm[2 * i]), int(perm[2 * i + 1])
            gates.append(matrix_gate(random_unitary(2, rng), [a, b]))
    return gates


def _iqp(n: int, depth: int, rng: np.random.Generator) -> list[Gate]:
    gates = [make_gate("h", [q]) for q in range(n)]
    for _ in range(depth):
        for q in range(n):
            choice = int(rng.integers(3))
            if choice == 1:
                gates.append(make_gate("z", [q]))
            elif choice == 2:
                gates.append(make_gate("t", [q]))
        perm = rng.permutation(n)
        for i in range(n // 2):
            if rng.random() < 0.5:
                gates.append(make_gate("cz", [int(perm[2 * i]), int(perm[2 * i + 1])]))
    gates.extend(make_gate("h", [q]) for q in range(n))
    return gates


def _hes(n: int, depth: int) -> list[Gate]:
    gates = []
    zz_angle = 2 * HES_COUPLING * HES_DT
    x_angle = 2 * HES_FIELD * HES_DT
    for _ in range(depth):
        for i in range(n - 1):
            gates.append(make_gate("cx", [i, i + 1]))
            gates.append(make_gate("rz", [i + 1], [zz_angle]))
            gates.append(make_gate("cx", [i, i + 1]))
        for q in range(n):
            gates.append(make_gate("rx", [q], [x_angle]))
    return gates


def gen_benchmark(kind: BenchmarkKind | str, n: int, depth: int = 1, seed: int = 0) -> Circuit:
    try:
        kind = BenchmarkKind(str(kind.value if isinstance(kind, BenchmarkKind) else kind).lower())
    except ValueError:
        raise ConfigError(
            f"unknown benchmark kind '{kind}' (known: {', '.join(k.value for k in BenchmarkKind)})"
        ) from None
    if not 2 <= n <= MAX_QUBITS:
        raise ConfigError(f"benchmark qubit count must be in [2, {MAX_QUBITS}], got {n}")
    if not 1 <= depth <= MAX_DEPTH:
        raise ConfigError(f"benchmark depth must be in [1, {MAX_DEPTH}], got {depth}")

    rng = make_rng(seed)
    if kind is BenchmarkKind.QFT:
        gates = _qft(n)
    elif kind is BenchmarkKind.ALA:
        gates = _ala(n, depth, rng)
    elif kind is BenchmarkKind.RQC:
        gates = _rqc(n, depth, rng)
    elif kind is BenchmarkKind.QVC:
        gates = _qvc(n, depth, rng)
    elif kind is BenchmarkKind.IQP:
        gates = _iqp(n, depth, rng)
    else:
        gates = _hes(n, depth)
    logger.debug(f"Generated {kind.value}-{n} (depth {depth}, seed {seed}): {len(gates)} gates")
    return Circuit(n, tuple(gates))
