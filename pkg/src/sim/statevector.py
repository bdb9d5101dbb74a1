import math
import os
from dataclasses import dataclass

import numpy as np

from src.core.config import Precision
from src.core.errors import MemoryBudgetError, StateError

_DTYPES = {Precision.F32: np.float32, Precision.F64: np.float64}

NORM_CHUNK = 1 << 20


@dataclass(eq=False)
class Statevector:
    """Separate real and imaginary amplitude arrays; qubit 0 is the low index bit."""

    n: int
    precision: Precision
    re: np.ndarray
    im: np.ndarray

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def dtype(self) -> np.dtype:
        return self.re.dtype

    def amplitudes(self) -> np.ndarray:
        return self.re.astype(np.float64) + 1j * self.im.astype(np.float64)

    def copy(self) -> "Statevector":
        return Statevector(self.n, self.precision, self.re.copy(), self.im.copy())


def state_bytes(n: int, precision: Precision | str) -> int:
    width = 4 if Precision(precision) is Precision.F32 else 8
    return 2 * width * (1 << n)


def host_memory_bytes() -> int | None:
    try:
        return os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_PHYS_PAGES")
    except (AttributeError, ValueError, OSError):
        return None


def check_memory(n: int, precision: Precision | str, budget_fraction: float = 0.8) -> int:
    """Bytes a state needs; MemoryBudgetError when it exceeds the host budget."""
    required = state_bytes(n, precision)
    total = host_memory_bytes()
    if total is not None and required > total * budget_fraction:
        raise MemoryBudgetError(
            f"{n}-qubit {Precision(precision).value} statevector needs {required} bytes "
            f"(2^{n + (4 if Precision(precision) is Precision.F64 else 3)}), "
            f"budget is {int(total * budget_fraction)} of {total} bytes",
            required,
        )
    return required


def init_zero_state(n: int, precision: Precision | str = Precision.F64,
                    budget_fraction: float = 0.8) -> Statevector:
    if n < 1:
        raise StateError(f"statevector needs at least one qubit, got {n}")
    precision = Precision(precision)
    check_memory(n, precision, budget_fraction)
    dtype = _DTYPES[precision]
    try:
        re = np.zeros(1 << n, dtype=dtype)
        im = np.zeros(1 << n, dtype=dtype)
    except MemoryError:
        raise MemoryBudgetError(
            f"allocating a {n}-qubit statevector failed ({state_bytes(n, precision)} bytes)",
            state_bytes(n, precision),
        ) from None
    re[0] = 1.0
    return Statevector(n, precision, re, im)


def norm(sv: Statevector) -> float:
    """l2 norm; chunk sums in float64 combined with a compensated sum."""
    partial = []
    for lo in range(0, sv.size, NORM_CHUNK):
        re = sv.re[lo:lo + NORM_CHUNK].astype(np.float64)
        im = sv.im[lo:lo + NORM_CHUNK].astype(np.float64)
        partial.append(float(np.dot(re, re)) + float(np.dot(im, im)))
    return math.sqrt(math.fsum(partial))


def compare_states(a: Statevector, b: Statevector) -> float:
    if a.n != b.n:
        raise StateError(f"cannot compare a {a.n}-qubit state with a {b.n}-qubit state")
    worst = 0.0
    for lo in range(0, a.size, NORM_CHUNK):
        hi = lo + NORM_CHUNK
        dre = a.re[lo:hi].astype(np.float64) - b.re[lo:hi].astype(np.float64)
        dim = a.im[lo:hi].astype(np.float64) - b.im[lo:hi].astype(np.float64)
        worst = max(worst, float(np.max(np.hypot(dre, dim))))
    return worst
