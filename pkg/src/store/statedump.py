"""Binary amplitude dumps: 16-byte header, then re[2^n] and im[2^n] little-endian."""

import struct
from pathlib import Path

import numpy as np

from src.core.config import Precision
from src.core.errors import StateError
from src.core.utils import setup_logging
from src.sim.statevector import Statevector

logger = setup_logging()

MAGIC = b"QSV1"
HEADER = struct.Struct("<4sBB10x")
_CODES = {Precision.F32: 0, Precision.F64: 1}
_DTYPES = {Precision.F32: np.dtype("<f4"), Precision.F64: np.dtype("<f8")}


def dump_state(sv: Statevector, path: str) -> None:
    file = Path(path)
    file.parent.mkdir(parents=True, exist_ok=True)
    dtype = _DTYPES[sv.precision]
    with open(file, "wb") as f:
        f.write(HEADER.pack(MAGIC, _CODES[sv.precision], sv.n))
        f.write(sv.re.astype(dtype, copy=False).tobytes())
        f.write(sv.im.astype(dtype, copy=False).tobytes())
    logger.info(f"Wrote {sv.n}-qubit {sv.precision.value} state to {path}")


def load_state(path: str) -> Statevector:
    file = Path(path)
    if not file.is_file():
        raise StateError(f"state dump not found: {path}")
    data = file.read_bytes()
    if len(data) < HEADER.size:
        raise StateError(f"{path}: truncated header")
    magic, code, n = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise StateError(f"{path}: bad magic {magic!r}")
    precision = next((p for p, c in _CODES.items() if c == code), None)
    if precision is None:
        raise StateError(f"{path}: unknown precision code {code}")
    dtype = _DTYPES[precision]
    size = 1 << n
    expected = HEADER.size + 2 * size * dtype.itemsize
    if len(data) != expected:
        raise StateError(f"{path}: expected {expected} bytes for {n} qubits, found {len(data)}")
    body = np.frombuffer(data, dtype=dtype, offset=HEADER.size)
    native = np.float32 if precision is Precision.F32 else np.float64
    return Statevector(n, precision, body[:size].astype(native), body[size:].astype(native))
