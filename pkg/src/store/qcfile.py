"""Line-oriented circuit file format.

    qubits <n>
    <name>[(<p0>,<p1>,...)] <q0> [q1 [q2]]
    matrix <k> <q0> ... <q(k-1)>
    <2^k lines of 2^k entries "re,im" separated by spaces>

``#`` starts a comment. Angles are radians.
"""

import re
from pathlib import Path

import numpy as np

from src.circuit.model import Circuit
from src.core.errors import CircuitParseError, GateError
from src.core.utils import setup_logging
from src.gates.core import Gate
from src.gates.library import GATE_SPECS, make_gate, matrix_gate

logger = setup_logging()

_GATE_RE = re.compile(r"^([a-z][a-z0-9]*)\s*(?:\(([^)]*)\))?(.*)$")


class _Lines:
    def __init__(self, text: str):
        self._lines = text.splitlines()
        self._pos = 0

    def next_content(self) -> tuple[int, str, str] | None:
        """Next non-blank line as (1-based number, stripped content, raw line)."""
        while self._pos < len(self._lines):
            raw = self._lines[self._pos]
            self._pos += 1
            content = raw.split("#", 1)[0].strip()
            if content:
                return self._pos, content, raw
        return None


def _column(raw: str, token: str) -> int:
    idx = raw.find(token)
    return idx + 1 if idx >= 0 else 1


def _parse_int(token: str, lineno: int, raw: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise CircuitParseError(f"expected integer {what}, got '{token}'", lineno, _column(raw, token)) from None


def _parse_qubits(tokens: list[str], n: int, lineno: int, raw: str) -> list[int]:
    qubits = []
    for tok in tokens:
        q = _parse_int(tok, lineno, raw, "qubit index")
        if not 0 <= q < n:
            raise CircuitParseError(f"qubit index {q} out of range for {n} qubit(s)", lineno, _column(raw, tok))
        qubits.append(q)
    return qubits


def _parse_matrix(lines: _Lines, k: int, header_line: int) -> np.ndarray:
    dim = 1 << k
    m = np.zeros((dim, dim), dtype=np.complex128)
    for row in range(dim):
        nxt = lines.next_content()
        if nxt is None:
            raise CircuitParseError(f"matrix stanza ends after {row} of {dim} rows", header_line, 1)
        lineno, content, raw = nxt
        entries = content.split()
        if len(entries) != dim:
            raise CircuitParseError(f"matrix row needs {dim} entries, got {len(entries)}", lineno, 1)
        for col, entry in enumerate(entries):
            try:
                re_s, im_s = entry.split(",")
                m[row, col] = complex(float(re_s), float(im_s))
            except ValueError:
                raise CircuitParseError(
                    f"malformed complex entry '{entry}' (expected re,im)", lineno, _column(raw, entry)
                ) from None
    return m


def parse_circuit(text: str) -> Circuit:
    lines = _Lines(text)
    first = lines.next_content()
    if first is None:
        raise CircuitParseError("empty circuit file (missing 'qubits <n>' header)", 1, 1)
    lineno, content, raw = first
    head = content.split()
    if len(head) != 2 or head[0] != "qubits":
        raise CircuitParseError("expected header 'qubits <n>'", lineno, 1)
    n = _parse_int(head[1], lineno, raw, "qubit count")
    if n < 1:
        raise CircuitParseError("qubit count must be positive", lineno, _column(raw, head[1]))

    gates: list[Gate] = []
    while (nxt := lines.next_content()) is not None:
        lineno, content, raw = nxt
        tokens = content.split()
        if tokens[0] == "matrix":
            if len(tokens) < 3:
                raise CircuitParseError("expected 'matrix <k> <qubits...>'", lineno, 1)
            k = _parse_int(tokens[1], lineno, raw, "matrix size")
            if k < 1 or len(tokens) - 2 != k:
                raise CircuitParseError(f"matrix of size {k} lists {len(tokens) - 2} qubit(s)", lineno, 1)
            qubits = _parse_qubits(tokens[2:], n, lineno, raw)
            m = _parse_matrix(lines, k, lineno)
            try:
                gates.append(matrix_gate(m, qubits))
            except GateError as e:
                raise CircuitParseError(str(e), lineno, 1) from None
            continue

        match = _GATE_RE.match(content)
        if not match:
            raise CircuitParseError(f"malformed gate token '{tokens[0]}'", lineno, _column(raw, tokens[0]))
        name, param_text = match.group(1), match.group(2)
        tokens = [name] + match.group(3).split()
        spec = GATE_SPECS.get(name)
        if spec is None:
            raise CircuitParseError(f"unknown gate '{name}'", lineno, _column(raw, tokens[0]))
        params: list[float] = []
        if param_text is not None and param_text.strip():
            for p in param_text.split(","):
                try:
                    params.append(float(p))
                except ValueError:
                    raise CircuitParseError(
                        f"malformed parameter '{p.strip()}'", lineno, _column(raw, p.strip())
                    ) from None
        if len(params) != spec.n_params:
            raise CircuitParseError(
                f"gate '{name}' expects {spec.n_params} parameter(s), got {len(params)}", lineno, 1
            )
        if len(tokens) - 1 != spec.arity:
            raise CircuitParseError(
                f"gate '{name}' expects {spec.arity} qubit(s), got {len(tokens) - 1}", lineno, 1
            )
        qubits = _parse_qubits(tokens[1:], n, lineno, raw)
        try:
            gates.append(make_gate(name, qubits, params))
        except GateError as e:
            raise CircuitParseError(str(e), lineno, 1) from None

    return Circuit(n, tuple(gates))


def _format_real(x: float) -> str:
    return f"{x:.17g}"


def serialize_gate(g: Gate) -> str:
    if g.label is not None:
        args = f"({','.join(repr(p) for p in g.label.params)})" if g.label.params else ""
        return f"{g.label.name}{args} {' '.join(str(q) for q in g.label.operands)}\n"
    out = [f"matrix {g.k} {' '.join(str(q) for q in g.targets)}\n"]
    for row in g.matrix:
        out.append(" ".join(f"{_format_real(z.real)},{_format_real(z.imag)}" for z in row) + "\n")
    return "".join(out)


def serialize_circuit(c: Circuit) -> str:
    return f"qubits {c.n_qubits}\n" + "".join(serialize_gate(g) for g in c.gates)


def read_circuit(path: str) -> Circuit:
    file = Path(path)
    try:
        data = file.read_bytes()
    except FileNotFoundError:
        raise CircuitParseError(f"circuit file not found: {path}") from None
    except (IsADirectoryError, PermissionError) as e:
        raise CircuitParseError(f"cannot read circuit file {path}: {e.strerror}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        lineno = data.count(b"\n", 0, e.start) + 1
        column = e.start - (data.rfind(b"\n", 0, e.start) + 1) + 1
        raise CircuitParseError(f"invalid UTF-8 byte 0x{data[e.start]:02x}", lineno, column) from None
    circuit = parse_circuit(text)
    logger.info(f"Parsed {path}: {circuit.n_qubits} qubits, {len(circuit)} gates")
    return circuit


def write_circuit(c: Circuit, path: str) -> None:
    file = Path(path)
    file.parent.mkdir(parents=True, exist_ok=True)
    file.write_text(serialize_circuit(c), encoding="utf-8")
