"""Gate matrices, scalar sparsity classification and the fusion algebra.

Conventions shared by the whole package:

* qubit 0 is the least significant bit of an amplitude index;
* bit ``j`` of a gate-matrix row/column index belongs to the ``j``-th entry
  of the gate's sorted target list;
* matrices are ``complex128`` regardless of the simulation precision.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional, Sequence

import numpy as np

from src.core.config import HARD_CAP_QUBITS
from src.core.errors import FusionError, GateError

DEFAULT_ZERO_TOL = 1e-8
DEFAULT_ONE_TOL = 1e-8
UNITARY_TOL = 1e-10


class ScalarKind(IntEnum):
    ZERO = 0
    ONE = 1
    MINUS_ONE = 2
    GENERAL = 3


def classify_scalar(x: float, zero_tol: float, one_tol: float) -> ScalarKind:
    if abs(x) <= zero_tol:
        return ScalarKind.ZERO
    if one_tol > 0:
        if abs(x - 1.0) <= one_tol:
            return ScalarKind.ONE
        if abs(x + 1.0) <= one_tol:
            return ScalarKind.MINUS_ONE
    return ScalarKind.GENERAL


def classify_array(x: np.ndarray, zero_tol: float, one_tol: float) -> np.ndarray:
    """Vectorised classify_scalar; returns an int8 array of ScalarKind codes."""
    conds = [np.abs(x) <= zero_tol]
    kinds = [ScalarKind.ZERO]
    if one_tol > 0:
        conds += [np.abs(x - 1.0) <= one_tol, np.abs(x + 1.0) <= one_tol]
        kinds += [ScalarKind.ONE, ScalarKind.MINUS_ONE]
    return np.select(conds, [int(k) for k in kinds], default=int(ScalarKind.GENERAL)).astype(np.int8)


@dataclass(frozen=True, eq=False)
class SparsityProfile:
    re_kinds: np.ndarray
    im_kinds: np.ndarray
    zero_tol: float
    one_tol: float
    n_zero: int
    n_unit: int
    n_general: int

    @property
    def k(self) -> int:
        return int(self.re_kinds.shape[0]).bit_length() - 1

    @property
    def nonzero_scalars(self) -> int:
        return self.n_unit + self.n_general

    @property
    def op_count(self) -> int:
        return op_count(self)

    @property
    def nonzero_entries(self) -> np.ndarray:
        """Boolean matrix: True where either component of the entry is non-zero."""
        return (self.re_kinds != ScalarKind.ZERO) | (self.im_kinds != ScalarKind.ZERO)


def sparsity_profile(m: np.ndarray, zero_tol: float = DEFAULT_ZERO_TOL,
                     one_tol: float = DEFAULT_ONE_TOL) -> SparsityProfile:
    re_kinds = classify_array(m.real, zero_tol, one_tol)
    im_kinds = classify_array(m.imag, zero_tol, one_tol)
    both = np.concatenate([re_kinds.ravel(), im_kinds.ravel()])
    counts = np.bincount(both, minlength=4)
    return SparsityProfile(
        re_kinds=re_kinds,
        im_kinds=im_kinds,
        zero_tol=zero_tol,
        one_tol=one_tol,
        n_zero=int(counts[ScalarKind.ZERO]),
        n_unit=int(counts[ScalarKind.ONE] + counts[ScalarKind.MINUS_ONE]),
        n_general=int(counts[ScalarKind.GENERAL]),
    )


def op_count(profile: SparsityProfile) -> int:
    # ±1 scalars become a plain add/subtract instead of a fused multiply-add
    return 2 * profile.n_general + profile.n_unit


def is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    prod = m @ m.conj().T
    return bool(np.max(np.abs(prod - np.eye(m.shape[0]))) <= tol)


@dataclass(frozen=True)
class GateLabel:
    """Name, parameters and operands (in written order) of a named gate."""

    name: str
    params: tuple[float, ...] = ()
    operands: tuple[int, ...] = ()

    def __str__(self) -> str:
        args = f"({','.join(repr(p) for p in self.params)})" if self.params else ""
        return f"{self.name}{args}({','.join(str(q) for q in self.operands)})"


@dataclass(frozen=True, eq=False)
class Gate:
    matrix: np.ndarray
    targets: tuple[int, ...]
    label: Optional[GateLabel] = field(default=None)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        targets = tuple(int(q) for q in self.targets)
        k = len(targets)
        if k == 0:
            raise GateError("gate must act on at least one qubit")
        if any(b <= a for a, b in zip(targets, targets[1:])) or targets[0] < 0:
            raise GateError(f"targets must be strictly increasing non-negative indices, got {targets}")
        if m.shape != (1 << k, 1 << k):
            raise GateError(f"matrix shape {m.shape} does not match {k} target(s)")
        if not np.all(np.isfinite(m)):
            raise GateError("matrix contains NaN or Inf")
        if not is_unitary(m, UNITARY_TOL):
            raise GateError(f"matrix on {targets} is not unitary within {UNITARY_TOL}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "targets", targets)

    @property
    def k(self) -> int:
        return len(self.targets)

    @property
    def name(self) -> str:
        return self.label.name if self.label else "u"

    def profile(self, zero_tol: float = DEFAULT_ZERO_TOL, one_tol: float = DEFAULT_ONE_TOL) -> SparsityProfile:
        return sparsity_profile(self.matrix, zero_tol, one_tol)

    def describe(self) -> str:
        if self.label:
            return str(self.label)
        return f"u{self.k}({','.join(str(q) for q in self.targets)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Gate):
            return NotImplemented
        return (
            self.targets == other.targets
            and self.label == other.label
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self) -> int:
        return hash((self.targets, self.label))


def embed_matrix(m: np.ndarray, operands: Sequence[int], union: Sequence[int]) -> np.ndarray:
    """Embed ``m`` (bit j <-> operands[j]) into the operator over ``union`` (bit i <-> union[i]).

    Identity acts on every union qubit missing from ``operands``; the operand
    order may be arbitrary, which is how named gates are re-indexed onto
    their sorted target list.
    """
    position = {q: i for i, q in enumerate(union)}
    try:
        pos = [position[q] for q in operands]
    except KeyError as e:
        raise GateError(f"qubit {e.args[0]} is not part of {tuple(union)}") from None
    dim = 1 << len(union)
    idx = np.arange(dim)
    sub = np.zeros(dim, dtype=np.int64)
    op_mask = 0
    for j, p in enumerate(pos):
        sub |= ((idx >> p) & 1) << j
        op_mask |= 1 << p
    rest = idx & ~op_mask
    same_rest = rest[:, None] == rest[None, :]
    return np.where(same_rest, m[sub[:, None], sub[None, :]], 0).astype(np.complex128)


def expand_gate(g: Gate, union_targets: Sequence[int]) -> np.ndarray:
    union = tuple(union_targets)
    if not set(g.targets) <= set(union):
        raise GateError(f"gate targets {g.targets} are not a subset of {union}")
    if union == g.targets:
        return np.array(g.matrix)
    return embed_matrix(g.matrix, g.targets, union)


def fuse_matrices(first: Gate, second: Gate, max_qubits: int = HARD_CAP_QUBITS) -> Gate:
    """Gate equal to applying ``first`` then ``second``."""
    union = tuple(sorted(set(first.targets) | set(second.targets)))
    if len(union) > max_qubits:
        raise FusionError(f"fused gate would act on {len(union)} qubits (cap {max_qubits})")
    product = expand_gate(second, union) @ expand_gate(first, union)
    return Gate(product, union)
