"""Kernel plans: qubit split, start-index masks and classified matrix entries.

A plan fixes everything about one gate application that does not depend on
the amplitudes. The loop counter ``t`` runs over ``[0, 2^(n-k-s))``; each
``t`` addresses ``2^s`` lanes of a ``2^k``-amplitude group.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from src.core.errors import KernelError
from src.gates.core import (
    DEFAULT_ONE_TOL,
    DEFAULT_ZERO_TOL,
    Gate,
    ScalarKind,
    SparsityProfile,
    sparsity_profile,
)

# General-scalar density above which the grouped sparse terms lose to a
# plain real matrix product
DENSE_THRESHOLD = 0.25


@dataclass(frozen=True)
class QubitSplit:
    s: int
    targets: tuple[int, ...]
    red: tuple[int, ...]
    lower: tuple[int, ...]
    higher: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.targets)

    @property
    def k_lower(self) -> int:
        return len(self.lower)

    @property
    def k_higher(self) -> int:
        return len(self.higher)

    @property
    def lower_region_size(self) -> int:
        return self.k_lower + self.s


def split_qubits(targets: Sequence[int], s: int) -> QubitSplit:
    """Colour targets blue and the ``s`` smallest other indices red.

    Everything up to the largest red index is the lower region; with no red
    index the lower region is empty.
    """
    targets = tuple(sorted(int(q) for q in targets))
    if len(set(targets)) != len(targets):
        raise KernelError(f"targets must be distinct, got {targets}")
    if s < 0:
        raise KernelError(f"simd exponent must be >= 0, got {s}")
    blue = set(targets)
    red = []
    i = 0
    while len(red) < s:
        if i not in blue:
            red.append(i)
        i += 1
    if not red:
        return QubitSplit(s, targets, (), (), targets)
    top = red[-1]
    lower = tuple(q for q in targets if q <= top)
    higher = tuple(q for q in targets if q > top)
    return QubitSplit(s, targets, tuple(red), lower, higher)


@dataclass(frozen=True)
class MaskTable:
    masks: tuple[int, ...]
    width: int

    def start_indices(self, t: np.ndarray) -> np.ndarray:
        """Base vector indices for loop counters ``t`` (H-target bits zero)."""
        t = np.asarray(t, dtype=np.int64)
        out = np.zeros_like(t)
        for i, m in enumerate(self.masks):
            out |= (t & m) << i
        return out

    def start_index(self, t: int) -> int:
        return sum((t & m) << i for i, m in enumerate(self.masks))


def build_masks(split: QubitSplit, n: int) -> MaskTable:
    width = n - split.k - split.s
    if width < 0:
        raise KernelError(f"{split.k} target(s) with simd exponent {split.s} do not fit {n} qubits")
    full = (1 << width) - 1
    positions = [q - split.lower_region_size for q in split.higher]
    masks = []
    lo = 0
    for i, p in enumerate(positions):
        hi = p - i
        masks.append(((1 << hi) - 1) & ~((1 << lo) - 1) & full)
        lo = hi
    masks.append(full & ~((1 << lo) - 1))
    return MaskTable(tuple(masks), width)


@dataclass(frozen=True)
class EntryOp:
    row: int
    col: int
    re_kind: ScalarKind
    im_kind: ScalarKind
    re_value: float
    im_value: float


@dataclass(frozen=True, eq=False)
class TermTable:
    """Matrix entries lowered to real terms ``out[dest] += coef * in[src]``.

    Indices address the stacked ``[re | im]`` group vector of length 2^(k+1).
    Terms are sorted by destination; ``starts`` marks each destination run.
    """

    dest: np.ndarray
    src: np.ndarray
    coef: np.ndarray
    general: np.ndarray
    negate: np.ndarray
    starts: np.ndarray
    dest_ids: np.ndarray


def snap_values(values: np.ndarray, kinds: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=np.float64)
    out[kinds == ScalarKind.ZERO] = 0.0
    out[kinds == ScalarKind.ONE] = 1.0
    out[kinds == ScalarKind.MINUS_ONE] = -1.0
    return out


def build_terms(re_kinds: np.ndarray, im_kinds: np.ndarray,
                re_vals: np.ndarray, im_vals: np.ndarray) -> TermTable:
    dim = re_kinds.shape[0]
    rows, cols = np.nonzero(re_kinds != ScalarKind.ZERO)
    irows, icols = np.nonzero(im_kinds != ScalarKind.ZERO)
    a = re_vals[rows, cols]
    b = im_vals[irows, icols]
    a_gen = re_kinds[rows, cols] == ScalarKind.GENERAL
    b_gen = im_kinds[irows, icols] == ScalarKind.GENERAL
    # out_re += a*in_re - b*in_im ; out_im += a*in_im + b*in_re
    dest = np.concatenate([rows, rows + dim, irows, irows + dim])
    src = np.concatenate([cols, cols + dim, icols + dim, icols])
    coef = np.concatenate([a, a, -b, b])
    general = np.concatenate([a_gen, a_gen, b_gen, b_gen])
    order = np.argsort(dest, kind="stable")
    dest, src, coef, general = dest[order], src[order], coef[order], general[order]
    negate = ~general & (coef < 0)
    dest_ids, starts = np.unique(dest, return_index=True)
    return TermTable(dest, src, coef, general, negate, starts, dest_ids)


@dataclass(frozen=True, eq=False)
class KernelPlan:
    gate: Gate
    n: int
    split: QubitSplit
    mask_table: MaskTable
    entry_ops: tuple[EntryOp, ...]
    profile: SparsityProfile
    runtime_matrix: bool = False
    force_dense: bool = False
    zero_tol: float = DEFAULT_ZERO_TOL
    one_tol: float = DEFAULT_ONE_TOL
    strategy: str = "sparse"
    target_offsets: np.ndarray = field(repr=False, default=None)
    lane_offsets: np.ndarray = field(repr=False, default=None)
    terms: TermTable | None = field(repr=False, default=None)
    dense_re: np.ndarray | None = field(repr=False, default=None)
    dense_im: np.ndarray | None = field(repr=False, default=None)

    @property
    def k(self) -> int:
        return self.gate.k

    @property
    def s(self) -> int:
        return self.split.s

    @property
    def domain(self) -> int:
        return 1 << (self.n - self.k - self.s)

    @property
    def op_count(self) -> int:
        return self.profile.op_count

    def amplitude_indices(self, t: np.ndarray) -> np.ndarray:
        """Amplitude indices touched by counters ``t``: shape (len(t), 2^s, 2^k)."""
        base = self.mask_table.start_indices(t) << self.split.lower_region_size
        return (base[:, None, None] + self.lane_offsets[None, :, None]
                + self.target_offsets[None, None, :])

    def describe(self) -> str:
        sp = self.split
        lines = [
            f"gate {self.gate.describe()} n={self.n} s={sp.s} strategy={self.strategy}"
            f"{' runtime' if self.runtime_matrix else ''}{' forced-dense' if self.force_dense else ''}",
            f"split lower={list(sp.lower)} higher={list(sp.higher)} red={list(sp.red)} "
            f"k_L={sp.k_lower} k_H={sp.k_higher}",
            "masks " + " ".join(format(m, f"0{max(self.mask_table.width, 1)}b") for m in self.mask_table.masks),
            f"entries {len(self.entry_ops)} op_count={self.op_count}",
        ]
        for e in self.entry_ops:
            lines.append(
                f"  ({e.row},{e.col}) {e.re_kind.name}/{e.im_kind.name} "
                f"{e.re_value:.17g} {e.im_value:.17g}"
            )
        return "\n".join(lines) + "\n"


def target_offsets_for(targets: tuple[int, ...]) -> np.ndarray:
    idx = np.arange(1 << len(targets), dtype=np.int64)
    out = np.zeros_like(idx)
    for j, q in enumerate(targets):
        out |= ((idx >> j) & 1) << q
    return out


def plan_kernel(g: Gate, n: int, s: int = 0, zero_tol: float = DEFAULT_ZERO_TOL,
                one_tol: float = DEFAULT_ONE_TOL, runtime_matrix: bool = False,
                force_dense: bool = False) -> KernelPlan:
    if g.targets[-1] >= n:
        raise KernelError(f"gate {g.describe()} does not fit a {n}-qubit state")
    if g.k + s > n:
        raise KernelError(f"{g.k} target(s) with simd exponent {s} exceed {n} qubit(s)")
    split = split_qubits(g.targets, s)
    masks = build_masks(split, n)

    m = g.matrix
    if force_dense:
        general = np.full(m.shape, ScalarKind.GENERAL, dtype=np.int8)
        profile = SparsityProfile(general, general.copy(), zero_tol, 0.0, 0, 0, 2 * m.size)
        re_vals, im_vals = m.real.copy(), m.imag.copy()
    else:
        profile = sparsity_profile(m, zero_tol, one_tol)
        re_vals = snap_values(m.real, profile.re_kinds)
        im_vals = snap_values(m.imag, profile.im_kinds)

    rows, cols = np.nonzero(profile.nonzero_entries | force_dense)
    entry_ops = tuple(
        EntryOp(int(r), int(c), ScalarKind(int(profile.re_kinds[r, c])), ScalarKind(int(profile.im_kinds[r, c])),
                float(re_vals[r, c]), float(im_vals[r, c]))
        for r, c in zip(rows, cols)
    )

    density = profile.n_general / (2 * m.size)
    strategy = "dense" if force_dense or density > DENSE_THRESHOLD else "sparse"
    terms = None
    dense_re = dense_im = None
    if strategy == "dense":
        dense_re, dense_im = re_vals, im_vals
    else:
        terms = build_terms(profile.re_kinds, profile.im_kinds, re_vals, im_vals)

    return KernelPlan(
        gate=g,
        n=n,
        split=split,
        mask_table=masks,
        entry_ops=entry_ops,
        profile=profile,
        runtime_matrix=runtime_matrix,
        force_dense=force_dense,
        zero_tol=zero_tol,
        one_tol=one_tol,
        strategy=strategy,
        target_offsets=target_offsets_for(g.targets),
        lane_offsets=target_offsets_for(split.red),
        terms=terms,
        dense_re=dense_re,
        dense_im=dense_im,
    )
