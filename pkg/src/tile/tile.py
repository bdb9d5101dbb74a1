"""CircuitTile: the row/column IR the gate fuser works on.

A tile is a list of rows; each row holds one nullable block slot per qubit.
Row order is time order, blocks inside a row act on disjoint wires and
therefore commute. A block occupies the cells of all its wires in exactly
one row.
"""

import itertools
from typing import Callable, Iterator, Optional

import numpy as np

from src.circuit.model import Circuit
from src.core.config import HARD_CAP_QUBITS
from src.core.errors import FusionError
from src.core.utils import setup_logging
from src.gates.core import Gate, SparsityProfile, fuse_matrices, sparsity_profile

logger = setup_logging()

Row = list[Optional["GateBlock"]]
Fusible = Callable[["GateBlock", "GateBlock", "GateBlock"], bool]


class GateBlock:
    def __init__(self, block_id: int, gates: tuple[Gate, ...], wires: tuple[int, ...],
                 sources: tuple["GateBlock", "GateBlock"] | None = None,
                 hard_cap: int = HARD_CAP_QUBITS):
        self.id = block_id
        self.gates = gates
        self.wires = wires
        self.hard_cap = hard_cap
        self._sources = sources
        self._gate: Gate | None = gates[0] if sources is None and len(gates) == 1 else None
        self._profiles: dict[tuple[float, float], SparsityProfile] = {}

    @classmethod
    def single(cls, block_id: int, gate: Gate) -> "GateBlock":
        return cls(block_id, (gate,), gate.targets)

    @classmethod
    def merge(cls, block_id: int, top: "GateBlock", bot: "GateBlock",
              hard_cap: int = HARD_CAP_QUBITS) -> "GateBlock":
        """Block applying ``top`` first, then ``bot``; the matrix is built on first use."""
        wires = tuple(sorted(set(top.wires) | set(bot.wires)))
        return cls(block_id, top.gates + bot.gates, wires, (top, bot), hard_cap)

    @property
    def k(self) -> int:
        return len(self.wires)

    @property
    def materialized(self) -> bool:
        return self._gate is not None

    def as_gate(self) -> Gate:
        # post-order walk over unmaterialised sources; long fusion chains
        # would overflow the interpreter stack if done recursively
        stack: list[GateBlock] = [self]
        while stack:
            block = stack[-1]
            if block._gate is not None:
                stack.pop()
                continue
            top, bot = block._sources
            pending = [b for b in (top, bot) if b._gate is None]
            if pending:
                stack.extend(pending)
                continue
            if len(block.wires) > block.hard_cap:
                raise FusionError(f"block {block.id} spans {len(block.wires)} qubits (cap {block.hard_cap})")
            block._gate = fuse_matrices(top._gate, bot._gate, block.hard_cap)
            block._sources = None
            stack.pop()
        return self._gate

    @property
    def matrix(self) -> np.ndarray:
        return self.as_gate().matrix

    def profile(self, zero_tol: float, one_tol: float) -> SparsityProfile:
        key = (zero_tol, one_tol)
        if key not in self._profiles:
            self._profiles[key] = sparsity_profile(self.matrix, zero_tol, one_tol)
        return self._profiles[key]

    def describe(self) -> str:
        return " @ ".join(g.describe() for g in self.gates)

    def __repr__(self) -> str:
        return f"GateBlock({self.id}, wires={self.wires}, gates={len(self.gates)})"


class CircuitTile:
    def __init__(self, n_qubits: int, hard_cap: int = HARD_CAP_QUBITS):
        self.n_qubits = n_qubits
        self.hard_cap = hard_cap
        self.rows: list[Row] = []
        self._ids = itertools.count()

    def next_id(self) -> int:
        return next(self._ids)

    def new_row(self) -> Row:
        return [None] * self.n_qubits

    def blocks(self) -> Iterator[GateBlock]:
        """Blocks in flatten order: row by row, ascending minimum wire."""
        for row in self.rows:
            seen = set()
            for cell in row:
                if cell is not None and cell.id not in seen:
                    seen.add(cell.id)
                    yield cell

    def block_count(self) -> int:
        return sum(1 for _ in self.blocks())

    def gate_count(self) -> int:
        return sum(len(b.gates) for b in self.blocks())

    def row_of(self, block: GateBlock) -> int:
        w = block.wires[0]
        for r, row in enumerate(self.rows):
            if row[w] is block:
                return r
        raise FusionError(f"block {block.id} is not in the tile")

    def structure(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(-1 if c is None else c.id for c in row) for row in self.rows)

    def _vacant(self, r: int, wires: tuple[int, ...]) -> bool:
        row = self.rows[r]
        return all(row[w] is None for w in wires)

    def _place(self, block: GateBlock, r: int) -> None:
        row = self.rows[r]
        for w in block.wires:
            row[w] = block

    def _remove(self, block: GateBlock, r: int) -> None:
        row = self.rows[r]
        for w in block.wires:
            row[w] = None

    def check(self) -> None:
        """Raise FusionError when the cell map and block wire sets disagree."""
        where: dict[int, int] = {}
        for r, row in enumerate(self.rows):
            for q, cell in enumerate(row):
                if cell is None:
                    continue
                if q not in cell.wires:
                    raise FusionError(f"cell ({r},{q}) holds block {cell.id} outside its wires {cell.wires}")
                if where.setdefault(cell.id, r) != r:
                    raise FusionError(f"block {cell.id} appears in rows {where[cell.id]} and {r}")
                if any(row[w] is not cell for w in cell.wires):
                    raise FusionError(f"block {cell.id} does not fill all its wires in row {r}")

    def dump(self) -> str:
        width = max((len(str(b.id)) for b in self.blocks()), default=1)
        lines = []
        for row in self.rows:
            lines.append(" ".join(".".rjust(width) if c is None else str(c.id).rjust(width) for c in row))
        for b in self.blocks():
            lines.append(f"{b.id}: {b.describe()}")
        return "\n".join(lines) + ("\n" if lines else "")


def append_block(t: CircuitTile, b: GateBlock) -> None:
    r = len(t.rows)
    while r > 0 and t._vacant(r - 1, b.wires):
        r -= 1
    if r == len(t.rows):
        t.rows.append(t.new_row())
    t._place(b, r)


def build_tile(c: Circuit, hard_cap: int = HARD_CAP_QUBITS) -> CircuitTile:
    t = CircuitTile(c.n_qubits, hard_cap)
    for g in c.gates:
        append_block(t, GateBlock.single(t.next_id(), g))
    return t


def move_block_down(t: CircuitTile, b: GateBlock, r: int) -> bool:
    if r + 1 >= len(t.rows) or not t._vacant(r + 1, b.wires):
        return False
    t._remove(b, r)
    t._place(b, r + 1)
    return True


def fuse_blocks(t: CircuitTile, top: GateBlock, bot: GateBlock,
                merged: GateBlock | None = None) -> GateBlock:
    """Replace ``top`` and ``bot`` with one block; returns the new block.

    Consecutive fusion: ``top`` in row r, ``bot`` in row r+1, sharing a wire.
    Commuting fusion: both in row r with disjoint wires. The fused block goes
    to row r+1 if its wires are free there, else row r, else a fresh row
    inserted between them.
    """
    r_top = t.row_of(top)
    r_bot = t.row_of(bot)
    shared = set(top.wires) & set(bot.wires)
    if r_bot == r_top + 1 and shared:
        r = r_top
    elif r_bot == r_top and not shared:
        r = r_top
        if min(bot.wires) < min(top.wires):
            top, bot = bot, top
    else:
        raise FusionError(f"blocks {top.id} (row {r_top}) and {bot.id} (row {r_bot}) are not fusible neighbours")

    if merged is None:
        merged = GateBlock.merge(t.next_id(), top, bot, t.hard_cap)
    t._remove(top, r_top)
    t._remove(bot, r_bot)
    if r + 1 < len(t.rows) and t._vacant(r + 1, merged.wires):
        t._place(merged, r + 1)
    elif t._vacant(r, merged.wires):
        t._place(merged, r)
    else:
        t.rows.insert(r + 1, t.new_row())
        t._place(merged, r + 1)
    return merged


def compress(t: CircuitTile) -> None:
    moved = True
    while moved:
        moved = False
        for r in range(len(t.rows) - 2, -1, -1):
            seen = set()
            for cell in t.rows[r]:
                if cell is None or cell.id in seen:
                    continue
                seen.add(cell.id)
                rr = r
                while move_block_down(t, cell, rr):
                    rr += 1
                    moved = True
    t.rows = [row for row in t.rows if any(c is not None for c in row)]


def _pair_key(a: GateBlock, b: GateBlock) -> tuple[int, int]:
    return (a.id, b.id) if a.id < b.id else (b.id, a.id)


def traverse(t: CircuitTile, fusible: Fusible) -> bool:
    """One pass of tile traversal; True iff at least one pair of blocks was fused.

    ``fusible(top, bot, merged)`` receives the candidate merged block (matrix
    not yet materialised) so predicates can inspect its wires or profile.
    """
    compress(t)
    fused = False
    tested: set[tuple[int, int]] = set()

    def attempt(top: GateBlock, bot: GateBlock) -> GateBlock | None:
        nonlocal fused
        key = _pair_key(top, bot)
        if key in tested:
            return None
        tested.add(key)
        candidate = GateBlock.merge(t.next_id(), top, bot, t.hard_cap)
        if not fusible(top, bot, candidate):
            return None
        fused = True
        return fuse_blocks(t, top, bot, candidate)

    r = 0
    while r < len(t.rows):
        for q in range(t.n_qubits):
            top = t.rows[r][q]
            if top is None:
                continue
            if move_block_down(t, top, r):
                continue
            if r + 1 < len(t.rows):
                bot = t.rows[r + 1][q]
                if bot is not None:
                    attempt(top, bot)

        prev: GateBlock | None = None
        q = 0
        while q < t.n_qubits:
            cur = t.rows[r][q]
            q += 1
            if cur is None or cur is prev:
                continue
            if prev is not None and t.row_of(prev) == r:
                merged = attempt(prev, cur)
                if merged is not None:
                    if t.row_of(merged) != r:
                        prev = None
                        continue
                    cur = merged
            prev = cur
        r += 1

    compress(t)
    t.check()
    return fused


def flatten(t: CircuitTile) -> Circuit:
    return Circuit(t.n_qubits, tuple(b.as_gate() for b in t.blocks()))
