import time
from dataclasses import dataclass, field

from src.circuit.model import Circuit
from src.core.config import FusionConfig, FusionMode
from src.core.errors import ConfigError, CostModelLookupError
from src.core.utils import set_phase, setup_logging
from src.fusion.costmodel import CostModel, estimate_cost
from src.tile.tile import CircuitTile, Fusible, GateBlock, build_tile, flatten, traverse

logger = setup_logging()


@dataclass
class FusionStats:
    mode: str = FusionMode.NONE.value
    original_gate_count: int = 0
    fused_block_count: int = 0
    compression_ratio: float = 1.0
    total_op_count: int = 0
    fusion_seconds: float = 0.0
    traversals: int = 0
    k_schedule: list[int] = field(default_factory=list)
    lookup_failures: int = 0

    def line(self) -> str:
        return (
            f"original={self.original_gate_count} fused={self.fused_block_count} "
            f"ratio={self.compression_ratio:.4g}"
        )


def fusible_size_only(top: GateBlock, bot: GateBlock, k: int) -> bool:
    return len(set(top.wires) | set(bot.wires)) <= k


class _AdaptiveCheck:
    """Size check, then op-count cap, then measured cost of fused vs separate."""

    def __init__(self, k: int, cm: CostModel, cfg: FusionConfig, threads: int, n: int):
        self.k = k
        self.cm = cm
        self.cfg = cfg
        self.threads = threads
        self.n = n
        self.lookup_failures = 0

    def __call__(self, top: GateBlock, bot: GateBlock, merged: GateBlock) -> bool:
        return fusible_adaptive(top, bot, self.k, self.cm, self.cfg, merged, self.threads, self.n, self)


def fusible_adaptive(top: GateBlock, bot: GateBlock, k: int, cm: CostModel, cfg: FusionConfig,
                     merged: GateBlock | None = None, threads: int = 1, n: int | None = None,
                     counter: _AdaptiveCheck | None = None) -> bool:
    if not fusible_size_only(top, bot, k):
        return False
    if merged is None:
        merged = GateBlock.merge(-1, top, bot, cfg.hard_cap)
    zt, ot = cfg.zero_tol, cfg.one_tol
    if cfg.max_op_count is not None and merged.profile(zt, ot).op_count > cfg.max_op_count:
        return False
    n = cm.bench_n if n is None else max(n, merged.k)
    try:
        fused = estimate_cost(merged, cm, threads, n, zt, ot)
        separate = estimate_cost(top, cm, threads, n, zt, ot) + estimate_cost(bot, cm, threads, n, zt, ot)
    except CostModelLookupError as e:
        if counter is not None:
            counter.lookup_failures += 1
        logger.debug(f"Not fusing {top.id}+{bot.id}: {e}")
        return False
    return fused <= separate


def _predicate(cfg: FusionConfig, k: int, cm: CostModel | None, threads: int, n: int) -> Fusible:
    if cfg.mode is FusionMode.ADAPTIVE:
        return _AdaptiveCheck(k, cm, cfg, threads, n)
    return lambda top, bot, merged: fusible_size_only(top, bot, k)


def k_schedule(cfg: FusionConfig) -> list[int]:
    if cfg.agglomerative:
        return list(range(min(2, cfg.k_max), cfg.k_max + 1))
    return [cfg.k_max]


def fuse_tile(c: Circuit, cfg: FusionConfig, cm: CostModel | None = None,
              threads: int = 1) -> tuple[CircuitTile, FusionStats]:
    """Build the tile and run the traversal schedule; the tile is left unflattened."""
    if cfg.mode is FusionMode.ADAPTIVE and cm is None:
        raise ConfigError("adaptive fusion needs a cost model (--cost-model or costmodel.path)")
    tile = build_tile(c, cfg.hard_cap)
    if cfg.mode is FusionMode.NONE:
        return tile, FusionStats(mode=cfg.mode.value, original_gate_count=len(c))

    stats = FusionStats(mode=cfg.mode.value, original_gate_count=len(c), k_schedule=k_schedule(cfg))
    for k in stats.k_schedule:
        predicate = _predicate(cfg, k, cm, threads, c.n_qubits)
        for _ in range(cfg.max_traversals):
            stats.traversals += 1
            changed = traverse(tile, predicate)
            logger.debug(f"k={k} traversal {stats.traversals}: {tile.block_count()} block(s), changed={changed}")
            if not changed or not cfg.multi_traversal:
                break
        else:
            logger.warning(f"k={k}: stopped after {cfg.max_traversals} traversals that all fused blocks")
        stats.lookup_failures += getattr(predicate, "lookup_failures", 0)
    if stats.lookup_failures:
        logger.warning(f"{stats.lookup_failures} fusion candidate(s) outside the cost model's gate sizes were kept apart")
    return tile, stats


def fuse_circuit(c: Circuit, cfg: FusionConfig, cm: CostModel | None = None,
                 threads: int = 1) -> tuple[Circuit, FusionStats, CircuitTile | None]:
    """Fused circuit, its stats and the tile it was flattened from (None for mode none)."""
    zt, ot = cfg.zero_tol, cfg.one_tol
    if cfg.mode is FusionMode.NONE:
        return c, FusionStats(
            mode=cfg.mode.value,
            original_gate_count=len(c),
            fused_block_count=len(c),
            total_op_count=c.total_op_count(zt, ot),
        ), None

    set_phase("fuse")
    start = time.perf_counter()
    tile, stats = fuse_tile(c, cfg, cm, threads)
    fused = flatten(tile)
    stats.fusion_seconds = time.perf_counter() - start
    stats.fused_block_count = len(fused)
    stats.compression_ratio = len(c) / len(fused) if len(fused) else 1.0
    stats.total_op_count = fused.total_op_count(zt, ot)
    logger.info(f"Fused {stats.line()} in {stats.traversals} traversal(s), {stats.fusion_seconds:.4f}s")
    return fused, stats, tile


def run_fusion(c: Circuit, cfg: FusionConfig, cm: CostModel | None = None,
               threads: int = 1) -> tuple[Circuit, FusionStats]:
    fused, stats, _ = fuse_circuit(c, cfg, cm, threads)
    return fused, stats
