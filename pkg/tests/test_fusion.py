import numpy as np
import pytest

from src.circuit.generators import gen_benchmark
from src.circuit.model import SPARSE_CLASS, Circuit
from src.core.config import FusionConfig, FusionMode
from src.core.errors import ConfigError, CostModelLookupError
from src.fusion.costmodel import CostModel, CostRecord, estimate_cost, seconds_per_group
from src.fusion.driver import (
    FusionStats,
    fuse_tile,
    fusible_adaptive,
    fusible_size_only,
    k_schedule,
    run_fusion,
)
from src.gates.library import make_gate, matrix_gate, random_diagonal, random_unitary
from src.sim.statevector import compare_states
from src.tile.tile import GateBlock

from tests.helpers import (
    flat_cost_model,
    random_circuit,
    reference_simulate,
    synthetic_cost_model,
)

SIZE_ONLY = FusionMode.SIZE_ONLY
ADAPTIVE = FusionMode.ADAPTIVE


def block(block_id, gate):
    return GateBlock.single(block_id, gate)


def chain(length):
    gates = [make_gate("h", [0]) if i % 2 else make_gate("rx", [0], [0.1 * i]) for i in range(length)]
    return Circuit(1, tuple(gates))


def test_fusible_size_only():
    a = block(0, make_gate("cx", [0, 1]))
    b = block(1, make_gate("cx", [1, 2]))
    assert not fusible_size_only(a, b, 2)
    assert fusible_size_only(a, b, 3)


@pytest.mark.parametrize("cfg, expected", [
    (FusionConfig(k_max=5), [2, 3, 4, 5]),
    (FusionConfig(k_max=1), [1]),
    (FusionConfig(k_max=2), [2]),
    (FusionConfig(k_max=5, agglomerative=False), [5]),
])
def test_k_schedule(cfg, expected):
    assert k_schedule(cfg) == expected


def test_single_wire_chain_collapses():
    fused, stats = run_fusion(chain(40), FusionConfig(mode=SIZE_ONLY, k_max=1))
    assert len(fused) == 1
    assert stats.compression_ratio == 40
    assert stats.line() == "original=40 fused=1 ratio=40"
    assert compare_states(reference_simulate(chain(40)), reference_simulate(fused)) <= 1e-12


def test_qft3_fuses_into_one_block():
    qft = gen_benchmark("qft", 3)
    tile, stats = fuse_tile(qft, FusionConfig(mode=SIZE_ONLY, k_max=3))
    (only,) = tile.blocks()
    assert len(only.gates) == 7
    assert stats.k_schedule == [2, 3]
    fused, _ = run_fusion(qft, FusionConfig(mode=SIZE_ONLY, k_max=3))
    assert compare_states(reference_simulate(qft), reference_simulate(fused)) <= 1e-12


def test_mode_none_is_identity():
    c = gen_benchmark("rqc", 6, depth=4, seed=1)
    fused, stats = run_fusion(c, FusionConfig(mode=FusionMode.NONE))
    assert fused is c
    assert stats.fused_block_count == len(c)
    assert stats.compression_ratio == 1.0
    assert stats.total_op_count == c.total_op_count()


def test_adaptive_needs_a_cost_model():
    with pytest.raises(ConfigError):
        run_fusion(gen_benchmark("qft", 4), FusionConfig(mode=ADAPTIVE))


@pytest.mark.parametrize("seed", range(8))
def test_adaptive_respects_caps_and_preserves_semantics(seed, cost_model):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, 6, 30)
    cfg = FusionConfig(mode=ADAPTIVE, k_max=4, max_op_count=256)
    fused, stats = run_fusion(c, cfg, cost_model)
    assert all(g.k <= 4 for g in fused.gates)
    assert all(g.profile().op_count <= 256 for g in fused.gates)
    assert stats.fused_block_count == len(fused) <= len(c)
    assert compare_states(reference_simulate(c), reference_simulate(fused)) <= 1e-12


def test_adaptive_op_cap_blocks_dense_merge(cost_model, rng):
    top = block(0, matrix_gate(random_unitary(3, rng), [0, 1, 2]))
    bot = block(1, matrix_gate(random_unitary(3, rng), [3, 4, 5]))
    cfg = FusionConfig(mode=ADAPTIVE, k_max=7, max_op_count=4096)
    assert not fusible_adaptive(top, bot, 7, cost_model, cfg)


def test_adaptive_accepts_sparse_merge(cost_model, rng):
    top = block(0, matrix_gate(random_diagonal(2, rng), [0, 1]))
    bot = block(1, matrix_gate(random_diagonal(2, rng), [1, 2]))
    cfg = FusionConfig(mode=ADAPTIVE, k_max=7, max_op_count=4096)
    assert fusible_adaptive(top, bot, 7, cost_model, cfg)


def test_flat_cost_model_reduces_to_size_only(rng):
    cm = flat_cost_model()
    cfg = FusionConfig(mode=ADAPTIVE, k_max=4)
    for i in range(20):
        ka, kb = (int(x) for x in rng.integers(1, 4, size=2))
        a = block(2 * i, matrix_gate(random_unitary(ka, rng), rng.choice(6, size=ka, replace=False)))
        b = block(2 * i + 1, matrix_gate(random_unitary(kb, rng), rng.choice(6, size=kb, replace=False)))
        assert fusible_adaptive(a, b, 4, cm, cfg) == fusible_size_only(a, b, 4)


def test_lookup_failures_are_counted_not_raised():
    cm = synthetic_cost_model(k_max=2)
    c = Circuit(3, (make_gate("cx", [0, 1]), make_gate("cx", [1, 2])))
    fused, stats = run_fusion(c, FusionConfig(mode=ADAPTIVE, k_max=3), cm)
    assert len(fused) == 2
    assert stats.lookup_failures >= 1


def test_traversal_bounds():
    cfg = FusionConfig(mode=SIZE_ONLY, k_max=1, max_traversals=1)
    _, stats = run_fusion(chain(10), cfg)
    assert stats.traversals == 1

    c = gen_benchmark("rqc", 6, depth=6, seed=3)
    _, single = run_fusion(c, FusionConfig(mode=SIZE_ONLY, k_max=4, multi_traversal=False))
    assert single.traversals == len(single.k_schedule) == 3


def test_agglomerative_and_direct_schedules_agree():
    c = gen_benchmark("hes", 8, depth=3)
    expected = reference_simulate(c)
    for agglomerative in (True, False):
        fused, stats = run_fusion(c, FusionConfig(mode=SIZE_ONLY, k_max=4, agglomerative=agglomerative))
        assert stats.fused_block_count < len(c)
        assert compare_states(expected, reference_simulate(fused)) <= 1e-12


def test_seconds_per_group_interpolates_in_log_ops():
    cm = CostModel(records=[CostRecord(k=2, op_count=4, threads=1, seconds_per_group=1.0),
                            CostRecord(k=2, op_count=16, threads=1, seconds_per_group=3.0)])
    assert seconds_per_group(cm, 2, 8) == pytest.approx(2.0)
    assert seconds_per_group(cm, 2, 2) == pytest.approx(1.0)
    assert seconds_per_group(cm, 2, 64) == pytest.approx(3.0)
    with pytest.raises(CostModelLookupError):
        seconds_per_group(cm, 3, 16)


def test_seconds_per_group_interpolates_between_thread_counts():
    cm = CostModel(records=[CostRecord(k=1, op_count=16, threads=1, seconds_per_group=4.0),
                            CostRecord(k=1, op_count=16, threads=4, seconds_per_group=1.0)])
    assert seconds_per_group(cm, 1, 16, threads=2) == pytest.approx(3.0)
    assert seconds_per_group(cm, 1, 16, threads=4) == pytest.approx(1.0)
    assert seconds_per_group(cm, 1, 16, threads=8) == pytest.approx(1.0)


def test_estimate_cost_scales_with_state_size():
    cm = CostModel(records=[CostRecord(k=1, op_count=2, threads=1, seconds_per_group=3e-9),
                            CostRecord(k=1, op_count=16, threads=1, seconds_per_group=5e-9)], bench_n=12)
    x = block(0, make_gate("x", [0]))
    assert estimate_cost(x, cm, n=10) == pytest.approx(3e-9 * 2 ** 9)
    assert estimate_cost(x, cm) == pytest.approx(3e-9 * 2 ** 11)
    assert estimate_cost(make_gate("u3", [0], [0.1, 0.2, 0.3]), cm, n=10) == pytest.approx(5e-9 * 2 ** 9)


def test_fusion_stats_line_defaults():
    assert FusionStats().line() == "original=0 fused=0 ratio=1"


@pytest.mark.slow
def test_qft16_adaptive_keeps_uniform_moduli(cost_model):
    c = gen_benchmark("qft", 16)
    cfg = FusionConfig(mode=ADAPTIVE, k_max=7, max_op_count=4096)
    fused, stats = run_fusion(c, cfg, cost_model)
    assert stats.fused_block_count < len(c)
    sv = reference_simulate(fused)
    moduli = np.hypot(sv.re, sv.im)
    assert np.max(np.abs(moduli - 2 ** -8)) <= 1e-12


CPU_PRESET = FusionConfig(mode=ADAPTIVE, k_max=7, max_op_count=4096)
SIZE_ONLY_5 = FusionConfig(mode=SIZE_ONLY, k_max=5)


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["qft", "iqp", "hes"])
def test_adaptive_emits_fewer_ops_than_size_only(kind, cost_model):
    c = gen_benchmark(kind, 20)
    _, adaptive = run_fusion(c, CPU_PRESET, cost_model)
    _, size_only = run_fusion(c, SIZE_ONLY_5)
    assert adaptive.total_op_count <= size_only.total_op_count


@pytest.mark.slow
def test_adaptive_rqc20_trades_compression_for_ops(cost_model):
    c = gen_benchmark("rqc", 20, depth=20, seed=0)
    _, adaptive = run_fusion(c, CPU_PRESET, cost_model)
    _, size_only = run_fusion(c, SIZE_ONLY_5)
    assert adaptive.total_op_count <= size_only.total_op_count
    ratios = sorted([adaptive.compression_ratio, size_only.compression_ratio])
    assert ratios[1] <= 2 * ratios[0]


@pytest.mark.slow
def test_agglomerative_schedule_mostly_leaves_sparser_gates():
    wins = total = 0
    for kind in SPARSE_CLASS:
        for seed in range(10):
            c = gen_benchmark(kind, 16, depth=10, seed=seed)
            _, grown = run_fusion(c, SIZE_ONLY_5)
            _, direct = run_fusion(c, SIZE_ONLY_5.model_copy(update={"agglomerative": False}))
            wins += grown.total_op_count <= direct.total_op_count
            total += 1
    assert wins > total / 2
