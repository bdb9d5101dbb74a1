import pytest
from pydantic import ValidationError

from src.circuit.generators import gen_benchmark
from src.core.config import FusionConfig, FusionMode, Precision
from src.core.errors import ConfigError, CostModelFormatError, CostModelNotFoundError
from src.fusion.costmodel import CostModel, CostRecord, bench_cost_model, estimate_cost
from src.fusion.driver import run_fusion
from src.gates.library import make_gate
from src.store.costmodel_file import (
    format_cost_model,
    load_cost_model,
    parse_cost_model,
    save_cost_model,
)

from tests.helpers import synthetic_cost_model

HEADER = "version 1\nprecision f64\nbench_n 20\nhost test box\n"


def test_save_and_load(tmp_path):
    cm = synthetic_cost_model(k_max=3, thread_counts=(1, 4))
    path = tmp_path / "models" / "cm.txt"
    save_cost_model(cm, str(path))
    assert load_cost_model(str(path)) == cm


def test_format_layout():
    text = format_cost_model(synthetic_cost_model(k_max=1))
    lines = text.splitlines()
    assert lines[:4] == ["version 1", "precision f64", "bench_n 20", "host synthetic test host"]
    assert lines[4].startswith("k=1 ops=2 threads=1 spg=")


def test_parse_accepts_comments():
    cm = parse_cost_model(HEADER + "# measured\n\nk=1 ops=2 threads=1 spg=1e-09  # x gate\n")
    assert cm.host == "test box"
    assert cm.bench_n == 20
    assert cm.records == [CostRecord(k=1, op_count=2, threads=1, seconds_per_group=1e-9)]


@pytest.mark.parametrize("text, line", [
    (HEADER + "k=1 ops=2 threads=1 spg=-1.0\n", 5),
    (HEADER + "k=1 ops=2 threads=1 spg=0\n", 5),
    (HEADER + "k=1 ops=2 threads=1\n", 5),
    (HEADER + "k=1 ops=2 threads=1 spg=abc\n", 5),
    (HEADER + "k=1 ops=2 threads=1 spg=1e-9 extra=3\n", 5),
    (HEADER.replace("version 1", "version 2") + "k=1 ops=2 threads=1 spg=1e-9\n", 1),
    ("precision f64\nk=1 ops=2 threads=1 spg=1e-9\n", 1),
    (HEADER + "colour blue\n", 5),
])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(CostModelFormatError) as err:
        parse_cost_model(text)
    assert err.value.line == line


def test_parse_rejects_empty_model():
    with pytest.raises(CostModelFormatError):
        parse_cost_model(HEADER)


def test_missing_file(tmp_path):
    with pytest.raises(CostModelNotFoundError):
        load_cost_model(str(tmp_path / "nope.txt"))


def test_record_validation():
    with pytest.raises(ValidationError):
        CostRecord(k=1, op_count=2, threads=1, seconds_per_group=0.0)
    with pytest.raises(ValidationError):
        CostRecord(k=0, op_count=2, threads=1, seconds_per_group=1.0)


def test_bench_rejects_sizes_that_do_not_fit():
    with pytest.raises(ConfigError):
        bench_cost_model(bench_n=8, k_range=range(1, 9))
    with pytest.raises(ConfigError):
        bench_cost_model(bench_n=8, k_range=range(0))


def test_tiny_bench_produces_usable_model(tmp_path):
    cm = bench_cost_model(bench_n=8, k_range=range(1, 4), thread_counts=(1, 2), repetitions=1, seed=3)
    assert cm.bench_n == 8
    assert cm.precision is Precision.F64
    assert cm.sizes() == [1, 2, 3]
    assert len(cm.records) == (3 + 4 + 4) * 2
    for k in cm.sizes():
        for th in (1, 2):
            ops = sorted({r.op_count for r in cm.records if r.k == k and r.threads == th})
            assert len(ops) >= 3
            assert ops[-1] == 2 ** (2 * k + 2)
            assert ops[0] == 2 ** k
    assert all(r.seconds_per_group > 0 for r in cm.records)

    path = tmp_path / "cm.txt"
    save_cost_model(cm, str(path))
    again = load_cost_model(str(path))
    assert again.records == cm.records
    assert estimate_cost(make_gate("h", [0]), again, threads=2) > 0

    cfg = FusionConfig(mode=FusionMode.ADAPTIVE, k_max=3, max_op_count=64)
    fused, _ = run_fusion(gen_benchmark("rqc", 6, depth=4, seed=2), cfg, again)
    assert all(g.k <= 3 and g.profile().op_count <= 64 for g in fused.gates)


def test_host_text_survives_round_trip():
    cm = synthetic_cost_model(k_max=2).model_copy(update={"host": "box  a\tb "})
    again = parse_cost_model(format_cost_model(cm))
    assert again.host == "box  a\tb "
    assert again == cm


def test_host_must_be_one_line():
    with pytest.raises(ValidationError):
        CostModel(records=[CostRecord(k=1, op_count=2, threads=1, seconds_per_group=1e-9)], host="a\nb")
