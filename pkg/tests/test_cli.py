from pathlib import Path

import numpy as np
import pytest

from src.cli.summary import REPORT_KEYS
from src.fusion import driver
from src.main import main
from src.sim import statevector
from src.store.costmodel_file import load_cost_model, save_cost_model
from src.store.qcfile import read_circuit
from src.store.statedump import load_state

from tests.helpers import synthetic_cost_model

GOLDEN = Path(__file__).parent / "golden"

RUN_FLAGS = (
    "--precision", "--f32", "--f64", "--simd", "--threads", "--fusion", "--preset", "--k-max",
    "--max-op-count", "--zero-tolerance", "--one-tolerance", "--agglomerative", "--no-agglomerative",
    "--multi-traversal", "--no-multi-traversal", "--max-traversals", "--cost-model",
    "--kernel-zero-tolerance", "--kernel-one-tolerance", "--force-dense-kernel", "--runtime-matrix",
    "--report", "--dump-state", "--dump-plans",
)


@pytest.fixture
def qft3(tmp_path):
    path = tmp_path / "qft3.qc"
    assert main(["gen", "qft", "-n", "3", "-o", str(path)]) == 0
    return path


def read_report(path):
    return dict(line.split("=", 1) for line in path.read_text().splitlines())


def test_gen_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.qc", tmp_path / "b.qc"
    assert main(["gen", "rqc", "-n", "8", "--depth", "10", "--seed", "7", "-o", str(a)]) == 0
    assert main(["gen", "rqc", "-n", "8", "--depth", "10", "--seed", "7", "-o", str(b)]) == 0
    assert a.read_text() == b.read_text()
    assert main(["gen", "qft", "-n", "4"]) == 0
    assert capsys.readouterr().out.startswith("qubits 4\n")


def test_gen_unknown_kind_is_a_config_error(capsys):
    assert main(["gen", "nope", "-n", "3"]) == 2
    assert "unknown benchmark kind" in capsys.readouterr().err


def test_run_reports_every_key(qft3, tmp_path, capsys):
    report = tmp_path / "out" / "report.txt"
    assert main(["run", str(qft3), "--threads", "1", "--report", str(report)]) == 0
    values = read_report(report)
    assert tuple(values) == REPORT_KEYS
    assert values["circuit"] == "qft3.qc"
    assert values["original_gate_count"] == "7"
    assert float(values["norm"]) == pytest.approx(1.0, abs=1e-12)
    out = capsys.readouterr().out
    assert "compression_ratio" in out


def test_run_dumps_uniform_state_for_qft3(qft3, tmp_path):
    dump = tmp_path / "state.bin"
    assert main(["run", str(qft3), "--fusion", "none", "--threads", "1", "--dump-state", str(dump)]) == 0
    sv = load_state(str(dump))
    assert sv.n == 3
    np.testing.assert_allclose(np.hypot(sv.re, sv.im), np.full(8, 8 ** -0.5), atol=1e-12)


def test_run_writes_plan_listing(qft3, tmp_path):
    plans = tmp_path / "plans.txt"
    assert main(["run", str(qft3), "--threads", "1", "--simd", "1", "--dump-plans", str(plans)]) == 0
    assert "masks" in plans.read_text()


def test_run_bad_circuit_names_the_line(tmp_path, capsys):
    bad = tmp_path / "bad.qc"
    bad.write_text("qubits 2\nfrobnicate 0\n")
    assert main(["run", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_run_missing_circuit_is_a_parse_error(tmp_path):
    assert main(["run", str(tmp_path / "missing.qc")]) == 1


def test_run_invalid_utf8_is_a_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.qc"
    bad.write_bytes(b"qubits 1\nh 0 \xff\xfe\n")
    assert main(["run", str(bad)]) == 1
    assert "line 2, column 5" in capsys.readouterr().err


def test_run_directory_is_a_parse_error(tmp_path):
    assert main(["run", str(tmp_path)]) == 1


@pytest.mark.parametrize("flags", [
    ["--fusion", "adaptive"],
    ["--preset", "paper-cpu"],
    ["--k-max", "13"],
    ["--simd", "9"],
    ["--zero-tolerance", "-1"],
])
def test_run_invalid_settings_are_config_errors(qft3, flags):
    assert main(["run", str(qft3), "--threads", "1", *flags]) == 2


def test_run_adaptive_with_cost_model(qft3, tmp_path):
    cm_path = tmp_path / "cm.txt"
    save_cost_model(synthetic_cost_model(), str(cm_path))
    report = tmp_path / "report.txt"
    code = main(["run", str(qft3), "--threads", "1", "--preset", "paper-cpu",
                 "--cost-model", str(cm_path), "--report", str(report)])
    assert code == 0
    values = read_report(report)
    assert values["fusion_mode"] == "adaptive"
    assert float(values["compression_ratio"]) > 1


def test_cost_model_from_environment(qft3, tmp_path, monkeypatch):
    cm_path = tmp_path / "cm.txt"
    save_cost_model(synthetic_cost_model(), str(cm_path))
    monkeypatch.setenv("TILEFUSE_COST_MODEL", str(cm_path))
    assert main(["run", str(qft3), "--threads", "1", "--fusion", "adaptive"]) == 0


def test_fuse_writes_fused_circuit(tmp_path, capsys):
    chain = tmp_path / "chain.qc"
    chain.write_text("qubits 1\n" + "".join("h 0\n" if i % 2 else "t 0\n" for i in range(40)))
    out = tmp_path / "fused.qc"
    tile = tmp_path / "tile.txt"
    assert main(["fuse", str(chain), "-o", str(out), "--k-max", "1", "--dump-tile", str(tile)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "original=40 fused=1 ratio=40"
    assert len(read_circuit(str(out))) == 1
    assert " @ " in tile.read_text()


def test_fuse_qft3_into_one_block(qft3, tmp_path, capsys):
    out = tmp_path / "fused.qc"
    assert main(["fuse", str(qft3), "-o", str(out), "--k-max", "3"]) == 0
    assert capsys.readouterr().out.startswith("original=7 fused=1 ratio=7\n")


def test_fuse_none_keeps_circuit(qft3, tmp_path):
    out = tmp_path / "same.qc"
    assert main(["fuse", str(qft3), "-o", str(out), "--fusion", "none"]) == 0
    assert read_circuit(str(out)).gates == read_circuit(str(qft3)).gates


def test_costmodel_command(tmp_path, capsys):
    path = tmp_path / "cm.txt"
    code = main(["costmodel", "--bench-n", "6", "--k-min", "1", "--k-max", "2",
                 "--repetitions", "1", "--thread-counts", "1,2", "-o", str(path)])
    assert code == 0
    cm = load_cost_model(str(path))
    assert cm.bench_n == 6
    assert cm.thread_counts(1) == [1, 2]
    assert "sec/group" in capsys.readouterr().out


def test_costmodel_over_memory_budget(tmp_path, monkeypatch):
    monkeypatch.setattr(statevector, "host_memory_bytes", lambda: 8 << 30)
    assert main(["costmodel", "--bench-n", "30", "-o", str(tmp_path / "cm.txt")]) == 2


def test_costmodel_needs_an_output_path():
    assert main(["costmodel", "--bench-n", "6", "--k-max", "2", "--repetitions", "1"]) == 2


def test_run_help_lists_every_flag(capsys):
    with pytest.raises(SystemExit) as exit_info:
        main(["run", "--help"])
    assert exit_info.value.code == 0
    text = capsys.readouterr().out
    for flag in RUN_FLAGS:
        assert flag in text


def _help_lines(text):
    # 3.13+ prints the metavar once for short/long option pairs
    text = text.replace("-S SIMD, --simd SIMD", "-S, --simd SIMD")
    return [" ".join(line.split()) for line in text.splitlines()]


def test_run_help_matches_golden(capsys, monkeypatch):
    monkeypatch.setenv("COLUMNS", "2000")
    monkeypatch.setenv("NO_COLOR", "1")
    monkeypatch.delenv("FORCE_COLOR", raising=False)
    with pytest.raises(SystemExit) as exit_info:
        main(["run", "--help"])
    assert exit_info.value.code == 0
    expected = (GOLDEN / "run_help.txt").read_text(encoding="utf-8")
    assert _help_lines(capsys.readouterr().out) == _help_lines(expected)


def test_usage_errors_exit_with_config_code():
    with pytest.raises(SystemExit) as exit_info:
        main(["run"])
    assert exit_info.value.code == 2


def test_fuse_dumps_the_tile_it_flattened(qft3, tmp_path, monkeypatch):
    calls = []
    original = driver.fuse_tile

    def counting(*args, **kwargs):
        calls.append(args)
        return original(*args, **kwargs)

    monkeypatch.setattr(driver, "fuse_tile", counting)
    out, tile = tmp_path / "fused.qc", tmp_path / "tile.txt"
    assert main(["fuse", str(qft3), "-o", str(out), "--k-max", "3", "--dump-tile", str(tile)]) == 0
    assert len(calls) == 1
    blocks = [line for line in tile.read_text().splitlines() if ": " in line]
    assert len(blocks) == len(read_circuit(str(out))) == 1


def test_fuse_none_still_dumps_a_tile(qft3, tmp_path):
    tile = tmp_path / "tile.txt"
    assert main(["fuse", str(qft3), "-o", str(tmp_path / "same.qc"), "--fusion", "none",
                 "--dump-tile", str(tile)]) == 0
    assert len([line for line in tile.read_text().splitlines() if ": " in line]) == 7
