"""Text persistence for cost models.

    version 1
    precision f64
    bench_n 22
    host <free text>
    k=<int> ops=<int> threads=<int> spg=<real>
    ...
"""

from pathlib import Path

from pydantic import ValidationError

from src.core.config import Precision, first_error
from src.core.errors import CostModelFormatError, CostModelNotFoundError
from src.core.utils import setup_logging
from src.fusion.costmodel import COST_MODEL_VERSION, CostModel, CostRecord

logger = setup_logging()

_RECORD_KEYS = ("k", "ops", "threads", "spg")


def format_cost_model(cm: CostModel) -> str:
    lines = [
        f"version {COST_MODEL_VERSION}",
        f"precision {cm.precision.value}",
        f"bench_n {cm.bench_n}",
        f"host {cm.host}",
    ]
    for r in cm.records:
        lines.append(f"k={r.k} ops={r.op_count} threads={r.threads} spg={r.seconds_per_group!r}")
    return "\n".join(lines) + "\n"


def _parse_record(content: str, lineno: int) -> CostRecord:
    fields: dict[str, str] = {}
    for token in content.split():
        key, sep, value = token.partition("=")
        if not sep or key not in _RECORD_KEYS:
            raise CostModelFormatError(f"unexpected token '{token}' in record", lineno)
        if key in fields:
            raise CostModelFormatError(f"duplicate key '{key}'", lineno)
        fields[key] = value
    missing = [k for k in _RECORD_KEYS if k not in fields]
    if missing:
        raise CostModelFormatError(f"record is missing {', '.join(missing)}", lineno)
    try:
        return CostRecord(
            k=int(fields["k"]),
            op_count=int(fields["ops"]),
            threads=int(fields["threads"]),
            seconds_per_group=float(fields["spg"]),
        )
    except ValueError as e:
        if isinstance(e, ValidationError):
            raise CostModelFormatError(f"invalid record: {first_error(e)}", lineno) from None
        raise CostModelFormatError(f"malformed number in record: {e}", lineno) from None


def parse_cost_model(text: str) -> CostModel:
    header: dict[str, str] = {}
    records: list[CostRecord] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw == "host" or raw.startswith("host "):
            # free text up to the line break, kept verbatim
            if "version" not in header:
                raise CostModelFormatError("missing 'version' header", lineno)
            header["host"] = raw[len("host "):]
            continue
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        if content.startswith("k="):
            if "version" not in header:
                raise CostModelFormatError("record before 'version' header", lineno)
            records.append(_parse_record(content, lineno))
            continue
        key, _, value = content.partition(" ")
        if key not in ("version", "precision", "bench_n", "host"):
            raise CostModelFormatError(f"unknown header '{key}'", lineno)
        if key == "version":
            if header:
                raise CostModelFormatError("'version' must be the first line", lineno)
            if value.strip() != str(COST_MODEL_VERSION):
                raise CostModelFormatError(
                    f"unsupported cost model version '{value.strip()}' (expected {COST_MODEL_VERSION})", lineno
                )
        elif "version" not in header:
            raise CostModelFormatError("missing 'version' header", lineno)
        header[key] = value.strip()

    if "version" not in header:
        raise CostModelFormatError("missing 'version' header")
    try:
        precision = Precision(header.get("precision", "f64"))
    except ValueError:
        raise CostModelFormatError(f"unknown precision '{header['precision']}'") from None
    try:
        bench_n = int(header.get("bench_n", "0"))
    except ValueError:
        raise CostModelFormatError(f"bench_n must be an integer, got '{header['bench_n']}'") from None
    if not records:
        raise CostModelFormatError("cost model has no records")
    return CostModel(records=records, bench_n=bench_n, precision=precision, host=header.get("host", ""))


def save_cost_model(cm: CostModel, path: str) -> None:
    file = Path(path)
    file.parent.mkdir(parents=True, exist_ok=True)
    file.write_text(format_cost_model(cm), encoding="utf-8")
    logger.info(f"Saved cost model with {len(cm.records)} record(s) to {path}")


def load_cost_model(path: str) -> CostModel:
    file = Path(path)
    if not file.is_file():
        raise CostModelNotFoundError(f"cost model file not found: {path}")
    cm = parse_cost_model(file.read_text(encoding="utf-8"))
    logger.info(f"Loaded cost model {path}: {len(cm.records)} record(s), sizes {cm.sizes()}")
    return cm
