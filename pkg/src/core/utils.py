import logging

_run_context: dict[str, str] = {}

_setup_done = False


def set_run_context(circuit: str, phase: str = "") -> None:
    _run_context["circuit"] = circuit
    _run_context["phase"] = phase


def set_phase(phase: str) -> None:
    _run_context["phase"] = phase


def clear_run_context() -> None:
    _run_context.pop("circuit", None)
    _run_context.pop("phase", None)


class _ContextFormatter(logging.Formatter):
    def format(self, record):
        circuit = _run_context.get("circuit", "")
        phase = _run_context.get("phase", "")
        if circuit or phase:
            tag = f"[{circuit}|{phase}]" if circuit and phase else f"[{circuit or phase}]"
            record = logging.makeLogRecord(record.__dict__)
            record.msg = f"{tag} {record.msg}"
        return super().format(record)


def setup_logging(level: str | None = None) -> logging.Logger:
    global _setup_done
    root = logging.getLogger()
    if not _setup_done:
        handler = logging.StreamHandler()
        handler.setFormatter(_ContextFormatter("%(asctime)s [%(levelname)s] %(name)s: %(message)s"))
        root.setLevel(logging.INFO)
        root.addHandler(handler)
        _setup_done = True
    if level:
        root.setLevel(level.upper())
    return logging.getLogger("tilefuse")
