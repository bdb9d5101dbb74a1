EXIT_OK = 0
EXIT_PARSE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class TileFuseError(Exception):
    exit_code = EXIT_RUNTIME


class ConfigError(TileFuseError):
    exit_code = EXIT_CONFIG


class MemoryBudgetError(ConfigError):
    def __init__(self, message: str, required_bytes: int):
        super().__init__(message)
        self.required_bytes = required_bytes


class CircuitParseError(TileFuseError):
    exit_code = EXIT_PARSE

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(f"{where}{message}")


class GateError(TileFuseError):
    pass


class FusionError(TileFuseError):
    pass


class CostModelError(TileFuseError):
    pass


class CostModelNotFoundError(CostModelError):
    pass


class CostModelFormatError(CostModelError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        where = f"line {line}: " if line else ""
        super().__init__(f"{where}{message}")


class CostModelLookupError(CostModelError):
    pass


class KernelError(TileFuseError):
    pass


class KernelRangeError(KernelError):
    pass


class KernelPatternError(KernelError):
    pass


class StateError(TileFuseError):
    pass
