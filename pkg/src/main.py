import sys
from pathlib import Path

from dotenv import load_dotenv

from src.cli.commands import build_parser
from src.core.config import TileFuseConfig, load_config
from src.core.errors import EXIT_RUNTIME, TileFuseError
from src.core.utils import clear_run_context, setup_logging

logger = setup_logging()


def _resolve_config(path: str | None) -> TileFuseConfig:
    if path:
        return load_config(path)
    project_root = Path(__file__).resolve().parent.parent
    default = project_root / "config" / "tilefuse.yml"
    if default.exists():
        return load_config(str(default))
    return TileFuseConfig()


def main(argv: list[str] | None = None) -> int:
    project_root = Path(__file__).resolve().parent.parent
    load_dotenv(project_root / ".env")
    args = build_parser().parse_args(argv)
    try:
        config = _resolve_config(args.config)
        level = "DEBUG" if args.verbose else "WARNING" if args.quiet else config.app.log_level
        setup_logging(level)
        return args.handler(args, config)
    except TileFuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:
        logger.exception("Unexpected failure: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        clear_run_context()


if __name__ == "__main__":
    sys.exit(main())
