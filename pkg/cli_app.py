import asyncio
import logging
import sys
from collections.abc import Sequence

from app.setup_commands import setup_commands
from config import Settings
from utils.errors import CornerDtcError

log = logging.getLogger("cli")

EXIT_LIBRARY_ERROR = 2
EXIT_UNEXPECTED = 1


class CliApp:
    def __init__(self, settings: Settings) -> None:
        self.settings = settings
        self.commands = setup_commands(settings=settings)

    async def run(self, argv: Sequence[str] | None = None) -> int:
        args = self.commands.parser.parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        log.debug("Command %s", args.command)
        try:
            return await args.handler(args)
        except CornerDtcError as exc:
            print(f"error: {exc}", file=sys.stderr)
            log.debug("Library error", exc_info=exc)
            return EXIT_LIBRARY_ERROR
        except Exception:  # noqa: BLE001
            log.exception("Unexpected failure in %s", args.command)
            return EXIT_UNEXPECTED


def run_app(argv: Sequence[str] | None = None) -> int:
    settings = Settings.from_env()
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    )
    app = CliApp(settings)
    return asyncio.run(app.run(argv))
