from __future__ import annotations

import argparse

from config import Settings
from handlers.options import add_run_flags
from services.experiments import figures, reproduce


class ReproduceHandler:
    def __init__(self, settings: Settings) -> None:
        self.settings = settings

    def register(self, commands: argparse._SubParsersAction) -> None:
        parser = commands.add_parser("reproduce", help="run a bundled figure config and check it")
        parser.add_argument("figure", choices=figures())
        add_run_flags(parser)
        parser.set_defaults(handler=self._on_reproduce)

    async def _on_reproduce(self, args: argparse.Namespace) -> int:
        outcome = await reproduce(
            args.figure,
            out=args.out or self.settings.out_dir,
            workers=args.workers or self.settings.workers,
            seed=args.seed,
        )
        print(outcome.summary.read_text(encoding="utf-8"), end="")
        # a failed check is a finding, not an error
        return 0
