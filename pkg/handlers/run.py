from __future__ import annotations

import argparse
import logging

from config import Settings
from handlers.options import add_run_flags, apply_overrides
from services.experiments import load_config, run_experiment

log = logging.getLogger(__name__)


class RunHandler:
    def __init__(self, settings: Settings) -> None:
        self.settings = settings

    def register(self, commands: argparse._SubParsersAction) -> None:
        parser = commands.add_parser("run", help="run one experiment from a config or manifest")
        parser.add_argument("--config", required=True, help="TOML config or manifest.json")
        add_run_flags(parser)
        parser.set_defaults(handler=self._on_run)

    async def _on_run(self, args: argparse.Namespace) -> int:
        config = apply_overrides(load_config(args.config), args, self.settings)
        result = await run_experiment(config)
        print(result.out_dir)
        for path in result.files:
            print(f"  {path.name}")
        censored = [key for key, flag in result.censored.items() if flag]
        if censored:
            log.warning("%d censored lifetime(s): %s", len(censored), ", ".join(censored))
        return 0
