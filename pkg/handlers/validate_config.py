from __future__ import annotations

import argparse

from config import Settings
from services.experiments import load_config


class ValidateConfigHandler:
    def __init__(self, settings: Settings) -> None:
        self.settings = settings

    def register(self, commands: argparse._SubParsersAction) -> None:
        parser = commands.add_parser("validate-config", help="check a config without running it")
        parser.add_argument("--config", required=True)
        parser.set_defaults(handler=self._on_validate)

    async def _on_validate(self, args: argparse.Namespace) -> int:
        config = load_config(args.config)
        print(f"ok {config.kind.value} {config.fingerprint}")
        return 0
