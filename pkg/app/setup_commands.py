from __future__ import annotations

import argparse
from dataclasses import dataclass

from config import Settings
from handlers import ExportCircuitHandler, ReproduceHandler, RunHandler, ValidateConfigHandler


@dataclass(slots=True)
class AppCommands:
    parser: argparse.ArgumentParser
    run: RunHandler
    reproduce: ReproduceHandler
    validate_config: ValidateConfigHandler
    export_circuit: ExportCircuitHandler


def setup_commands(*, settings: Settings) -> AppCommands:
    parser = argparse.ArgumentParser(
        prog="corner-dtc",
        description="Exact simulation of driven checkerboard stabilizer models and their circuits.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    run = RunHandler(settings)
    reproduce = ReproduceHandler(settings)
    validate_config = ValidateConfigHandler(settings)
    export_circuit = ExportCircuitHandler(settings)
    for handler in (run, reproduce, validate_config, export_circuit):
        handler.register(commands)

    return AppCommands(
        parser=parser,
        run=run,
        reproduce=reproduce,
        validate_config=validate_config,
        export_circuit=export_circuit,
    )
