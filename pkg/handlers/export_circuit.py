from __future__ import annotations

import argparse
import logging
from pathlib import Path

from config import Settings
from services.circuits import Circuit, echo_circuit, to_text
from services.experiments import compile_circuits, load_config
from services.experiments.persistence import atomic_write

log = logging.getLogger(__name__)

PARTS = ("period", "prep", "echo")


class ExportCircuitHandler:
    def __init__(self, settings: Settings) -> None:
        self.settings = settings

    def register(self, commands: argparse._SubParsersAction) -> None:
        parser = commands.add_parser("export-circuit", help="write a compiled circuit in the text format")
        parser.add_argument("--config", required=True)
        parser.add_argument("--part", choices=PARTS, default="period")
        parser.add_argument("--periods", type=int, default=1, help="drive periods inside the echo")
        parser.add_argument("--output", help="file to write; stdout when omitted")
        parser.set_defaults(handler=self._on_export)

    async def _on_export(self, args: argparse.Namespace) -> int:
        config = load_config(args.config)
        prep, period = compile_circuits(config)
        circuit: Circuit
        match args.part:
            case "prep":
                circuit = prep
            case "echo":
                circuit = echo_circuit(prep, period, args.periods)
            case _:
                circuit = period
        text = to_text(circuit)
        if args.output:
            atomic_write(Path(args.output), text)
            log.info("Wrote %d gates (depth %d) to %s", len(circuit), circuit.depth, args.output)
        else:
            print(text, end="")
        return 0
