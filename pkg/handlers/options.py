from __future__ import annotations

import argparse

from config import Settings
from services.experiments import RunConfig


def add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="root directory for run outputs")
    parser.add_argument("--workers", type=int, help="worker processes for sweep points")
    parser.add_argument("--seed", type=int, help="master seed for noise trajectories")


def apply_overrides(config: RunConfig, args: argparse.Namespace, settings: Settings) -> RunConfig:
    """Flags first, then environment settings, then the config file itself."""
    return config.with_overrides(
        seed=getattr(args, "seed", None),
        workers=getattr(args, "workers", None) or settings.workers,
        out=getattr(args, "out", None) or settings.out_dir,
    )
