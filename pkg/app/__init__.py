from .setup_commands import AppCommands, setup_commands

__all__ = [
    "AppCommands",
    "setup_commands",
]
