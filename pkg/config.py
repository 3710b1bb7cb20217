import logging
import os
from dataclasses import dataclass


def _parse_int(s: str | None, *, env_name: str, minimum: int = 1) -> int | None:
    raw = (s or "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise RuntimeError(f"Invalid {env_name}: expected an integer, got {raw!r}") from None
    if value < minimum:
        raise RuntimeError(f"Invalid {env_name}: must be >= {minimum}, got {value}")
    return value


def _parse_log_level(s: str | None) -> int:
    raw = (s or "").strip().upper() or "INFO"
    level = logging.getLevelName(raw)
    if not isinstance(level, int):
        raise RuntimeError(f"Invalid CORNER_DTC_LOG_LEVEL: {raw!r}")
    return level


@dataclass(slots=True)
class Settings:
    """Machine-level defaults. CLI flags beat these, these beat the run config."""

    workers: int | None
    out_dir: str | None
    log_level: int

    @classmethod
    def from_env(cls) -> "Settings":
        try:
            from dotenv import load_dotenv
            load_dotenv()
        except ImportError:
            pass

        return cls(
            workers=_parse_int(os.getenv("CORNER_DTC_WORKERS"), env_name="CORNER_DTC_WORKERS"),
            out_dir=(os.getenv("CORNER_DTC_OUT_DIR", "") or "").strip() or None,
            log_level=_parse_log_level(os.getenv("CORNER_DTC_LOG_LEVEL")),
        )
