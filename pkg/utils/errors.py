from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager

log = logging.getLogger(__name__)


class CornerDtcError(Exception):
    """Root of every error raised by this package."""


class ExperimentError(CornerDtcError):
    pass


@contextmanager
def error_context(module: str, *, log_level: int = logging.DEBUG) -> Iterator[None]:
    """Tag library errors escaping the block with the module that raised them.

    Used by the experiment runner around each stage::

        with error_context("engine"):
            series = autocorrelation(...)

    Any ``CornerDtcError`` is logged at ``log_level`` and re-raised as an
    ``ExperimentError`` whose message starts with ``[module]``. Errors that are
    already ``ExperimentError`` pass through untouched, as does everything that
    is not a ``CornerDtcError``.
    """
    try:
        yield
    except ExperimentError:
        raise
    except CornerDtcError as exc:
        log.log(log_level, "Stage %s failed: %r", module, exc)
        raise ExperimentError(f"[{module}] {type(exc).__name__}: {exc}") from exc
