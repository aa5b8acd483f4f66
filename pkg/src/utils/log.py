import logging
import sys
import time
from contextlib import contextmanager
from typing import Dict, Iterator, Optional

from src.config import LOG_LEVEL
from src.errors import ConfigError

_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"

logger = logging.getLogger(__name__)


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever sys.stderr is when a record is emitted, not when the handler was built."""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, _value):
        pass


def configure_logging(level: Optional[str] = None) -> None:
    """Install the pvff stderr handler on the root logger; calling again replaces it."""
    name = (level or LOG_LEVEL).upper()
    if not isinstance(logging.getLevelName(name), int):
        raise ConfigError(f"unknown log level {level or LOG_LEVEL!r}")
    root = logging.getLogger()
    for old in [h for h in root.handlers if isinstance(h, _StderrHandler)]:
        root.removeHandler(old)
    handler = _StderrHandler()
    handler.setFormatter(logging.Formatter(_FORMAT))
    root.addHandler(handler)
    root.setLevel(name)


@contextmanager
def stage(name: str, timings: Optional[Dict[str, float]] = None) -> Iterator[None]:
    """Time a pipeline stage; the elapsed seconds land in `timings[name]` when given."""
    t0 = time.perf_counter()
    try:
        yield
    finally:
        elapsed = time.perf_counter() - t0
        if timings is not None:
            timings[name] = timings.get(name, 0.0) + elapsed
        logger.info("stage %s took %.3fs", name, elapsed)
