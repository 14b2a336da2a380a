"""
Logging for the tree-PGD toolkit.

Records go to stderr so stdout stays free for results. Every record carries
the module it came from and the label of the run it belongs to, e.g.
``method=random-d3 S=160 sigma=1.5 rep=4`` inside a simulation job.
"""

import sys
from contextlib import contextmanager
from typing import Iterator, Optional

from loguru import logger

from src.config import get_settings

NO_RUN = "-"

CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss}</green> | <level>{level: <7}</level> | "
    "<cyan>{extra[component]}</cyan> | <magenta>{extra[run]}</magenta> - <level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <7} | pid={process} | {extra[component]} | {extra[run]} - {message}"


def setup_logging(log_level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """
    Route records to stderr and, when a log file is configured, to a
    rotating zip-compressed file.

    Args:
        log_level: DEBUG shows one line per PGD iteration; defaults to TREEPGD_LOG_LEVEL
        log_file: Path relative to the project root; defaults to TREEPGD_LOG_FILE
    """
    settings = get_settings()
    log_level = log_level or settings.log_level
    log_file = log_file or settings.log_file

    logger.remove()
    logger.configure(extra={"component": "treepgd", "run": NO_RUN})
    logger.add(sys.stderr, format=CONSOLE_FORMAT, level=log_level, colorize=True)

    if log_file:
        log_path = settings.get_absolute_path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        logger.add(log_path, format=FILE_FORMAT, level=log_level, rotation="100 MB", retention=10, compression="zip")

    logger.debug(f"Logging at {log_level}, file {log_file or 'disabled'}")


def get_logger(name: str):
    """Logger tagged with the last component of a module name (``src.services.pgd_engine`` -> ``pgd_engine``)."""
    return logger.bind(component=name.rsplit(".", 1)[-1])


@contextmanager
def run_context(**fields) -> Iterator[str]:
    """Label every record logged inside the block with ``key=value`` pairs."""
    label = " ".join(f"{k}={v}" for k, v in fields.items()) or NO_RUN
    with logger.contextualize(run=label):
        yield label


try:
    setup_logging()
except Exception as e:
    logger.remove()
    logger.configure(extra={"component": "treepgd", "run": NO_RUN})
    logger.add(sys.stderr, level="INFO")
    logger.warning(f"Failed to set up logging from settings: {e}")
