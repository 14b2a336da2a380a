"""Tests for log record tagging."""

from loguru import logger

from src.utils import get_logger, run_context, setup_logging


def capture(fmt="{extra[component]} | {extra[run]} | {message}"):
    messages = []
    sink_id = logger.add(messages.append, format=fmt, level="DEBUG")
    return messages, sink_id


def test_records_carry_component_and_run_label():
    messages, sink_id = capture()
    try:
        log = get_logger("src.services.pgd_engine")
        with run_context(method="random-d3", S=160) as label:
            log.debug("iter 1")
        log.debug("done")
    finally:
        logger.remove(sink_id)
    assert label == "method=random-d3 S=160"
    assert messages[0].rstrip("\n") == "pgd_engine | method=random-d3 S=160 | iter 1"
    assert messages[1].rstrip("\n") == "pgd_engine | - | done"


def test_unbound_logger_uses_defaults():
    messages, sink_id = capture()
    try:
        logger.info("plain")
    finally:
        logger.remove(sink_id)
    assert messages[0].rstrip("\n") == "treepgd | - | plain"


def test_log_file_sink(tmp_path):
    path = tmp_path / "logs" / "run.log"
    try:
        setup_logging(log_level="DEBUG", log_file=str(path))
        with run_context(rep=2):
            get_logger("src.services.simulation").debug("written to file")
    finally:
        setup_logging()
    line = path.read_text().splitlines()[-1]
    assert "| simulation | rep=2 - written to file" in line
