import logging

import pytest

from logger import ColoredConsoleFormatter, get_logger, set_verbose, timed


def test_timed_reports_elapsed_ms(caplog):
    log = get_logger("Timing")
    with caplog.at_level(logging.DEBUG, logger="Timing"):
        with timed(log, "block") as elapsed:
            sum(range(10_000))
    assert elapsed["ms"] >= 0.0
    assert "block took" in caplog.text


def test_timed_records_duration_when_block_raises():
    with pytest.raises(RuntimeError):
        with timed(get_logger("Timing"), "failing block") as elapsed:
            raise RuntimeError("boom")
    assert elapsed["ms"] >= 0.0


@pytest.mark.parametrize("use_color", [True, False])
def test_console_format_pads_level_and_restores_record(use_color):
    record = logging.LogRecord("Tree", logging.INFO, __file__, 1, "built %d nodes", (7,), None)
    line = ColoredConsoleFormatter(use_color=use_color).format(record)
    assert "built 7 nodes" in line
    assert ("\033[32m" in line) is use_color
    assert record.levelname == "INFO"


def test_set_verbose_lowers_every_handler_to_debug():
    root = logging.getLogger()
    saved = [(root, root.level)] + [(h, h.level) for h in root.handlers]
    try:
        set_verbose()
        assert root.level == logging.DEBUG
        assert all(h.level == logging.DEBUG for h in root.handlers)
    finally:
        for target, level in saved:
            target.setLevel(level)
