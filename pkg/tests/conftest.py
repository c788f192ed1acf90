import importlib.util

import pytest

from support import ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


def pytest_collection_modifyitems(config, items):
    if importlib.util.find_spec("cvc5") is None:
        skip = pytest.mark.skip(reason="cvc5 is not installed")
        for item in items:
            if "solver" in item.keywords:
                item.add_marker(skip)
