from __future__ import annotations

import numpy as np
import pytest

from kinetostiff import orthoglide as og


@pytest.fixture(scope="session")
def config():
    return og.load_config()


@pytest.fixture(scope="session")
def springs(config):
    return config[1]


@pytest.fixture(scope="session")
def geom(config):
    return og.geometry_from_dict(config[0], variant="prpar")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
