import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def sublow_family():
    from choquard.construction import choose_sequences
    from choquard.regions import Params

    return choose_sequences(Params(3, 1, 1, 4), J=5)


@pytest.fixture(scope="session")
def sublow3_family():
    from choquard.construction import choose_sequences
    from choquard.regions import Params

    return choose_sequences(Params(3, 1, 1, 4), J=3)


@pytest.fixture(scope="session")
def midtop_family():
    from choquard.construction import choose_sequences
    from choquard.regions import Params

    return choose_sequences(Params(3, 1, 3, 3), J=5)


@pytest.fixture(scope="session")
def high_family():
    from choquard.construction import choose_sequences
    from choquard.regions import Params

    return choose_sequences(Params(3, 2.5, 4, 1), J=5)


# -- acceptance summary lines -------------------------------------------------------

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance_log(request):
    """Append one 'criterion N: PASS|FAIL' line, printed in the terminal summary."""
    return request.config.stash[_ACCEPTANCE]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
