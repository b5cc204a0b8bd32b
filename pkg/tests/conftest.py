import pytest

from snapgrid.learner import TrainConfig
from snapgrid.pipeline import train_models
from snapgrid.synthetic import generate_corpus, synthetic_splits


@pytest.fixture(scope="session")
def small_corpus():
    """A quick corpus for unit-level pipeline tests."""
    return generate_corpus(60, seed=3, prefix="S")


@pytest.fixture(scope="session")
def small_models(small_corpus):
    return train_models(small_corpus, TrainConfig.default_for("l1"), "convertible")


@pytest.fixture(scope="session")
def acceptance_splits():
    """The bundled synthetic train/dev corpus used by the acceptance suite."""
    return synthetic_splits()


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
