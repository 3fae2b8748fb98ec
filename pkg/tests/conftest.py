import pytest

from metasense import harness

SMALL_CONFIG = """\
# small benchmark for fast tests
grid.points = 20
grid.repeats = 2
dataset.size = 40
sweep.ntr = 30, 10
forest.n_trees = 10
"""


@pytest.fixture(scope="session")
def default_config():
    return harness.ExperimentConfig()


@pytest.fixture(scope="session")
def default_dataset(default_config):
    """The default 2290-row noisy benchmark, generated once per session."""
    return harness.generate_dataset(default_config)


@pytest.fixture
def small_config_file(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL_CONFIG)
    return path


ACCEPTANCE_RESULTS = {}


def record(number: int, ok: bool, detail: str) -> bool:
    """Store and print the verdict of one acceptance criterion."""
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_RESULTS[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(ACCEPTANCE_RESULTS[number])
