import pytest

from sawb.experiment import generate_dataset


@pytest.fixture(scope="session")
def tiny_dataset():
    return generate_dataset(24, seed=11)


def pytest_configure(config):
    config._acceptance = []


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict for the terminal summary."""
    def record(number, title, passed, detail=""):
        request.config._acceptance.append((number, title, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter, config):
    results = sorted(getattr(config, "_acceptance", []), key=lambda r: r[0])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in results:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {title}  {detail}")
