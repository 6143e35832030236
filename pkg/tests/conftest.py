import pytest

from prrtail import cli

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def corpus():
    """name -> (BenchmarkSpec, CanonicalPrr) for the 12 shipped benchmarks."""
    out = {}
    for name in cli.benchmark_names():
        spec = cli.load_benchmark(name)
        out[name] = (spec, spec.load_prr())
    return out


@pytest.fixture(scope="session")
def prr(corpus):
    return lambda name: corpus[name][1]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
