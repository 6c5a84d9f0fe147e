import pytest

from ehpo.config import bundled_config
from ehpo.hpo import Algorithm, DiscreteDistribution, HpPoint, PointSet, SyntheticTask, TableRule
from ehpo.reasoners import ThresholdPolicy


def two_point_task(good=0.9, bad=0.5, noise=0.0):
    points = [HpPoint({"x": 1.0}), HpPoint({"x": 2.0})]
    return SyntheticTask("two-point", {"x": PointSet((1.0, 2.0))},
                         {"a": Algorithm(TableRule(((points[0], good), (points[1], bad))), noise)})


def two_point_mu(p_good):
    return DiscreteDistribution(({"x": 1.0}, {"x": 2.0}), (p_good, round(1.0 - p_good, 12)))


@pytest.fixture
def toy_task():
    return two_point_task()


@pytest.fixture
def toy_policy():
    return ThresholdPolicy("a", 0.8)


@pytest.fixture(scope="session")
def deceptive():
    return bundled_config("deceptive")


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
