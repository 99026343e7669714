import pytest

from patternforge import zoo


def _pattern_fixture(family, bound, flavor):
    @pytest.fixture(scope="session")
    def fixture():
        return zoo.build(zoo.TruncationSpec(family, bound, flavor))
    return fixture


fstar_flat_2 = _pattern_fixture("fstar", 2, "flat")
fstar_flat_3 = _pattern_fixture("fstar", 3, "flat")
fstar_flat_4 = _pattern_fixture("fstar", 4, "flat")
fstar_natural_3 = _pattern_fixture("fstar", 3, "natural")
fstar_natural_4 = _pattern_fixture("fstar", 4, "natural")
delta_flat_2 = _pattern_fixture("delta_op", 2, "flat")
delta_flat_3 = _pattern_fixture("delta_op", 3, "flat")
delta_flat_4 = _pattern_fixture("delta_op", 4, "flat")
delta_natural_3 = _pattern_fixture("delta_op", 3, "natural")
delta_natural_4 = _pattern_fixture("delta_op", 4, "natural")
theta_flat_2 = _pattern_fixture("theta2", 2, "flat")
theta_natural_2 = _pattern_fixture("theta2", 2, "natural")


def pytest_configure(config):
    config._criterion_lines = []


@pytest.fixture(scope="session")
def criterion_log(request):
    return request.config._criterion_lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criterion_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
