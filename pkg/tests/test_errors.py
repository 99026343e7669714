import pytest

from patternforge.errors import (BudgetExceeded, BudgetMeter, CoherenceError,
                                 DEFAULT_BUDGET, ENV_BUDGET, GradeOverflow,
                                 PatternForgeError, SchemaError,
                                 current_budget)


def test_hierarchy():
    for exc in (SchemaError, BudgetExceeded, GradeOverflow, CoherenceError):
        assert issubclass(exc, PatternForgeError)
    assert issubclass(PatternForgeError, Exception)


def test_current_budget_default(monkeypatch):
    monkeypatch.delenv(ENV_BUDGET, raising=False)
    assert current_budget() == DEFAULT_BUDGET


def test_current_budget_env(monkeypatch):
    monkeypatch.setenv(ENV_BUDGET, "123")
    assert current_budget() == 123


def test_current_budget_bad_env(monkeypatch):
    monkeypatch.setenv(ENV_BUDGET, "not-a-number")
    with pytest.raises(SchemaError):
        current_budget()


def test_meter_ticks_until_exhausted():
    meter = BudgetMeter(3, "trial")
    meter.tick()
    meter.tick()
    meter.tick()
    with pytest.raises(BudgetExceeded):
        meter.tick()


def test_meter_unlimited_when_none(monkeypatch):
    monkeypatch.delenv(ENV_BUDGET, raising=False)
    meter = BudgetMeter(None, "trial")
    for _ in range(DEFAULT_BUDGET // 100000):
        meter.tick()
