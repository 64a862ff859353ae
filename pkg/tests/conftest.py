import numpy as np
import pytest

from pdccal.sim import ArmModel, ExperimentConfig

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    def record(label, passed, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {label}  {detail}".rstrip())
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def ideal_experiment(**kw):
    """Small lossless-electronics experiment used by several modules."""
    base = dict(
        pair_rate=2e5, gate_duration=0.05,
        trigger_arm=ArmModel(0.5, 1.0, 0.0, 0.0, 0.0),
        signal_arm=ArmModel(0.5, 0.9, 0.0, 0.0, 0.0),
        stop_delay=5e-9, rng_seed=7)
    base.update(kw)
    return ExperimentConfig(**base)
