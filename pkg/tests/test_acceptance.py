"""Acceptance criteria, each checked at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed in the
"acceptance criteria" section of the pytest terminal summary.
"""
import time
from dataclasses import replace

import numpy as np
import pytest

import test_electronics as elec
import test_properties as props
import test_sim as simtests
from pdccal import reference
from pdccal.calib import SystemKind, gamma_deadtime
from pdccal.config import load_config
from pdccal.pipeline import closed_loop

N_SEEDS = 100
TRUE_ETA = 0.507


@pytest.fixture(scope="module")
def desk():
    return load_config("paper-desk-scale")


@pytest.fixture(scope="module")
def baseline(desk):
    start = time.perf_counter()
    summary = closed_loop(desk, range(N_SEEDS))
    return summary, time.perf_counter() - start


def test_1_table_reproduction(criterion):
    start = time.perf_counter()
    deltas = {}
    for kind, col in reference.COLUMNS.items():
        est = reference.recompute(kind)
        deltas[kind.value] = (est.eta_times_t.value - col.eta_times_t.value, est.eta.value - col.eta.value)
    elapsed = time.perf_counter() - start
    ok = all(abs(a) <= 0.003 and abs(b) <= 0.004 for a, b in deltas.values()) and elapsed < 1.0
    detail = " ".join(f"{k}:{a:+.4f}/{b:+.4f}" for k, (a, b) in deltas.items())
    criterion("1 table reproduction (d eta*T <= 0.003, d eta <= 0.004, < 1 s)", ok,
              f"{detail} in {elapsed * 1e3:.1f} ms")
    assert ok


def test_2_uncertainty_reproduction(criterion):
    est = reference.recompute(SystemKind.AND_GATE)
    col = reference.COLUMNS[SystemKind.AND_GATE]
    ok = abs(est.eta_times_t.sigma - 0.009) <= 0.002
    criterion("2 AND-gate sigma(eta*T) = 0.009 +- 0.002", ok,
              f"sigma(eta*T)={est.eta_times_t.sigma:.4f}; sigma(eta)={est.eta.sigma:.4f} "
              f"vs table {col.eta.sigma:.3f} (reported only)")
    assert ok


def test_3_gamma_cross_consistency(criterion):
    tau = reference.dead_time_from_column(SystemKind.AND_GATE)
    devs = {k.value: gamma_deadtime(c.counts.w_signal_mean.value, tau) - c.corrections.gamma
            for k, c in reference.COLUMNS.items()}
    ok = 25e-9 < tau < 35e-9 and all(abs(d) <= 0.002 for d in devs.values())
    criterion("3 single tau_signal reproduces every gamma within 0.002", ok,
              f"tau={tau * 1e9:.2f} ns " + " ".join(f"{k}:{d:+.4f}" for k, d in devs.items()))
    assert ok


def test_4_closed_loop_recovery(baseline, criterion):
    summary, elapsed = baseline
    hits = {name: summary.within(name, TRUE_ETA) for name in summary.eta}
    ok = all(h >= 95 for h in hits.values()) and elapsed < 120
    criterion(f"4 closed loop, >= 95/{N_SEEDS} within 3 sigma per system, < 2 min", ok,
              " ".join(f"{k}:{v}" for k, v in hits.items())
              + f" errors={sum(summary.errors.values())} in {elapsed:.1f} s")
    assert ok


def test_5_trigger_loss_invariance(desk, baseline, criterion):
    summary, _ = baseline
    trig = desk.experiment.trigger_arm
    halved = replace(desk, experiment=replace(desk.experiment,
                                              trigger_arm=replace(trig, efficiency=trig.efficiency / 2)))
    degraded = closed_loop(halved, range(N_SEEDS, 2 * N_SEEDS))
    shifts, ok = {}, True
    for name in summary.eta:
        shift = np.mean(degraded.eta[name]) - np.mean(summary.eta[name])
        sigma = np.median(degraded.sigma[name])
        shifts[name] = shift / sigma
        ok &= abs(shift) < sigma and degraded.errors[name] == 0
    criterion("5 halving trigger efficiency shifts mean eta by < 1 sigma", ok,
              " ".join(f"{k}:{v:+.2f}sigma" for k, v in shifts.items()))
    assert ok


def test_6_electronics_oracles(criterion):
    checks = []
    for name, fn in [("AND accidentals", elec.test_and_gate_accidentals_match_rate_formula),
                     ("TIC 5x2000", elec.test_tic_five_subsamples_of_2000)]:
        try:
            fn()
            checks.append((name, True))
        except AssertionError:
            checks.append((name, False))
    try:
        for rate, tau in [(1e6, 100e-9), (2.6e6, 31e-9), (5e5, 50e-9), (1e5, 1e-6)]:
            simtests.test_dead_time_rate_matches_non_paralyzable_formula(rate, tau)
        checks.append(("dead-time rate", True))
    except AssertionError:
        checks.append(("dead-time rate", False))
    ok = all(p for _, p in checks)
    criterion("6 electronics oracles", ok, " ".join(f"{n}:{'ok' if p else 'FAIL'}" for n, p in checks))
    assert ok


PROPERTIES = [
    props.test_correction_bounds,
    props.test_corrections_decrease_in_rate_and_time,
    props.test_estimate_decreasing_in_each_factor,
    props.test_estimate_scaling_invariance,
    props.test_histogram_conserves_counts,
    props.test_acquire_time_translation_invariance,
    props.test_simulation_deterministic_under_fixed_seed,
]


def test_7_property_suites(criterion):
    failed = []
    for prop in PROPERTIES:
        try:
            prop()
        except AssertionError:
            failed.append(prop.__name__)
    ok = not failed
    criterion(f"7 property suites ({props.N_CASES} cases each)", ok,
              f"{len(PROPERTIES) - len(failed)}/{len(PROPERTIES)} passed " + " ".join(failed))
    assert ok
