"""Reference measurement table for the four acquisition systems (version 1).

Values are transcribed digit-for-digit from the published calibration of a
silicon SPCM at 633 nm (trigger at 789 nm, 351 nm argon-ion pump).  TIC counts
are per subsample of 2000 start-stop couples; the others are per gate.  The
table gives no uncertainty for the TIC trigger count or for alpha, beta, gamma.
"""
from __future__ import annotations

from dataclasses import dataclass

from .calib import Corrections, CountsRecord, EfficiencyEstimate, Quantity, SystemKind, estimate_efficiency

TABLE_VERSION = 1

T_SIGNAL = Quantity(0.879, 0.015)


@dataclass(frozen=True)
class ReferenceColumn:
    system: SystemKind
    counts: CountsRecord
    corrections: Corrections
    eta_times_t: Quantity
    eta: Quantity


def _q(v, s=0.0):
    return Quantity(float(v), float(s))


COLUMNS: dict[SystemKind, ReferenceColumn] = {
    SystemKind.AND_GATE: ReferenceColumn(
        SystemKind.AND_GATE,
        CountsRecord(_q(24101, 222), _q(2416, 42), _q(9351, 166), _q(473, 23), _q(2.62e6, 24e3)),
        Corrections(alpha=1.0, beta=1.0, gamma=0.919),
        _q(0.446, 0.009), _q(0.507, 0.020)),
    SystemKind.TAC_NO_VALID_START: ReferenceColumn(
        SystemKind.TAC_NO_VALID_START,
        CountsRecord(_q(17296, 121), _q(2598, 67), _q(6447, 89), _q(337, 21), _q(1.88e6, 0.8e3)),
        Corrections(alpha=0.987, beta=0.998, gamma=0.942),
        _q(0.447, 0.008), _q(0.509, 0.019)),
    SystemKind.TAC_VALID_START: ReferenceColumn(
        SystemKind.TAC_VALID_START,
        CountsRecord(_q(17866, 130), _q(2600, 81), _q(6511, 89), _q(147, 13), _q(1.83e6, 1.6e3)),
        Corrections(alpha=0.977, beta=1.0, gamma=0.943),
        _q(0.452, 0.008), _q(0.514, 0.019)),
    SystemKind.TIC: ReferenceColumn(
        SystemKind.TIC,
        CountsRecord(_q(2000), _q(291, 9), _q(735, 12), _q(22, 5), _q(1.83e6, 1.6e3)),
        Corrections(alpha=0.977, beta=1.0, gamma=0.943),
        _q(0.452, 0.009), _q(0.514, 0.019)),
}

# default acceptance tolerances for re-deriving the published estimates
TOL_ETA_TIMES_T = 0.003
TOL_ETA = 0.004


def recompute(system: SystemKind | str, corrections: bool = True) -> EfficiencyEstimate:
    col = COLUMNS[SystemKind(system)]
    corr = col.corrections if corrections else Corrections()
    return estimate_efficiency(col.counts, corr, T_SIGNAL)


def dead_time_from_column(system: SystemKind | str = SystemKind.AND_GATE) -> float:
    """Detector dead time implied by one column's gamma and mean signal rate."""
    col = COLUMNS[SystemKind(system)]
    return (1.0 - col.corrections.gamma) / col.counts.w_signal_mean.value
