"""Absolute quantum-efficiency calibration of photon counters with correlated photon pairs."""
from .calib import (
    CountsRecord,
    Corrections,
    EfficiencyEstimate,
    Quantity,
    SystemKind,
    TimingParameters,
    alpha_missed,
    beta_tac,
    conjugate_wavelength,
    derive_corrections,
    estimate_efficiency,
    gamma_deadtime,
    ideal_efficiency,
)
from .electronics import AcquisitionSystem, PeakPolicy, acquire, analyze_peak, and_gate, build_histogram, tac_convert, tic_acquire
from .sim import ArmModel, ChannelTimestamps, ExperimentConfig, apply_dead_time, poisson_process, simulate_run, thin

__version__ = "0.1.0"
