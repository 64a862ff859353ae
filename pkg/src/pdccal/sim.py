"""Event-level simulation of heralded photon-pair detection.

Pairs are emitted as a homogeneous Poisson process; each arm keeps a pair photon
independently with probability efficiency x transmittance, adds its own
Poissonian background, smears with Gaussian timing jitter and finally passes a
non-paralyzable dead-time filter.  The signal (stop) channel is additionally
shifted by the delay line.

Timestamps are int64 picoseconds; every time *parameter* is in seconds.
"""
from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import ContractViolation, DomainError

PS = 1e-12


def to_ps(seconds) -> np.ndarray:
    """Convert seconds (scalar or array) to int64 picoseconds, rounding to nearest."""
    return np.rint(np.asarray(seconds, dtype=np.float64) / PS).astype(np.int64)


def _ps(seconds: float) -> int:
    return int(round(seconds / PS))


@dataclass(frozen=True)
class ArmModel:
    efficiency: float
    transmittance: float = 1.0
    background_rate: float = 0.0
    dead_time: float = 0.0
    jitter: float = 300e-12

    def __post_init__(self):
        if not 0 <= self.efficiency <= 1:
            raise DomainError("efficiency must lie in [0, 1]")
        if not 0 <= self.transmittance <= 1:
            raise DomainError("transmittance must lie in [0, 1]")
        if self.background_rate < 0 or self.dead_time < 0 or self.jitter < 0:
            raise DomainError("background_rate, dead_time and jitter must be non-negative")

    @property
    def survival(self) -> float:
        return self.efficiency * self.transmittance


@dataclass(frozen=True)
class ExperimentConfig:
    pair_rate: float
    gate_duration: float
    trigger_arm: ArmModel
    signal_arm: ArmModel
    stop_delay: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.pair_rate < 0:
            raise DomainError("pair_rate must be non-negative")
        if not self.gate_duration > 0:
            raise DomainError("gate_duration must be positive")
        if self.stop_delay < 0:
            raise DomainError("stop_delay must be non-negative")

    def digest(self) -> str:
        return hashlib.sha256(repr(sorted(_flatten(asdict(self)).items())).encode()).hexdigest()[:16]


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[prefix + k] = v
    return out


@dataclass
class ArmTruth:
    pair_photons: int = 0        # pair members surviving the arm's thinning
    background: int = 0
    dropped_edge: int = 0        # pushed outside the gate by jitter
    suppressed: int = 0          # lost to dead time
    registered: int = 0


@dataclass
class RunTruth:
    pairs_emitted: int = 0
    trigger: ArmTruth = field(default_factory=ArmTruth)
    signal: ArmTruth = field(default_factory=ArmTruth)


@dataclass
class ChannelTimestamps:
    trigger_ps: np.ndarray
    signal_ps: np.ndarray
    truth: RunTruth = field(default_factory=RunTruth)

    @property
    def trigger(self) -> np.ndarray:
        return self.trigger_ps * PS

    @property
    def signal(self) -> np.ndarray:
        return self.signal_ps * PS

    def shifted(self, offset: float) -> "ChannelTimestamps":
        d = _ps(offset)
        return ChannelTimestamps(self.trigger_ps + d, self.signal_ps + d, self.truth)


def poisson_process(rate: float, duration: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous Poisson arrivals on [0, duration), sorted, in picoseconds."""
    if rate < 0 or not duration > 0:
        raise DomainError("rate must be >= 0 and duration > 0")
    n = rng.poisson(rate * duration)
    t = np.floor(rng.uniform(0.0, duration / PS, n)).astype(np.int64)
    t.sort()
    return t


def thin(timestamps: np.ndarray, survival_probability: float, rng: np.random.Generator) -> np.ndarray:
    """Keep each event independently with the given probability."""
    if not 0 <= survival_probability <= 1:
        raise DomainError("survival probability must lie in [0, 1]")
    ts = np.asarray(timestamps)
    # always draw, so the stream state does not depend on the probability value
    keep = rng.random(ts.shape[0]) < survival_probability
    return ts[keep]


def apply_dead_time(timestamps: np.ndarray, dead_time: float) -> np.ndarray:
    """Non-paralyzable filter: keep an event iff it is >= dead_time after the last kept one."""
    ts = np.asarray(timestamps, dtype=np.int64)
    if ts.shape[0] > 1 and np.any(np.diff(ts) < 0):
        raise ContractViolation("timestamps must be sorted ascending")
    dead_ps = _ps(dead_time)
    if dead_ps <= 0:
        return ts.copy()
    return ts[_kernels.dead_time_mask(ts, dead_ps)]


def _jitter(ts, sigma, rng, gate_ps):
    if sigma <= 0 or ts.shape[0] == 0:
        return ts, 0
    out = ts + np.rint(rng.normal(0.0, sigma / PS, ts.shape[0])).astype(np.int64)
    inside = (out >= 0) & (out < gate_ps)
    return out[inside], int(ts.shape[0] - inside.sum())


def _arm(pairs, arm, gate, delay_ps, rngs, tally):
    gate_ps = _ps(gate)
    rng_thin, rng_bg, rng_jit_pair, rng_jit_bg = rngs
    photons = thin(pairs, arm.survival, rng_thin)
    bg = poisson_process(arm.background_rate, gate, rng_bg)
    tally.pair_photons = int(photons.shape[0])
    tally.background = int(bg.shape[0])
    photons, lost_a = _jitter(photons, arm.jitter, rng_jit_pair, gate_ps)
    bg, lost_b = _jitter(bg, arm.jitter, rng_jit_bg, gate_ps)
    tally.dropped_edge = lost_a + lost_b
    merged = np.sort(np.concatenate((photons, bg)), kind="stable") + delay_ps
    # a detector cannot register two events in the same picosecond tick
    out = apply_dead_time(merged, max(arm.dead_time, PS))
    tally.suppressed = int(merged.shape[0] - out.shape[0])
    tally.registered = int(out.shape[0])
    return out


def simulate_run(config: ExperimentConfig) -> ChannelTimestamps:
    """Simulate one gate of trigger and signal detection events.

    Every random process (pair emission, per-arm thinning, per-arm background,
    jitter of pair photons and of background events) draws from its own child
    stream of ``config.rng_seed``.  Consequently a run with ``pair_rate=0`` and
    the same seed reproduces exactly the background events of the full run.
    """
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(config.rng_seed).spawn(9)]
    truth = RunTruth()
    pairs = poisson_process(config.pair_rate, config.gate_duration, streams[0])
    truth.pairs_emitted = int(pairs.shape[0])
    trig = _arm(pairs, config.trigger_arm, config.gate_duration, 0, streams[1:5], truth.trigger)
    sig = _arm(pairs, config.signal_arm, config.gate_duration, _ps(config.stop_delay),
               streams[5:9], truth.signal)
    return ChannelTimestamps(trig, sig, truth)


def background_config(config: ExperimentConfig, seed: int | None = None) -> ExperimentConfig:
    """The same experiment with the pair source switched off."""
    return replace(config, pair_rate=0.0, rng_seed=config.rng_seed if seed is None else seed)
