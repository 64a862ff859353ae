"""Absolute detector-efficiency estimation from heralded photon-pair counts.

All counts are carried as real-valued :class:`Quantity` objects so that averaged
and background-subtracted values share one code path.  Rates are in counts/s,
times in seconds, wavelengths in nanometres.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Literal

from .errors import DomainError, InconsistentCountsError, NoSignalError, SaturationError


@dataclass(frozen=True)
class Quantity:
    """A value with one standard uncertainty."""

    value: float
    sigma: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be non-negative, got {self.sigma!r}")

    @property
    def rel(self) -> float:
        if self.value == 0:
            raise ZeroDivisionError("relative uncertainty undefined for a zero value")
        return self.sigma / abs(self.value)

    @classmethod
    def poisson(cls, n: float) -> "Quantity":
        return cls(float(n), math.sqrt(max(n, 0.0)))

    def __sub__(self, other: "Quantity") -> "Quantity":
        return Quantity(self.value - other.value, math.hypot(self.sigma, other.sigma))

    def __str__(self):
        return f"{self.value:.6g} ± {self.sigma:.2g}"


class SystemKind(str, enum.Enum):
    AND_GATE = "and-gate"
    TAC_NO_VALID_START = "tac-no-valid-start"
    TAC_VALID_START = "tac-valid-start"
    TIC = "tic"


SYSTEM_ORDER = (SystemKind.AND_GATE, SystemKind.TAC_NO_VALID_START,
                SystemKind.TAC_VALID_START, SystemKind.TIC)


@dataclass(frozen=True)
class CountsRecord:
    """Measured quantities of one acquisition: trigger, background, coincidence and
    accidental counts plus the mean signal-channel rate.

    ``gate_duration`` is ``None`` for fixed-pair-count (TIC) acquisitions.
    """

    n_trigger: Quantity
    n_background: Quantity
    n_coincidence: Quantity
    n_accidental: Quantity
    w_signal_mean: Quantity
    gate_duration: float | None = None

    def __post_init__(self):
        for name in ("n_trigger", "n_background", "n_coincidence", "n_accidental", "w_signal_mean"):
            q = getattr(self, name)
            if not q.value >= 0:
                raise DomainError(f"{name} must be non-negative, got {q.value!r}")

    @property
    def net_trigger(self) -> Quantity:
        return self.n_trigger - self.n_background

    @property
    def net_coincidence(self) -> Quantity:
        return self.n_coincidence - self.n_accidental


@dataclass(frozen=True)
class Corrections:
    """Missed-coincidence (alpha), TAC valid-start (beta) and dead-time (gamma) factors."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    t_delay: float = 0.0
    tau_tac_mean: float = 0.0
    tau_signal: float = 0.0
    derivation_mode: Literal["explicit-values", "derived-from-parameters"] = "explicit-values"

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise DomainError(f"{name} must lie in (0, 1], got {v!r}")
        for name in ("t_delay", "tau_tac_mean", "tau_signal"):
            if not getattr(self, name) >= 0:
                raise DomainError(f"{name} must be non-negative")

    @property
    def product(self) -> float:
        return self.alpha * self.beta * self.gamma


@dataclass(frozen=True)
class EfficiencyEstimate:
    eta_times_t: Quantity
    t_signal: Quantity
    eta: Quantity
    error_budget: list[tuple[str, float]] = field(default_factory=list)


@dataclass(frozen=True)
class TimingParameters:
    """Electronics time constants from which the correction factors are derived.

    ``alpha_form`` selects the constant-rate reduction of the missed-coincidence
    integral: ``"linear"`` gives 1 - W t, ``"inverse"`` gives 1 / (1 + W t).
    """

    t_delay: float = 0.0
    tau_tac_mean: float = 0.0
    tau_signal: float = 0.0
    alpha_form: Literal["linear", "inverse"] = "linear"


def conjugate_wavelength(pump_nm: float, signal_nm: float) -> float:
    """Idler wavelength fixed by energy conservation, 1/pump = 1/signal + 1/idler."""
    if not (pump_nm > 0 and signal_nm > 0):
        raise DomainError("wavelengths must be positive")
    if signal_nm <= pump_nm:
        raise DomainError("signal wavelength must exceed the pump wavelength")
    return 1.0 / (1.0 / pump_nm - 1.0 / signal_nm)


def ideal_efficiency(n_coincidence: float, n_counterpart: float) -> Quantity:
    """Ratio of coincidences to the counts on the opposite arm, with Poisson errors.

    Pass the idler counts to get the signal efficiency and vice versa.
    """
    if n_counterpart <= 0:
        raise ZeroDivisionError("counterpart count must be positive")
    value = n_coincidence / n_counterpart
    if n_coincidence <= 0:
        return Quantity(value, 0.0)
    return Quantity(value, value * math.sqrt(1.0 / n_coincidence + 1.0 / n_counterpart))


def _blocking_factor(rate: float, time_constant: float, what: str) -> float:
    if rate < 0 or time_constant < 0:
        raise DomainError(f"{what}: rate and time constant must be non-negative")
    x = rate * time_constant
    if x >= 1:
        raise SaturationError(f"{what}: rate x time = {x:.3g} >= 1, counting chain saturated")
    return 1.0 - x


def alpha_missed(w_signal_mean: float, t_delay: float, form: str = "linear") -> float:
    """Fraction of true coincidences surviving uncorrelated stops within the delay."""
    linear = _blocking_factor(w_signal_mean, t_delay, "alpha")
    if form == "linear":
        return linear
    if form == "inverse":
        return 1.0 / (1.0 + w_signal_mean * t_delay)
    raise DomainError(f"unknown alpha form {form!r}")


def beta_tac(w_signal_mean: float, tau_tac_mean: float, has_valid_start: bool) -> float:
    """Trigger over-count factor of a TAC whose raw trigger pulses are counted."""
    factor = _blocking_factor(w_signal_mean, tau_tac_mean, "beta")
    return 1.0 if has_valid_start else factor


def gamma_deadtime(w_signal_mean: float, tau_signal: float) -> float:
    """Non-paralyzable dead-time survival of the detector under calibration."""
    return _blocking_factor(w_signal_mean, tau_signal, "gamma")


def derive_corrections(params: TimingParameters, w_signal_mean: float,
                       system: SystemKind | str) -> Corrections:
    system = SystemKind(system)
    gamma = gamma_deadtime(w_signal_mean, params.tau_signal)
    if system is SystemKind.AND_GATE:
        alpha, beta = 1.0, 1.0
        t_delay = 0.0
    else:
        alpha = alpha_missed(w_signal_mean, params.t_delay, params.alpha_form)
        t_delay = params.t_delay
        # only the TAC read out without its valid-start output needs beta
        beta = beta_tac(w_signal_mean, params.tau_tac_mean,
                        has_valid_start=system is not SystemKind.TAC_NO_VALID_START)
    return Corrections(alpha=alpha, beta=beta, gamma=gamma, t_delay=t_delay,
                       tau_tac_mean=params.tau_tac_mean, tau_signal=params.tau_signal,
                       derivation_mode="derived-from-parameters")


def estimate_efficiency(counts: CountsRecord, corr: Corrections, t_signal: Quantity) -> EfficiencyEstimate:
    """Corrected efficiency (N_c - N_acc) / (alpha beta gamma (N_trig - N_bg) T_signal).

    Uncertainties are first-order: relative errors of the net coincidence count,
    the net trigger count and (for eta only) the transmittance add in quadrature.
    The correction factors are treated as exact.
    """
    if not 0 < t_signal.value <= 1:
        raise DomainError(f"T_signal must lie in (0, 1], got {t_signal.value!r}")
    if counts.n_trigger.value <= counts.n_background.value:
        raise NoSignalError(
            f"no-signal: N_trigger={counts.n_trigger.value:g} <= N_background={counts.n_background.value:g}")
    if counts.n_accidental.value > counts.n_coincidence.value:
        raise InconsistentCountsError(
            f"N_accidental={counts.n_accidental.value:g} exceeds N_coincidence={counts.n_coincidence.value:g}")

    net_c = counts.net_coincidence
    net_t = counts.net_trigger
    value = net_c.value / (corr.alpha * corr.beta * corr.gamma * net_t.value)

    rel_c = net_c.sigma / net_c.value if net_c.value > 0 else 0.0
    rel_t = net_t.sigma / net_t.value
    rel_T = t_signal.sigma / t_signal.value
    rel_et = math.hypot(rel_c, rel_t)
    rel_eta = math.hypot(rel_et, rel_T)

    eta_t = Quantity(value, abs(value) * rel_et)
    eta_value = value / t_signal.value
    eta = Quantity(eta_value, abs(eta_value) * rel_eta)
    budget = [
        ("net_coincidence", rel_c),
        ("net_trigger", rel_t),
        ("t_signal", rel_T),
        ("total_eta_times_t", rel_et),
        ("total_eta", rel_eta),
    ]
    return EfficiencyEstimate(eta_times_t=eta_t, t_signal=t_signal, eta=eta, error_budget=budget)
