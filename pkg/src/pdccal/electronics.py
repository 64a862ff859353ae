"""Coincidence acquisition systems: fast AND gate, TAC (with and without valid
start output) feeding an MCA/SCA, and a time-interval counter (TIC).

Each system turns a pair of detector streams into a :class:`CountsRecord`.
Streams are sorted int64 picosecond arrays; time parameters are in seconds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .calib import CountsRecord, Quantity, SystemKind
from .errors import DomainError, InsufficientDataError, NoPeakError, NoSignalError
from .sim import PS, ChannelTimestamps, _ps


@dataclass(frozen=True)
class PeakPolicy:
    """How the coincidence window is chosen on an interval histogram.

    Threshold mode (default) grows a contiguous window around the maximum bin
    while bins exceed ``background + threshold_sigma * sqrt(background)``, keeps
    at least ``min_bins`` and then widens by ``pad_bins`` on each side.  Setting
    ``fixed_width`` centres a window of that many bins on the maximum;
    ``fixed_window`` gives explicit inclusive bin bounds.  Background is the mean
    of all bins outside the window and its ``guard_bins`` neighbours.
    """

    threshold_sigma: float = 5.0
    min_bins: int = 3
    pad_bins: int = 3
    guard_bins: int = 3
    fixed_width: int | None = None
    fixed_window: tuple[int, int] | None = None


@dataclass(frozen=True)
class AcquisitionSystem:
    kind: SystemKind
    coincidence_window: float = 10e-9
    coincidence_delay: float = 0.0         # cable delay matched on the AND gate
    tac_range: float = 50e-9
    tac_conversion_time: float = 1e-9
    sca_window: tuple[float, float] | None = None
    mca_bin_width: float = 100e-12
    tic_resolution: float = 25e-12
    tic_bin_width: float = 100e-12
    tic_range: float = 10e-6
    tic_histogram_range: float = 25e-9
    tic_pair_target: int = 10000
    tic_subsamples: int = 5
    peak_policy: PeakPolicy = field(default_factory=PeakPolicy)

    def __post_init__(self):
        object.__setattr__(self, "kind", SystemKind(self.kind))
        if self.coincidence_window <= 0:
            raise DomainError("coincidence_window must be positive")
        if self.tac_range <= 0 or self.tac_conversion_time < 0:
            raise DomainError("tac_range must be positive, tac_conversion_time non-negative")
        if self.mca_bin_width <= 0 or self.tic_resolution <= 0 or self.tic_bin_width <= 0:
            raise DomainError("resolutions and bin widths must be positive")
        if self.sca_window is not None and not 0 <= self.sca_window[0] < self.sca_window[1]:
            raise DomainError("sca_window bounds must be ordered and non-negative")
        if self.tic_subsamples < 1 or self.tic_pair_target < self.tic_subsamples:
            raise DomainError("tic_pair_target must be at least tic_subsamples >= 1")

    @property
    def is_tac(self) -> bool:
        return self.kind in (SystemKind.TAC_NO_VALID_START, SystemKind.TAC_VALID_START)


@dataclass(frozen=True)
class IntervalHistogram:
    bin_width: float
    origin: float
    counts: np.ndarray
    total_pairs: int

    @property
    def dropped(self) -> int:
        return int(self.total_pairs - self.counts.sum())

    @property
    def n_bins(self) -> int:
        return int(self.counts.shape[0])

    def bin_centres(self) -> np.ndarray:
        return self.origin + (np.arange(self.n_bins) + 0.5) * self.bin_width

    def __add__(self, other: "IntervalHistogram") -> "IntervalHistogram":
        if self.bin_width != other.bin_width or self.origin != other.origin or self.n_bins != other.n_bins:
            raise DomainError("histograms must share binning to be added")
        return IntervalHistogram(self.bin_width, self.origin, self.counts + other.counts,
                                 self.total_pairs + other.total_pairs)


@dataclass(frozen=True)
class PeakAnalysis:
    peak_window: tuple[int, int]          # inclusive bin indices
    n_in_peak: int
    background_per_bin: Quantity
    n_accidental: Quantity
    n_coincidence: Quantity

    @property
    def width(self) -> int:
        return self.peak_window[1] - self.peak_window[0] + 1


@dataclass
class TicFragments:
    """Per-subsample bookkeeping of a TIC acquisition."""

    pairs: np.ndarray            # start-stop couples per subsample
    raw_triggers: np.ndarray     # trigger pulses seen during each subsample
    elapsed: np.ndarray          # subsample duration, seconds


@dataclass
class Acquisition:
    record: CountsRecord
    histograms: list[IntervalHistogram]
    peak: PeakAnalysis | None


def _as_ps(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.int64)


def and_gate(trigger_ts, signal_ts, window: float, delay: float = 0.0) -> tuple[int, int]:
    """Coincidences of a fast AND gate and their delayed-coincidence accidental estimate.

    A trigger counts once if any unconsumed signal event lies within +-window/2
    of trigger + delay.  Accidentals are counted the same way against the signal
    stream shifted by 100 windows.
    """
    if window <= 0:
        raise DomainError("window must be positive")
    trig, sig = _as_ps(trigger_ts), _as_ps(signal_ts)
    half, d = _ps(window / 2), _ps(delay)
    n_c = _kernels.greedy_match(trig, sig, half, d)
    n_acc = _kernels.greedy_match(trig, sig + _ps(100 * window), half, d)
    return int(n_c), int(n_acc)


def tac_convert(trigger_ts, signal_ts, sys: AcquisitionSystem) -> tuple[np.ndarray, int]:
    """Start/stop intervals (ps) produced by a TAC, and the number of accepted starts."""
    if not sys.is_tac:
        raise DomainError(f"tac_convert needs a TAC system, got {sys.kind.value}")
    iv, _, n_valid = _kernels.start_stop(_as_ps(trigger_ts), _as_ps(signal_ts),
                                         _ps(sys.tac_range), _ps(sys.tac_conversion_time))
    return iv, int(n_valid)


def quantize(intervals, resolution: float) -> np.ndarray:
    """Floor intervals (ps) to the counter resolution."""
    res = _ps(resolution)
    return (_as_ps(intervals) // res) * res


def build_histogram(intervals, bin_width: float, range: float) -> IntervalHistogram:
    """Histogram of intervals (ps) in bins [i w, (i+1) w) from origin 0; the rest is dropped."""
    if bin_width <= 0 or range < bin_width:
        raise DomainError("need bin_width > 0 and range >= bin_width")
    iv = _as_ps(intervals)
    bw = _ps(bin_width)
    n_bins = int(math.floor(range / bin_width + 1e-9))
    idx = iv // bw
    idx = idx[(iv >= 0) & (idx < n_bins)]
    counts = np.bincount(idx, minlength=n_bins).astype(np.int64)
    return IntervalHistogram(bin_width=bin_width, origin=0.0, counts=counts, total_pairs=int(iv.shape[0]))


def _background(counts, lo, hi, guard):
    mask = np.ones(counts.shape[0], dtype=bool)
    mask[max(lo - guard, 0):hi + guard + 1] = False
    n_off = int(mask.sum())
    if n_off == 0:
        return Quantity(0.0, 0.0)
    s = float(counts[mask].sum())
    return Quantity(s / n_off, math.sqrt(s) / n_off)


def locate_window(h: IntervalHistogram, policy: PeakPolicy = PeakPolicy()) -> tuple[int, int]:
    c = h.counts
    n = c.shape[0]
    if c.sum() == 0:
        raise NoPeakError("histogram has no counts")
    if policy.fixed_window is not None:
        lo, hi = policy.fixed_window
        if not 0 <= lo <= hi < n:
            raise DomainError(f"fixed window {policy.fixed_window} outside histogram of {n} bins")
        return int(lo), int(hi)
    peak = int(np.argmax(c))
    if policy.fixed_width is not None:
        lo = peak - (policy.fixed_width - 1) // 2
        lo = min(max(lo, 0), max(n - policy.fixed_width, 0))
        return lo, min(lo + policy.fixed_width - 1, n - 1)

    lo = hi = peak
    for _ in range(20):
        bg = _background(c, lo, hi, policy.guard_bins).value
        thr = bg + policy.threshold_sigma * math.sqrt(bg)
        new_lo, new_hi = peak, peak
        while new_lo > 0 and c[new_lo - 1] > thr:
            new_lo -= 1
        while new_hi < n - 1 and c[new_hi + 1] > thr:
            new_hi += 1
        if (new_lo, new_hi) == (lo, hi):
            break
        lo, hi = new_lo, new_hi
    while hi - lo + 1 < policy.min_bins and (lo > 0 or hi < n - 1):
        if lo > 0:
            lo -= 1
        if hi - lo + 1 < policy.min_bins and hi < n - 1:
            hi += 1
    return max(lo - policy.pad_bins, 0), min(hi + policy.pad_bins, n - 1)


def analyze_peak(h: IntervalHistogram, policy: PeakPolicy = PeakPolicy()) -> PeakAnalysis:
    """Coincidences in the peak window and the flat accidental level under it.

    No subtraction happens here; the estimator removes the accidentals.
    """
    lo, hi = locate_window(h, policy)
    return _count_window(h, lo, hi, policy.guard_bins)


def _count_window(h, lo, hi, guard):
    n_in = int(h.counts[lo:hi + 1].sum())
    bg = _background(h.counts, lo, hi, guard)
    width = hi - lo + 1
    return PeakAnalysis(peak_window=(lo, hi), n_in_peak=n_in, background_per_bin=bg,
                        n_accidental=Quantity(bg.value * width, bg.sigma * width),
                        n_coincidence=Quantity.poisson(n_in))


def tic_acquire(trigger_ts, signal_ts, sys: AcquisitionSystem) -> tuple[list[IntervalHistogram], TicFragments]:
    """Collect ``tic_pair_target`` start-stop couples and histogram them per subsample.

    Intervals are floored to ``tic_resolution`` before binning at ``tic_bin_width``.
    """
    if sys.kind is not SystemKind.TIC:
        raise DomainError(f"tic_acquire needs a TIC system, got {sys.kind.value}")
    trig, sig = _as_ps(trigger_ts), _as_ps(signal_ts)
    target = int(sys.tic_pair_target)
    iv, starts, last_stop = _kernels.start_stop_until(trig, sig, _ps(sys.tic_range), target)
    if iv.shape[0] < target:
        raise InsufficientDataError(
            f"streams exhausted after {iv.shape[0]} of {target} start-stop pairs", int(iv.shape[0]))
    iv = quantize(iv, sys.tic_resolution)

    m = target // sys.tic_subsamples
    hists, pairs, raw, elapsed = [], [], [], []
    for k in range(sys.tic_subsamples):
        a = k * m
        b = (k + 1) * m if k < sys.tic_subsamples - 1 else target
        hists.append(build_histogram(iv[a:b], sys.tic_bin_width, sys.tic_histogram_range))
        t0 = starts[a]
        t1 = starts[b] if b < target else last_stop + 1
        pairs.append(b - a)
        raw.append(int(np.searchsorted(trig, t1) - np.searchsorted(trig, t0)))
        elapsed.append((t1 - t0) * PS)
    return hists, TicFragments(np.array(pairs), np.array(raw), np.array(elapsed))


def _mean_sem(values, poisson_floor=True) -> Quantity:
    """Mean of per-subsample values with its standard error.

    The dispersion estimate from a handful of subsamples is noisy, so it is
    floored at the Poisson standard error of the mean.
    """
    v = np.asarray(values, dtype=float)
    mean = float(v.mean())
    sem = float(v.std(ddof=1) / math.sqrt(v.shape[0])) if v.shape[0] > 1 else 0.0
    if poisson_floor:
        sem = max(sem, math.sqrt(max(mean, 0.0) / v.shape[0]))
    return Quantity(mean, sem)


def _signal_rate(ch: ChannelTimestamps, duration: float) -> Quantity:
    n = ch.signal_ps.shape[0]
    return Quantity(n / duration, math.sqrt(n) / duration)


def _tac_peak(h, sys):
    if sys.sca_window is not None:
        bw = sys.mca_bin_width
        lo = int(math.floor(sys.sca_window[0] / bw + 1e-9))
        hi = min(int(math.ceil(sys.sca_window[1] / bw - 1e-9)) - 1, h.n_bins - 1)
        return _count_window(h, lo, hi, sys.peak_policy.guard_bins)
    return analyze_peak(h, sys.peak_policy)


def run_system(ch: ChannelTimestamps, sys: AcquisitionSystem, gate_duration: float,
               background: ChannelTimestamps | None = None) -> Acquisition:
    """Run one acquisition system on a measurement and (optionally) a background run.

    ``background`` is the same set-up with the pair source switched off; it only
    supplies the trigger background.  Without it N_background is zero.
    """
    w = _signal_rate(ch, gate_duration)
    zero = Quantity(0.0, 0.0)

    if sys.kind is SystemKind.AND_GATE:
        n_c, n_acc = and_gate(ch.trigger_ps, ch.signal_ps, sys.coincidence_window, sys.coincidence_delay)
        n_bg = Quantity.poisson(background.trigger_ps.shape[0]) if background is not None else zero
        rec = CountsRecord(Quantity.poisson(ch.trigger_ps.shape[0]), n_bg, Quantity.poisson(n_c),
                           Quantity.poisson(n_acc), w, gate_duration)
        return Acquisition(rec, [], None)

    if sys.is_tac:
        iv, n_valid = tac_convert(ch.trigger_ps, ch.signal_ps, sys)
        h = build_histogram(iv, sys.mca_bin_width, sys.tac_range)
        valid = sys.kind is SystemKind.TAC_VALID_START
        n_trig = n_valid if valid else ch.trigger_ps.shape[0]
        if background is None:
            n_bg = zero
        elif valid:
            n_bg = Quantity.poisson(tac_convert(background.trigger_ps, background.signal_ps, sys)[1])
        else:
            n_bg = Quantity.poisson(background.trigger_ps.shape[0])
        try:
            peak = _tac_peak(h, sys)
            n_c, n_acc = peak.n_coincidence, peak.n_accidental
        except NoPeakError:
            peak, n_c, n_acc = None, zero, zero
        rec = CountsRecord(Quantity.poisson(n_trig), n_bg, n_c, n_acc, w, gate_duration)
        return Acquisition(rec, [h], peak)

    # TIC: fixed number of start-stop couples instead of a fixed gate
    if background is not None:
        n_raw, n_raw_bg = ch.trigger_ps.shape[0], background.trigger_ps.shape[0]
        if n_raw <= n_raw_bg:
            raise NoSignalError(f"no-signal: {n_raw} trigger pulses vs {n_raw_bg} with the source off")
        bg_rate = n_raw_bg / gate_duration
    hists, frag = tic_acquire(ch.trigger_ps, ch.signal_ps, sys)
    total = hists[0]
    for h in hists[1:]:
        total = total + h
    lo, hi = locate_window(total, sys.peak_policy)
    per = [_count_window(h, lo, hi, sys.peak_policy.guard_bins) for h in hists]
    n_c = _mean_sem([p.n_in_peak for p in per])
    combined = _count_window(total, lo, hi, sys.peak_policy.guard_bins)
    k = len(hists)
    n_acc = Quantity(combined.n_accidental.value / k, combined.n_accidental.sigma / k)
    if background is not None:
        # background share of the accepted starts = background share of raw trigger pulses
        per_bg = frag.pairs * bg_rate * frag.elapsed / np.maximum(frag.raw_triggers, 1)
        bg_q = _mean_sem(per_bg, poisson_floor=False)
        rel_rate = 1.0 / math.sqrt(n_raw_bg) if n_raw_bg > 0 else 0.0
        n_bg = Quantity(bg_q.value, math.hypot(bg_q.sigma, bg_q.value * rel_rate))
    else:
        n_bg = zero
    n_trig = Quantity(float(frag.pairs.mean()), 0.0)
    rec = CountsRecord(n_trig, n_bg, n_c, n_acc, w, None)
    return Acquisition(rec, hists, combined)


def acquire(ch: ChannelTimestamps, sys: AcquisitionSystem, gate_duration: float,
            background: ChannelTimestamps | None = None) -> CountsRecord:
    return run_system(ch, sys, gate_duration, background).record
