"""Sequential event-stream loops, compiled with numba.

Every kernel works on sorted int64 picosecond arrays.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def dead_time_mask(ts, dead_ps):
    keep = np.zeros(ts.shape[0], dtype=np.bool_)
    if ts.shape[0] == 0:
        return keep
    keep[0] = True
    last = ts[0]
    for i in range(1, ts.shape[0]):
        if ts[i] - last >= dead_ps:
            keep[i] = True
            last = ts[i]
    return keep


@njit(cache=True)
def greedy_match(trig, sig, half_ps, delay_ps):
    """Count triggers owning a signal event within +-half of trig + delay.

    Each signal event is consumed by at most one trigger; a trigger takes the
    nearest unconsumed candidate.
    """
    used = np.zeros(sig.shape[0], dtype=np.bool_)
    lo = 0
    n = 0
    for i in range(trig.shape[0]):
        centre = trig[i] + delay_ps
        while lo < sig.shape[0] and sig[lo] < centre - half_ps:
            lo += 1
        best = -1
        best_d = np.int64(0)
        j = lo
        while j < sig.shape[0] and sig[j] <= centre + half_ps:
            if not used[j]:
                d = abs(sig[j] - centre)
                if best < 0 or d < best_d:
                    best = j
                    best_d = d
            j += 1
        if best >= 0:
            used[best] = True
            n += 1
    return n


@njit(cache=True)
def start_stop(trig, sig, range_ps, conv_ps):
    """Single-hit start/stop converter.

    Returns (intervals, start times of the intervals, number of accepted starts).
    A start accepted while idle waits for the first later stop; if it arrives
    within ``range_ps`` an interval is recorded and the converter is busy for
    ``conv_ps`` after the stop, otherwise it resets at start + range + conv.
    """
    n_t = trig.shape[0]
    intervals = np.empty(n_t, dtype=np.int64)
    starts = np.empty(n_t, dtype=np.int64)
    n_iv = 0
    n_valid = 0
    j = 0
    busy_until = np.iinfo(np.int64).min
    for i in range(n_t):
        s = trig[i]
        if s < busy_until:
            continue
        n_valid += 1
        while j < sig.shape[0] and sig[j] <= s:
            j += 1
        if j < sig.shape[0] and sig[j] - s < range_ps:
            intervals[n_iv] = sig[j] - s
            starts[n_iv] = s
            n_iv += 1
            busy_until = sig[j] + conv_ps
            j += 1
        else:
            busy_until = s + range_ps + conv_ps
    return intervals[:n_iv], starts[:n_iv], n_valid


@njit(cache=True)
def start_stop_until(trig, sig, range_ps, target):
    """Zero-conversion-time start/stop pairing that stops after ``target`` pairs.

    Returns (intervals, start times, stop time of the last pair).
    """
    intervals = np.empty(target, dtype=np.int64)
    starts = np.empty(target, dtype=np.int64)
    n_iv = 0
    j = 0
    busy_until = np.iinfo(np.int64).min
    last_stop = np.int64(0)
    for i in range(trig.shape[0]):
        if n_iv == target:
            break
        s = trig[i]
        if s < busy_until:
            continue
        while j < sig.shape[0] and sig[j] <= s:
            j += 1
        if j < sig.shape[0] and sig[j] - s < range_ps:
            intervals[n_iv] = sig[j] - s
            starts[n_iv] = s
            n_iv += 1
            busy_until = sig[j]
            last_stop = sig[j]
            j += 1
        else:
            busy_until = s + range_ps
    return intervals[:n_iv], starts[:n_iv], last_stop
