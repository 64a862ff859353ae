"""Plain-text file formats: counts CSV, histogram dumps and timestamp dumps."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calib import Corrections, CountsRecord, Quantity, SystemKind
from .electronics import IntervalHistogram
from .errors import CalibrationError
from .sim import PS, ChannelTimestamps

_QUANTITY_FIELDS = ("n_trigger", "n_background", "n_coincidence", "n_accidental", "w_signal_mean")
COUNTS_HEADER = ["system"]
for _f in _QUANTITY_FIELDS:
    COUNTS_HEADER += [_f, f"{_f}_sigma"]
COUNTS_HEADER += ["gate_duration", "alpha", "beta", "gamma", "t_signal", "t_signal_sigma"]


class FormatError(CalibrationError):
    pass


@dataclass(frozen=True)
class CountsRow:
    system: SystemKind
    counts: CountsRecord
    corrections: Corrections | None
    t_signal: Quantity | None


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def format_counts(rows: list[CountsRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COUNTS_HEADER)
    for r in rows:
        line = [r.system.value]
        for f in _QUANTITY_FIELDS:
            q = getattr(r.counts, f)
            line += [_fmt(q.value), _fmt(q.sigma)]
        c = r.corrections
        line += [_fmt(r.counts.gate_duration),
                 _fmt(c.alpha if c else None), _fmt(c.beta if c else None), _fmt(c.gamma if c else None),
                 _fmt(r.t_signal.value if r.t_signal else None), _fmt(r.t_signal.sigma if r.t_signal else None)]
        w.writerow(line)
    return buf.getvalue()


def write_counts(path, rows: list[CountsRow]) -> None:
    Path(path).write_text(format_counts(rows), encoding="utf-8")


def parse_counts(text: str, source: str = "<counts>") -> list[CountsRow]:
    reader = csv.DictReader(io.StringIO(text))
    if not reader.fieldnames:
        raise FormatError(f"{source}: empty counts file")
    missing = [f for f in ["system"] + list(_QUANTITY_FIELDS) if f not in reader.fieldnames]
    if missing:
        raise FormatError(f"{source}: header lacks columns {missing}")
    rows = []
    for lineno, rec in enumerate(reader, 2):
        def num(key, default=None):
            raw = (rec.get(key) or "").strip()
            if raw == "":
                return default
            try:
                return float(raw)
            except ValueError:
                raise FormatError(f"{source}:{lineno}: column {key!r} is not a number: {raw!r}") from None

        try:
            system = SystemKind(rec["system"].strip())
            counts = CountsRecord(*(Quantity(num(f, 0.0), num(f"{f}_sigma", 0.0)) for f in _QUANTITY_FIELDS),
                                  gate_duration=num("gate_duration"))
            factors = [num(k) for k in ("alpha", "beta", "gamma")]
            corr = None if all(v is None for v in factors) else Corrections(
                *(1.0 if v is None else v for v in factors))
            t = num("t_signal")
            t_signal = None if t is None else Quantity(t, num("t_signal_sigma", 0.0))
        except FormatError:
            raise
        except (ValueError, TypeError, AttributeError) as exc:
            raise FormatError(f"{source}:{lineno}: {exc}") from exc
        rows.append(CountsRow(system, counts, corr, t_signal))
    if not rows:
        raise FormatError(f"{source}: no data rows")
    return rows


def read_counts(path) -> list[CountsRow]:
    p = Path(path)
    return parse_counts(p.read_text(encoding="utf-8"), str(p))


def format_histogram(h: IntervalHistogram) -> str:
    head = (f"# bin_width_ps={int(round(h.bin_width / PS))} origin_ps={int(round(h.origin / PS))} "
            f"n_bins={h.n_bins}\n")
    return head + "".join(f"{int(c)}\n" for c in h.counts)


def write_histogram(path, h: IntervalHistogram) -> None:
    Path(path).write_text(format_histogram(h), encoding="utf-8")


def read_histogram(path) -> IntervalHistogram:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("#"):
        raise FormatError(f"{path}: missing histogram header")
    meta = dict(tok.split("=") for tok in lines[0][1:].split())
    counts = np.array([int(x) for x in lines[1:] if x.strip()], dtype=np.int64)
    if counts.shape[0] != int(meta["n_bins"]):
        raise FormatError(f"{path}: header announces {meta['n_bins']} bins, found {counts.shape[0]}")
    return IntervalHistogram(int(meta["bin_width_ps"]) * PS, int(meta["origin_ps"]) * PS, counts,
                             int(counts.sum()))


def write_timestamps(path, ch: ChannelTimestamps, digest: str) -> None:
    """Two columns, channel tag (T trigger, S signal) and picosecond time, time-ordered."""
    tags = np.concatenate((np.zeros(ch.trigger_ps.shape[0], np.int8), np.ones(ch.signal_ps.shape[0], np.int8)))
    times = np.concatenate((ch.trigger_ps, ch.signal_ps))
    order = np.lexsort((tags, times))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# config_digest={digest}\n")
        for tag, t in zip(tags[order], times[order]):
            fh.write(f"{'TS'[tag]} {t}\n")


def read_timestamps(path) -> tuple[ChannelTimestamps, str]:
    with open(path, encoding="utf-8") as fh:
        head = fh.readline().strip()
        if not head.startswith("# config_digest="):
            raise FormatError(f"{path}: missing digest header")
        trig, sig = [], []
        for line in fh:
            tag, t = line.split()
            (trig if tag == "T" else sig).append(int(t))
    return ChannelTimestamps(np.array(trig, np.int64), np.array(sig, np.int64)), head.split("=", 1)[1]
