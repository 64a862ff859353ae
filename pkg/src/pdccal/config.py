"""Run configuration files.

INI-style sections of ``key = value`` pairs.  Times take a unit suffix
(``ps``, ``ns``, ``us``, ``ms``, ``s``; bare numbers are seconds), rates are
counts/s, wavelengths nm.  Schema::

    [source]    pair_rate, gate, stop_delay
    [trigger]   efficiency, transmittance, background_rate, dead_time, jitter
    [signal]    same keys as [trigger], plus transmittance_sigma
    [analysis]  systems (comma list), background (independent | same-realization),
                alpha_form (linear | inverse)
    [peak]      threshold_sigma, min_bins, pad_bins, guard_bins, fixed_width
    [<system>]  any AcquisitionSystem field, e.g. [tac-valid-start] tac_range = 20 ns

Unknown sections or keys are rejected with the offending line number.
"""
from __future__ import annotations

import configparser
import hashlib
import re
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from .calib import SYSTEM_ORDER, SystemKind, TimingParameters
from .electronics import AcquisitionSystem, PeakPolicy
from .errors import CalibrationError
from .sim import ArmModel, ExperimentConfig

_UNITS = {"ps": 1e-12, "ns": 1e-9, "us": 1e-6, "µs": 1e-6, "ms": 1e-3, "s": 1.0}
_TIME_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([a-zµ]*)\s*$")


class ConfigError(CalibrationError):
    def __init__(self, message, path=None, line=None):
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.path, self.line = path, line


def parse_time(text: str) -> float:
    m = _TIME_RE.match(text)
    if not m or m.group(2) not in _UNITS and m.group(2) != "":
        raise ValueError(f"cannot parse time {text!r}")
    return float(m.group(1)) * _UNITS.get(m.group(2) or "s")


_TIME_KEYS = {"gate", "stop_delay", "dead_time", "jitter", "coincidence_window", "coincidence_delay",
              "tac_range", "tac_conversion_time", "mca_bin_width", "tic_resolution", "tic_bin_width",
              "tic_range", "tic_histogram_range"}
_INT_KEYS = {"tic_pair_target", "tic_subsamples", "min_bins", "pad_bins", "guard_bins", "fixed_width"}
_ARM_KEYS = {"efficiency", "transmittance", "background_rate", "dead_time", "jitter"}
_SYSTEM_KEYS = {f.name for f in fields(AcquisitionSystem)} - {"kind", "peak_policy"}
_PEAK_KEYS = {"threshold_sigma", "min_bins", "pad_bins", "guard_bins", "fixed_width"}
_SECTIONS = {
    "source": {"pair_rate", "gate", "stop_delay"},
    "trigger": _ARM_KEYS,
    "signal": _ARM_KEYS | {"transmittance_sigma"},
    "analysis": {"systems", "background", "alpha_form"},
    "peak": _PEAK_KEYS,
    **{k.value: _SYSTEM_KEYS for k in SystemKind},
}


@dataclass(frozen=True)
class RunConfig:
    name: str
    experiment: ExperimentConfig
    systems: tuple[AcquisitionSystem, ...]
    t_signal_sigma: float = 0.0
    background_mode: str = "same-realization"
    alpha_form: str = "linear"
    digest: str = ""

    def timing(self, system: AcquisitionSystem) -> TimingParameters:
        return TimingParameters(t_delay=self.experiment.stop_delay,
                                tau_tac_mean=system.tac_conversion_time,
                                tau_signal=self.experiment.signal_arm.dead_time,
                                alpha_form=self.alpha_form)


def _line_of(text, section, key=None):
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
            if key is None and current == section:
                return i
        elif current == section and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return i
    return None


def _value(key, raw):
    if key in _TIME_KEYS:
        return parse_time(raw)
    if key in _INT_KEYS:
        return int(raw)
    if key == "sca_window":
        lo, hi = (parse_time(p) for p in raw.split(","))
        return (lo, hi)
    return float(raw)


def parse_config(text: str, path: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=path)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("content before the first [section] header", path, exc.lineno) from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError(f"malformed line {exc.errors[0][1] if exc.errors else ''}", path, line) from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], path, getattr(exc, "lineno", None)) from exc

    sections = {}
    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]", path, _line_of(text, sec))
        vals = {}
        for key, raw in cp.items(sec):
            if key not in _SECTIONS[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]", path, _line_of(text, sec, key))
            if sec == "analysis":
                vals[key] = raw.strip()
                continue
            try:
                vals[key] = _value(key, raw)
            except ValueError as exc:
                raise ConfigError(f"[{sec}] {key}: {exc}", path, _line_of(text, sec, key)) from exc
        sections[sec] = vals

    for required in ("source", "trigger", "signal"):
        if required not in sections:
            raise ConfigError(f"missing section [{required}]", path)

    def build(sec, fn, **kw):
        try:
            return fn(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{sec}] {exc}", path, _line_of(text, sec)) from exc

    src = dict(sections["source"])
    if "pair_rate" not in src or "gate" not in src:
        raise ConfigError("[source] needs pair_rate and gate", path, _line_of(text, "source"))
    trig = build("trigger", ArmModel, **sections["trigger"])
    sig_kw = dict(sections["signal"])
    t_sigma = sig_kw.pop("transmittance_sigma", 0.0)
    sig = build("signal", ArmModel, **sig_kw)
    exp = build("source", ExperimentConfig, pair_rate=src["pair_rate"], gate_duration=src["gate"],
                trigger_arm=trig, signal_arm=sig, stop_delay=src.get("stop_delay", 0.0))

    analysis = sections.get("analysis", {})
    names = [s.strip() for s in analysis.get("systems", ",".join(k.value for k in SYSTEM_ORDER)).split(",") if s.strip()]
    peak = build("peak", PeakPolicy, **sections.get("peak", {}))
    systems = []
    for n in names:
        try:
            kind = SystemKind(n)
        except ValueError:
            raise ConfigError(f"unknown acquisition system {n!r}", path, _line_of(text, "analysis", "systems"))
        systems.append(build(n, AcquisitionSystem, kind=kind, peak_policy=peak, **sections.get(n, {})))
    systems.sort(key=lambda s: SYSTEM_ORDER.index(s.kind))

    bg_mode = analysis.get("background", "same-realization")
    if bg_mode not in ("same-realization", "independent"):
        raise ConfigError(f"background must be 'same-realization' or 'independent', got {bg_mode!r}",
                          path, _line_of(text, "analysis", "background"))
    alpha_form = analysis.get("alpha_form", "linear")
    if alpha_form not in ("linear", "inverse"):
        raise ConfigError(f"alpha_form must be 'linear' or 'inverse', got {alpha_form!r}",
                          path, _line_of(text, "analysis", "alpha_form"))
    return RunConfig(name=Path(path).stem, experiment=exp, systems=tuple(systems), t_signal_sigma=t_sigma,
                     background_mode=bg_mode, alpha_form=alpha_form,
                     digest=hashlib.sha256(text.encode()).hexdigest()[:16])


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("pdccal") / "data" / name))


def load_config(path_or_name: str | Path) -> RunConfig:
    """Load a config file, or a bundled one by name (e.g. ``paper-desk-scale``)."""
    p = Path(path_or_name)
    if not p.exists():
        candidate = bundled_path(f"{path_or_name}.ini")
        if candidate.exists():
            p = candidate
        else:
            raise ConfigError("no such config file or bundled config", str(path_or_name))
    return parse_config(p.read_text(encoding="utf-8"), str(p))
