"""simulate -> acquire -> estimate, for every acquisition system of a run config."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

from .calib import Corrections, CountsRecord, EfficiencyEstimate, Quantity, derive_corrections, estimate_efficiency
from .config import RunConfig
from .electronics import IntervalHistogram, run_system
from .errors import CalibrationError
from .sim import ChannelTimestamps, background_config, simulate_run

# seeds of independent background runs live in a separate part of the seed space
_BACKGROUND_SEED_OFFSET = 0x9E3779B9


@dataclass
class SystemResult:
    system: str
    counts: CountsRecord | None = None
    corrections: Corrections | None = None
    estimate: EfficiencyEstimate | None = None
    histograms: list[IntervalHistogram] = field(default_factory=list)
    error: str | None = None
    passed: bool | None = None     # recovered eta within 3 sigma of the simulated truth


@dataclass
class RunReport:
    config_digest: str
    seed: int
    results: list[SystemResult]
    eta_true: float | None = None
    t_true: float | None = None

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)


ROWS = ("N_trigger", "N_background", "N_coincidence", "N_accidental", "W_signal",
        "alpha", "beta", "gamma", "eta*T_signal", "T_signal", "eta")


def simulate_pair(cfg: RunConfig, seed: int) -> tuple[ChannelTimestamps, ChannelTimestamps]:
    exp = replace(cfg.experiment, rng_seed=seed)
    bg_seed = seed if cfg.background_mode == "same-realization" else seed + _BACKGROUND_SEED_OFFSET
    return simulate_run(exp), simulate_run(background_config(exp, bg_seed))


def evaluate(cfg: RunConfig, channels: ChannelTimestamps, background: ChannelTimestamps,
             n_sigma: float = 3.0) -> list[SystemResult]:
    exp = cfg.experiment
    t_signal = Quantity(exp.signal_arm.transmittance, cfg.t_signal_sigma)
    out = []
    for sys in cfg.systems:
        res = SystemResult(sys.kind.value)
        try:
            acq = run_system(channels, sys, exp.gate_duration, background)
            res.counts, res.histograms = acq.record, acq.histograms
            res.corrections = derive_corrections(cfg.timing(sys), acq.record.w_signal_mean.value, sys.kind)
            res.estimate = estimate_efficiency(acq.record, res.corrections, t_signal)
            eta = res.estimate.eta
            res.passed = abs(eta.value - exp.signal_arm.efficiency) <= n_sigma * eta.sigma
        except CalibrationError as exc:
            res.error = f"{type(exc).__name__}: {exc}"
            res.passed = False
        out.append(res)
    return out


def run_config(cfg: RunConfig, seed: int) -> tuple[RunReport, ChannelTimestamps]:
    ch, bg = simulate_pair(cfg, seed)
    report = RunReport(cfg.digest, seed, evaluate(cfg, ch, bg),
                       eta_true=cfg.experiment.signal_arm.efficiency,
                       t_true=cfg.experiment.signal_arm.transmittance)
    return report, ch


@dataclass
class ClosedLoopSummary:
    """Recovered eta and its reported sigma for every seed, per system."""
    seeds: list[int]
    eta: dict[str, list[float]]
    sigma: dict[str, list[float]]
    errors: dict[str, int]

    def within(self, system: str, truth: float, n_sigma: float = 3.0) -> int:
        return sum(abs(e - truth) <= n_sigma * s for e, s in zip(self.eta[system], self.sigma[system]))


def closed_loop(cfg: RunConfig, seeds, background_mode: str = "independent") -> ClosedLoopSummary:
    """Repeat the full pipeline over seeds; failed estimates are counted, not raised."""
    cfg = replace(cfg, background_mode=background_mode)
    names = [s.kind.value for s in cfg.systems]
    out = ClosedLoopSummary(list(seeds), {n: [] for n in names}, {n: [] for n in names}, {n: 0 for n in names})
    for seed in out.seeds:
        ch, bg = simulate_pair(cfg, seed)
        for res in evaluate(cfg, ch, bg):
            if res.estimate is None:
                out.errors[res.system] += 1
                continue
            out.eta[res.system].append(res.estimate.eta.value)
            out.sigma[res.system].append(res.estimate.eta.sigma)
    return out


def _cells(r: SystemResult):
    """(value, sigma) per table row, or None where unavailable."""
    c, k, e = r.counts, r.corrections, r.estimate
    cells = {}
    if c is not None:
        cells.update({"N_trigger": c.n_trigger, "N_background": c.n_background,
                      "N_coincidence": c.n_coincidence, "N_accidental": c.n_accidental,
                      "W_signal": c.w_signal_mean})
    if k is not None:
        cells.update({"alpha": Quantity(k.alpha), "beta": Quantity(k.beta), "gamma": Quantity(k.gamma)})
    if e is not None:
        cells.update({"eta*T_signal": e.eta_times_t, "T_signal": e.t_signal, "eta": e.eta})
    return cells


def report_csv(report: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["row"]
    for r in report.results:
        header += [r.system, f"{r.system}_sigma"]
    w.writerow(header)
    cells = [_cells(r) for r in report.results]
    for row in ROWS:
        line = [row]
        for cs in cells:
            q = cs.get(row)
            line += ["", ""] if q is None else [repr(q.value), repr(q.sigma)]
        w.writerow(line)
    if report.eta_true is not None:
        w.writerow(["eta_true"] + sum(([repr(report.eta_true), ""] for _ in report.results), []))
    w.writerow(["pass"] + sum(([str(r.passed).lower(), ""] for r in report.results), []))
    w.writerow(["error"] + sum(([r.error or "", ""] for r in report.results), []))
    return buf.getvalue()


def _fmt_cell(row, q):
    if q is None:
        return "-"
    if row in ("alpha", "beta", "gamma"):
        return f"{q.value:.4f}"
    if row == "W_signal":
        return f"{q.value:.4g} ± {q.sigma:.2g}"
    if row.startswith("N_"):
        return f"{q.value:.1f} ± {q.sigma:.1f}"
    return f"{q.value:.4f} ± {q.sigma:.4f}"


def report_text(report: RunReport) -> str:
    cells = [_cells(r) for r in report.results]
    table = [[""] + [r.system for r in report.results]]
    for row in ROWS:
        table.append([row] + [_fmt_cell(row, cs.get(row)) for cs in cells])
    if report.eta_true is not None:
        table.append(["eta_true"] + [f"{report.eta_true:.4f}"] * len(report.results))
    table.append(["pass"] + ["yes" if r.passed else "no" for r in report.results])
    widths = [max(len(line[i]) for line in table) for i in range(len(table[0]))]
    lines = [f"config {report.config_digest}  seed {report.seed}"]
    lines += ["  ".join(cell.rjust(wd) for cell, wd in zip(line, widths)) for line in table]
    lines += [f"{r.system}: {r.error}" for r in report.results if r.error]
    return "\n".join(lines) + "\n"
