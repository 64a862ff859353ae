import math

import numpy as np
import pytest

from pdccal import reference
from pdccal.calib import Corrections, CountsRecord, Quantity, SystemKind, estimate_efficiency
from pdccal.cli import main
from pdccal.config import ConfigError, bundled_path, load_config, parse_config, parse_time
from pdccal.electronics import IntervalHistogram
from pdccal.errors import InconsistentCountsError
from pdccal.fileio import (
    CountsRow,
    FormatError,
    format_counts,
    parse_counts,
    read_counts,
    read_histogram,
    read_timestamps,
    write_histogram,
    write_timestamps,
)
from pdccal.pipeline import ROWS
from pdccal.sim import ChannelTimestamps

DESK = bundled_path("paper-desk-scale.ini").read_text()


def _run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


# config

@pytest.mark.parametrize("text,value", [("12 ns", 12e-9), ("25ps", 25e-12), ("3.5 us", 3.5e-6),
                                        ("2 µs", 2e-6), ("120 ms", 0.12), ("1e-3", 1e-3), ("2 s", 2.0)])
def test_parse_time_units(text, value):
    assert parse_time(text) == pytest.approx(value, rel=1e-12)


@pytest.mark.parametrize("bad", ["12 parsecs", "ns", "", "1..2 ns"])
def test_parse_time_rejects(bad):
    with pytest.raises(ValueError):
        parse_time(bad)


def test_bundled_config_contents():
    cfg = load_config("paper-desk-scale")
    assert [s.kind for s in cfg.systems] == list(reference.COLUMNS)
    assert cfg.experiment.signal_arm.efficiency == 0.507
    assert cfg.experiment.signal_arm.transmittance == 0.879
    assert cfg.experiment.signal_arm.dead_time == pytest.approx(31e-9)
    assert cfg.experiment.gate_duration == pytest.approx(0.12)
    assert cfg.systems[0].coincidence_window == pytest.approx(4e-9)
    assert cfg.systems[3].tic_resolution == pytest.approx(25e-12)
    assert len(cfg.digest) == 16


def test_config_errors_carry_line_numbers():
    bad_key = DESK.replace("jitter = 300 ps\n\n[signal]", "jitter = 300 ps\nwobble = 2\n\n[signal]")
    with pytest.raises(ConfigError) as info:
        parse_config(bad_key, "desk.ini")
    line = bad_key.splitlines().index("wobble = 2") + 1
    assert info.value.line == line and f"desk.ini:{line}:" in str(info.value)

    bad_unit = DESK.replace("dead_time = 31 ns", "dead_time = 31 furlongs")
    with pytest.raises(ConfigError) as info:
        parse_config(bad_unit, "desk.ini")
    assert info.value.line == bad_unit.splitlines().index("dead_time = 31 furlongs") + 1

    with pytest.raises(ConfigError) as info:
        parse_config("pair_rate = 1\n[source]\n", "x.ini")
    assert info.value.line == 1

    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(DESK + "\n[detector]\nx = 1\n")
    with pytest.raises(ConfigError, match="background"):
        parse_config(DESK.replace("background = same-realization", "background = sometimes"))
    with pytest.raises(ConfigError, match="efficiency"):
        parse_config(DESK.replace("efficiency = 0.507", "efficiency = 1.7"))
    with pytest.raises(ConfigError, match="missing section"):
        parse_config("[source]\npair_rate = 1\ngate = 1 s\n")
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.ini")


# file formats

def test_counts_round_trip_is_exact():
    rows = [CountsRow(kind, col.counts, col.corrections, reference.T_SIGNAL)
            for kind, col in reference.COLUMNS.items()]
    rows.append(CountsRow(SystemKind.TIC, CountsRecord(Quantity(1 / 3, 0.1 + 0.2), Quantity(0.0),
                                                       Quantity(math.pi, 1e-300), Quantity(0.0),
                                                       Quantity(1.83e6), gate_duration=0.12),
                          None, None))
    back = parse_counts(format_counts(rows))
    assert back == rows


def test_bundled_counts_match_reference():
    rows = read_counts(bundled_path("paper-table.counts"))
    for row in rows:
        col = reference.COLUMNS[row.system]
        assert row.counts == col.counts
        assert row.corrections == col.corrections
        assert row.t_signal == reference.T_SIGNAL


@pytest.mark.parametrize("text,msg", [
    ("", "empty"),
    ("system,n_trigger\nand-gate,1\n", "lacks"),
    (",".join(["system", "n_trigger", "n_background", "n_coincidence", "n_accidental", "w_signal_mean"])
     + "\nand-gate,1,x,3,4,5\n", "not a number"),
    (",".join(["system", "n_trigger", "n_background", "n_coincidence", "n_accidental", "w_signal_mean"])
     + "\nfoo-gate,1,2,3,4,5\n", "foo-gate"),
    (",".join(["system", "n_trigger", "n_background", "n_coincidence", "n_accidental", "w_signal_mean"])
     + "\n", "no data"),
])
def test_counts_parse_errors(text, msg):
    with pytest.raises(FormatError, match=msg):
        parse_counts(text)


def test_histogram_round_trip(tmp_path):
    h = IntervalHistogram(100e-12, 0.0, np.array([0, 3, 7, 0, 1], np.int64), 11)
    write_histogram(tmp_path / "h.hist", h)
    text = (tmp_path / "h.hist").read_text()
    assert text.splitlines()[0] == "# bin_width_ps=100 origin_ps=0 n_bins=5"
    back = read_histogram(tmp_path / "h.hist")
    assert back.counts.tolist() == h.counts.tolist() and back.bin_width == pytest.approx(h.bin_width)
    (tmp_path / "bad.hist").write_text(text + "4\n")
    with pytest.raises(FormatError):
        read_histogram(tmp_path / "bad.hist")


def test_timestamp_round_trip(tmp_path):
    ch = ChannelTimestamps(np.array([5, 100, 300], np.int64), np.array([5, 7, 301, 10**12], np.int64))
    write_timestamps(tmp_path / "ts.txt", ch, "abcd")
    back, digest = read_timestamps(tmp_path / "ts.txt")
    assert digest == "abcd"
    assert back.trigger_ps.tolist() == ch.trigger_ps.tolist()
    assert back.signal_ps.tolist() == ch.signal_ps.tolist()


# run

def test_run_writes_report(tmp_path, capsys):
    code, out, _ = _run(["run", "--config", "paper-desk-scale", "--seed", "1", "--out", str(tmp_path)], capsys)
    assert code == 0
    lines = (tmp_path / "report.csv").read_text().splitlines()
    assert lines[0].split(",")[1::2] == [k.value for k in reference.COLUMNS]
    assert [line.split(",")[0] for line in lines[1:len(ROWS) + 1]] == list(ROWS)
    assert "eta*T_signal" in out and "W_signal" in out
    hists = sorted(p.name for p in (tmp_path / "histograms").iterdir())
    assert hists[:2] == ["tac-no-valid-start.hist", "tac-valid-start.hist"]
    assert [h for h in hists if h.startswith("tic_")] == [f"tic_{k}.hist" for k in range(5)]


def test_run_out_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("PDCCAL_OUT_DIR", str(tmp_path / "env"))
    code, _, _ = _run(["run", "--config", "paper-desk-scale", "--seed", "2"], capsys)
    assert code == 0 and (tmp_path / "env" / "report.csv").exists()


def test_run_is_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        _run(["run", "--config", "paper-desk-scale", "--seed", "9", "--out", str(tmp_path / d),
              "--dump-timestamps"], capsys)
    for name in ("report.csv", "report.txt", "counts.csv", "timestamps.txt", "histograms/tic_3.hist"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_without_source_reports_no_signal(tmp_path, capsys):
    cfg = tmp_path / "dark.ini"
    cfg.write_text(DESK.replace("pair_rate = 4.13e6", "pair_rate = 0"))
    code, out, _ = _run(["run", "--config", str(cfg), "--seed", "3", "--out", str(tmp_path / "o")], capsys)
    assert code == 1
    for kind in reference.COLUMNS:
        assert f"{kind.value}: NoSignalError" in out
    report = (tmp_path / "o" / "report.csv").read_text().splitlines()
    assert report[-2].split(",")[1::2] == ["false"] * 4


def test_run_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(DESK.replace("gate = 120 ms", "gate = soon"))
    code, _, err = _run(["run", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 2 and f"{cfg}:" in err


def test_report_counts_re_estimate_bit_for_bit(tmp_path, capsys):
    _run(["run", "--config", "paper-desk-scale", "--seed", "4", "--out", str(tmp_path)], capsys)
    rows = read_counts(tmp_path / "counts.csv")
    report = {}
    for line in (tmp_path / "report.csv").read_text().splitlines():
        cells = line.split(",")
        report[cells[0]] = cells[1:]
    for k, row in enumerate(rows):
        est = estimate_efficiency(row.counts, row.corrections, row.t_signal)
        assert repr(est.eta.value) == report["eta"][2 * k]
        assert repr(est.eta.sigma) == report["eta"][2 * k + 1]
        assert repr(est.eta_times_t.value) == report["eta*T_signal"][2 * k]


# estimate

def test_estimate_bundled_table(capsys):
    code, out, _ = _run(["estimate", "--counts", "paper-table", "--system", "and-gate"], capsys)
    assert code == 0
    eta_t = float(out.split("eta*T=")[1].split()[0])
    eta = float(out.split(" eta=")[1].split()[0])
    # the published three-digit values, at the table-reproduction tolerances
    assert eta_t == pytest.approx(0.446, abs=reference.TOL_ETA_TIMES_T)
    assert eta == pytest.approx(0.507, abs=reference.TOL_ETA)
    assert "net_coincidence=" in out and "total_eta=" in out


def test_estimate_without_corrections(capsys):
    code, out, _ = _run(["estimate", "--counts", str(bundled_path("paper-table.counts")),
                         "--corrections", "off", "--system", "and-gate"], capsys)
    assert code == 0
    value = float(out.split("eta*T=")[1].split()[0])
    assert value == pytest.approx((9351 - 473) / (24101 - 2416), abs=1e-6)
    assert round(value, 3) == 0.409


def test_estimate_empty_file(tmp_path, capsys):
    (tmp_path / "empty.csv").write_text("")
    code, _, err = _run(["estimate", "--counts", str(tmp_path / "empty.csv")], capsys)
    assert code == 2 and "empty" in err


def test_estimate_inconsistent_counts(tmp_path, capsys):
    rec = CountsRecord(Quantity(100, 10), Quantity(20, 4), Quantity(10, 3), Quantity(30, 5), Quantity(1e5))
    with pytest.raises(InconsistentCountsError):
        estimate_efficiency(rec, Corrections(), Quantity(1.0))
    (tmp_path / "c.csv").write_text(format_counts([CountsRow(SystemKind.AND_GATE, rec, None, None)]))
    code, out, _ = _run(["estimate", "--counts", str(tmp_path / "c.csv")], capsys)
    assert code == 1 and "InconsistentCountsError" in out


# reproduce-table

def test_reproduce_table_default(capsys):
    code, out, _ = _run(["reproduce-table"], capsys)
    assert code == 0
    assert out.count("PASS") == 4 and "FAIL" not in out


def test_reproduce_table_without_corrections(capsys):
    code, out, _ = _run(["reproduce-table", "--corrections", "off"], capsys)
    assert code == 1
    assert out.count("FAIL") == 4
    deltas = [abs(float(line.split()[3])) for line in out.splitlines()[1:5]]
    assert min(deltas) > 10 * reference.TOL_ETA_TIMES_T


def test_reproduce_table_single_column(capsys):
    code, out, _ = _run(["reproduce-table", "--column", "tic"], capsys)
    assert code == 0
    body = out.splitlines()[1:-1]
    assert len(body) == 1 and body[0].startswith("tic")


def test_reproduce_table_tight_tolerance_fails(capsys):
    code, _, _ = _run(["reproduce-table", "--tolerance", "1e-5"], capsys)
    assert code == 1


def test_module_entry_point():
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "pdccal", "reproduce-table", "--column", "and-gate"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "PASS" in proc.stdout
