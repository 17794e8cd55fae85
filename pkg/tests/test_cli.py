import csv
import json
from pathlib import Path

import numpy as np
import pytest

from tautline.cli.signal_files import read_signal, write_signal
from tautline.core.signals import PiecewiseConstantSignal
from tautline.errors import SignalFormatError
from tautline.main import main

DATA = Path(__file__).parent.parent / "data" / "signals"


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def test_denoise_figure1(tmp_path):
    out = tmp_path / "u.csv"
    diagnostics = tmp_path / "diag.json"
    status = main(
        [
            "denoise",
            "--input", str(DATA / "figure1.json"),
            "--lambda", "0.5",
            "--output", str(out),
            "--emit-string",
            "--emit-certificate",
            "--emit-tube",
            "--diagnostics", str(diagnostics),
        ]
    )
    assert status == 0

    u = read_signal(out).signal
    assert u.breakpoints.tolist() == [0.0, 1.0, 3.0, 4.0]
    assert np.allclose(u.values, [1.0, -0.25, 0.5], atol=1e-10)

    string = np.array(read_rows(tmp_path / "u.string.csv")[1:], dtype=float)
    assert np.allclose(np.interp([0, 1, 2, 3, 4], string[:, 0], string[:, 1]), [0, 1, 0.75, 0.5, 1])
    certificate = np.array(read_rows(tmp_path / "u.certificate.csv")[1:], dtype=float)
    assert np.allclose(np.interp([0, 1, 2, 3, 4], certificate[:, 0], certificate[:, 1]), [0, 1, -0.5, -1, 0])

    tube = read_rows(tmp_path / "u.tube.csv")
    assert tube[0] == ["x", "lower", "upper"]
    assert len(tube) == 6
    contacts = read_rows(tmp_path / "u.contacts.csv")
    assert contacts[0] == ["side", "start", "end"]
    assert ["lower", "1", "1"] in contacts
    assert ["upper", "3", "3"] in contacts

    report = json.loads(diagnostics.read_text())
    assert report["J_f"] == pytest.approx(4.5)
    assert report["J_u"] == pytest.approx(2.0)
    assert report["gnorm"] == pytest.approx(1.25)
    assert report["e"] == pytest.approx(1.5625)
    assert abs(report["duality_gap"]) <= 1e-9
    assert (report["pieces_in"], report["pieces_out"]) == (4, 3)


def test_denoise_writes_json_when_asked(tmp_path):
    out = tmp_path / "u.json"
    assert main(["denoise", "--input", str(DATA / "sign.json"), "--lambda", "0.25", "--output", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["interval"] == [-1.0, 1.0]
    assert np.allclose(payload["values"], [-0.75, 0.75])


def test_csv_round_trip_keeps_an_irregular_grid(tmp_path):
    f = PiecewiseConstantSignal([0.0, 0.1, 0.35, 2.0], [1.0 / 3.0, -2.5, 1e-7])
    write_signal(tmp_path / "f.csv", f)
    assert read_signal(tmp_path / "f.csv").signal == f


def test_bad_value_reports_its_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("value\n1.0\n2.0\nabc\n")
    with pytest.raises(SignalFormatError) as info:
        read_signal(path)
    assert info.value.line == 4
    assert "line 4" in str(info.value)


def test_non_increasing_breakpoint_reports_its_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,value\n0,1\n1,2\n1,3\n2,\n")
    with pytest.raises(SignalFormatError) as info:
        read_signal(path)
    assert info.value.line == 4


def test_json_non_increasing_breakpoint_names_its_index(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"breakpoints": [0, 1, 3, 2.5], "values": [1, 2, 3]}')
    with pytest.raises(SignalFormatError) as info:
        read_signal(path)
    assert "breakpoints[3] = 2.5" in str(info.value)
    assert "breakpoints[2] = 3.0" in str(info.value)


def test_json_rejects_nan(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"breakpoints": [0, 1], "values": [NaN]}')
    with pytest.raises(SignalFormatError):
        read_signal(path)


def test_json_interval_must_match(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"interval": [0, 2], "breakpoints": [0, 1], "values": [3]}')
    with pytest.raises(SignalFormatError):
        read_signal(path)


def test_exit_codes(tmp_path, monkeypatch):
    out = str(tmp_path / "u.csv")
    missing = str(tmp_path / "missing.csv")
    assert main(["denoise", "--input", missing, "--lambda", "1", "--output", out]) == 2

    bad = tmp_path / "bad.csv"
    bad.write_text("time,value\n0,1\n")
    assert main(["denoise", "--input", str(bad), "--lambda", "1", "--output", out]) == 3

    figure1 = str(DATA / "figure1.json")
    assert main(["denoise", "--input", figure1, "--lambda", "0", "--output", out]) == 4

    monkeypatch.setenv("TAUTLINE_TOL", "not-a-number")
    assert main(["denoise", "--input", figure1, "--lambda", "1", "--output", out]) == 4


def test_sweep_table(tmp_path):
    out = tmp_path / "sweep.csv"
    status = main(
        [
            "sweep",
            "--input", str(DATA / "sign.json"),
            "--lambda-min", "0.25",
            "--lambda-max", "1.0",
            "--count", "4",
            "--scale", "linear",
            "--output", str(out),
        ]
    )
    assert status == 0
    rows = read_rows(out)
    assert rows[0] == ["lambda", "e", "J_u", "fidelity", "fidelity_over_lambda"]
    table = np.array(rows[1:], dtype=float)
    lam = table[:, 0]
    assert np.allclose(lam, [0.25, 0.5, 0.75, 1.0])
    assert np.allclose(table[:, 1], 2 * lam - lam**2)
    assert np.allclose(table[:, 4], table[:, 3] / lam)


def test_sweep_rejects_a_reversed_grid(tmp_path):
    args = ["sweep", "--input", str(DATA / "sign.json"), "--lambda-min", "1", "--lambda-max", "0.5"]
    assert main(args + ["--output", str(tmp_path / "s.csv")]) == 4


def test_isotonic_on_figure2(tmp_path):
    out = tmp_path / "iso.json"
    assert main(["isotonic", "--input", str(DATA / "figure2.csv"), "--output", str(out), "--emit-envelope"]) == 0
    payload = json.loads(out.read_text())
    assert payload["breakpoints"] == [0.0, 2.0, 3.0, 5.0, 6.0]
    assert np.allclose(payload["values"], [-1.5, -0.45, 0.75, 2.05])
    envelope = read_rows(tmp_path / "iso.envelope.csv")
    assert [row[0] for row in envelope[1:]] == ["0", "2", "3", "5", "6"]
    assert len(read_rows(tmp_path / "iso.cumulative.csv")) == 8


def test_verify_passes_on_figure1(tmp_path):
    report = tmp_path / "report.json"
    assert main(["verify", "--input", str(DATA / "figure1.json"), "--report", str(report)]) == 0
    payload = json.loads(report.read_text())
    assert payload["ok"] is True
    assert payload["failed"] == []
    assert payload["signals"][0]["signal"] == "figure1.json"


def test_verify_names_the_corrupted_certificate(tmp_path):
    report = tmp_path / "report.json"
    status = main(["verify", "--input", str(DATA / "corrupted_certificate.json"), "--report", str(report)])
    assert status == 1
    payload = json.loads(report.read_text())
    assert payload["failed"] == ["supplied_certificate"]


def test_verify_is_deterministic(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for report in (first, second):
        args = ["verify", "--input", str(DATA / "sign.json"), "--seed", "11", "--report", str(report)]
        assert main(args) == 0
    assert first.read_bytes() == second.read_bytes()


def test_verify_needs_at_least_one_random_signal(tmp_path):
    assert main(["verify", "--random", "0", "--report", str(tmp_path / "r.json")]) == 4


def test_verify_needs_both_grid_ends(tmp_path):
    args = ["verify", "--input", str(DATA / "sign.json"), "--lambda-min", "0.1"]
    assert main(args + ["--report", str(tmp_path / "r.json")]) == 4
