import json

import pytest

from steinercodes.cli import run
from steinercodes.designs import read_design, verify_design
from steinercodes.ordering import read_matrix, verify_ordering


@pytest.fixture
def fano_file(tmp_path):
    path = tmp_path / "fano.txt"
    assert run(["construct", "--family", "sts", "--v", "7", "-o", str(path)]) == 0
    return path


def test_construct_sts(fano_file):
    d = read_design(fano_file)
    assert d.b == 7 and verify_design(d).is_valid


def test_construct_sts_inadmissible(tmp_path, capsys):
    assert run(["construct", "--family", "sts", "--v", "8", "-o", str(tmp_path / "x.txt")]) == 2
    assert "mod 6" in capsys.readouterr().err
    assert not (tmp_path / "x.txt").exists()


def test_construct_boolean_and_double(tmp_path):
    s8, s16 = tmp_path / "s8.txt", tmp_path / "s16.txt"
    assert run(["construct", "--family", "sqs-boolean", "--d", "3", "-o", str(s8)]) == 0
    assert run(["construct", "--family", "sqs-boolean", "--v", "8", "-o", str(tmp_path / "s8b.txt")]) == 0
    assert s8.read_text() == (tmp_path / "s8b.txt").read_text()
    assert run(["construct", "--family", "sqs-double", "--base", str(s8), "-o", str(s16)]) == 0
    assert read_design(s16).b == 140


def test_construct_cyclic(tmp_path):
    out = tmp_path / "c.txt"
    assert run(["construct", "--family", "cyclic", "--t", "2", "--v", "13", "--k", "3", "-o", str(out)]) == 0
    assert read_design(out).b == 26


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["construct", "--family", "sts", "-o", "x.txt"],
        ["construct", "--family", "sts", "--v", "7", "--base", "a.txt", "-o", "x.txt"],
        ["construct", "--family", "sqs-boolean", "--v", "12", "-o", "x.txt"],
        ["construct", "--family", "sqs-boolean", "--v", "16", "--d", "3", "-o", "x.txt"],
        ["construct", "--family", "cyclic", "--v", "13", "-o", "x.txt"],
        ["construct", "--family", "sts", "--v", "7", "--seed", "-1", "-o", "x.txt"],
        ["order", "--design", "missing.txt", "--secrecy-level", "1", "-o", "m.txt"],
        ["audit", "--design", "d.txt"],
    ],
)
def test_usage_errors_exit_1(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv) == 1


def test_order_sqs8_is_inadmissible(tmp_path, capsys):
    s8 = tmp_path / "s8.txt"
    run(["construct", "--family", "sqs-boolean", "--d", "3", "-o", str(s8)])
    capsys.readouterr()
    assert run(["order", "--design", str(s8), "--secrecy-level", "1", "-o", str(tmp_path / "m.txt")]) == 2
    assert "8 does not divide 14" in capsys.readouterr().err


def test_order_level_above_t_minus_one(fano_file, tmp_path):
    assert run(["order", "--design", str(fano_file), "--secrecy-level", "2", "-o", str(tmp_path / "m")]) == 1


def test_order_then_audit_fano(fano_file, tmp_path):
    m, rep = tmp_path / "m.txt", tmp_path / "r.json"
    assert run(["order", "--design", str(fano_file), "--secrecy-level", "1", "-o", str(m)]) == 0
    assert verify_ordering(read_matrix(m), read_design(fano_file), 1)
    argv = ["audit", "--design", str(fano_file), "--matrix", str(m), "--max-spoofing-order", "1"]
    assert run(argv + ["--secrecy-level", "1", "--json", str(rep)]) == 0
    data = json.loads(rep.read_text())
    assert [s["p_deception"] for s in data["spoofing"]] == ["3/7", "1/3"]
    assert data["secrecy"]["perfect"] is True
    assert run(argv + ["--secrecy-level", "1", "--method", "frequency", "--json", str(rep)]) == 0
    assert json.loads(rep.read_text())["secrecy"]["method"] == "frequency-shortcut"


def test_audit_without_matrix_reports_witness(fano_file, tmp_path):
    rep = tmp_path / "r.json"
    argv = ["audit", "--design", str(fano_file), "--max-spoofing-order", "1", "--secrecy-level", "1"]
    assert run(argv + ["--json", str(rep)]) == 0
    secrecy = json.loads(rep.read_text())["secrecy"]
    assert secrecy["perfect"] is False and "witness" in secrecy


def test_audit_of_broken_design_is_a_verification_failure(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 7 3 1 6\n0 3 4\n0 5 6\n1 3 5\n1 4 6\n2 3 6\n2 4 5\n")
    argv = ["audit", "--design", str(bad), "--max-spoofing-order", "1", "--secrecy-level", "1"]
    assert run(argv + ["--json", str(tmp_path / "r.json")]) == 4
    assert not (tmp_path / "r.json").exists()


def test_budget_exhaustion_exit_3(tmp_path):
    argv = ["construct", "--family", "cyclic", "--t", "3", "--v", "26", "--k", "4", "--time-limit", "0.01"]
    assert run(argv + ["-o", str(tmp_path / "c.txt")]) == 3


def test_demo_rejects_wrong_residue(tmp_path):
    assert run(["demo", "--v", "14", "--out", str(tmp_path / "d")]) == 2


def test_write_is_atomic_overwrite(fano_file):
    before = fano_file.read_text()
    assert run(["construct", "--family", "sts", "--v", "7", "-o", str(fano_file)]) == 0
    assert fano_file.read_text() == before
    assert not list(fano_file.parent.glob(".*.tmp"))
