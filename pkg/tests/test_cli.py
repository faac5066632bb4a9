from __future__ import annotations

import json
import subprocess
import sys

import pytest

from transfernet.cli import main
from transfernet.classify import TABLE_TYPES


def files(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


@pytest.fixture
def cohort(tmp_path):
    csv_path = tmp_path / "cohort.csv"
    truth = tmp_path / "truth.json"
    assert main(["generate", "-o", str(csv_path), "--truth", str(truth), "--seed", "7",
                 "--patients", "600", "--plant-all-classes", "4", "--no-diagnosis-rows", "3"]) == 0
    return csv_path, json.loads(truth.read_text())


def test_generate_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["generate", "-o", str(tmp_path / name / "c.csv"), "--truth",
                     str(tmp_path / name / "t.json"), "--seed", "7", "--patients", "1000"]) == 0
    assert files(tmp_path / "a") == files(tmp_path / "b")


def test_ingest_report(cohort, tmp_path):
    csv_path, truth = cohort
    rep = tmp_path / "out" / "report.json"
    assert main(["ingest", "--input", str(csv_path), "--report", str(rep)]) == 0
    doc = json.loads(rep.read_text())
    assert doc["accepted"] == truth["ingest"]["accepted"]
    assert doc["dropped_no_diagnosis"] == 3
    txt = tmp_path / "report.txt"
    assert main(["ingest", "--input", str(csv_path), "--report", str(txt), "--region", "03"]) == 0
    assert "accepted=" in txt.read_text()


def test_analyze_matches_truth(cohort, tmp_path):
    csv_path, truth = cohort
    out = tmp_path / "an"
    assert main(["analyze", "-i", str(csv_path), "-o", str(out)]) == 0
    table = dict(line.split(",")[:2] for line in (out / "overlap_table.csv").read_text().splitlines()[1:])
    assert {k: int(v) for k, v in table.items() if k != "total"} == {t: 4 for t in TABLE_TYPES}
    manifest = json.loads((out / "manifest.json").read_text())
    listed = {e["file"] for e in manifest["outputs"]}
    assert listed == set(files(out)) - {"manifest.json"}
    adm = (out / "admissions_per_facility.csv").read_text().splitlines()[1:]
    assert {ln.split(",")[0]: int(ln.split(",")[1]) for ln in adm} == truth["admissions_per_facility"]


def test_analyze_period_and_empty_selection(cohort, tmp_path, caplog):
    csv_path, _ = cohort
    assert main(["analyze", "-i", str(csv_path), "-o", str(tmp_path / "y"), "--period",
                 "2010-01-01:2010-12-31"]) == 0
    assert main(["analyze", "-i", str(csv_path), "-o", str(tmp_path / "e"), "--region", "ZZ"]) == 0
    assert "no records" in caplog.text
    assert "total,0," in (tmp_path / "e" / "overlap_table.csv").read_text()
    assert main(["analyze", "-i", str(csv_path), "-o", str(tmp_path / "bad"), "--period", "2011-01-01:2010-01-01"]) == 2


def test_network_kinds_and_truth(cohort, tmp_path):
    csv_path, truth = cohort
    out = tmp_path / "net"
    assert main(["network", "-i", str(csv_path), "-o", str(out), "--format", "both"]) == 0
    rows = [ln.split(",") for ln in (out / "network.csv").read_text().splitlines()[1:]]
    assert sorted([a, b, k, int(c)] for a, b, k, c in rows) == sorted(truth["network"])
    assert (out / "network.dot").read_text().startswith("digraph transfers {")
    out2 = tmp_path / "direct"
    assert main(["network", "-i", str(csv_path), "-o", str(out2), "--kind", "direct"]) == 0
    kinds = {ln.split(",")[2] for ln in (out2 / "network.csv").read_text().splitlines()[1:]}
    assert kinds == {"direct"}
    assert not (out2 / "indirect_gaps.csv").exists()


def test_every_command_is_deterministic(cohort, tmp_path):
    csv_path, _ = cohort
    for run in ("r1", "r2"):
        d = tmp_path / run
        assert main(["ingest", "-i", str(csv_path), "--report", str(d / "rep.json")]) == 0
        assert main(["analyze", "-i", str(csv_path), "-o", str(d / "an")]) == 0
        assert main(["network", "-i", str(csv_path), "-o", str(d / "net"), "--format", "both"]) == 0
    assert files(tmp_path / "r1") == files(tmp_path / "r2")


def test_exit_codes(tmp_path, capsys):
    assert main(["ingest", "-i", str(tmp_path / "missing.csv"), "--report", str(tmp_path / "r.json")]) == 2
    assert "not found" in capsys.readouterr().err
    with pytest.raises(SystemExit) as e:
        main(["analyze", "--bogus"])
    assert e.value.code == 2
    assert main(["generate", "-o", str(tmp_path / "c.csv"), "--patients", "3",
                 "--plant", "StandardTransfer=10"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_bytes(b"patient_id,gender,facility_id,region_code,admission_date,discharge_date,icd10_code\n\xff\xfe,\n")
    assert main(["ingest", "-i", str(bad), "--report", str(tmp_path / "r.json")]) == 1


def test_config_file(tmp_path):
    conf = tmp_path / "run.toml"
    conf.write_text('seed = 11\n[generate]\npatients = 50\nplant-all-classes = 1\n')
    out = tmp_path / "c.csv"
    assert main(["--config", str(conf), "generate", "-o", str(out)]) == 0
    assert main(["generate", "-o", str(tmp_path / "d.csv"), "--seed", "11", "--patients", "50",
                 "--plant-all-classes", "1"]) == 0
    assert out.read_bytes() == (tmp_path / "d.csv").read_bytes()
    conf.write_text("[generate]\nbogus = 1\n")
    assert main(["--config", str(conf), "generate", "-o", str(out)]) == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "transfernet", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "generate" in r.stdout
