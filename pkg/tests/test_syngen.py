from __future__ import annotations

from collections import Counter

import pytest

from roundtrip import expected, mismatches, recover, table_types
from transfernet.classify import TABLE_TYPES
from transfernet.records import ConfigError
from transfernet.stats import (
    admissions_per_facility,
    patients_per_facility,
    stay_duration_histogram,
)
from transfernet.syngen import GenConfig, GroundTruth, generate, plant_all


def test_same_config_same_bytes():
    cfg = plant_all(2, seed=3, n_patients=300)
    a, ta = generate(cfg)
    b, tb = generate(plant_all(2, seed=3, n_patients=300))
    assert a == b and ta.to_json() == tb.to_json()
    c, _ = generate(plant_all(2, seed=4, n_patients=300))
    assert a != c


def test_zero_plants_means_no_overlaps():
    data, truth = generate(GenConfig(seed=1, n_patients=500))
    _, _, res, overlaps, _ = recover(data)
    assert truth.overlaps == [] and res.n_groups == 0 and not overlaps


@pytest.mark.parametrize("kw", [
    dict(n_patients=5, planted={"StandardTransfer": 6}),
    dict(n_facilities=2, planted={"UnknownMultiple(4+)": 1}),
    dict(planted={"NoSuchClass": 1}),
    dict(start="2010-01-01", end="2010-01-20", planted={"StandardTransfer": 1}),
    dict(start="2010-02-01", end="2010-01-01"),
    dict(n_patients=-1),
])
def test_infeasible_configs(kw):
    with pytest.raises(ConfigError):
        GenConfig(**kw).validate()


def test_roundtrip_with_noise():
    cfg = plant_all(5, seed=9, n_patients=400, no_diagnosis_rows=7, malformed_rows=4)
    data, truth = generate(cfg)
    rs, report, res, overlaps, events = recover(data)
    want_o, want_e = expected(truth)
    assert mismatches(overlaps, want_o) == (Counter(), Counter())
    assert mismatches(events, want_e) == (Counter(), Counter())
    assert table_types(overlaps) == Counter({t: 5 for t in TABLE_TYPES})
    assert report.accepted == truth.ingest["accepted"]
    assert report.dropped_no_diagnosis == 7 and report.dropped_malformed == 4
    assert report.per_region_counts == truth.ingest["per_region_counts"]
    assert admissions_per_facility(rs)[0] == truth.admissions_per_facility
    assert patients_per_facility(rs)[0] == truth.patients_per_facility
    assert dict(stay_duration_histogram(rs)) == truth.stay_durations
    assert dict(res.society_gaps) == truth.society_gaps
    assert sorted(map(list, res.network().edges.items())) == sorted(
        [[(a, b, k), c] for a, b, k, c in truth.network])


def test_record_budget_mode():
    data, truth = generate(GenConfig(seed=2, n_records=3000, planted={"TemporaryTransfer": 3}))
    assert truth.ingest["accepted"] >= 3000
    assert data.count(b"\n") - 1 == truth.ingest["accepted"]
    assert truth.class_counts() == Counter({"TemporaryTransfer": 3})


def test_truth_json_roundtrip():
    _, truth = generate(plant_all(1, seed=0, n_patients=50))
    again = GroundTruth.from_json(truth.to_json())
    assert again.to_json() == truth.to_json()


def test_dates_stay_inside_range():
    cfg = GenConfig(seed=5, n_patients=300, start="2012-01-01", end="2012-06-30", gap_mean=40,
                    planted={"UnknownMultiple(3)": 20})
    data, _ = generate(cfg)
    for line in data.decode().splitlines()[1:]:
        f = line.split(",")
        assert "2012-01-01" <= f[4] <= f[5] <= "2012-06-30"
