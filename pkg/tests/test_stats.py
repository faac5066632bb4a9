from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from oracles import occupancy_by_days
from transfernet.records import StayRecord, group_by_patient
from transfernet.stats import (
    DecadeHistogram,
    admissions_per_facility,
    decade_bin,
    decade_label,
    entries_per_patient_summary,
    occupancy_timeseries,
    overlap_length_histogram,
    patients_per_facility,
    society_duration_histogram,
    stay_duration_histogram,
)
from transfernet.temporal import OverlapGroup


def rec(pid, fac, adm, dis, gender="male"):
    return StayRecord(pid, gender, fac, "03", adm, dis, "I21", None)


def test_decade_bins():
    assert decade_bin(37) == 1 and decade_label(1) == "10-99"
    for k in range(7):
        assert decade_bin(10 ** k) == k
        assert decade_bin(10 ** (k + 1) - 1) == k
    with pytest.raises(ValueError):
        decade_bin(0)


@given(st.integers(1, 10 ** 12))
def test_decade_bin_contains_value(n):
    k = decade_bin(n)
    assert 10 ** k <= n <= 10 ** (k + 1) - 1


def test_facility_sizes_5_50_500():
    rs = ([rec(f"a{i}", "A", 0, 0) for i in range(5)]
          + [rec(f"b{i}", "B", 0, 0) for i in range(50)]
          + [rec(f"c{i}", "C", 0, 0) for i in range(500)])
    counts, hist = admissions_per_facility(rs)
    assert counts == {"A": 5, "B": 50, "C": 500}
    assert hist == DecadeHistogram({0: 1, 1: 1, 2: 1})


def test_patients_are_distinct_and_period_filters_by_admission():
    rs = [rec("P", "A", 0, 2), rec("P", "A", 10, 12), rec("P", "A", 20, 22)]
    assert admissions_per_facility(rs)[0] == {"A": 3}
    assert patients_per_facility(rs)[0] == {"A": 1}
    assert admissions_per_facility(rs, (9, 30))[0] == {"A": 2}
    assert admissions_per_facility(rs, (1, 5))[0] == {}
    with pytest.raises(ValueError):
        admissions_per_facility(rs, (5, 1))


def test_entries_summary():
    rs = ([rec("a", "A", 0, 0)] + [rec("b", "A", i * 3, i * 3) for i in range(2)]
          + [rec("c", "A", i * 3, i * 3) for i in range(6)])
    s = entries_per_patient_summary(rs)
    assert (s["male"].median, s["male"].mean, s["male"].min, s["male"].max) == (2, 3, 1, 6)
    assert s["female"] is None
    assert entries_per_patient_summary(group_by_patient(rs)) == s
    mixed = [rec("x", "A", 0, 0, "male"), rec("x", "A", 5, 5, "female")]
    assert entries_per_patient_summary(mixed)["unknown"].patients == 1


def test_duration_histograms():
    rs = [rec("P", "A", 0, 0), rec("P", "A", 10, 16), rec("Q", "A", 0, 6)]
    h = stay_duration_histogram(rs)
    assert h == Counter({1: 1, 7: 2})
    gaps = society_duration_histogram(group_by_patient(
        [rec("P", "A", 0, 3), rec("P", "B", 3, 5), rec("P", "A", 6, 6), rec("P", "A", 10, 10)]))
    # [0,5] merged, then 6 directly after (gap 0), then 3 days at home
    assert gaps == Counter({0: 1, 3: 1})


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("AB"), st.integers(0, 40), st.integers(0, 15)), max_size=30),
       st.integers(-5, 30), st.integers(0, 40))
def test_occupancy_matches_brute_force(stays, lo, width):
    rs = [rec(f"p{i}", f, a, a + d) for i, (f, a, d) in enumerate(stays)]
    hi = lo + width
    series = occupancy_timeseries(rs, "A", (lo, hi))
    want = occupancy_by_days([(r.admission, r.discharge) for r in rs if r.facility_id == "A"], lo, hi)
    if any(r.facility_id == "A" for r in rs):
        assert series.counts.tolist() == want
    else:
        assert len(series.counts) == 0
    for day in range(lo, hi + 1):
        assert series[day] == want[day - lo]


def test_overlap_lengths_split_by_group_size():
    two = OverlapGroup("P", (rec("P", "A", 0, 4), rec("P", "B", 4, 9)))
    three = OverlapGroup("P", (rec("P", "A", 0, 3), rec("P", "B", 3, 6), rec("P", "C", 6, 9)))
    ol = overlap_length_histogram([two, three])
    assert ol.two_record == Counter({1: 1})
    assert ol.multi_member == Counter({1: 2})
    assert ol.combined()[1] == 3


def test_conservation_on_random_cohorts():
    rnd = random.Random(5)
    for _ in range(50):
        rs = []
        for p in range(rnd.randint(0, 30)):
            for _ in range(rnd.randint(1, 6)):
                a = rnd.randint(0, 300)
                rs.append(rec(f"P{p}", rnd.choice("ABCD"), a, a + rnd.randint(0, 20)))
        assert sum(stay_duration_histogram(rs).values()) == len(rs)
        counts, hist = admissions_per_facility(rs)
        assert sum(counts.values()) == len(rs)
        assert sum(hist.values()) == len(counts)
        # permutation invariance
        shuffled = rs[:]
        rnd.shuffle(shuffled)
        assert admissions_per_facility(shuffled) == (counts, hist)
        assert patients_per_facility(shuffled) == patients_per_facility(rs)
