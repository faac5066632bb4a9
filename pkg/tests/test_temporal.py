from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import groups_by_union_find, max_multiplicity_by_days, overlap_by_days
from transfernet.records import STAY_ORDER, StayRecord
from transfernet.temporal import (
    OverlapGroup,
    components,
    connected_overlap_groups,
    max_daily_multiplicity,
    overlap_days,
    stay_duration,
)


def rec(adm, dis, fac="H1", pid="P"):
    return StayRecord(pid, "male", fac, "03", adm, dis, "I21", None)


def test_inclusive_arithmetic():
    assert stay_duration(rec(5, 5)) == 1
    assert overlap_days(rec(0, 2), rec(2, 7)) == 1
    assert overlap_days(rec(0, 2), rec(3, 7)) == 0
    assert overlap_days(rec(0, 37), rec(15, 19)) == 5


interval = st.tuples(st.integers(0, 200), st.integers(0, 59)).map(lambda t: (t[0], t[0] + t[1]))


@settings(max_examples=500, deadline=None)
@given(interval, interval)
def test_overlap_matches_day_sets(a, b):
    ra, rb = rec(*a), rec(*b)
    assert overlap_days(ra, rb) == overlap_by_days(a, b) == overlap_days(rb, ra)


def _sorted_stays(intervals):
    return sorted((rec(a, d, f"H{i}") for i, (a, d) in enumerate(intervals)), key=STAY_ORDER)


@settings(max_examples=300, deadline=None)
@given(st.lists(interval, max_size=25))
def test_groups_match_union_find(intervals):
    stays = _sorted_stays(intervals)
    got = sorted((frozenset(r.facility_id for r in g.members) for g in connected_overlap_groups(stays)),
                 key=lambda s: sorted(s))
    want = sorted((frozenset(f"H{i}" for i in c) for c in groups_by_union_find(intervals)),
                  key=lambda s: sorted(s))
    assert got == want


@settings(max_examples=300, deadline=None)
@given(st.lists(interval, min_size=2, max_size=15))
def test_multiplicity_and_partition(intervals):
    stays = _sorted_stays(intervals)
    runs = components(stays)
    assert sum(len(r) for r in runs) == len(stays)
    for g in connected_overlap_groups(stays):
        iv = [(r.admission, r.discharge) for r in g.members]
        assert max_daily_multiplicity(g) == max_multiplicity_by_days(iv)
        assert 2 <= g.max_multiplicity <= len(g)
        assert g.span == (min(a for a, _ in iv), max(d for _, d in iv))
    # distinct runs never touch
    for x, y in zip(runs, runs[1:]):
        assert max(r.discharge for r in x) < y[0].admission


def test_chain_is_one_group_with_multiplicity_two():
    stays = [rec(0, 3, "A"), rec(3, 6, "B"), rec(6, 9, "C")]
    (g,) = connected_overlap_groups(stays)
    assert len(g) == 3 and g.max_multiplicity == 2


def test_group_needs_two_members():
    with pytest.raises(ValueError):
        OverlapGroup("P", (rec(0, 1),))


def test_random_patients_against_union_find():
    rnd = random.Random(11)
    for _ in range(200):
        iv = []
        for _ in range(rnd.randint(0, 50)):
            a = rnd.randint(0, 400)
            iv.append((a, a + rnd.randint(0, 60)))
        stays = _sorted_stays(iv)
        got = sorted(sorted(r.facility_id for r in g.members) for g in connected_overlap_groups(stays))
        want = sorted(sorted(f"H{i}" for i in c) for c in groups_by_union_find(iv))
        assert got == want
