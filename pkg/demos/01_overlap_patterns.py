"""
Classifying overlapping stays
=============================

Eight small patients, each with two or three stays that share at least one
day.  We build the stays by hand, find the overlap groups and classify them.
"""

from transfernet.records import StayRecord, day_index
from transfernet.temporal import connected_overlap_groups, overlap_days
from transfernet.classify import classify_group, pair_code

# (base date, [(facility, first day offset, last day offset), ...])
patients = [
    ("2015-06-30", [("F1", 0, 2), ("F0", 2, 7)]),
    ("2013-02-01", [("F2", 0, 20), ("F1", 20, 20)]),
    ("2014-12-03", [("F2", 0, 37), ("F0", 15, 19)]),
    ("2013-05-25", [("F0", 0, 6), ("F1", 0, 2)]),
    ("2013-07-09", [("F0", 20, 23), ("F1", 23, 30), ("F2", 0, 45)]),
    ("2015-01-13", [("F0", 0, 13), ("F2", 9, 14)]),
    ("2013-09-06", [("F0", 0, 7), ("F1", 0, 7)]),
    ("2013-11-08", [("F1", 0, 20), ("F1", 0, 20)]),
]

for i, (base, bars) in enumerate(patients):
    b = day_index(base)
    stays = sorted(
        (StayRecord(f"P{i}", "female", f, "03", b + s, b + e, "I21.0") for f, s, e in bars),
        key=lambda r: (r.admission, r.discharge, r.facility_id),
    )
    (group,) = connected_overlap_groups(stays)

    # one text row per stay, '#' for every day in hospital
    width = group.span[1] - group.span[0] + 1
    for r in stays:
        lead = r.admission - group.span[0]
        print(f"  {r.facility_id} {'.' * lead}{'#' * (r.discharge - r.admission + 1)}"
              f"{'.' * (width - lead - (r.discharge - r.admission + 1))}")
    cls = classify_group(group)
    if len(stays) == 2:
        print(f"  -> {cls}  overlap {overlap_days(*stays)} day(s), code {pair_code(*stays)}\n")
    else:
        print(f"  -> {cls}  (at most {group.max_multiplicity} stays on one day)\n")
