"""
Descriptive statistics of a cohort
==================================

Admissions and patients per facility in decade bins, stay lengths, time
spent at home between hospitalisations and the daily census of the biggest
facility.
"""

import numpy as np

from transfernet.records import parse_records, group_by_patient, format_day
from transfernet.stats import (
    admissions_per_facility,
    patients_per_facility,
    entries_per_patient_summary,
    stay_duration_histogram,
    society_duration_histogram,
    occupancy_timeseries,
)
from transfernet.syngen import GenConfig, generate

data, _ = generate(GenConfig(seed=7, n_patients=20000, n_facilities=120, facility_skew=1.2))
rs, _ = parse_records(data)
index = group_by_patient(rs)

counts, hist = admissions_per_facility(rs)
print("facilities by number of admissions")
print(hist.to_csv())
_, phist = patients_per_facility(rs)
print("facilities by number of distinct patients")
print(phist.to_csv())

for gender, s in entries_per_patient_summary(index).items():
    if s:
        print(f"{gender:8s} patients {s.patients:6d}  stays min {s.min} median {s.median} "
              f"mean {s.mean:.2f} max {s.max}")

stay = stay_duration_histogram(rs)
days = np.array(sorted(stay))
n = np.array([stay[d] for d in days])
print(f"\nmean stay {np.average(days, weights=n):.2f} days, longest {days.max()}")

home = society_duration_histogram(index)
gaps = np.array(sorted(home))
w = np.array([home[g] for g in gaps])
print(f"median time at home {int(np.median(np.repeat(gaps, w)))} days over {w.sum()} returns")

biggest = max(counts, key=counts.get)
lo = min(r.admission for r in rs)
hi = max(r.discharge for r in rs)
census = occupancy_timeseries(rs, biggest, (lo, hi))
peak = int(np.argmax(census.counts))
print(f"\n{biggest}: {counts[biggest]} admissions, peak census {census.counts[peak]} "
      f"on {format_day(census.start + peak)}, mean {census.counts.mean():.1f}")
