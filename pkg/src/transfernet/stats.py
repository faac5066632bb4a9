"""Descriptive statistics over record sets: counts per facility, duration
histograms, per-patient entry summaries and daily occupancy.

All histograms are :class:`collections.Counter` objects, so partial results
computed over disjoint shards combine with ``+``.
"""
from __future__ import annotations

import csv
import io
import statistics
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .records import GENDERS, PatientIndex, StayRecord, format_day
from .temporal import OverlapGroup, components, overlap_days


def decade_bin(n: int) -> int:
    """k such that 10**k <= n <= 10**(k+1) - 1."""
    if n < 1:
        raise ValueError("decade bins are defined for positive counts")
    return len(str(int(n))) - 1


def decade_label(k: int) -> str:
    return f"{10 ** k}-{10 ** (k + 1) - 1}"


class DecadeHistogram(Counter):
    """Number of facilities per decade bin of some per-facility count."""

    @classmethod
    def of(cls, values: Iterable[int]) -> DecadeHistogram:
        return cls(decade_bin(v) for v in values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin", "count"])
        for k in sorted(self):
            w.writerow([decade_label(k), self[k]])
        return buf.getvalue()


def histogram_csv(hist: Mapping[int, int], header=("bin", "count")) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for k in sorted(hist):
        w.writerow([k, hist[k]])
    return buf.getvalue()


def _in_period(period):
    if period is None:
        return None
    lo, hi = period
    if lo > hi:
        raise ValueError("period start after end")
    return lo, hi


def admissions_per_facility(rs: Iterable[StayRecord], period=None):
    """Admissions per facility and the decade histogram over facilities.

    With a ``(first_day, last_day)`` period only records admitted inside it count.
    """
    period = _in_period(period)
    if period is None:
        counts = Counter(r.facility_id for r in rs)
    else:
        lo, hi = period
        counts = Counter(r.facility_id for r in rs if lo <= r.admission <= hi)
    return dict(sorted(counts.items())), DecadeHistogram.of(counts.values())


def patients_per_facility(rs: Iterable[StayRecord], period=None):
    period = _in_period(period)
    seen: dict[str, set] = {}
    for r in rs:
        if period is not None and not (period[0] <= r.admission <= period[1]):
            continue
        s = seen.get(r.facility_id)
        if s is None:
            s = seen[r.facility_id] = set()
        s.add(r.patient_id)
    counts = {f: len(s) for f, s in sorted(seen.items())}
    return counts, DecadeHistogram.of(counts.values())


@dataclass(frozen=True)
class EntrySummary:
    patients: int
    min: int
    max: int
    median: float
    mean: float


def entries_per_patient_summary(rs) -> dict[str, EntrySummary | None]:
    """Summary of hospitalisation counts per patient, split by gender.

    Accepts records or a :class:`PatientIndex`.  A patient whose records
    disagree on gender counts as ``"unknown"``.  Strata without patients map
    to ``None``; key ``"all"`` pools every patient.
    """
    strata: dict[str, list[int]] = {g: [] for g in GENDERS}
    if isinstance(rs, PatientIndex):
        for stays in rs.values():
            g = stays[0].gender
            if any(r.gender != g for r in stays):
                g = "unknown"
            strata[g].append(len(stays))
    else:
        n_entries: Counter = Counter()
        gender: dict[str, str] = {}
        for r in rs:
            n_entries[r.patient_id] += 1
            if gender.setdefault(r.patient_id, r.gender) != r.gender:
                gender[r.patient_id] = "unknown"
        for pid, n in n_entries.items():
            strata[gender[pid]].append(n)
    strata["all"] = [n for g in GENDERS for n in strata[g]]
    out: dict[str, EntrySummary | None] = {}
    for g, vals in strata.items():
        out[g] = EntrySummary(len(vals), min(vals), max(vals), statistics.median(vals),
                              statistics.fmean(vals)) if vals else None
    return out


def stay_duration_histogram(rs: Iterable[StayRecord]) -> Counter:
    return Counter(r.discharge - r.admission + 1 for r in rs)


def society_gaps(stays) -> list[int]:
    """Full days at home between consecutive episodes of one patient's sorted stays."""
    gaps = []
    prev_end = None
    for run in components(stays):
        start = run[0].admission
        if prev_end is not None:
            gaps.append(start - prev_end - 1)
        prev_end = max(r.discharge for r in run)
    return gaps


def society_duration_histogram(index: PatientIndex) -> Counter:
    hist: Counter = Counter()
    for stays in index.values():
        if len(stays) > 1:
            hist.update(society_gaps(stays))
    return hist


@dataclass(frozen=True)
class OccupancySeries:
    """Patients present per day at one facility; ``counts[i]`` is day ``start + i``."""

    facility_id: str
    start: int
    counts: np.ndarray

    def __getitem__(self, day: int) -> int:
        i = day - self.start
        if 0 <= i < len(self.counts):
            return int(self.counts[i])
        return 0

    def as_dict(self) -> dict[int, int]:
        return {self.start + i: int(c) for i, c in enumerate(self.counts)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["day", "count"])
        for i, c in enumerate(self.counts):
            w.writerow([format_day(self.start + i), int(c)])
        return buf.getvalue()


def occupancy_timeseries(rs: Iterable[StayRecord], facility: str, day_range: tuple[int, int]) -> OccupancySeries:
    """Daily census of one facility over an inclusive day range.

    A facility without any stay in ``rs`` gets an empty series; indexing it
    still returns 0 for every day.
    """
    lo, hi = day_range
    if lo > hi:
        raise ValueError("range start after end")
    n = hi - lo + 1
    delta = np.zeros(n + 1, dtype=np.int64)
    starts, ends = [], []
    known = False
    for r in rs:
        if r.facility_id != facility:
            continue
        known = True
        if r.discharge < lo or r.admission > hi:
            continue
        starts.append(max(r.admission, lo) - lo)
        ends.append(min(r.discharge, hi) - lo + 1)
    if not known:
        return OccupancySeries(facility, lo, np.zeros(0, dtype=np.int64))
    np.add.at(delta, np.asarray(starts, dtype=np.int64), 1)
    np.add.at(delta, np.asarray(ends, dtype=np.int64), -1)
    return OccupancySeries(facility, lo, np.cumsum(delta[:-1]))


@dataclass
class OverlapLengths:
    """Pairwise overlap lengths: two-record groups, and overlapping member
    pairs of larger groups kept apart in ``multi_member``."""

    two_record: Counter
    multi_member: Counter

    def combined(self) -> Counter:
        return self.two_record + self.multi_member

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["length", "count", "from_groups_of_3_or_more"])
        for k in sorted(set(self.two_record) | set(self.multi_member)):
            w.writerow([k, self.two_record.get(k, 0) + self.multi_member.get(k, 0),
                        self.multi_member.get(k, 0)])
        return buf.getvalue()


def overlap_length_histogram(groups: Iterable[OverlapGroup]) -> OverlapLengths:
    two: Counter = Counter()
    multi: Counter = Counter()
    for g in groups:
        ms = g.members
        if len(ms) == 2:
            two[overlap_days(ms[0], ms[1])] += 1
            continue
        for i in range(len(ms)):
            for j in range(i + 1, len(ms)):
                d = overlap_days(ms[i], ms[j])
                if d:
                    multi[d] += 1
    return OverlapLengths(two, multi)
