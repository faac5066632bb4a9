"""Inclusive-day interval arithmetic over stays.

A stay covers every day from admission to discharge inclusive, so a
discharge on the same day as another admission is a one-day overlap.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from collections.abc import Sequence

from .records import StayRecord


def stay_duration(r: StayRecord) -> int:
    return r.discharge - r.admission + 1


def overlap_days(a: StayRecord, b: StayRecord) -> int:
    n = min(a.discharge, b.discharge) - max(a.admission, b.admission) + 1
    return n if n > 0 else 0


def max_coverage(intervals: Sequence[tuple[int, int]]) -> int:
    """Largest number of inclusive intervals sharing a single day.

    Sweep over +1 events at each start and -1 events at end + 1; at equal
    positions the -1 events sort first, which is what inclusive ends need.
    """
    events = sorted([(s, 1) for s, _ in intervals] + [(e + 1, -1) for _, e in intervals])
    best = cur = 0
    for _, delta in events:
        cur += delta
        if cur > best:
            best = cur
    return best


@dataclass(frozen=True)
class OverlapGroup:
    """A maximal connected set of at least two overlapping stays of one patient."""

    patient_id: str
    members: tuple[StayRecord, ...]
    span: tuple[int, int] = field(init=False)
    max_multiplicity: int = field(init=False)

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValueError("an overlap group needs at least two members")
        ms = self.members
        object.__setattr__(self, "span", (min(r.admission for r in ms), max(r.discharge for r in ms)))
        if len(ms) == 2:
            mult = 2
        else:
            mult = max_coverage([(r.admission, r.discharge) for r in ms])
        object.__setattr__(self, "max_multiplicity", mult)

    def __len__(self) -> int:
        return len(self.members)


def max_daily_multiplicity(g: OverlapGroup) -> int:
    return g.max_multiplicity


def components(stays: Sequence[StayRecord]) -> list[list[StayRecord]]:
    """Split admission-sorted stays into connected runs (singletons included).

    A run stays open while the next admission is not after the largest
    discharge seen so far in the run.
    """
    out: list[list[StayRecord]] = []
    if not stays:
        return out
    cur = [stays[0]]
    reach = stays[0].discharge
    for r in stays[1:]:
        if r.admission <= reach:
            cur.append(r)
            if r.discharge > reach:
                reach = r.discharge
        else:
            out.append(cur)
            cur = [r]
            reach = r.discharge
    out.append(cur)
    return out


def connected_overlap_groups(stays: Sequence[StayRecord]) -> list[OverlapGroup]:
    """Overlap groups of one patient's stays, which must be sorted by admission."""
    return [OverlapGroup(c[0].patient_id, tuple(c)) for c in components(stays) if len(c) > 1]


def episodes(stays: Sequence[StayRecord]) -> list[tuple[int, int, list[StayRecord]]]:
    """Per connected run: ``(first admission, last discharge, members)``."""
    return [(c[0].admission, max(r.discharge for r in c), c) for c in components(stays)]
