"""Slow, obviously-correct reference implementations used only by the tests.

Nothing here imports the package's interval or classification code.
"""
from __future__ import annotations

from collections import Counter


def day_set(adm: int, dis: int) -> set[int]:
    return set(range(adm, dis + 1))


def overlap_by_days(a, b) -> int:
    return len(day_set(a[0], a[1]) & day_set(b[0], b[1]))


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def groups_by_union_find(intervals) -> list[frozenset[int]]:
    """Index sets of connected overlapping intervals with at least two members.

    Every pair is tested by day-set intersection, so this is quadratic.
    """
    n = len(intervals)
    days = [day_set(a, d) for a, d in intervals]
    uf = UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if days[i] & days[j]:
                uf.union(i, j)
    comps: dict[int, set[int]] = {}
    for i in range(n):
        comps.setdefault(uf.find(i), set()).add(i)
    return sorted((frozenset(c) for c in comps.values() if len(c) > 1), key=min)


def max_multiplicity_by_days(intervals) -> int:
    c = Counter()
    for a, d in intervals:
        c.update(range(a, d + 1))
    return max(c.values()) if c else 0


def occupancy_by_days(intervals, lo: int, hi: int) -> list[int]:
    return [sum(1 for a, d in intervals if a <= day <= d) for day in range(lo, hi + 1)]


def classify_by_rules(a, b) -> str:
    """Independent transcription of the pair rules on (adm, dis, facility) triples."""
    (a0, a1, fa), (b0, b1, fb) = a, b
    assert overlap_by_days(a, b) > 0
    if fa == fb:
        return "SimultaneousSameFacility" if (a0, a1) == (b0, b1) else "TwoAdmissionsSameFacility"
    if (a0, a1) == (b0, b1):
        return "SimultaneousTwoFacilities"
    short = [x for x in (a, b) if x[0] == x[1]]
    if len(short) == 1:
        s = short[0]
        o = b if s is a else a
        if s[0] == o[0]:
            return "FirstDayTransfer"
        if s[0] == o[1]:
            return "LastDayTransfer"
    for outer, inner in ((a, b), (b, a)):
        if outer[0] < inner[0] and inner[1] < outer[1]:
            return "TemporaryTransfer"
    if overlap_by_days(a, b) == 1 and a0 < a1 and b0 < b1:
        return "StandardTransfer"
    return "UnknownTwoFacilities"
