"""One pass over a :class:`PatientIndex` producing every per-patient result.

Patients are independent, so the pass is a fold of per-patient partial
results; with ``threads > 1`` contiguous patient shards are folded in
forked worker processes and merged in shard order.
"""
from __future__ import annotations

import logging
import multiprocessing as mp
import os
from collections import Counter
from dataclasses import dataclass, field

from .classify import Tabulation, classify_pair, unknown_multiple, OverlapClass
from .network import FacilityNetwork, TransferEvent, direct_events, indirect_from_runs, build_network
from .records import PatientIndex
from .stats import OverlapLengths
from .temporal import OverlapGroup, components, overlap_days

log = logging.getLogger(__name__)


@dataclass
class Analysis:
    tabulation: Tabulation = field(default_factory=Tabulation)
    overlap_lengths: OverlapLengths = field(default_factory=lambda: OverlapLengths(Counter(), Counter()))
    society_gaps: Counter = field(default_factory=Counter)
    direct: list = field(default_factory=list)
    indirect: list = field(default_factory=list)
    groups: list = field(default_factory=list)
    n_groups: int = 0
    folded: FacilityNetwork | None = None

    def __add__(self, other: Analysis) -> Analysis:
        return Analysis(
            self.tabulation + other.tabulation,
            OverlapLengths(self.overlap_lengths.two_record + other.overlap_lengths.two_record,
                           self.overlap_lengths.multi_member + other.overlap_lengths.multi_member),
            self.society_gaps + other.society_gaps,
            self.direct + other.direct,
            self.indirect + other.indirect,
            self.groups + other.groups,
            self.n_groups + other.n_groups,
            None if self.folded is None and other.folded is None
            else (self.folded or FacilityNetwork()) + (other.folded or FacilityNetwork()),
        )

    def network(self, kinds=("direct", "indirect")) -> FacilityNetwork:
        """Facility network of the selected event kinds."""
        if self.folded is not None:
            net = self.folded
            if set(kinds) >= {"direct", "indirect"}:
                return net
            return sum((net.filter_kind(k) for k in kinds), FacilityNetwork())
        events = []
        if "direct" in kinds:
            events += self.direct
        if "indirect" in kinds:
            events += self.indirect
        return build_network(events)


class _Folder(list):
    """List stand-in that adds events to a network instead of keeping them."""

    def __init__(self, net: FacilityNetwork):
        super().__init__()
        self.net = net

    def extend(self, events):
        for ev in events:
            self.net.add(ev)


def _analyse(items, max_gap, same_facility, diagnosis_level, keep_groups, keep_events=True) -> Analysis:
    res = Analysis()
    tab = res.tabulation
    multi = res.overlap_lengths.multi_member
    gaps = res.society_gaps
    if keep_events:
        direct = res.direct
        indirect = res.indirect
    else:
        res.folded = FacilityNetwork()
        direct = indirect = _Folder(res.folded)
    n_groups = 0
    for stays in items:
        if len(stays) < 2:
            continue
        runs = components(stays)
        if len(runs) > 1:
            prev_end = None
            for run in runs:
                if prev_end is not None:
                    gaps[run[0].admission - prev_end - 1] += 1
                prev_end = max(r.discharge for r in run) if len(run) > 1 else run[0].discharge
            indirect.extend(indirect_from_runs(runs, max_gap, same_facility))
        if len(runs) == len(stays):
            continue
        for run in runs:
            if len(run) < 2:
                continue
            n_groups += 1
            g = OverlapGroup(run[0].patient_id, tuple(run))
            if len(run) == 2:
                cls = classify_pair(run[0], run[1])
                direct.extend(direct_events(g, cls))
            else:
                cls = unknown_multiple(g.max_multiplicity)
                for i in range(len(run)):
                    for j in range(i + 1, len(run)):
                        d = overlap_days(run[i], run[j])
                        if d:
                            multi[d] += 1
            tab.add(g, cls, diagnosis_level)
            if keep_groups:
                res.groups.append((g, cls))
    res.overlap_lengths.two_record.update(tab.overlap_lengths)
    res.n_groups = n_groups
    return res


_SHARED: list = []


def _worker(args):
    lo, hi, opts = args
    return _analyse(_SHARED[lo:hi], *opts)


def analyze(index: PatientIndex, *, max_gap: int | None = None, same_facility: bool = True,
            diagnosis_level: str = "code", keep_groups: bool = False, keep_events: bool = True,
            threads: int | None = 1) -> Analysis:
    """Overlap tabulation, overlap lengths, society gaps and transfer events.

    With ``keep_events=False`` events are folded straight into
    ``Analysis.network()`` and the event lists stay empty, which saves
    memory on large cohorts.  Results do not depend on ``threads``
    (``None`` means all cores).
    """
    threads = threads or os.cpu_count() or 1
    opts = (max_gap, same_facility, diagnosis_level, keep_groups, keep_events)
    if threads <= 1 or len(index) < 10_000 or "fork" not in mp.get_all_start_methods():
        return _analyse(index.values(), *opts)
    global _SHARED
    _SHARED = list(index.values())
    n = len(_SHARED)
    bounds = [(n * i // threads, n * (i + 1) // threads, opts) for i in range(threads)]
    log.info("analysing %d patients in %d shards", n, threads)
    try:
        with mp.get_context("fork").Pool(threads) as pool:
            parts = pool.map(_worker, bounds)
    finally:
        _SHARED = []
    out = Analysis()
    for p in parts:
        out = out + p
    return out


def classified_groups(index: PatientIndex) -> list[tuple[OverlapGroup, OverlapClass]]:
    return analyze(index, keep_groups=True).groups


def all_events(a: Analysis) -> list[TransferEvent]:
    return a.direct + a.indirect
