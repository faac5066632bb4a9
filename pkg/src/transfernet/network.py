"""Transfer inference and the weighted directed facility network."""
from __future__ import annotations

import csv
import io
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import NamedTuple

from .classify import OverlapClass, OverlapType, classify_group
from .records import ConfigError, StayRecord
from .temporal import OverlapGroup, components

DIRECT = "direct"
INDIRECT = "indirect"


class TransferEvent(NamedTuple):
    patient_id: str
    from_facility: str
    to_facility: str
    kind: str
    day: int
    gap_days: int = 0


def direct_events(g: OverlapGroup, cls: OverlapClass | None = None) -> list[TransferEvent]:
    """Direct transfers implied by one classified two-record group."""
    if cls is None:
        cls = classify_group(g)
    t = cls.type
    if len(g.members) != 2:
        return []
    a, b = g.members
    pid = g.patient_id
    if t is OverlapType.STANDARD_TRANSFER:
        first, second = (a, b) if a.admission < b.admission else (b, a)
        return [TransferEvent(pid, first.facility_id, second.facility_id, DIRECT, first.discharge)]
    if t is OverlapType.FIRST_DAY_TRANSFER or t is OverlapType.LAST_DAY_TRANSFER:
        short, other = (a, b) if a.admission == a.discharge else (b, a)
        if t is OverlapType.FIRST_DAY_TRANSFER:
            return [TransferEvent(pid, short.facility_id, other.facility_id, DIRECT, short.admission)]
        return [TransferEvent(pid, other.facility_id, short.facility_id, DIRECT, short.admission)]
    if t is OverlapType.TEMPORARY_TRANSFER:
        inner, outer = (a, b) if b.admission < a.admission else (b, a)
        return [
            TransferEvent(pid, outer.facility_id, inner.facility_id, DIRECT, inner.admission),
            TransferEvent(pid, inner.facility_id, outer.facility_id, DIRECT, inner.discharge),
        ]
    return []


def infer_direct(groups: Iterable[OverlapGroup]) -> list[TransferEvent]:
    out: list[TransferEvent] = []
    for g in groups:
        out.extend(direct_events(g))
    return out


def exit_stay(run) -> StayRecord:
    """Stay a patient leaves an episode from: latest discharge, then latest admission, then largest facility id."""
    return max(run, key=lambda r: (r.discharge, r.admission, r.facility_id))


def entry_stay(run) -> StayRecord:
    """Stay a patient enters an episode through: earliest admission, then earliest discharge, then smallest facility id."""
    return min(run, key=lambda r: (r.admission, r.discharge, r.facility_id))


def indirect_events(stays, max_gap: int | None = None,
                    same_facility: bool = True) -> list[TransferEvent]:
    """Indirect transfers between consecutive episodes of one patient's sorted stays."""
    return indirect_from_runs(components(stays), max_gap, same_facility)


def indirect_from_runs(runs, max_gap=None, same_facility=True) -> list[TransferEvent]:
    out = []
    prev = None
    prev_end = 0
    for run in runs:
        if prev is not None:
            gap = run[0].admission - prev_end - 1
            if max_gap is None or gap <= max_gap:
                src = exit_stay(prev).facility_id
                dst = entry_stay(run).facility_id
                if same_facility or src != dst:
                    out.append(TransferEvent(run[0].patient_id, src, dst, INDIRECT, run[0].admission, gap))
        prev = run
        prev_end = max(r.discharge for r in run)
    return out


def infer_indirect(index, max_gap: int | None = None, same_facility: bool = True) -> list[TransferEvent]:
    """Indirect events for every patient of a :class:`PatientIndex`.

    Episodes are runs of mutually overlapping stays; the gap is the number
    of full days at home, so a discharge followed by admission the next day
    has gap 0.  ``same_facility=False`` drops readmissions to the facility
    just left.
    """
    out: list[TransferEvent] = []
    for stays in index.values():
        if len(stays) > 1:
            out.extend(indirect_events(stays, max_gap, same_facility))
    return out


@dataclass
class FacilityNetwork:
    nodes: set = field(default_factory=set)
    edges: Counter = field(default_factory=Counter)
    gap_histograms: dict = field(default_factory=dict)

    def add(self, ev: TransferEvent):
        self.nodes.add(ev.from_facility)
        self.nodes.add(ev.to_facility)
        key = (ev.from_facility, ev.to_facility, ev.kind)
        self.edges[key] += 1
        if ev.kind == INDIRECT:
            self.gap_histograms.setdefault(key, Counter())[ev.gap_days] += 1

    def __add__(self, other: FacilityNetwork) -> FacilityNetwork:
        net = FacilityNetwork(self.nodes | other.nodes, self.edges + other.edges, {})
        for src in (self.gap_histograms, other.gap_histograms):
            for k, h in src.items():
                net.gap_histograms[k] = net.gap_histograms.get(k, Counter()) + h
        return net

    def filter_kind(self, kind: str) -> FacilityNetwork:
        net = FacilityNetwork()
        for (a, b, k), c in self.edges.items():
            if k == kind:
                net.nodes.update((a, b))
                net.edges[(a, b, k)] = c
                if (a, b, k) in self.gap_histograms:
                    net.gap_histograms[(a, b, k)] = Counter(self.gap_histograms[(a, b, k)])
        return net

    def total_weight(self) -> int:
        return sum(self.edges.values())


def build_network(events: Iterable[TransferEvent]) -> FacilityNetwork:
    net = FacilityNetwork()
    for ev in events:
        net.add(ev)
    return net


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_network(net: FacilityNetwork, fmt: str = "csv") -> bytes:
    """Serialise as edge-list CSV (``from,to,kind,count``) or a DOT digraph.

    Rows and statements are sorted lexicographically so the bytes depend
    only on the network contents.
    """
    edges = sorted(net.edges.items())
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["from", "to", "kind", "count"])
        for (a, b, k), c in edges:
            w.writerow([a, b, k, c])
        return buf.getvalue().encode("utf-8")
    if fmt == "dot":
        lines = ["digraph transfers {"]
        for n in sorted(net.nodes):
            lines.append(f"  {_dot_quote(n)};")
        for (a, b, k), c in edges:
            style = "solid" if k == DIRECT else "dashed"
            lines.append(f'  {_dot_quote(a)} -> {_dot_quote(b)} [label="{c}", kind="{k}", weight={c}, style={style}];')
        lines.append("}")
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ConfigError(f"unknown network format {fmt!r}; expected 'csv' or 'dot'")


def export_gap_histograms(net: FacilityNetwork) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["from", "to", "gap_days", "count"])
    for (a, b, _), h in sorted(net.gap_histograms.items()):
        for gap in sorted(h):
            w.writerow([a, b, gap, h[gap]])
    return buf.getvalue().encode("utf-8")


def parse_edge_csv(data: bytes) -> Counter:
    rows = csv.DictReader(io.StringIO(data.decode("utf-8")))
    if rows.fieldnames != ["from", "to", "kind", "count"]:
        raise ValueError(f"unexpected edge-list header {rows.fieldnames}")
    return Counter({(r["from"], r["to"], r["kind"]): int(r["count"]) for r in rows})
