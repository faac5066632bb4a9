"""Overlap taxonomy, four-bit pair codes and ICD-10 chapter groups."""
from __future__ import annotations

import csv
import io
import json
import re
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

from .records import StayRecord
from .temporal import OverlapGroup, overlap_days


class OverlapType(str, Enum):
    STANDARD_TRANSFER = "StandardTransfer"
    FIRST_DAY_TRANSFER = "FirstDayTransfer"
    LAST_DAY_TRANSFER = "LastDayTransfer"
    SIMULTANEOUS_SAME_FACILITY = "SimultaneousSameFacility"
    TEMPORARY_TRANSFER = "TemporaryTransfer"
    SIMULTANEOUS_TWO_FACILITIES = "SimultaneousTwoFacilities"
    UNKNOWN_TWO_FACILITIES = "UnknownTwoFacilities"
    TWO_ADMISSIONS_SAME_FACILITY = "TwoAdmissionsSameFacility"
    UNKNOWN_MULTIPLE = "UnknownMultiple"


class OverlapClass(NamedTuple):
    type: OverlapType
    n: int | None = None

    def __str__(self) -> str:
        if self.type is OverlapType.UNKNOWN_MULTIPLE:
            return f"UnknownMultiple({self.n})"
        return self.type.value

    @property
    def table_type(self) -> str:
        """Label in the ten-row overlap table, where four or more records share one row."""
        if self.type is OverlapType.UNKNOWN_MULTIPLE and self.n >= 4:
            return "UnknownMultiple(4+)"
        return str(self)

    @classmethod
    def parse(cls, label: str) -> OverlapClass:
        m = re.fullmatch(r"UnknownMultiple\((\d+)\)", label)
        if m:
            return unknown_multiple(int(m.group(1)))
        return cls(OverlapType(label))


STANDARD_TRANSFER = OverlapClass(OverlapType.STANDARD_TRANSFER)
FIRST_DAY_TRANSFER = OverlapClass(OverlapType.FIRST_DAY_TRANSFER)
LAST_DAY_TRANSFER = OverlapClass(OverlapType.LAST_DAY_TRANSFER)
SIMULTANEOUS_SAME_FACILITY = OverlapClass(OverlapType.SIMULTANEOUS_SAME_FACILITY)
TEMPORARY_TRANSFER = OverlapClass(OverlapType.TEMPORARY_TRANSFER)
SIMULTANEOUS_TWO_FACILITIES = OverlapClass(OverlapType.SIMULTANEOUS_TWO_FACILITIES)
UNKNOWN_TWO_FACILITIES = OverlapClass(OverlapType.UNKNOWN_TWO_FACILITIES)
TWO_ADMISSIONS_SAME_FACILITY = OverlapClass(OverlapType.TWO_ADMISSIONS_SAME_FACILITY)


def unknown_multiple(n: int) -> OverlapClass:
    # n is the peak number of stays sharing a day; a chain of three or more
    # stays that never triples up on one day has n == 2
    if n < 2:
        raise ValueError("UnknownMultiple needs n >= 2")
    return OverlapClass(OverlapType.UNKNOWN_MULTIPLE, n)


# row order of the overlap-type table
TABLE_TYPES = (
    "StandardTransfer",
    "TwoAdmissionsSameFacility",
    "SimultaneousSameFacility",
    "FirstDayTransfer",
    "TemporaryTransfer",
    "UnknownTwoFacilities",
    "UnknownMultiple(3)",
    "LastDayTransfer",
    "SimultaneousTwoFacilities",
    "UnknownMultiple(4+)",
)


def classify_pair(a: StayRecord, b: StayRecord) -> OverlapClass:
    """Classify two overlapping stays; the first matching rule wins.

    Same-facility rules ignore dates beyond the identical-period test.  The
    outcome never depends on argument order.
    """
    ov = overlap_days(a, b)
    if ov < 1:
        raise ValueError(f"stays do not overlap: {a} / {b}")
    same_period = a.admission == b.admission and a.discharge == b.discharge
    if a.facility_id == b.facility_id:
        return SIMULTANEOUS_SAME_FACILITY if same_period else TWO_ADMISSIONS_SAME_FACILITY
    if same_period:
        return SIMULTANEOUS_TWO_FACILITIES
    one_a = a.admission == a.discharge
    one_b = b.admission == b.discharge
    if one_a != one_b:
        short, other = (a, b) if one_a else (b, a)
        if short.admission == other.admission:
            return FIRST_DAY_TRANSFER
        if short.admission == other.discharge:
            return LAST_DAY_TRANSFER
    if ((a.admission < b.admission and b.discharge < a.discharge)
            or (b.admission < a.admission and a.discharge < b.discharge)):
        return TEMPORARY_TRANSFER
    if ov == 1 and not one_a and not one_b:
        return STANDARD_TRANSFER
    return UNKNOWN_TWO_FACILITIES


def classify_group(g: OverlapGroup) -> OverlapClass:
    if len(g.members) == 2:
        return classify_pair(*g.members)
    return unknown_multiple(g.max_multiplicity)


class PairCode(NamedTuple):
    same_facility: int
    same_diagnosis: int
    same_admission: int
    same_discharge: int

    def __str__(self) -> str:
        return f"{self.same_facility}{self.same_diagnosis}{self.same_admission}{self.same_discharge}"


ALL_CODES = tuple(f"{i:04b}" for i in range(16))


def pair_code(a: StayRecord, b: StayRecord, diagnosis_level: str = "code") -> PairCode:
    """Four equality bits: facility, diagnosis, admission day, discharge day.

    ``diagnosis_level="group"`` compares chapter groups instead of full codes;
    an unmappable diagnosis then only matches an identical code.
    """
    if diagnosis_level == "code":
        same_dx = a.diagnosis == b.diagnosis
    elif diagnosis_level == "group":
        ga = _group_or_none(a)
        same_dx = a.diagnosis == b.diagnosis or (ga is not None and ga == _group_or_none(b))
    else:
        raise ValueError(f"unknown diagnosis level {diagnosis_level!r}")
    return PairCode(
        int(a.facility_id == b.facility_id),
        int(same_dx),
        int(a.admission == b.admission),
        int(a.discharge == b.discharge),
    )


# ---------------------------------------------------------------- ICD-10 groups

class UnclassifiedDiagnosis(ValueError):
    """ICD-10 code outside the chapters that carry a group index."""


UNCLASSIFIED = "unclassified"

GROUP_DESCRIPTIONS = {
    1: "Infectious and parasitic diseases",
    2: "Neoplasms",
    3: "Diseases of the blood and blood-forming organs and certain disorders involving the immune mechanism",
    4: "Endocrine, nutritional and metabolic diseases",
    5: "Mental, Behavioral and Neurodevelopmental disorders",
    6: "Diseases of the nervous system",
    7: "Diseases of the eye and adnexa",
    8: "Diseases of the ear and mastoid process",
    9: "Diseases of the circulatory system",
    10: "Diseases of the respiratory system",
    11: "Diseases of the digestive system",
    12: "Diseases of the skin and subcutaneous tissue",
    13: "Diseases of the musculoskeletal system and connective tissue",
    14: "Diseases of the genitourinary system",
    15: "Pregnancy, childbirth and the puerperium",
    16: "Certain conditions originating in the perinatal period",
    17: "Congenital malformations, deformations and chromosomal abnormalities",
    18: "Symptoms, signs and abnormal clinical and laboratory findings, not elsewhere classified",
    19: "Injury, poisoning and certain other consequences of external causes",
    21: "Factors influencing health status and contact with health services",
}

_LETTER_GROUP = {
    "A": 1, "B": 1, "C": 2, "E": 4, "F": 5, "G": 6, "I": 9, "J": 10, "K": 11,
    "L": 12, "M": 13, "N": 14, "O": 15, "P": 16, "Q": 17, "R": 18, "S": 19,
    "T": 19, "Z": 21,
}
_CODE_RE = re.compile(r"([A-Z])(\d)([0-9A-Z])")
_group_cache: dict[str, int] = {}


def diagnosis_group(icd10: str) -> int:
    """Chapter group index of an ICD-10 code (``"I21.0"`` -> 9).

    D and H are split at D50 and H60.  Codes in V-Y, U or the unused
    D90-D99 / H96-H99 ranges raise :class:`UnclassifiedDiagnosis`.
    """
    try:
        return _group_cache[icd10]
    except (KeyError, TypeError):
        pass
    m = _CODE_RE.match(icd10.strip().upper()) if isinstance(icd10, str) else None
    if m is None:
        raise UnclassifiedDiagnosis(f"not an ICD-10 code: {icd10!r}")
    letter = m.group(1)
    if letter in _LETTER_GROUP:
        g = _LETTER_GROUP[letter]
    elif letter in "DH" and m.group(3).isdigit():
        num = int(m.group(2) + m.group(3))
        if letter == "D":
            g = 2 if num <= 49 else 3 if num <= 89 else None
        else:
            g = 7 if num <= 59 else 8 if num <= 95 else None
        if g is None:
            raise UnclassifiedDiagnosis(f"no group for {icd10!r}")
    else:
        raise UnclassifiedDiagnosis(f"no group for {icd10!r}")
    _group_cache[icd10] = g
    return g


def _group_or_none(r: StayRecord) -> int | None:
    try:
        return diagnosis_group(r.icd10)
    except UnclassifiedDiagnosis:
        return None


def diagnosis_pair(a: StayRecord, b: StayRecord) -> tuple[int, int]:
    i, j = diagnosis_group(a.icd10), diagnosis_group(b.icd10)
    return (i, j) if i <= j else (j, i)


def format_dx_pair(p) -> str:
    return p if isinstance(p, str) else f"[{p[0]}, {p[1]}]"


# ---------------------------------------------------------------- tabulation

def _class_sort_key(label: str):
    c = OverlapClass.parse(label)
    t = c.table_type
    pos = TABLE_TYPES.index(t) if t in TABLE_TYPES else len(TABLE_TYPES)
    return (pos, c.n or 0)


@dataclass
class OverlapTable:
    counts: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def percentages(self) -> dict[str, float | None]:
        t = self.total
        return {k: (100.0 * v / t if t else None) for k, v in self.counts.items()}

    def by_table_type(self) -> dict[str, int]:
        """Counts for all ten table rows, zeros included, in table order.

        Chains of three or more stays with at most two on any day have no
        row of their own; they get a trailing ``UnknownMultiple(2)`` row
        only when present.
        """
        out = dict.fromkeys(TABLE_TYPES, 0)
        for label, v in sorted(self.counts.items(), key=lambda kv: _class_sort_key(kv[0])):
            t = OverlapClass.parse(label).table_type
            out[t] = out.get(t, 0) + v
        return out

    def rows(self) -> list[tuple[str, int, float | None]]:
        t = self.total
        return [(k, self.counts[k], 100.0 * self.counts[k] / t if t else None)
                for k in sorted(self.counts, key=_class_sort_key)]

    def to_csv(self, collapsed: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class", "count", "percent"])
        t = self.total
        items = self.by_table_type().items() if collapsed else [(k, c) for k, c, _ in self.rows()]
        for k, c in items:
            w.writerow([k, c, f"{100.0 * c / t:.2f}" if t else ""])
        w.writerow(["total", t, "100.00" if t else ""])
        return buf.getvalue()


@dataclass
class Tabulation:
    """Overlap-class counts plus the two-record cross-tabulations.

    Partial tabulations over disjoint patient sets combine with ``+``.
    """

    table: OverlapTable = field(default_factory=OverlapTable)
    code_counts: Counter = field(default_factory=Counter)
    code_diagnosis_counts: dict[str, Counter] = field(default_factory=dict)
    overlap_lengths: Counter = field(default_factory=Counter)

    def add(self, g: OverlapGroup, cls: OverlapClass | None = None, diagnosis_level: str = "code"):
        if cls is None:
            cls = classify_group(g)
        self.table.counts[str(cls)] += 1
        if len(g.members) != 2:
            return
        a, b = g.members
        code = str(pair_code(a, b, diagnosis_level))
        self.code_counts[code] += 1
        try:
            dx = diagnosis_pair(a, b)
        except UnclassifiedDiagnosis:
            dx = UNCLASSIFIED
        self.code_diagnosis_counts.setdefault(code, Counter())[dx] += 1
        self.overlap_lengths[overlap_days(a, b)] += 1

    def __add__(self, other: Tabulation) -> Tabulation:
        out = Tabulation(OverlapTable(self.table.counts + other.table.counts),
                         self.code_counts + other.code_counts,
                         {}, self.overlap_lengths + other.overlap_lengths)
        for src in (self.code_diagnosis_counts, other.code_diagnosis_counts):
            for code, c in src.items():
                out.code_diagnosis_counts[code] = out.code_diagnosis_counts.get(code, Counter()) + c
        return out

    def code_counts_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["code", "count"])
        for code in ALL_CODES:
            w.writerow([code, self.code_counts.get(code, 0)])
        return buf.getvalue()

    def code_diagnosis_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["code", "diagnosis_pair", "count"])
        for code in ALL_CODES:
            c = self.code_diagnosis_counts.get(code)
            if not c:
                continue
            for dx, n in sorted(c.items(), key=lambda kv: (-kv[1], _dx_key(kv[0]))):
                w.writerow([code, format_dx_pair(dx), n])
        return buf.getvalue()

    def as_dict(self) -> dict:
        pct = self.table.percentages()
        return {
            "total": self.table.total,
            "classes": {k: {"count": c, "percent": pct[k]} for k, c, _ in self.table.rows()},
            "table_types": self.table.by_table_type(),
            "codes": {k: self.code_counts[k] for k in ALL_CODES if self.code_counts.get(k)},
            "code_diagnosis_pairs": {
                code: {format_dx_pair(dx): n for dx, n in
                       sorted(c.items(), key=lambda kv: (-kv[1], _dx_key(kv[0])))}
                for code, c in sorted(self.code_diagnosis_counts.items())
            },
            "overlap_lengths": {str(k): v for k, v in sorted(self.overlap_lengths.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"


def _dx_key(dx):
    return (1, 0, 0) if isinstance(dx, str) else (0, *dx)


def tabulate(groups: Iterable[OverlapGroup], diagnosis_level: str = "code") -> Tabulation:
    tab = Tabulation()
    for g in groups:
        tab.add(g, diagnosis_level=diagnosis_level)
    return tab
