"""Reading hospitalisation records from CSV into immutable in-memory sets.

Dates become integer day indices (days since 1970-01-01) so that every
interval computation downstream is integer arithmetic on inclusive days.
"""
from __future__ import annotations

import csv
import io
import json
import os
from array import array
from collections import Counter, defaultdict
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from datetime import date, datetime
from operator import attrgetter
from typing import BinaryIO, NamedTuple

EPOCH_ORDINAL = date(1970, 1, 1).toordinal()

DEFAULT_REGION = "03"

GENDERS = ("male", "female", "unknown")
_GENDER_ALIASES = {
    "m": "male", "male": "male", "man": "male",
    "f": "female", "female": "female", "w": "female", "woman": "female",
}

FIELDS = (
    "patient_id", "gender", "facility_id", "region_code",
    "admission", "discharge", "icd10", "numeric_code",
)


class IngestError(Exception):
    """The record source could not be read at all."""


class ConfigError(Exception):
    """Invalid schema, run or generator configuration."""


class StayRecord(NamedTuple):
    """One hospitalisation. ``admission`` and ``discharge`` are inclusive day indices."""

    patient_id: str
    gender: str
    facility_id: str
    region_code: str
    admission: int
    discharge: int
    icd10: str | None = None
    numeric_code: int | None = None

    @property
    def diagnosis(self) -> str | None:
        if self.icd10:
            return self.icd10
        if self.numeric_code is not None:
            return f"#{self.numeric_code}"
        return None


def day_index(d: date | str) -> int:
    if isinstance(d, str):
        d = date.fromisoformat(d)
    return d.toordinal() - EPOCH_ORDINAL


def day_to_date(day: int) -> date:
    return date.fromordinal(day + EPOCH_ORDINAL)


def format_day(day: int) -> str:
    return day_to_date(day).isoformat()


@dataclass(frozen=True)
class SchemaConfig:
    """Maps record fields to CSV column names.

    ``columns`` maps each field in :data:`FIELDS` to a header name; fields
    left out fall back to the default names.  ``date_format`` is a
    ``strptime`` pattern; the ISO default takes a faster path.
    """

    columns: Mapping[str, str] = field(default_factory=dict)
    delimiter: str = ","
    date_format: str = "%Y-%m-%d"

    DEFAULT_COLUMNS = {
        "patient_id": "patient_id",
        "gender": "gender",
        "facility_id": "facility_id",
        "region_code": "region_code",
        "admission": "admission_date",
        "discharge": "discharge_date",
        "icd10": "icd10_code",
        "numeric_code": "numeric_code",
    }

    def __post_init__(self):
        unknown = set(self.columns) - set(FIELDS)
        if unknown:
            raise ConfigError(f"unknown record field(s) in schema: {sorted(unknown)}")
        if len(self.delimiter) != 1:
            raise ConfigError("delimiter must be a single character")

    def column_names(self) -> dict[str, str]:
        names = dict(self.DEFAULT_COLUMNS)
        names.update(self.columns)
        return names

    def resolve(self, header: list[str]) -> dict[str, int | None]:
        """Column position per field; optional fields may be missing."""
        positions = {h.strip(): i for i, h in enumerate(header)}
        out: dict[str, int | None] = {}
        for fld, name in self.column_names().items():
            if name in positions:
                out[fld] = positions[name]
            elif fld in ("icd10", "numeric_code", "gender") and fld not in self.columns:
                out[fld] = None
            else:
                raise ConfigError(f"schema column {name!r} (field {fld}) not in header {header}")
        if out["icd10"] is None and out["numeric_code"] is None:
            raise ConfigError("header carries neither an ICD-10 nor a numeric diagnosis column")
        return out


@dataclass
class IngestReport:
    total_rows: int = 0
    accepted: int = 0
    dropped_no_diagnosis: int = 0
    dropped_malformed: int = 0
    per_region_counts: dict[str, int] = field(default_factory=dict)
    per_region_no_diagnosis: dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "total_rows": self.total_rows,
            "accepted": self.accepted,
            "dropped_no_diagnosis": self.dropped_no_diagnosis,
            "dropped_malformed": self.dropped_malformed,
            "per_region_counts": dict(sorted(self.per_region_counts.items())),
            "per_region_no_diagnosis": dict(sorted(self.per_region_no_diagnosis.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"

    def is_consistent(self) -> bool:
        return self.total_rows == self.accepted + self.dropped_no_diagnosis + self.dropped_malformed


class RecordSet:
    """Immutable, file-ordered collection of :class:`StayRecord`.

    ``rows[i]`` is the 0-based data-row number that record ``i`` came from.
    """

    __slots__ = ("_records", "provenance", "rows")

    def __init__(self, records: Iterable[StayRecord] = (), provenance: str = "",
                 rows: Iterable[int] | None = None):
        self._records = tuple(records)
        self.provenance = provenance
        self.rows = array("q", range(len(self._records)) if rows is None else rows)
        if len(self.rows) != len(self._records):
            raise ValueError("rows and records differ in length")

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[StayRecord]:
        return iter(self._records)

    def __getitem__(self, i):
        return self._records[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RecordSet):
            return NotImplemented
        return self._records == other._records

    def where(self, keep, tag: str) -> RecordSet:
        idx = [i for i, r in enumerate(self._records) if keep(r)]
        return RecordSet((self._records[i] for i in idx), f"{self.provenance}|{tag}",
                         (self.rows[i] for i in idx))

    def __repr__(self) -> str:
        return f"RecordSet({len(self)} records, provenance={self.provenance!r})"

    @property
    def records(self) -> tuple[StayRecord, ...]:
        return self._records


class _DateParser:
    """Memoised date-string to day-index conversion (there are few distinct dates)."""

    def __init__(self, fmt: str):
        self.cache: dict[str, int] = {}
        if fmt == "%Y-%m-%d":
            self._parse = date.fromisoformat
        else:
            self._parse = lambda s: datetime.strptime(s, fmt).date()

    def __call__(self, s: str) -> int:
        try:
            return self.cache[s]
        except KeyError:
            s2 = s.strip()
            v = self._parse(s2).toordinal() - EPOCH_ORDINAL
            self.cache[s] = v
            return v


def _open_text(source) -> io.TextIOBase:
    if isinstance(source, (str, os.PathLike)):
        try:
            return open(source, encoding="utf-8", newline="")
        except OSError as exc:
            raise IngestError(f"cannot read {source}: {exc}") from exc
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def parse_records(source: BinaryIO | str | os.PathLike | bytes,
                  schema: SchemaConfig | None = None) -> tuple[RecordSet, IngestReport]:
    """Parse a CSV source in one streaming pass.

    Rows with unparseable dates, missing ids, a wrong field count or
    admission after discharge are counted as malformed.  Rows with neither
    an ICD-10 nor a numeric diagnosis are counted and left out.  No per-row
    problem aborts the run.
    """
    schema = schema or SchemaConfig()
    provenance = str(source) if isinstance(source, (str, os.PathLike)) else "<stream>"
    fh = _open_text(source)
    report = IngestReport()
    region_counts: Counter = Counter()
    region_nodiag: Counter = Counter()
    records: list[StayRecord] = []
    append = records.append
    rows = array("q")
    add_row = rows.append
    parse_day = _DateParser(schema.date_format)
    intern: dict = {}
    setdefault = intern.setdefault
    genders = _GENDER_ALIASES

    try:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            return RecordSet((), provenance), report
        except (UnicodeDecodeError, csv.Error) as exc:
            raise IngestError(f"cannot read header: {exc}") from exc
        pos = schema.resolve(header)
        n_cols = len(header)
        i_pid, i_fac, i_reg = pos["patient_id"], pos["facility_id"], pos["region_code"]
        i_adm, i_dis = pos["admission"], pos["discharge"]
        i_sex, i_icd, i_num = pos["gender"], pos["icd10"], pos["numeric_code"]

        total = malformed = nodiag = 0
        try:
            for row in reader:
                if not row:
                    continue
                total += 1
                if len(row) != n_cols:
                    malformed += 1
                    continue
                pid = row[i_pid].strip()
                fac = row[i_fac].strip()
                reg = row[i_reg].strip()
                if not pid or not fac or not reg:
                    malformed += 1
                    continue
                try:
                    adm = parse_day(row[i_adm])
                    dis = parse_day(row[i_dis])
                    num = None
                    if i_num is not None:
                        s = row[i_num].strip()
                        if s:
                            num = setdefault(int(s), int(s))
                except ValueError:
                    malformed += 1
                    continue
                if adm > dis:
                    malformed += 1
                    continue
                icd = row[i_icd].strip().upper() if i_icd is not None else ""
                reg = setdefault(reg, reg)
                if not icd and num is None:
                    nodiag += 1
                    region_nodiag[reg] += 1
                    continue
                sex = genders.get(row[i_sex].strip().lower(), "unknown") if i_sex is not None else "unknown"
                region_counts[reg] += 1
                append(StayRecord(
                    setdefault(pid, pid), sex, setdefault(fac, fac), reg, adm, dis,
                    setdefault(icd, icd) if icd else None, num,
                ))
                add_row(total - 1)
        except (UnicodeDecodeError, csv.Error, OSError) as exc:
            raise IngestError(f"read failed after {total} rows: {exc}") from exc
    finally:
        if isinstance(source, (str, os.PathLike)):
            fh.close()

    report.total_rows = total
    report.accepted = len(records)
    report.dropped_no_diagnosis = nodiag
    report.dropped_malformed = malformed
    report.per_region_counts = dict(sorted(region_counts.items()))
    report.per_region_no_diagnosis = dict(sorted(region_nodiag.items()))
    return RecordSet(records, provenance, rows), report


def read_records(path: str | os.PathLike, schema: SchemaConfig | None = None):
    return parse_records(path, schema)


def filter_region(rs: RecordSet, region: str = DEFAULT_REGION) -> RecordSet:
    if len(region) != 2:
        raise ConfigError(f"region code must have 2 characters, got {region!r}")
    return rs.where(lambda r: r.region_code == region, f"region={region}")


def filter_period(rs: RecordSet, start: int | None, end: int | None) -> RecordSet:
    """Keep records whose admission day lies in ``[start, end]``."""
    if start is not None and end is not None and start > end:
        raise ConfigError("period start after end")
    lo = start if start is not None else -(1 << 40)
    hi = end if end is not None else 1 << 40
    return rs.where(lambda r: lo <= r.admission <= hi, f"period={start}:{end}")


STAY_ORDER = attrgetter("admission", "discharge", "facility_id")


class PatientIndex(Mapping):
    """Read-only map of patient id to that patient's stays, sorted by
    ``(admission, discharge, facility_id)``.  Keys iterate in first-seen order."""

    __slots__ = ("_data",)

    def __init__(self, data: dict[str, tuple[StayRecord, ...]]):
        self._data = data

    def __getitem__(self, pid: str) -> tuple[StayRecord, ...]:
        return self._data[pid]

    def __iter__(self):
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def n_records(self) -> int:
        return sum(map(len, self._data.values()))


def group_by_patient(rs: Iterable[StayRecord]) -> PatientIndex:
    buckets: dict[str, list[StayRecord]] = defaultdict(list)
    for r in rs:
        buckets[r.patient_id].append(r)
    data = {}
    for pid, stays in buckets.items():
        if len(stays) > 1:
            stays.sort(key=STAY_ORDER)
        data[pid] = tuple(stays)
    return PatientIndex(data)
