"""Seeded synthetic cohorts with planted overlaps and exact ground truth.

Randomness comes from numpy's PCG64 bit generator.  Patients are produced in
blocks of :data:`BLOCK` ordinals and block ``b`` draws from the stream seeded
by ``SeedSequence(seed, spawn_key=(b,))``, so any block can be regenerated on
its own and the output bytes are a pure function of the config.

Each patient's timeline is a sequence of episodes separated by at least one
day at home (gap >= 0 full days).  An episode is either a single background
stay or one planted overlap template.  Templates carry their expected class,
the direct transfers they imply and the stays a patient enters and leaves
through, and the ground truth is assembled from that metadata alone.
"""
from __future__ import annotations

import io
import json
from bisect import bisect
from collections import Counter
from dataclasses import asdict, dataclass, field
from datetime import date
from typing import NamedTuple

import numpy as np

from .classify import TABLE_TYPES
from .records import ConfigError, EPOCH_ORDINAL, day_index, format_day

BLOCK = 4096

HEADER = "patient_id,gender,facility_id,region_code,admission_date,discharge_date,icd10_code,numeric_code\n"

CODES_BY_GROUP = {
    1: ("A09", "A41.9", "B34.9"),
    2: ("C34.1", "C50.9", "D37.0"),
    3: ("D50.0", "D64.9"),
    4: ("E11.9", "E86"),
    5: ("F10.2", "F20.0", "F32.1"),
    6: ("G40.9", "G45.9"),
    7: ("H25.1",),
    8: ("H66.9",),
    9: ("I21.0", "I50.1", "I63.5"),
    10: ("J18.9", "J44.1"),
    11: ("K35.8", "K80.2"),
    12: ("L03.1",),
    13: ("M16.1", "M54.5"),
    14: ("N39.0", "N18.5"),
    15: ("O80", "O70.1"),
    16: ("P07.3",),
    17: ("Q21.1",),
    18: ("R55", "R07.4"),
    19: ("S72.0", "T81.4"),
    21: ("Z38.0", "Z51.1"),
}
DEFAULT_GROUP_WEIGHTS = {
    1: 2, 2: 8, 3: 1, 4: 3, 5: 10, 6: 4, 7: 1, 8: 1, 9: 14, 10: 6, 11: 8,
    12: 2, 13: 6, 14: 5, 15: 6, 16: 2, 17: 1, 18: 5, 19: 9, 21: 4,
}
_ALL_CODES = [c for g in sorted(CODES_BY_GROUP) for c in CODES_BY_GROUP[g]]
NUMERIC_CODE = {c: 1000 + i for i, c in enumerate(_ALL_CODES)}


class Template(NamedTuple):
    label: str
    stays: tuple          # (start offset, end offset, facility role)
    direct: tuple         # (from role, to role, day offset)
    entry: int | str      # role, or "min"/"max" for the lowest/highest facility id
    exit: int | str


TEMPLATES: dict[str, tuple[Template, ...]] = {
    "StandardTransfer": (Template("StandardTransfer", ((0, 2, 0), (2, 7, 1)), ((0, 1, 2),), 0, 1),),
    "LastDayTransfer": (Template("LastDayTransfer", ((0, 20, 0), (20, 20, 1)), ((0, 1, 20),), 0, 1),),
    "FirstDayTransfer": (Template("FirstDayTransfer", ((0, 0, 0), (0, 9, 1)), ((0, 1, 0),), 0, 1),),
    "TemporaryTransfer": (Template("TemporaryTransfer", ((0, 37, 0), (15, 19, 1)),
                                   ((0, 1, 15), (1, 0, 19)), 0, 0),),
    "UnknownTwoFacilities": (
        Template("UnknownTwoFacilities", ((0, 6, 0), (0, 2, 1)), (), 1, 0),
        Template("UnknownTwoFacilities", ((0, 13, 0), (9, 14, 1)), (), 0, 1),
    ),
    "UnknownMultiple(3)": (Template("UnknownMultiple(3)", ((20, 23, 0), (23, 30, 1), (0, 45, 2)), (), 2, 2),),
    "UnknownMultiple(4+)": (Template("UnknownMultiple(4)", ((0, 10, 0), (2, 5, 1), (3, 8, 2), (4, 12, 3)),
                                     (), 0, 3),),
    "SimultaneousTwoFacilities": (Template("SimultaneousTwoFacilities", ((0, 7, 0), (0, 7, 1)), (),
                                           "min", "max"),),
    "SimultaneousSameFacility": (Template("SimultaneousSameFacility", ((0, 20, 0), (0, 20, 0)), (), 0, 0),),
    "TwoAdmissionsSameFacility": (Template("TwoAdmissionsSameFacility", ((0, 9, 0), (5, 12, 0)), (), 0, 0),),
}
assert set(TEMPLATES) == set(TABLE_TYPES)


@dataclass
class GenConfig:
    seed: int = 0
    n_patients: int = 1000
    n_records: int | None = None
    n_facilities: int = 40
    start: str = "2008-01-01"
    end: str = "2015-12-31"
    planted: dict = field(default_factory=dict)
    stays_mean: float = 3.0
    duration_mean: float = 6.0
    gap_mean: float = 150.0
    facility_skew: float = 1.0
    female_fraction: float = 0.55
    region_weights: dict = field(default_factory=lambda: {"03": 0.85, "04": 0.05, "05": 0.05, "09": 0.05})
    group_weights: dict = field(default_factory=lambda: dict(DEFAULT_GROUP_WEIGHTS))
    same_diagnosis_prob: float = 0.5
    no_diagnosis_rows: int = 0
    malformed_rows: int = 0
    truth_events: bool = True

    def validate(self):
        if self.seed < 0 or self.seed >= 1 << 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for name in ("n_patients", "n_facilities", "no_diagnosis_rows", "malformed_rows"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.n_records is not None and self.n_records < 0:
            raise ConfigError("n_records must be >= 0")
        first, last = day_index(self.start), day_index(self.end)
        if first > last:
            raise ConfigError("date range start after end")
        unknown = set(self.planted) - set(TEMPLATES)
        if unknown:
            raise ConfigError(f"unknown planted classes {sorted(unknown)}; choose from {list(TABLE_TYPES)}")
        if any(v < 0 for v in self.planted.values()):
            raise ConfigError("planted counts must be >= 0")
        n_planted = sum(self.planted.values())
        if self.n_records is None and n_planted > self.n_patients:
            raise ConfigError(f"{n_planted} planted overlaps exceed capacity of {self.n_patients} patients")
        if n_planted:
            roles = max(len({s[2] for s in t.stays}) for k, v in self.planted.items() if v
                        for t in TEMPLATES[k])
            if roles > self.n_facilities:
                raise ConfigError(f"planted templates need {roles} facilities, only {self.n_facilities}")
            if last - first + 1 < 46:
                raise ConfigError("date range too short for planted templates")
        if (self.n_patients or self.n_records) and self.n_facilities < 1:
            raise ConfigError("need at least one facility")
        if self.stays_mean < 1 or self.duration_mean < 1 or self.gap_mean < 0:
            raise ConfigError("stays_mean and duration_mean must be >= 1, gap_mean >= 0")
        if not self.region_weights or not self.group_weights:
            raise ConfigError("region and diagnosis-group weights must be non-empty")
        if set(self.group_weights) - set(CODES_BY_GROUP):
            raise ConfigError(f"diagnosis groups must be among {sorted(CODES_BY_GROUP)}")

    @classmethod
    def from_dict(cls, d: dict) -> GenConfig:
        d = dict(d)
        if "group_weights" in d:
            d["group_weights"] = {int(k): v for k, v in d["group_weights"].items()}
        return cls(**d)


@dataclass
class GroundTruth:
    config: dict
    ingest: dict
    overlaps: list            # {"patient_id", "rows", "class"}
    transfers: list | None    # {"patient_id", "from", "to", "kind", "day", "gap_days"}
    network: list             # [from, to, kind, count]
    admissions_per_facility: dict
    patients_per_facility: dict
    stay_durations: dict
    society_gaps: dict
    records_per_patient: dict

    def class_counts(self) -> Counter:
        return Counter(o["class"] for o in self.overlaps)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> GroundTruth:
        d = json.loads(text)
        for k in ("admissions_per_facility", "patients_per_facility"):
            d[k] = dict(d[k])
        for k in ("stay_durations", "society_gaps", "records_per_patient"):
            d[k] = {int(a): b for a, b in d[k].items()}
        return cls(**d)


class _Truth:
    def __init__(self, keep_events: bool):
        self.keep_events = keep_events
        self.overlaps = []
        self.events = []
        self.edges = Counter()
        self.admissions = Counter()
        self.patients = Counter()
        self.durations = Counter()
        self.gaps = Counter()
        self.per_patient = Counter()

    def event(self, pid, src, dst, kind, day, gap):
        self.edges[(src, dst, kind)] += 1
        if self.keep_events:
            self.events.append({"patient_id": pid, "from": src, "to": dst, "kind": kind,
                                "day": format_day(day), "gap_days": gap})


def _geometric0(rng, mean, size):
    """Draws >= 0 with the given mean."""
    if mean <= 0:
        return np.zeros(size, dtype=np.int64)
    return rng.geometric(1.0 / (mean + 1.0), size) - 1


def _cdf(p) -> list[float]:
    c = np.cumsum(p).tolist()
    c[-1] = 2.0  # guards against round-off at u -> 1
    return c


class _Layout:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.first = day_index(cfg.start)
        self.last = day_index(cfg.end)
        nf = cfg.n_facilities
        width = max(4, len(str(nf)))
        self.facilities = [f"H{i:0{width}d}" for i in range(1, nf + 1)]
        w = 1.0 / np.arange(1, nf + 1) ** cfg.facility_skew
        self.fac_p = w / w.sum()
        regions = sorted(cfg.region_weights)
        rw = np.array([cfg.region_weights[r] for r in regions], dtype=float)
        frng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(1 << 32,))))
        self.fac_region = [regions[i] for i in frng.choice(len(regions), size=nf, p=rw / rw.sum())]
        groups = sorted(cfg.group_weights)
        gw = np.array([cfg.group_weights[g] for g in groups], dtype=float)
        code_p = []
        self.codes = []
        for g, p in zip(groups, gw / gw.sum()):
            self.codes += CODES_BY_GROUP[g]
            code_p += [p / len(CODES_BY_GROUP[g])] * len(CODES_BY_GROUP[g])
        self.fac_cdf = _cdf(self.fac_p)
        self.code_cdf = _cdf(code_p)
        self.dates = {}

    def date(self, day: int) -> str:
        s = self.dates.get(day)
        if s is None:
            s = self.dates[day] = date.fromordinal(day + EPOCH_ORDINAL).isoformat()
        return s


def _plant_order(cfg: GenConfig) -> list[str]:
    order = [k for k in TABLE_TYPES for _ in range(cfg.planted.get(k, 0))]
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(1 << 33,))))
    rng.shuffle(order)
    return order


def _role_fac(which, roles, facs):
    if which == "min":
        return min(facs[r] for r in roles)
    if which == "max":
        return max(facs[r] for r in roles)
    return facs[roles[which]]


def _patient_episodes(cfg: GenConfig, lay: _Layout, rng, plant: str | None, budget: int | None):
    """Episodes of one patient as ``(members, entry, exit, direct, label)``.

    ``members`` are ``(admission, discharge, facility, icd10)`` tuples with
    absolute days; ``direct`` lists ``(from, to, day)`` planted transfers.
    """
    facs = lay.facilities
    n_bg = int(rng.poisson(cfg.stays_mean - 1.0)) + (0 if plant else 1)
    if budget is not None and not plant:
        n_bg = max(1, min(n_bg, budget))
    tmpl = None
    if plant:
        variants = TEMPLATES[plant]
        tmpl = variants[int(rng.integers(len(variants)))]
    n_ep = n_bg + (tmpl is not None)
    plant_pos = int(rng.integers(n_ep)) if tmpl else -1
    lengths = (1 + _geometric0(rng, cfg.duration_mean - 1.0, n_ep)).tolist()
    if tmpl:
        lengths[plant_pos] = max(st[1] for st in tmpl.stays) + 1
    gaps = _geometric0(rng, cfg.gap_mean, n_ep - 1).tolist()
    u = iter(rng.random(2 * n_ep + 8).tolist())
    span = lay.last - lay.first + 1
    # keep the timeline inside the date range by dropping trailing background episodes
    while n_ep > 1 and sum(lengths) + sum(gaps) > span:
        drop = n_ep - 1 if plant_pos != n_ep - 1 else n_ep - 2
        del lengths[drop]
        gaps.pop()
        if drop < plant_pos:
            plant_pos -= 1
        n_ep -= 1
    if sum(lengths) + sum(gaps) > span:
        lengths[0] = span
    day = lay.first + int(next(u) * (span - sum(lengths) - sum(gaps) + 1))

    episodes = []
    for e in range(n_ep):
        if e > 0:
            day += lengths[e - 1] + gaps[e - 1]
        if e != plant_pos:
            f = facs[bisect(lay.fac_cdf, next(u))]
            code = lay.codes[bisect(lay.code_cdf, next(u))]
            episodes.append(([(day, day + lengths[e] - 1, f, code)], f, f, [], None))
            continue
        n_roles = len({st[2] for st in tmpl.stays})
        roles = rng.choice(len(facs), size=n_roles, replace=False, p=lay.fac_p).tolist()
        shared = next(u) < cfg.same_diagnosis_prob
        codes = [lay.codes[bisect(lay.code_cdf, x)] for x in rng.random(len(tmpl.stays)).tolist()]
        members = []
        for k, (s0, s1, role) in enumerate(tmpl.stays):
            code = codes[0] if shared else codes[k]
            members.append((day + s0, day + s1, facs[roles[role]], code))
        direct = [(facs[roles[a]], facs[roles[b]], day + off) for a, b, off in tmpl.direct]
        episodes.append((members, _role_fac(tmpl.entry, roles, facs), _role_fac(tmpl.exit, roles, facs),
                         direct, tmpl.label))
    return episodes


def _config_dict(cfg: GenConfig) -> dict:
    d = asdict(cfg)
    d["group_weights"] = {str(k): v for k, v in sorted(cfg.group_weights.items())}
    d["planted"] = {k: cfg.planted[k] for k in TABLE_TYPES if k in cfg.planted}
    return d


def write_cohort(cfg: GenConfig, out) -> GroundTruth:
    """Write the cohort CSV to the text stream ``out`` and return its ground truth."""
    cfg.validate()
    lay = _Layout(cfg)
    truth = _Truth(cfg.truth_events)
    plants = _plant_order(cfg)
    target = cfg.n_records
    fac_region = dict(zip(lay.facilities, lay.fac_region))
    region_counts: Counter = Counter()
    out.write(HEADER)
    row = 0
    ordinal = 0
    rng = None
    while True:
        if target is None:
            if ordinal >= cfg.n_patients:
                break
        elif row >= target and ordinal >= len(plants):
            break
        if ordinal % BLOCK == 0:
            rng = np.random.Generator(np.random.PCG64(
                np.random.SeedSequence(cfg.seed, spawn_key=(ordinal // BLOCK,))))
        pid = f"P{ordinal:08d}"
        sex = "f" if rng.random() < cfg.female_fraction else "m"
        plant = plants[ordinal] if ordinal < len(plants) else None
        budget = None if target is None else max(target - row, 1)
        episodes = _patient_episodes(cfg, lay, rng, plant, budget)
        lines = []
        seen_facs = set()
        prev_exit = prev_end = None
        for members, entry, exit_, direct, label in episodes:
            rows = []
            for adm, dis, fac, code in members:
                reg = fac_region[fac]
                lines.append(f"{pid},{sex},{fac},{reg},{lay.date(adm)},{lay.date(dis)},{code},{NUMERIC_CODE[code]}\n")
                rows.append(row)
                row += 1
                truth.admissions[fac] += 1
                truth.durations[dis - adm + 1] += 1
                region_counts[reg] += 1
                seen_facs.add(fac)
            if label is not None:
                truth.overlaps.append({"patient_id": pid, "rows": rows, "class": label})
            for src, dst, day in direct:
                truth.event(pid, src, dst, "direct", day, 0)
            start = members[0][0] if len(members) == 1 else min(m[0] for m in members)
            if prev_exit is not None:
                gap = start - prev_end - 1
                truth.gaps[gap] += 1
                truth.event(pid, prev_exit, entry, "indirect", start, gap)
            prev_exit = exit_
            prev_end = max(m[1] for m in members)
        out.write("".join(lines))
        for f in seen_facs:
            truth.patients[f] += 1
        truth.per_patient[sum(len(ep[0]) for ep in episodes)] += 1
        ordinal += 1

    span = lay.last - lay.first + 1
    noise = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(1 << 34,))))
    facs = lay.facilities
    for i in range(cfg.no_diagnosis_rows):
        d = lay.first + int(noise.integers(span))
        f = facs[int(noise.integers(len(facs)))]
        out.write(f"X{i:07d},m,{f},{fac_region[f]},{lay.date(d)},{lay.date(d)},,\n")
    for i in range(cfg.malformed_rows):
        d = lay.first + 1 + int(noise.integers(max(span - 1, 1)))
        f = facs[int(noise.integers(len(facs)))]
        out.write(f"Y{i:07d},f,{f},{fac_region[f]},{lay.date(d)},{lay.date(d - 1)},I21.0,{NUMERIC_CODE['I21.0']}\n")

    ingest = {
        "total_rows": row + cfg.no_diagnosis_rows + cfg.malformed_rows,
        "accepted": row,
        "dropped_no_diagnosis": cfg.no_diagnosis_rows,
        "dropped_malformed": cfg.malformed_rows,
        "per_region_counts": dict(sorted(region_counts.items())),
        "patients": ordinal,
    }
    return GroundTruth(
        config=_config_dict(cfg),
        ingest=ingest,
        overlaps=truth.overlaps,
        transfers=truth.events if cfg.truth_events else None,
        network=[[a, b, k, c] for (a, b, k), c in sorted(truth.edges.items())],
        admissions_per_facility=dict(sorted(truth.admissions.items())),
        patients_per_facility=dict(sorted(truth.patients.items())),
        stay_durations=dict(sorted(truth.durations.items())),
        society_gaps=dict(sorted(truth.gaps.items())),
        records_per_patient=dict(sorted(truth.per_patient.items())),
    )


def generate(cfg: GenConfig) -> tuple[bytes, GroundTruth]:
    """Cohort CSV bytes and ground truth; same config, same bytes."""
    buf = io.StringIO()
    truth = write_cohort(cfg, buf)
    return buf.getvalue().encode("utf-8"), truth


def generate_files(cfg: GenConfig, csv_path, truth_path=None) -> GroundTruth:
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        truth = write_cohort(cfg, fh)
    if truth_path is not None:
        with open(truth_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(truth.to_json())
    return truth


def plant_all(n: int = 1, **kw) -> GenConfig:
    """Config planting ``n`` instances of each of the ten overlap table types."""
    kw.setdefault("n_patients", max(10 * n, kw.get("n_patients", 0)))
    return GenConfig(planted={k: n for k in TABLE_TYPES}, **kw)
