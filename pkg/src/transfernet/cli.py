"""Command-line front end: ``transfernet {ingest,analyze,network,generate}``.

Exit codes: 0 success, 1 data-level failure, 2 usage or configuration error.
Every flag can also be given in a TOML file passed with ``--config``; keys
are flag names (dashes or underscores), either top level or under a table
named after the subcommand.  Flags on the command line win.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import classify, network, pipeline, records, stats, syngen
from .records import ConfigError, IngestError

log = logging.getLogger("transfernet")

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _parse_period(text: str | None):
    if not text:
        return None
    try:
        a, b = text.split(":")
        lo, hi = records.day_index(a), records.day_index(b)
    except ValueError as exc:
        raise ConfigError(f"bad --period {text!r}; expected YYYY-MM-DD:YYYY-MM-DD") from exc
    if lo > hi:
        raise ConfigError("--period start after end")
    return lo, hi


def _schema(args) -> records.SchemaConfig:
    cols = {}
    for item in args.column or ():
        if "=" not in item:
            raise ConfigError(f"--column expects FIELD=NAME, got {item!r}")
        k, v = item.split("=", 1)
        cols[k.strip()] = v.strip()
    return records.SchemaConfig(columns=cols, delimiter=args.delimiter, date_format=args.date_format)


def _load(args):
    """Parse every input, then apply region and period filters."""
    schema = _schema(args)
    paths = args.input
    for p in paths:
        if not os.path.isfile(p):
            raise UsageError(f"input file not found: {p}")
    all_recs, all_rows = [], []
    report = records.IngestReport()
    for p in paths:
        rs, rep = records.parse_records(p, schema)
        all_recs.extend(rs)
        all_rows.extend(rs.rows)
        report.total_rows += rep.total_rows
        report.accepted += rep.accepted
        report.dropped_no_diagnosis += rep.dropped_no_diagnosis
        report.dropped_malformed += rep.dropped_malformed
        for src, dst in ((rep.per_region_counts, report.per_region_counts),
                         (rep.per_region_no_diagnosis, report.per_region_no_diagnosis)):
            for k, v in src.items():
                dst[k] = dst.get(k, 0) + v
    rs = records.RecordSet(all_recs, ";".join(map(str, paths)), all_rows)
    del all_recs, all_rows
    if args.region:
        rs = records.filter_region(rs, args.region)
    period = _parse_period(args.period)
    if period:
        rs = records.filter_period(rs, *period)
    return rs, report, period


def _write(out_dir: Path, name: str, data, written: list):
    if isinstance(data, str):
        data = data.encode("utf-8")
    (out_dir / name).write_bytes(data)
    written.append((name, data))


def _manifest(out_dir: Path, written: list, extra: dict | None = None):
    entries = [{"file": n, "bytes": len(d), "sha256": hashlib.sha256(d).hexdigest()}
               for n, d in sorted(written)]
    doc = {"outputs": entries}
    if extra:
        doc.update(extra)
    (out_dir / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _kv_report(rep: records.IngestReport) -> str:
    lines = []
    for k, v in rep.as_dict().items():
        if isinstance(v, dict):
            for kk, vv in v.items():
                lines.append(f"{k}.{kk}={vv}")
        else:
            lines.append(f"{k}={v}")
    return "\n".join(lines) + "\n"


def _safe_name(s: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in s)


# ---------------------------------------------------------------- commands

def cmd_ingest(args) -> int:
    rs, report, _ = _load(args)
    text = report.to_json() if str(args.report).endswith(".json") else _kv_report(report)
    Path(args.report).parent.mkdir(parents=True, exist_ok=True)
    Path(args.report).write_text(text, encoding="utf-8")
    if args.stdout:
        sys.stdout.write(text)
    log.info("%d of %d rows accepted, %d after filters", report.accepted, report.total_rows, len(rs))
    return 0


def _entries_csv(summary) -> str:
    lines = ["gender,patients,min,max,median,mean"]
    for g, s in summary.items():
        if s is None:
            lines.append(f"{g},0,,,,")
        else:
            lines.append(f"{g},{s.patients},{s.min},{s.max},{s.median:g},{s.mean:.4f}")
    return "\n".join(lines) + "\n"


def _facility_csv(counts: dict, header: str) -> str:
    return "facility," + header + "\n" + "".join(f"{f},{c}\n" for f, c in counts.items())


def cmd_analyze(args) -> int:
    rs, report, period = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if not len(rs):
        log.warning("no records left after filtering; writing empty outputs")
    index = records.group_by_patient(rs)
    res = pipeline.analyze(index, diagnosis_level=args.diagnosis_level, keep_events=False,
                           threads=args.threads)
    tab = res.tabulation
    written: list = []
    _write(out, "ingest_report.json", report.to_json(), written)
    _write(out, "overlap_table.csv", tab.table.to_csv(collapsed=True), written)
    _write(out, "overlap_classes.csv", tab.table.to_csv(collapsed=False), written)
    _write(out, "overlap_summary.json", tab.to_json(), written)
    _write(out, "pair_codes.csv", tab.code_counts_csv(), written)
    _write(out, "pair_code_diagnoses.csv", tab.code_diagnosis_csv(), written)
    _write(out, "overlap_lengths.csv", res.overlap_lengths.to_csv(), written)

    adm, adm_hist = stats.admissions_per_facility(rs)
    pat, pat_hist = stats.patients_per_facility(rs)
    _write(out, "admissions_per_facility.csv", _facility_csv(adm, "admissions"), written)
    _write(out, "admissions_decades.csv", adm_hist.to_csv(), written)
    _write(out, "patients_per_facility.csv", _facility_csv(pat, "patients"), written)
    _write(out, "patients_decades.csv", pat_hist.to_csv(), written)
    _write(out, "entries_per_patient.csv", _entries_csv(stats.entries_per_patient_summary(index)), written)
    _write(out, "stay_durations.csv",
           stats.histogram_csv(stats.stay_duration_histogram(rs), ("days", "count")), written)
    _write(out, "society_durations.csv", stats.histogram_csv(res.society_gaps, ("days", "count")), written)

    if args.occupancy_top and len(rs):
        lo = period[0] if period else min(r.admission for r in rs)
        hi = period[1] if period else max(r.discharge for r in rs)
        top = sorted(adm, key=lambda f: (-adm[f], f))[: args.occupancy_top]
        for f in top:
            series = stats.occupancy_timeseries(rs, f, (lo, hi))
            _write(out, f"occupancy_{_safe_name(f)}.csv", series.to_csv(), written)
    _manifest(out, written, {"records": len(rs), "overlap_groups": res.n_groups})
    if args.stdout:
        sys.stdout.write(tab.table.to_csv(collapsed=True))
    return 0


def cmd_network(args) -> int:
    rs, _, _ = _load(args)
    if not len(rs):
        log.warning("no records left after filtering; writing an empty network")
    index = records.group_by_patient(rs)
    res = pipeline.analyze(index, max_gap=args.max_gap, same_facility=not args.no_self_loops,
                           keep_events=False, threads=args.threads)
    kinds = ("direct", "indirect") if args.kind == "both" else (args.kind,)
    net = res.network(kinds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written: list = []
    formats = ("csv", "dot") if args.format == "both" else (args.format,)
    for fmt in formats:
        data = network.export_network(net, fmt)
        _write(out, f"network.{fmt}", data, written)
        if args.stdout:
            sys.stdout.write(data.decode("utf-8"))
    if "indirect" in kinds:
        _write(out, "indirect_gaps.csv", network.export_gap_histograms(net), written)
    _manifest(out, written, {"nodes": len(net.nodes), "events": net.total_weight()})
    return 0


def _parse_plants(items, all_classes):
    planted = {}
    if all_classes:
        planted = {k: all_classes for k in classify.TABLE_TYPES}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--plant expects CLASS=N, got {item!r}")
        k, v = item.split("=", 1)
        try:
            planted[k.strip()] = int(v)
        except ValueError as exc:
            raise ConfigError(f"--plant count must be an integer: {item!r}") from exc
    return planted


def cmd_generate(args) -> int:
    cfg = syngen.GenConfig(
        seed=args.seed,
        n_patients=args.patients,
        n_records=args.records,
        n_facilities=args.facilities,
        start=args.start,
        end=args.end,
        planted=_parse_plants(args.plant, args.plant_all_classes),
        stays_mean=args.stays_mean,
        duration_mean=args.duration_mean,
        gap_mean=args.gap_mean,
        no_diagnosis_rows=args.no_diagnosis_rows,
        malformed_rows=args.malformed_rows,
        truth_events=not args.no_truth_events,
    )
    try:
        records.day_index(cfg.start), records.day_index(cfg.end)
    except ValueError as exc:
        raise ConfigError(f"bad date: {exc}") from exc
    for p in (args.output, args.truth):
        if p:
            Path(p).parent.mkdir(parents=True, exist_ok=True)
    truth = syngen.generate_files(cfg, args.output, args.truth)
    log.info("wrote %d records for %d patients to %s", truth.ingest["accepted"],
             truth.ingest["patients"], args.output)
    return 0


# ---------------------------------------------------------------- parser

def _common_input(p):
    p.add_argument("--input", "-i", nargs="+", required=True, help="record CSV file(s)")
    p.add_argument("--column", action="append", metavar="FIELD=NAME",
                   help=f"map a record field to a header name; fields: {', '.join(records.FIELDS)}")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--date-format", default="%Y-%m-%d")
    p.add_argument("--region", default=None, help="keep only facilities with this 2-character region code")
    p.add_argument("--period", default=None, metavar="START:END",
                   help="keep only stays admitted in this ISO date range")
    p.add_argument("--stdout", action="store_true", help="also print the main table")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="transfernet", description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=None, help="TOML file with flag values")
    ap.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and filter records, write the ingest report")
    _common_input(p)
    p.add_argument("--report", required=True, help="report path (.json, otherwise key=value text)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="overlap tables, cross-tabs and descriptive statistics")
    _common_input(p)
    p.add_argument("--out", "-o", required=True, help="output directory")
    p.add_argument("--diagnosis-level", choices=("code", "group"), default="code",
                   help="compare full codes or chapter groups for the pair-code diagnosis bit")
    p.add_argument("--occupancy-top", type=int, default=6,
                   help="write daily occupancy for this many largest facilities")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("network", help="infer transfers and export the facility network")
    _common_input(p)
    p.add_argument("--out", "-o", required=True, help="output directory")
    p.add_argument("--kind", choices=("direct", "indirect", "both"), default="both")
    p.add_argument("--format", choices=("csv", "dot", "both"), default="csv")
    p.add_argument("--max-gap", type=int, default=None, help="longest home stay (days) for indirect transfers")
    p.add_argument("--no-self-loops", action="store_true",
                   help="drop indirect transfers back into the facility just left")
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("generate", help="write a synthetic cohort and its ground truth")
    p.add_argument("--output", "-o", required=True, help="cohort CSV path")
    p.add_argument("--truth", default=None, help="ground-truth JSON path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patients", type=int, default=1000)
    p.add_argument("--records", type=int, default=None, help="generate until this many records")
    p.add_argument("--facilities", type=int, default=40)
    p.add_argument("--start", default="2008-01-01")
    p.add_argument("--end", default="2015-12-31")
    p.add_argument("--plant", action="append", metavar="CLASS=N",
                   help=f"plant N overlaps of a class: {', '.join(classify.TABLE_TYPES)}")
    p.add_argument("--plant-all-classes", type=int, nargs="?", const=1, default=0, metavar="N",
                   help="plant N (default 1) overlaps of every class")
    p.add_argument("--stays-mean", type=float, default=3.0)
    p.add_argument("--duration-mean", type=float, default=6.0)
    p.add_argument("--gap-mean", type=float, default=150.0)
    p.add_argument("--no-diagnosis-rows", type=int, default=0)
    p.add_argument("--malformed-rows", type=int, default=0)
    p.add_argument("--no-truth-events", action="store_true", help="omit the per-event list from the truth file")
    p.set_defaults(func=cmd_generate)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config, "rb") as fh:
            conf = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from exc
    subparsers = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction))
    top = {k.replace("-", "_"): v for k, v in conf.items() if not isinstance(v, dict)}
    for name, sp in subparsers.choices.items():
        dests = {a.dest for a in sp._actions}
        values = {k: v for k, v in top.items() if k in dests}
        section = {k.replace("-", "_"): v for k, v in conf.get(name, {}).items()}
        unknown = set(section) - dests
        if unknown:
            raise UsageError(f"unknown keys in config section [{name}]: {sorted(unknown)}")
        values.update(section)
        for a in sp._actions:
            if a.dest in values:
                a.required = False
        sp.set_defaults(**values)
    top_dests = {a.dest for a in ap._actions}
    all_dests = top_dests | {a.dest for sp in subparsers.choices.values() for a in sp._actions}
    unknown = set(top) - all_dests
    if unknown:
        raise UsageError(f"unknown keys in config: {sorted(unknown)}")
    ap.set_defaults(**{k: v for k, v in top.items() if k in top_dests})


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        _apply_config(ap, argv)
    except UsageError as exc:
        print(f"transfernet: error: {exc}", file=sys.stderr)
        return 2
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "input", None) is not None and isinstance(args.input, str):
        args.input = [args.input]
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"transfernet: error: {exc}", file=sys.stderr)
        return 2
    except IngestError as exc:
        print(f"transfernet: data error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
