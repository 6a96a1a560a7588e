"""Command line entry point: ``citeco {ingest,select,analyze,events,synth,render}``.

Exit status is 0 on success (warnings included) and 2 on a fatal
configuration or input error.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import render, store
from .events import (
    detect_punctuations,
    field_average,
    punctuation_rate,
    write_average_csv,
    write_events_csv,
)
from .graph import CitationIndex, ParentNetwork, build_parent_network
from .ingest import CanonicalRecord, ConfigurationError, IngestReport, load_edges, merge_duplicates, parse_records
from .metrics import METRICS_HEADER, MetricsSeries, compute_metrics, metrics_row, metrics_timeline, read_metrics_csv
from .synth import GrowthParams, grow_network, prototype_network, relabel

logger = logging.getLogger("citeco")

DEFAULTS = {
    "out": ".",
    "top_k": 100,
    "year_cutoff": 1998,
    "workers": 1,
    "n_grandparents": 3,
    "steps": 20,
    "refs_per_descendant": 3,
    "exo_ratio": 0.5,
    "seed": 0,
    "start_year": 1990,
    "attachment": "uniform",
    "count": 1,
    "r_min": render.R_MIN,
    "r_max": render.R_MAX,
}


class CliError(Exception):
    """Fatal configuration or input problem; maps to exit status 2."""


# --- pure helpers ------------------------------------------------------------


def select_parents(
    years: dict[int, int | None], index: CitationIndex, top_k: int, year_cutoff: int
) -> tuple[list[int], list[str]]:
    """Top-``top_k`` papers published in or before ``year_cutoff`` by
    citation count; ties go to the lower blind id."""
    if top_k < 0:
        raise CliError("--top-k must be >= 0")
    eligible = [n for n, y in years.items() if y is not None and y <= year_cutoff]
    ranked = sorted(eligible, key=lambda n: (-index.citation_count(n), n))
    warnings = []
    if len(ranked) < top_k:
        warnings.append(f"only {len(ranked)} records published by {year_cutoff}; fewer than top-k={top_k}")
    return ranked[:top_k], warnings


@dataclass(frozen=True)
class AnalyzeSettings:
    from_year: int | None = None
    to_year: int | None = None
    jump_threshold: float | None = None
    drop_threshold: float | None = None


@dataclass(frozen=True)
class ParentResult:
    parent: int
    network_json: str
    full: object
    series: MetricsSeries
    events: list


def analyze_network(net: ParentNetwork, settings: AnalyzeSettings) -> ParentResult:
    py = net.parent_year
    if py is None:
        raise ValueError(f"parent {net.parent} has no publication year")
    start = py if settings.from_year is None else max(settings.from_year, py)
    series = metrics_timeline(net, start, settings.to_year)
    events = []
    if len(series) >= 2:
        events = detect_punctuations(series, settings.jump_threshold, settings.drop_threshold)
    return ParentResult(net.parent, net.to_json(), compute_metrics(net), series, events)


_CTX: dict = {}


def _init_worker(years, index, settings) -> None:
    _CTX.update(years=years, index=index, settings=settings)


def _analyze_task(task):
    parent, net = task
    try:
        if net is None:
            net = build_parent_network(parent, _CTX["years"], _CTX["index"])
        return parent, analyze_network(net, _CTX["settings"]), None
    except Exception as exc:  # isolate per-parent failures
        msg = str(exc) if not isinstance(exc, KeyError) else f"unknown parent {exc.args[0]}"
        return parent, None, f"{type(exc).__name__}: {msg}"


def run_batch(tasks, years, index, settings: AnalyzeSettings, workers: int = 1):
    if workers <= 1 or len(tasks) <= 1:
        _init_worker(years, index, settings)
        return [_analyze_task(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(years, index, settings)) as ex:
        return list(ex.map(_analyze_task, tasks, chunksize=chunk))


def write_event_outputs(out: Path, serieses: Sequence[MetricsSeries], settings: AnalyzeSettings) -> dict:
    events = {}
    for s in serieses:
        if len(s) >= 2:
            events[s.parent] = detect_punctuations(s, settings.jump_threshold, settings.drop_threshold)
        else:
            events[s.parent] = []
    buf = io.StringIO()
    n = write_events_csv(buf, events)
    store.write_atomic(out / "events.csv", buf.getvalue())
    summary = punctuation_rate(events, {s.parent: len(s) for s in serieses}).to_dict()
    store.write_atomic(out / "events-summary.json", store.dump_json(summary))
    return {"events": n, "summary": summary}


# --- verbs -------------------------------------------------------------------


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from None


def cmd_ingest(args) -> int:
    if not args.records:
        raise CliError("ingest needs --records")
    fmt = args.format or ("jsonl" if str(args.records).endswith((".jsonl", ".json")) else "tsv")
    out = Path(args.out)
    report = IngestReport()
    try:
        raw = parse_records(io.BytesIO(_read_bytes(args.records)), fmt, report)
    except ConfigurationError as exc:
        raise CliError(str(exc)) from None
    canon, bmap = merge_duplicates(raw, report)
    edges = []
    if args.edges:
        edges = load_edges(io.BytesIO(_read_bytes(args.edges)), bmap, report)
    store.write_store(out, canon, edges)
    store.write_atomic(out / store.BLINDMAP_FILE, store.dump_json(bmap.to_dict()))
    store.write_atomic(out / store.REPORT_FILE, report.to_jsonl())
    store.update_run_report(
        out,
        "ingest",
        {
            "raw_records": len(raw),
            "canonical_records": len(canon),
            "edges": len(edges),
            "errors": len(report.errors),
            "warnings": len(report.warnings),
        },
    )
    return 0


def _load_store(args):
    where = Path(args.store or args.out)
    try:
        return store.read_store(where)
    except OSError as exc:
        raise CliError(f"cannot read store in {where}: {exc.strerror or exc}") from None


def cmd_select(args) -> int:
    years, index = _load_store(args)
    parents, warnings = select_parents(years, index, args.top_k, args.year_cutoff)
    for w in warnings:
        logger.warning(w)
    out = Path(args.out)
    store.write_atomic(out / store.PARENTS_FILE, "".join(f"{p}\n" for p in parents))
    store.update_run_report(out, "select", {"parents": parents, "warnings": warnings})
    print("\n".join(map(str, parents)))
    return 0


def _parse_id_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise CliError(f"bad parent id list {text!r}") from None


def _settings(args) -> AnalyzeSettings:
    for name in ("jump_threshold", "drop_threshold"):
        v = getattr(args, name, None)
        if v is not None and v <= 0:
            raise CliError(f"--{name.replace('_', '-')} must be > 0")
    return AnalyzeSettings(
        getattr(args, "from_year", None),
        getattr(args, "to_year", None),
        args.jump_threshold,
        args.drop_threshold,
    )


def cmd_analyze(args) -> int:
    out = Path(args.out)
    settings = _settings(args)
    warnings: list[str] = []
    years, index = {}, CitationIndex()
    if args.network:
        nets = {}
        for path in args.network:
            try:
                net = ParentNetwork.from_json(_read_bytes(path).decode("utf-8"))
            except (ValueError, KeyError, TypeError) as exc:
                raise CliError(f"bad network file {path}: {exc}") from None
            if net.parent in nets:
                raise CliError(f"parent {net.parent} appears in more than one network file")
            nets[net.parent] = net
        tasks = sorted(nets.items())
    else:
        years, index = _load_store(args)
        where = Path(args.store or args.out)
        if args.parents:
            parents = _parse_id_list(args.parents)
        elif (where / store.PARENTS_FILE).exists():
            parents = _parse_id_list((where / store.PARENTS_FILE).read_text(encoding="utf-8"))
        else:
            parents, warnings = select_parents(years, index, args.top_k, args.year_cutoff)
        tasks = [(p, None) for p in sorted(set(parents))]

    if not tasks:
        warnings.append("no parents selected; nothing to analyze")
        for w in warnings:
            logger.warning(w)
        store.update_run_report(out, "analyze", {"parents": 0, "succeeded": [], "failures": [], "warnings": warnings})
        return 0

    results = run_batch(tasks, years, index, settings, args.workers)
    ok = [r for _, r, err in results if err is None]
    failures = [{"parent": p, "error": err} for p, _, err in results if err is not None]
    for f in failures:
        logger.warning("parent %s failed: %s", f["parent"], f["error"])

    for r in ok:
        store.write_atomic(out / "networks" / f"{r.parent}.json", r.network_json)
    buf = io.StringIO()
    buf.write(",".join(METRICS_HEADER) + "\n")
    for r in ok:
        buf.write(",".join(metrics_row(r.parent, r.full)) + "\n")
        for m in r.series.rows:
            buf.write(",".join(metrics_row(r.parent, m)) + "\n")
    store.write_atomic(out / "metrics.csv", buf.getvalue())
    ev = write_event_outputs(out, [r.series for r in ok], settings)
    avg = io.StringIO()
    n_avg = write_average_csv(avg, field_average([r.series for r in ok])) if ok else 0
    if not ok:
        avg.write("year,mean_R,mean_H,parent_count\n")
    store.write_atomic(out / "field-average.csv", avg.getvalue())
    store.update_run_report(
        out,
        "analyze",
        {
            "parents": len(tasks),
            "succeeded": [r.parent for r in ok],
            "failures": failures,
            "warnings": warnings,
            "metric_rows": sum(len(r.series) + 1 for r in ok),
            "events": ev["events"],
            "field_average_rows": n_avg,
        },
    )
    return 0


def cmd_events(args) -> int:
    where = Path(args.store or args.out)
    try:
        text = (where / "metrics.csv").read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {where / 'metrics.csv'}: {exc.strerror or exc}") from None
    try:
        serieses = read_metrics_csv(io.StringIO(text))
    except (ValueError, KeyError) as exc:
        raise CliError(f"bad metrics CSV: {exc}") from None
    out = Path(args.out)
    ev = write_event_outputs(out, serieses, _settings(args))
    store.update_run_report(out, "events", {"parents": len(serieses), "events": ev["events"]})
    return 0


def _growth_params(args, seed: int) -> GrowthParams:
    bursts = []
    for spec in args.burst or ():
        try:
            step, count = spec.split(":")
            bursts.append((int(step), int(count)))
        except ValueError:
            raise CliError(f"--burst expects STEP:COUNT, got {spec!r}") from None
    try:
        return GrowthParams(
            n_grandparents=args.n_grandparents,
            steps=args.steps,
            refs_per_descendant=args.refs_per_descendant,
            exo_ratio=args.exo_ratio,
            burst_schedule=tuple(bursts),
            start_year=args.start_year,
            seed=seed,
            attachment=args.attachment,
        )
    except ValueError as exc:
        raise CliError(f"invalid growth parameters: {exc}") from None


def cmd_synth(args) -> int:
    out = Path(args.out)
    if args.variant:
        net = prototype_network(args.variant)
        store.write_atomic(out / "network.json", net.to_json())
        store.update_run_report(out, "synth", {"variant": args.variant, "nodes": len(net)})
        return 0
    if args.count < 1:
        raise CliError("--count must be >= 1")
    if args.count == 1:
        net, log = grow_network(_growth_params(args, args.seed))
        store.write_atomic(out / "network.json", net.to_json())
        store.write_atomic(out / "growth-log.jsonl", log.to_jsonl())
        store.update_run_report(out, "synth", {"seed": args.seed, "nodes": len(net), "steps": len(log)})
        return 0

    # several networks: emit one store with disjoint id blocks
    years, arcs, parents, log_lines = {}, [], [], []
    offset = 0
    for i in range(args.count):
        net, log = grow_network(_growth_params(args, args.seed + i))
        net = relabel(net, offset)
        years.update(net.years)
        arcs.extend(net.arcs)
        parents.append(net.parent)
        log_lines += [json.dumps({"parent": net.parent, **s._asdict()}) + "\n" for s in log.steps]
        offset = max(net.nodes) + 1
    store.write_store(out, [CanonicalRecord(n, y, 1) for n, y in years.items()], arcs)
    store.write_atomic(out / store.PARENTS_FILE, "".join(f"{p}\n" for p in parents))
    store.write_atomic(out / "growth-log.jsonl", "".join(log_lines))
    store.update_run_report(out, "synth", {"networks": args.count, "seed": args.seed, "nodes": len(years)})
    return 0


def cmd_render(args) -> int:
    where = Path(args.store or args.out)
    try:
        metrics_text = (where / "metrics.csv").read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {where / 'metrics.csv'}: {exc.strerror or exc}") from None
    avg_path = where / "field-average.csv"
    average = render.average_rows(avg_path.read_text(encoding="utf-8")) if avg_path.exists() else []
    try:
        bubbles, scatter, timelines = render.chart_inputs(metrics_text)
    except (ValueError, KeyError) as exc:
        raise CliError(f"bad metrics CSV: {exc}") from None
    out = Path(args.out)
    store.write_atomic(out / "reach-bubbles.svg", render.reach_bubbles_svg(bubbles, args.r_min, args.r_max))
    store.write_atomic(out / "entropy-citations.svg", render.entropy_citations_svg(scatter))
    store.write_atomic(out / "timelines.svg", render.timelines_svg(timelines, average))
    store.update_run_report(
        out, "render", {"bubbles": len(bubbles), "scatter_points": len(scatter), "timelines": len(timelines)}
    )
    return 0


# --- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="citeco", description="Citation-ecology analysis of parent networks.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def verb(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", help="output directory")
        p.add_argument("--config", help="JSON file of option defaults (keys as flag names)")
        return p

    def store_opt(p):
        p.add_argument("--store", help="store directory written by ingest/synth (default: --out)")

    def thresholds(p):
        p.add_argument("--jump-threshold", type=float, help="minimum year-over-year rise in R")
        p.add_argument("--drop-threshold", type=float, help="minimum year-over-year fall in H")

    def selection(p):
        p.add_argument("--top-k", type=int, help="number of most-cited parents (default 100)")
        p.add_argument("--year-cutoff", type=int, help="latest eligible publication year (default 1998)")

    p = verb("ingest", "parse, normalize and deduplicate records; translate edges to blind ids")
    p.add_argument("--records", help="record dump (tsv or jsonl)")
    p.add_argument("--edges", help="citing<TAB>cited edge file")
    p.add_argument("--format", choices=("tsv", "jsonl"))

    p = verb("select", "rank parents by citation count")
    store_opt(p)
    selection(p)

    p = verb("analyze", "build networks and compute metrics, timelines, events, field averages")
    store_opt(p)
    selection(p)
    thresholds(p)
    p.add_argument("--parents", help="explicit comma-separated parent blind ids")
    p.add_argument("--network", action="append", help="analyze a network json file instead of a store (repeatable)")
    p.add_argument("--from-year", type=int)
    p.add_argument("--to-year", type=int)
    p.add_argument("--workers", type=int, help="worker processes (default 1)")

    p = verb("events", "detect punctuation events in an existing metrics.csv")
    store_opt(p)
    thresholds(p)

    p = verb("synth", "write a prototype or grown synthetic network")
    p.add_argument("--variant", choices=("A", "B", "C", "D"))
    p.add_argument("--exo-ratio", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--refs-per-descendant", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-grandparents", type=int)
    p.add_argument("--burst", action="append", metavar="STEP:COUNT")
    p.add_argument("--start-year", type=int)
    p.add_argument("--attachment", choices=("uniform", "preferential"))
    p.add_argument("--count", type=int, help="grow this many networks into one store (seeds seed..seed+count-1)")

    p = verb("render", "draw SVG charts from metrics.csv and field-average.csv")
    store_opt(p)
    p.add_argument("--r-min", type=float, help="smallest bubble radius")
    p.add_argument("--r-max", type=float, help="largest bubble radius")
    return parser


def _apply_config(args) -> None:
    if getattr(args, "config", None):
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot load config {args.config}: {exc}") from None
        if not isinstance(config, dict):
            raise CliError("config file must hold a json object")
        for key, value in config.items():
            dest = key.lstrip("-").replace("-", "_")
            if not hasattr(args, dest) or dest in ("command", "config"):
                raise CliError(f"config key {key!r} is not an option of {args.command}")
            if getattr(args, dest) is None:
                setattr(args, dest, value)
    for dest, value in DEFAULTS.items():
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, value)


COMMANDS = {
    "ingest": cmd_ingest,
    "select": cmd_select,
    "analyze": cmd_analyze,
    "events": cmd_events,
    "synth": cmd_synth,
    "render": cmd_render,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        _apply_config(args)
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"citeco {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
