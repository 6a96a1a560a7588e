"""On-disk layout shared by the CLI verbs.

A store directory holds the analysis-facing files (``records.jsonl`` with
blind_id/year/merged_from and ``edges.tsv`` in blind ids) and, kept apart
from them, ``blindmap.json`` with the metadata. Every write is whole-file
atomic.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

from .graph import CitationIndex
from .ingest import CanonicalRecord, CitationEdge

RECORDS_FILE = "records.jsonl"
EDGES_FILE = "edges.tsv"
BLINDMAP_FILE = "blindmap.json"
REPORT_FILE = "ingest-report.jsonl"
PARENTS_FILE = "parents.txt"
RUN_REPORT = "run-report.json"


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def records_jsonl(records: Iterable[CanonicalRecord]) -> str:
    return "".join(
        json.dumps({"blind_id": r.blind_id, "year": r.year, "merged_from": r.merged_from}) + "\n"
        for r in sorted(records, key=lambda r: r.blind_id)
    )


def edges_tsv(edges: Iterable[tuple[int, int]]) -> str:
    return "citing\tcited\n" + "".join(f"{u}\t{v}\n" for u, v in sorted(edges))


def write_store(out: Path, records: Iterable[CanonicalRecord], edges: Iterable[tuple[int, int]]) -> None:
    write_atomic(Path(out) / RECORDS_FILE, records_jsonl(records))
    write_atomic(Path(out) / EDGES_FILE, edges_tsv(edges))


def read_years(path: Path) -> dict[int, int | None]:
    years = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                row = json.loads(line)
                years[int(row["blind_id"])] = row.get("year")
    return years


def read_edges(path: Path) -> list[CitationEdge]:
    edges = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            cols = line.split()
            if not cols or (i == 0 and cols == ["citing", "cited"]):
                continue
            edges.append(CitationEdge(int(cols[0]), int(cols[1])))
    return edges


def read_store(store: Path) -> tuple[dict[int, int | None], CitationIndex]:
    store = Path(store)
    return read_years(store / RECORDS_FILE), CitationIndex(read_edges(store / EDGES_FILE))


def update_run_report(out: Path, section: str, payload: dict) -> None:
    """Merge ``payload`` under ``section`` into the directory's run report."""
    path = Path(out) / RUN_REPORT
    report = {}
    if path.exists():
        report = json.loads(path.read_text(encoding="utf-8"))
    report[section] = payload
    write_atomic(path, dump_json(report))
