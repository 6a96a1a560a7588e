"""Bibliographic record parsing, normalization, deduplication and blind IDs.

Records come in as tab-separated or json-lines dumps. They are normalized,
merged on a seven-field key (authors, source, volume, issue, title, pages,
publisher) and assigned dense integer ``blind_id`` values. Everything after
this module works only on ``blind_id`` and publication year; the metadata
lives in a :class:`BlindMap` that is stored separately.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, NamedTuple

logger = logging.getLogger(__name__)

RECORD_FIELDS = (
    "authors",
    "source",
    "volume",
    "issue",
    "title",
    "pages",
    "publisher",
    "year",
    "external_key",
)
REQUIRED_FIELDS = RECORD_FIELDS[:-1]
FORMATS = ("tsv", "jsonl")
YEAR_RANGE = (1500, 2100)

_DASHES = dict.fromkeys(map(ord, "‐‑‒–—―−﹘﹣－"), "-")


class ConfigurationError(ValueError):
    """Fatal misconfiguration, e.g. an unknown input format or a bad header."""


@dataclass(frozen=True)
class Issue:
    """One entry of the ingest report."""

    level: str
    kind: str
    message: str
    row: int | None = None

    def to_dict(self) -> dict:
        return {"level": self.level, "kind": self.kind, "row": self.row, "message": self.message}


@dataclass
class IngestReport:
    issues: list[Issue] = field(default_factory=list)

    def error(self, kind: str, message: str, row: int | None = None) -> None:
        self.issues.append(Issue("error", kind, message, row))
        logger.warning("row %s: %s", row, message)

    def warning(self, kind: str, message: str, row: int | None = None) -> None:
        self.issues.append(Issue("warning", kind, message, row))
        logger.info("row %s: %s", row, message)

    @property
    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.level == "error"]

    @property
    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.level == "warning"]

    def __len__(self) -> int:
        return len(self.issues)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(i.to_dict(), sort_keys=True) + "\n" for i in self.issues)


@dataclass(frozen=True)
class RawRecord:
    """A bibliographic record as it appears in the dump."""

    authors: tuple[str, ...]
    source: str
    volume: str
    issue: str
    title: str
    pages: str
    publisher: str
    year: int | None = None
    external_key: str | None = None
    source_row: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.title.strip():
            raise ValueError("title is empty")
        if self.year is not None and not YEAR_RANGE[0] <= self.year <= YEAR_RANGE[1]:
            raise ValueError(f"year {self.year} outside {YEAR_RANGE[0]}..{YEAR_RANGE[1]}")

    def metadata(self) -> dict:
        return {
            "authors": list(self.authors),
            "source": self.source,
            "volume": self.volume,
            "issue": self.issue,
            "title": self.title,
            "pages": self.pages,
            "publisher": self.publisher,
            "year": self.year,
            "external_key": self.external_key,
        }


@dataclass(frozen=True)
class CanonicalRecord:
    blind_id: int
    year: int | None
    merged_from: int = 1


class CitationEdge(NamedTuple):
    citing: int
    cited: int


class DedupKey(NamedTuple):
    """Composite duplicate-detection key; all parts are case-folded."""

    authors: str
    source: str
    volume: str
    issue: str
    title: str
    pages: str
    publisher: str

    def digest(self) -> str:
        return hashlib.sha256("\x1f".join(self).encode("utf-8")).hexdigest()[:16]


# --- parsing -----------------------------------------------------------------


def _parse_year(value) -> int | None:
    if value is None:
        return None
    if isinstance(value, bool):
        raise ValueError(f"year {value!r} is not an integer")
    if isinstance(value, int):
        return value
    text = str(value).strip()
    if not text:
        return None
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"year {text!r} is not an integer") from None


def _split_authors(value) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        parts = value.split(";")
    else:
        parts = [str(v) for v in value]
    return tuple(p.strip() for p in parts if p.strip())


def _record_from_mapping(row: dict, line: int) -> RawRecord:
    def text(name):
        value = row.get(name)
        return "" if value is None else str(value)

    ext = row.get("external_key")
    ext = str(ext).strip() if ext not in (None, "") else None
    return RawRecord(
        authors=_split_authors(row.get("authors")),
        source=text("source"),
        volume=text("volume"),
        issue=text("issue"),
        title=text("title"),
        pages=text("pages"),
        publisher=text("publisher"),
        year=_parse_year(row.get("year")),
        external_key=ext or None,
        source_row=line,
    )


def _read_text(stream: IO) -> str:
    data = stream.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    elif data.startswith("﻿"):
        data = data[1:]
    return data


def parse_records(stream: IO, format: str, report: IngestReport | None = None) -> list[RawRecord]:
    """Parse a record dump into :class:`RawRecord` objects.

    ``format`` is ``"tsv"`` (alias ``"delimited"``) or ``"jsonl"`` (alias
    ``"json-lines"``). Malformed rows are skipped and logged in ``report``
    with their 1-based line number; the remaining rows are still parsed.
    """
    fmt = {"delimited": "tsv", "json-lines": "jsonl"}.get(format, format)
    if fmt not in FORMATS:
        raise ConfigurationError(f"unknown record format {format!r}; expected one of {FORMATS}")
    report = report if report is not None else IngestReport()
    text = _read_text(stream)
    if fmt == "tsv":
        return _parse_tsv(text, report)
    return _parse_jsonl(text, report)


def _parse_tsv(text: str, report: IngestReport) -> list[RawRecord]:
    lines = text.splitlines()
    if not any(line.strip() for line in lines):
        return []
    reader = csv.reader(io.StringIO(text), delimiter="\t", quoting=csv.QUOTE_NONE)
    header = [h.strip() for h in next(reader)]
    missing = [f for f in REQUIRED_FIELDS if f not in header]
    if missing:
        raise ConfigurationError(f"record header lacks columns {missing}")
    records = []
    for line, values in enumerate(reader, start=2):
        if not any(v.strip() for v in values):
            continue
        if len(values) > len(header):
            report.error("malformed_row", f"expected {len(header)} columns, got {len(values)}", line)
            continue
        row = dict(zip(header, values))
        try:
            records.append(_record_from_mapping(row, line))
        except ValueError as exc:
            report.error("malformed_row", str(exc), line)
    return records


def _parse_jsonl(text: str, report: IngestReport) -> list[RawRecord]:
    records = []
    for line, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            if not isinstance(obj, dict):
                raise ValueError("row is not a json object")
            records.append(_record_from_mapping(obj, line))
        except ValueError as exc:
            report.error("malformed_row", str(exc), line)
    return records


# --- normalization -----------------------------------------------------------


def _collapse(text: str) -> str:
    return " ".join(text.split())


def _fold(text: str) -> str:
    return _collapse(text).casefold()


def _initials(given: str) -> list[str]:
    out = []
    for tok in re.split(r"[\s.\-]+", given):
        if not tok or not tok[0].isalpha():
            continue
        # "JB" in "Smith, JB" is two initials
        letters = tok if tok.isupper() and tok.isalpha() and len(tok) <= 3 else tok[0]
        out.extend(ch.upper()[0] + "." for ch in letters)
    return out


def normalize_author(name: str) -> str:
    """Rewrite an author name as ``"Surname, F. M."``.

    Without a comma the last whitespace token is taken as the surname.
    """
    name = _collapse(name.translate(_DASHES))
    if not name:
        return ""
    if "," in name:
        surname, given = name.split(",", 1)
    else:
        parts = name.split(" ")
        if len(parts) == 1:
            return name
        surname, given = parts[-1], " ".join(parts[:-1])
    surname = surname.strip()
    inits = " ".join(_initials(given))
    if surname and inits:
        return f"{surname}, {inits}"
    if surname:
        return surname
    return f", {inits}" if inits else ""


def normalize_pages(pages: str) -> str:
    parts = [p.strip() for p in re.split(r"-+", _collapse(pages.translate(_DASHES)))]
    return "-".join(p for p in parts if p)


def normalize(r: RawRecord) -> RawRecord:
    """Mechanical clean-up of one record. Total and idempotent."""
    authors = tuple(a for a in (normalize_author(a) for a in r.authors) if a)
    return replace(
        r,
        authors=authors,
        source=_fold(r.source),
        volume=_collapse(r.volume),
        issue=_collapse(r.issue),
        title=_fold(r.title),
        pages=normalize_pages(r.pages),
        publisher=_fold(r.publisher),
    )


def dedup_key(r: RawRecord) -> DedupKey:
    n = normalize(r)
    return DedupKey(
        authors="; ".join(a.casefold() for a in n.authors),
        source=n.source,
        volume=n.volume.casefold(),
        issue=n.issue.casefold(),
        title=n.title,
        pages=n.pages.casefold(),
        publisher=n.publisher,
    )


# --- merging -----------------------------------------------------------------


@dataclass
class BlindMap:
    """Bidirectional mapping between dedup keys and blind IDs.

    ``reverse`` holds one representative (normalized) record per blind ID.
    ``external`` resolves index-provided identifiers to blind IDs.
    """

    forward: dict[DedupKey, int] = field(default_factory=dict)
    reverse: dict[int, RawRecord] = field(default_factory=dict)
    external: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self._digests = {k.digest(): v for k, v in self.forward.items()}

    def __len__(self) -> int:
        return len(self.forward)

    def key_of(self, blind_id: int) -> DedupKey:
        return dedup_key(self.reverse[blind_id])

    def resolve(self, token: str) -> int | None:
        token = token.strip()
        if token in self.external:
            return self.external[token]
        return self._digests.get(token)

    def to_dict(self) -> dict:
        return {
            "records": [
                {
                    "blind_id": bid,
                    "digest": key.digest(),
                    "key": list(key),
                    "metadata": self.reverse[bid].metadata(),
                }
                for key, bid in sorted(self.forward.items(), key=lambda kv: kv[1])
            ],
            "external": dict(sorted(self.external.items())),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BlindMap":
        forward, reverse = {}, {}
        for entry in data["records"]:
            bid = int(entry["blind_id"])
            forward[DedupKey(*entry["key"])] = bid
            meta = dict(entry["metadata"])
            meta["authors"] = tuple(meta["authors"])
            reverse[bid] = RawRecord(**meta)
        return cls(forward, reverse, {k: int(v) for k, v in data.get("external", {}).items()})


def merge_duplicates(
    records: Iterable[RawRecord], report: IngestReport | None = None
) -> tuple[list[CanonicalRecord], BlindMap]:
    """Merge records sharing a dedup key and assign blind IDs.

    Blind IDs are dense from 0 in sorted key order, so the result does not
    depend on input order. Duplicates disagreeing on year keep the earliest.
    """
    report = report if report is not None else IngestReport()
    groups: dict[DedupKey, list[RawRecord]] = defaultdict(list)
    for r in records:
        n = normalize(r)
        groups[dedup_key(n)].append(n)

    canon, bmap = [], BlindMap()
    for blind_id, key in enumerate(sorted(groups)):
        members = groups[key]
        years = sorted({m.year for m in members if m.year is not None})
        year = years[0] if years else None
        rows = [m.source_row for m in members]
        if len(years) > 1:
            report.warning(
                "conflicting_year",
                f"blind_id {blind_id}: duplicates disagree on year {years}, keeping {year}",
                rows[0],
            )
        if year is None:
            report.warning("missing_year", f"blind_id {blind_id} has no year; excluded from snapshots", rows[0])
        canon.append(CanonicalRecord(blind_id, year, len(members)))
        bmap.forward[key] = blind_id
        bmap.reverse[blind_id] = replace(members[0], year=year)
        for m in members:
            if m.external_key is None:
                continue
            prior = bmap.external.setdefault(m.external_key, blind_id)
            if prior != blind_id:
                report.warning(
                    "external_key_clash",
                    f"external_key {m.external_key!r} already bound to blind_id {prior}",
                    m.source_row,
                )
    bmap.__post_init__()
    return canon, bmap


def load_edges(stream: IO, blind_map: BlindMap, report: IngestReport | None = None) -> list[CitationEdge]:
    """Read ``citing<TAB>cited`` rows and translate them to blind IDs.

    Endpoints are external keys or dedup-key digests. Unresolvable rows are
    reported as errors, self-citations as warnings; duplicates collapse.
    """
    report = report if report is not None else IngestReport()
    edges: set[CitationEdge] = set()
    for line, raw in enumerate(_read_text(stream).splitlines(), start=1):
        if not raw.strip():
            continue
        cols = raw.split("\t")
        if len(cols) != 2:
            report.error("malformed_edge", f"expected 2 columns, got {len(cols)}", line)
            continue
        if line == 1 and [c.strip() for c in cols] == ["citing", "cited"]:
            continue
        citing, cited = (blind_map.resolve(c) for c in cols)
        if citing is None or cited is None:
            bad = [c.strip() for c, v in zip(cols, (citing, cited)) if v is None]
            report.error("unresolved_edge", f"unknown endpoint(s) {bad}", line)
            continue
        if citing == cited:
            report.warning("self_citation", f"self-citation of blind_id {citing} rejected", line)
            continue
        edges.add(CitationEdge(citing, cited))
    return sorted(edges)
