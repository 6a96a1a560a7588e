"""Punctuation events: year-over-year jumps in citation reach, optionally
paired with a same-year drop in normalized entropy."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass
from typing import IO, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .metrics import MetricsSeries, fmt_num

JUMP_FLOOR = 0.05
DROP_FLOOR = 0.01
IQR_FACTOR = 0.25

EVENTS_HEADER = ("parent", "year", "delta_R", "delta_H", "paired")
AVERAGE_HEADER = ("year", "mean_R", "mean_H", "parent_count")


class GapError(ValueError):
    """Series years are not contiguous, so year-over-year differences are
    undefined."""


@dataclass(frozen=True)
class PunctuationEvent:
    year: int
    delta_R: float
    delta_H: float
    paired: bool


class FieldAverageRow(NamedTuple):
    year: int
    mean_R: float
    mean_H: float
    parent_count: int


@dataclass(frozen=True)
class FieldAverageSeries:
    rows: tuple[FieldAverageRow, ...]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class PunctuationSummary:
    n_parents: int
    n_events: int
    n_paired: int
    parent_years: int
    events_per_parent_decade: float
    paired_fraction: float

    def to_dict(self) -> dict:
        return asdict(self)


def adaptive_threshold(deltas, floor: float) -> float:
    """A quarter of the interquartile range of ``deltas``, at least ``floor``."""
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0:
        return floor
    q1, q3 = np.percentile(deltas, [25, 75])
    return max(IQR_FACTOR * float(q3 - q1), floor)


def default_thresholds(series: MetricsSeries) -> tuple[float, float]:
    R, H = series.column("R"), series.column("H")
    return adaptive_threshold(np.diff(R), JUMP_FLOOR), adaptive_threshold(np.diff(H), DROP_FLOOR)


def check_contiguous(years: Sequence[int]) -> None:
    for a, b in zip(years, years[1:]):
        if b != a + 1:
            raise GapError(f"gap between years {a} and {b}")


def find_punctuations(years, R, H, jump_threshold: float, drop_threshold: float) -> list[PunctuationEvent]:
    """Apply the jump/drop rule to aligned arrays. No validation."""
    dR, dH = np.diff(R), np.diff(H)
    return [
        PunctuationEvent(int(years[i + 1]), float(dR[i]), float(dH[i]), bool(dH[i] <= -drop_threshold))
        for i in range(len(dR))
        if dR[i] >= jump_threshold
    ]


def detect_punctuations(
    series: MetricsSeries,
    jump_threshold: float | None = None,
    drop_threshold: float | None = None,
) -> list[PunctuationEvent]:
    """Flag years where reach jumps by at least ``jump_threshold``.

    An event is ``paired`` when normalized entropy falls by at least
    ``drop_threshold`` in the same year. Thresholds left as None use the
    per-series adaptive default (see :func:`default_thresholds`).
    """
    if len(series) < 2:
        raise ValueError("need at least two rows to take differences")
    check_contiguous(series.years)
    auto_jump, auto_drop = default_thresholds(series)
    jump = auto_jump if jump_threshold is None else jump_threshold
    drop = auto_drop if drop_threshold is None else drop_threshold
    if jump <= 0 or drop <= 0:
        raise ValueError("thresholds must be positive")
    return find_punctuations(series.years, series.column("R"), series.column("H"), jump, drop)


def field_average(serieses: Iterable[MetricsSeries]) -> FieldAverageSeries:
    """Per-year mean of R and H over every series that covers the year."""
    serieses = list(serieses)
    if not serieses:
        raise ValueError("field_average needs at least one series")
    acc: dict[int, list] = {}
    for s in serieses:
        for m in s.rows:
            acc.setdefault(m.year, []).append((m.R, m.H))
    rows = []
    for year in sorted(acc):
        vals = np.array(acc[year])
        rows.append(FieldAverageRow(year, float(vals[:, 0].mean()), float(vals[:, 1].mean()), len(vals)))
    return FieldAverageSeries(tuple(rows))


def punctuation_rate(
    events: Mapping[int, Sequence[PunctuationEvent]],
    years_observed: Mapping[int, int],
) -> PunctuationSummary:
    """Events per parent per decade of observation, and the paired share.

    ``years_observed`` gives each parent's observation span in years;
    parents without events still count towards the span.
    """
    parents = set(years_observed) | set(events)
    all_events = [e for evs in events.values() for e in evs]
    n_paired = sum(e.paired for e in all_events)
    span = sum(years_observed.values())
    rate = len(all_events) / (span / 10) if span > 0 else 0.0
    paired = n_paired / len(all_events) if all_events else 0.0
    return PunctuationSummary(len(parents), len(all_events), n_paired, span, rate, paired)


# --- csv interface -----------------------------------------------------------


def write_events_csv(out: IO[str], events: Mapping[int, Sequence[PunctuationEvent]]) -> int:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(EVENTS_HEADER)
    n = 0
    for parent in sorted(events):
        for e in events[parent]:
            w.writerow([parent, e.year, fmt_num(e.delta_R), fmt_num(e.delta_H), "true" if e.paired else "false"])
            n += 1
    return n


def read_events_csv(stream: IO[str]) -> dict[int, list[PunctuationEvent]]:
    reader = csv.DictReader(io.StringIO(stream.read()))
    if tuple(reader.fieldnames or ()) != EVENTS_HEADER:
        raise ValueError(f"events CSV header must be {','.join(EVENTS_HEADER)}")
    out: dict[int, list[PunctuationEvent]] = {}
    for row in reader:
        e = PunctuationEvent(int(row["year"]), float(row["delta_R"]), float(row["delta_H"]), row["paired"] == "true")
        out.setdefault(int(row["parent"]), []).append(e)
    return out


def write_average_csv(out: IO[str], avg: FieldAverageSeries) -> int:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(AVERAGE_HEADER)
    for r in avg.rows:
        w.writerow([r.year, fmt_num(r.mean_R), fmt_num(r.mean_H), r.parent_count])
    return len(avg.rows)


def read_average_csv(stream: IO[str]) -> FieldAverageSeries:
    reader = csv.DictReader(io.StringIO(stream.read()))
    if tuple(reader.fieldnames or ()) != AVERAGE_HEADER:
        raise ValueError(f"field-average CSV header must be {','.join(AVERAGE_HEADER)}")
    return FieldAverageSeries(
        tuple(
            FieldAverageRow(int(r["year"]), float(r["mean_R"]), float(r["mean_H"]), int(r["parent_count"]))
            for r in reader
        )
    )
