"""Minute-bar CSV ingestion: parsing, sessions, transforms and segmentation."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from typing import BinaryIO, Iterator, Literal, Mapping, Sequence

import numpy as np

from .spectral import TimeSeries, is_power_of_two

log = logging.getLogger(__name__)

CANONICAL_HEADER = ("timestamp", "open", "high", "low", "close", "volume")
PRICE_COLUMNS = ("open", "high", "low", "close")
GAP_POLICY = "carry-forward"


class TickParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class TickRecord:
    timestamp: datetime
    open: float
    high: float
    low: float
    close: float
    volume: int

    def __post_init__(self):
        prices = (self.open, self.high, self.low, self.close)
        if not all(math.isfinite(p) and p > 0 for p in prices):
            raise ValueError(f"prices must be positive and finite, got {prices}")
        if self.low > min(self.open, self.close) or self.high < max(self.open, self.close):
            raise ValueError(
                f"inconsistent bar: low={self.low} high={self.high} "
                f"open={self.open} close={self.close}")
        if self.volume < 0:
            raise ValueError(f"volume must be >= 0, got {self.volume}")

    def price(self, column: str) -> float:
        return getattr(self, column)


@dataclass(frozen=True)
class ParsedTicks:
    """Sorted records plus the number of duplicate timestamps collapsed."""

    records: tuple[TickRecord, ...]
    duplicates: int = 0
    price_column: str = "close"

    def __len__(self):
        return len(self.records)

    def __iter__(self) -> Iterator[TickRecord]:
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]


def _parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.second or ts.microsecond:
        raise ValueError(f"timestamp {text!r} is not on a minute boundary")
    return ts


def _parse_volume(text: str) -> int:
    v = float(text)
    if not v.is_integer():
        raise ValueError(f"volume {text!r} is not an integer")
    return int(v)


def _open_text(source) -> io.TextIOBase:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8"))
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8", newline="")
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data)


def parse_ticks(source: bytes | str | os.PathLike | BinaryIO,
                price_column: str = "close",
                columns: Mapping[str, str] | None = None) -> ParsedTicks:
    """Parse a minute-bar CSV with a header row.

    ``source`` is raw bytes, a path, or a binary/text stream. ``columns``
    maps canonical names (timestamp, open, high, low, close, volume) to the
    header names used in the file; unspecified names map to themselves
    (case-insensitive). Timestamps are ISO-8601 or ``YYYY-MM-DD HH:MM``.
    Duplicate timestamps keep the last row and are counted.
    """
    if price_column not in PRICE_COLUMNS:
        raise ValueError(f"price_column must be one of {PRICE_COLUMNS}, got {price_column!r}")
    mapping = {k: k for k in CANONICAL_HEADER}
    if columns:
        unknown = set(columns) - set(CANONICAL_HEADER)
        if unknown:
            raise ValueError(f"unknown canonical column(s) {sorted(unknown)}")
        mapping.update(columns)

    with _open_text(source) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not any(h.strip() for h in header):
            raise TickParseError("empty file")
        lookup = {h.strip().lower(): i for i, h in enumerate(header)}
        index = {}
        for canon, name in mapping.items():
            if name.lower() not in lookup:
                raise TickParseError(f"missing column {name!r} in header {header}", line=1)
            index[canon] = lookup[name.lower()]

        by_time: dict[datetime, TickRecord] = {}
        duplicates = 0
        for row in reader:
            line = reader.line_num
            if not row or not any(c.strip() for c in row):
                continue
            if len(row) < len(header):
                raise TickParseError(f"expected {len(header)} fields, got {len(row)}", line)
            try:
                ts = _parse_timestamp(row[index["timestamp"]])
            except ValueError as exc:
                raise TickParseError(f"bad timestamp: {exc}", line) from None
            values = {}
            for name in PRICE_COLUMNS:
                raw = row[index[name]]
                try:
                    values[name] = float(raw)
                except ValueError:
                    raise TickParseError(f"{name} value {raw!r} is not a number", line) from None
                if not (math.isfinite(values[name]) and values[name] > 0):
                    raise TickParseError(f"{name} price must be positive, got {raw!r}", line)
            try:
                volume = _parse_volume(row[index["volume"]])
                rec = TickRecord(ts, volume=volume, **values)
            except ValueError as exc:
                raise TickParseError(str(exc), line) from None
            if ts in by_time:
                duplicates += 1
            by_time[ts] = rec

    if not by_time:
        raise TickParseError("file has a header but no data rows")
    if duplicates:
        log.warning("collapsed %d duplicate timestamp(s), keeping the last occurrence", duplicates)
    records = tuple(by_time[t] for t in sorted(by_time))
    return ParsedTicks(records, duplicates, price_column)


def write_ticks(records: Sequence[TickRecord], path_or_buf) -> None:
    """Normalized CSV with the canonical header."""
    own = isinstance(path_or_buf, (str, os.PathLike))
    fh = open(path_or_buf, "w", encoding="utf-8", newline="") if own else path_or_buf
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CANONICAL_HEADER)
        for r in records:
            w.writerow([r.timestamp.strftime("%Y-%m-%d %H:%M"), repr(r.open), repr(r.high),
                        repr(r.low), repr(r.close), r.volume])
    finally:
        if own:
            fh.close()


@dataclass(frozen=True)
class SessionSeries:
    sessions: tuple[tuple[date, TimeSeries], ...]
    gap_policy_applied: str = GAP_POLICY
    fill_count: int = 0
    dropped_sessions: int = 0

    def __len__(self):
        return len(self.sessions)

    @property
    def lengths(self) -> list[int]:
        return [len(ts) for _, ts in self.sessions]


def sessionize(records: Sequence[TickRecord] | ParsedTicks, max_gap_minutes: int = 60,
               column: str | None = None) -> SessionSeries:
    """Split records into sessions at gaps longer than ``max_gap_minutes``.

    Missing minutes inside a session are filled with the previous value and
    counted. Sessions shorter than two samples cannot form a series and are
    dropped (counted in ``dropped_sessions``).
    """
    if column is None:
        column = getattr(records, "price_column", "close")
    records = list(records)
    if not records:
        raise ValueError("no records to sessionize")
    if max_gap_minutes < 1:
        raise ValueError(f"max_gap_minutes must be >= 1, got {max_gap_minutes}")

    groups: list[list[float]] = [[records[0].price(column)]]
    starts = [records[0].timestamp]
    fills = 0
    for prev, cur in zip(records, records[1:]):
        gap = (cur.timestamp - prev.timestamp) / timedelta(minutes=1)
        if gap <= 0:
            raise ValueError(f"records not strictly increasing at {cur.timestamp}")
        if gap <= max_gap_minutes:
            missing = int(round(gap)) - 1
            groups[-1].extend([groups[-1][-1]] * missing)
            fills += missing
            groups[-1].append(cur.price(column))
        else:
            groups.append([cur.price(column)])
            starts.append(cur.timestamp)

    sessions = []
    dropped = 0
    for start, vals in zip(starts, groups):
        if len(vals) < 2:
            dropped += 1
            continue
        sessions.append((start.date(), TimeSeries(vals, dt=60.0, label=f"{column} {start.date()}")))
    if not sessions:
        raise ValueError("no session has at least two samples")
    return SessionSeries(tuple(sessions), GAP_POLICY, fills, dropped)


@dataclass(frozen=True)
class TransformSpec:
    kind: Literal["raw", "demean", "log_return", "first_difference"] = "raw"

    def __post_init__(self):
        if self.kind not in ("raw", "demean", "log_return", "first_difference"):
            raise ValueError(f"unknown transform {self.kind!r}")


def apply_transform(values: np.ndarray, kind: str) -> np.ndarray:
    """Array-level transform of one session's samples."""
    v = np.asarray(values, dtype=float)
    if kind == "raw":
        return v.copy()
    if kind == "demean":
        return v - v.mean()
    if kind == "log_return":
        bad = np.flatnonzero(v <= 0)
        if bad.size:
            raise ValueError(f"log_return needs positive prices: index {int(bad[0])} is {v[bad[0]]}")
        return np.log(v[1:] / v[:-1])
    if kind == "first_difference":
        return np.diff(v)
    raise ValueError(f"unknown transform {kind!r}")


def transform(sessions: SessionSeries, spec: TransformSpec | str = TransformSpec()) -> SessionSeries:
    """Apply ``spec`` to each session independently.

    log_return and first_difference shorten each session by one sample;
    sessions left with fewer than two samples are dropped and counted.
    """
    if isinstance(spec, str):
        spec = TransformSpec(spec)
    if spec.kind == "raw":
        return sessions
    out = []
    dropped = sessions.dropped_sessions
    for idx, (day, ts) in enumerate(sessions.sessions):
        try:
            new = apply_transform(ts.values, spec.kind)
        except ValueError as exc:
            raise ValueError(f"session {idx} ({day}): {exc}") from None
        if new.size < 2:
            dropped += 1
            continue
        out.append((day, TimeSeries(new, dt=ts.dt, label=f"{ts.label} {spec.kind}")))
    if not out:
        raise ValueError(f"{spec.kind} left no session with at least two samples")
    return SessionSeries(tuple(out), sessions.gap_policy_applied, sessions.fill_count, dropped)


def window(kind: str, length: int) -> np.ndarray:
    if kind == "rectangular":
        return np.ones(length)
    if kind == "hann":
        # periodic Hann, the usual choice for spectral estimation
        return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(length) / length)
    raise ValueError(f"unknown window {kind!r}; use 'rectangular' or 'hann'")


@dataclass(frozen=True)
class SegmentSet:
    """Segments plus their provenance: source session and start offset."""

    segments: tuple[TimeSeries, ...]
    sources: tuple[int, ...]
    starts: tuple[int, ...]
    dropped: int
    segment_length: int
    skipped_sessions: int = 0

    def __len__(self):
        return len(self.segments)

    def __iter__(self) -> Iterator[TimeSeries]:
        return iter(self.segments)

    def __getitem__(self, i):
        return self.segments[i]


def segment(sessions: SessionSeries, segment_length: int = 256, overlap_fraction: float = 0.0,
            window_kind: str = "rectangular") -> SegmentSet:
    """Cut sessions into equal segments, never crossing session boundaries.

    Each segment is demeaned and then windowed. Samples not covered by any
    segment (trailing remainders, or whole sessions shorter than one
    segment) are counted in ``dropped``.
    """
    if not is_power_of_two(segment_length) or segment_length < 4:
        raise ValueError(f"segment_length must be a power of two >= 4, got {segment_length}")
    if not 0 <= overlap_fraction <= 0.5:
        raise ValueError(f"overlap_fraction must lie in [0, 0.5], got {overlap_fraction}")
    longest = max(sessions.lengths)
    if segment_length > longest:
        raise ValueError(
            f"segment_length {segment_length} exceeds the longest session ({longest} samples)")
    win = window(window_kind, segment_length)
    hop = segment_length - int(round(overlap_fraction * segment_length))

    segs, sources, starts = [], [], []
    dropped = skipped = 0
    for idx, (day, ts) in enumerate(sessions.sessions):
        v = ts.values
        if v.size < segment_length:
            dropped += v.size
            skipped += 1
            continue
        count = (v.size - segment_length) // hop + 1
        for j in range(count):
            s = j * hop
            chunk = v[s:s + segment_length]
            segs.append(TimeSeries((chunk - chunk.mean()) * win, dt=ts.dt,
                                   label=f"{ts.label} @{s}"))
            sources.append(idx)
            starts.append(s)
        dropped += v.size - ((count - 1) * hop + segment_length)
    return SegmentSet(tuple(segs), tuple(sources), tuple(starts), dropped,
                      segment_length, skipped)
