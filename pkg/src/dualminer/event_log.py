"""Event logs as multisets of activity traces, with XES/CSV ingestion and splitting.

A log keeps one entry per distinct (activity sequence, attribute set) pair with a
positive multiplicity.  Attributes never influence the mining algorithms; they feed
the splitting predicates only, which is why entries with equal activities but
different attributes (e.g. timestamps) stay separate instead of being collapsed.
"""
from __future__ import annotations

import csv
import io
import re
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterable, Iterator, Mapping, Optional, Sequence
from xml.sax.saxutils import quoteattr

from .errors import LogConfigError, LogParseError, LogSchemaError, PredicateError

START_ACTIVITY = "__start__"
END_ACTIVITY = "__end__"
RESERVED_ACTIVITIES = frozenset({START_ACTIVITY, END_ACTIVITY})

START_TIME_KEY = "start_timestamp"
END_TIME_KEY = "end_timestamp"


def _check_activity(name: str) -> str:
    if not name:
        raise LogSchemaError("activity names must be non-empty")
    if name in RESERVED_ACTIVITIES:
        raise LogSchemaError(f"activity name {name!r} collides with a reserved start/end marker")
    return name


class Trace:
    """An ordered activity sequence plus optional scalar attributes."""

    __slots__ = ("activities", "attributes", "_key")

    def __init__(self, activities: Iterable[str], attributes: Optional[Mapping] = None):
        self.activities = tuple(_check_activity(a) for a in activities)
        self.attributes = dict(attributes) if attributes else {}
        self._key = (self.activities, tuple(sorted(self.attributes.items(), key=lambda kv: kv[0])))

    def __len__(self) -> int:
        return len(self.activities)

    def __eq__(self, other) -> bool:
        return isinstance(other, Trace) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Trace({list(self.activities)!r})"

    def duration(self) -> timedelta:
        """Wall-clock span between the first and last recorded timestamps."""
        try:
            start = self.attributes[START_TIME_KEY]
            end = self.attributes[END_TIME_KEY]
        except KeyError:
            raise PredicateError(f"trace {self.activities!r} carries no timestamps") from None
        return end - start


class EventLog:
    """Immutable multiset of traces."""

    __slots__ = ("_entries", "_alphabet", "_total")

    def __init__(self, entries: Iterable[tuple[Trace, int]] = ()):
        merged: dict[Trace, int] = {}
        for trace, count in entries:
            if count <= 0 or count != int(count):
                raise ValueError(f"trace multiplicity must be a positive integer, got {count}")
            merged[trace] = merged.get(trace, 0) + int(count)
        self._entries = merged
        self._alphabet = frozenset(a for t in merged for a in t.activities)
        self._total = sum(merged.values())

    @classmethod
    def from_traces(cls, traces: Iterable[Sequence[str] | Trace]) -> "EventLog":
        return cls((t if isinstance(t, Trace) else Trace(t), 1) for t in traces)

    @classmethod
    def from_variants(cls, variants: Mapping[Sequence[str], int]) -> "EventLog":
        return cls((Trace(seq), count) for seq, count in variants.items())

    @property
    def alphabet(self) -> frozenset[str]:
        return self._alphabet

    @property
    def total_traces(self) -> int:
        return self._total

    def __len__(self) -> int:
        return self._total

    def __bool__(self) -> bool:
        return self._total > 0

    def __iter__(self) -> Iterator[tuple[Trace, int]]:
        return iter(self._entries.items())

    def __eq__(self, other) -> bool:
        return isinstance(other, EventLog) and self._entries == other._entries

    def __hash__(self):
        raise TypeError("EventLog is not hashable")

    def __repr__(self) -> str:
        return f"EventLog({self._total} traces, {len(self._entries)} entries)"

    def variant_counts(self) -> Counter:
        """Multiplicity per distinct activity sequence, attributes ignored."""
        counts: Counter = Counter()
        for trace, count in self._entries.items():
            counts[trace.activities] += count
        return counts

    def project(self, alphabet: Iterable[str]) -> "EventLog":
        """Drop all events outside ``alphabet``; empty results stay as empty traces."""
        keep = frozenset(alphabet)
        return EventLog(
            (Trace((a for a in t.activities if a in keep), t.attributes), c)
            for t, c in self._entries.items()
        )


def project(log: EventLog, alphabet: Iterable[str]) -> EventLog:
    return log.project(alphabet)


# --- splitting predicates -------------------------------------------------


@dataclass(frozen=True)
class ActivityPresence:
    """True when the given activity occurs anywhere in the trace."""

    activity: str

    def __call__(self, trace: Trace) -> bool:
        return self.activity in trace.activities


@dataclass(frozen=True)
class DurationOver:
    """True when the trace span exceeds ``limit`` (requires timestamps)."""

    limit: timedelta

    def __call__(self, trace: Trace) -> bool:
        return trace.duration() > self.limit


@dataclass(frozen=True)
class AttributeEquals:
    """True when the trace attribute ``key`` stringifies to ``value``."""

    key: str
    value: str

    def __call__(self, trace: Trace) -> bool:
        got = trace.attributes.get(self.key)
        return got is not None and str(got) == self.value


def split_by_predicate(log: EventLog, predicate) -> tuple[EventLog, EventLog]:
    """Partition the log into (satisfying, rest); multiplicities are preserved."""
    plus: list[tuple[Trace, int]] = []
    minus: list[tuple[Trace, int]] = []
    for trace, count in log:
        (plus if predicate(trace) else minus).append((trace, count))
    return EventLog(plus), EventLog(minus)


# --- ISO-8601 durations ----------------------------------------------------

_DURATION_RE = re.compile(
    r"^P(?:(?P<weeks>\d+(?:\.\d+)?)W)?(?:(?P<days>\d+(?:\.\d+)?)D)?"
    r"(?:T(?:(?P<hours>\d+(?:\.\d+)?)H)?(?:(?P<minutes>\d+(?:\.\d+)?)M)?"
    r"(?:(?P<seconds>\d+(?:\.\d+)?)S)?)?$"
)


def parse_iso_duration(text: str) -> timedelta:
    """Parse durations like P14D, PT12H or P1DT6H30M.

    Calendar units (years, months) have no fixed length and are rejected.
    """
    match = _DURATION_RE.match(text)
    if not match:
        raise LogConfigError(f"unsupported ISO-8601 duration: {text!r}")
    parts = {k: float(v) for k, v in match.groupdict().items() if v is not None}
    if not parts:
        raise LogConfigError(f"unsupported ISO-8601 duration: {text!r}")
    return timedelta(
        weeks=parts.get("weeks", 0.0),
        days=parts.get("days", 0.0),
        hours=parts.get("hours", 0.0),
        minutes=parts.get("minutes", 0.0),
        seconds=parts.get("seconds", 0.0),
    )


def _parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


# --- XES -------------------------------------------------------------------

def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _simple_attributes(element) -> dict:
    out = {}
    for child in element:
        tag = _local(child.tag)
        key = child.get("key")
        value = child.get("value")
        if key is None or value is None:
            continue
        if tag == "string":
            out[key] = value
        elif tag == "int":
            out[key] = int(value)
        elif tag == "float":
            out[key] = float(value)
        elif tag == "boolean":
            out[key] = value.lower() == "true"
        elif tag == "date":
            out[key] = _parse_timestamp(value)
    return out


def parse_xes(data: bytes | str) -> EventLog:
    """Read the XES subset used here: traces of events with concept:name labels.

    Event timestamps (time:timestamp) feed the trace's start/end attributes;
    all other event-level extensions are ignored.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise LogParseError(f"malformed XES XML: {exc.msg if hasattr(exc, 'msg') else exc}", line, column) from exc
    if _local(root.tag) != "log":
        raise LogSchemaError(f"expected <log> root element, found <{_local(root.tag)}>")

    entries = []
    trace_index = 0
    for trace_el in root:
        if _local(trace_el.tag) != "trace":
            continue
        activities = []
        timestamps = []
        attributes = {}
        for child in trace_el:
            tag = _local(child.tag)
            if tag == "event":
                event_attrs = _simple_attributes(child)
                name = event_attrs.get("concept:name")
                if name is None:
                    raise LogSchemaError(f"event without concept:name in trace {trace_index}")
                activities.append(str(name))
                ts = event_attrs.get("time:timestamp")
                if isinstance(ts, datetime):
                    timestamps.append(ts)
            else:
                key = child.get("key")
                value = child.get("value")
                if key is not None and value is not None:
                    attributes.update(_simple_attributes_single(tag, key, value))
        if timestamps:
            attributes[START_TIME_KEY] = timestamps[0]
            attributes[END_TIME_KEY] = timestamps[-1]
        entries.append((Trace(activities, attributes), 1))
        trace_index += 1
    return EventLog(entries)


def _simple_attributes_single(tag: str, key: str, value: str) -> dict:
    if tag == "string":
        return {key: value}
    if tag == "int":
        return {key: int(value)}
    if tag == "float":
        return {key: float(value)}
    if tag == "boolean":
        return {key: value.lower() == "true"}
    if tag == "date":
        return {key: _parse_timestamp(value)}
    return {}


def write_xes(log: EventLog) -> bytes:
    """Serialize to minimal XES: concept:name per event, trace-level attributes kept."""
    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write('<log xes.version="1.0" xes.features="">\n')
    for trace, count in sorted(log, key=lambda tc: (tc[0].activities, repr(tc[0].attributes))):
        for _ in range(count):
            out.write("  <trace>\n")
            for key, value in sorted(trace.attributes.items()):
                if key in (START_TIME_KEY, END_TIME_KEY):
                    continue
                out.write(f"    {_xes_attribute(key, value)}\n")
            timestamps = _spread_timestamps(trace)
            for position, activity in enumerate(trace.activities):
                out.write("    <event>\n")
                out.write(f'      <string key="concept:name" value={quoteattr(activity)}/>\n')
                if timestamps is not None:
                    stamp = timestamps[position].isoformat()
                    out.write(f'      <date key="time:timestamp" value="{stamp}"/>\n')
                out.write("    </event>\n")
            out.write("  </trace>\n")
    out.write("</log>\n")
    return out.getvalue().encode("utf-8")


def _xes_attribute(key: str, value) -> str:
    if isinstance(value, bool):
        return f'<boolean key={quoteattr(key)} value="{str(value).lower()}"/>'
    if isinstance(value, int):
        return f'<int key={quoteattr(key)} value="{value}"/>'
    if isinstance(value, float):
        return f'<float key={quoteattr(key)} value="{value!r}"/>'
    if isinstance(value, datetime):
        return f'<date key={quoteattr(key)} value="{value.isoformat()}"/>'
    return f'<string key={quoteattr(key)} value={quoteattr(str(value))}/>'


def _spread_timestamps(trace: Trace):
    # only the first/last timestamps survive parsing, so interpolate the rest
    start = trace.attributes.get(START_TIME_KEY)
    end = trace.attributes.get(END_TIME_KEY)
    if not isinstance(start, datetime) or not isinstance(end, datetime) or not trace.activities:
        return None
    n = len(trace.activities)
    if n == 1:
        return [start]
    step = (end - start) / (n - 1)
    return [start + step * i for i in range(n)]


# --- CSV -------------------------------------------------------------------


@dataclass(frozen=True)
class CsvConfig:
    case_column: str
    activity_column: str
    timestamp_column: Optional[str] = None
    delimiter: str = ","


def parse_csv(data: bytes | str, config: CsvConfig) -> EventLog:
    """Read one event per row; rows group into traces by case id.

    Within a case, events are ordered by timestamp (original row order breaks
    ties); without a timestamp column, file order is event order.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.DictReader(io.StringIO(data), delimiter=config.delimiter)
    if reader.fieldnames is None:
        raise LogParseError("CSV input has no header row")
    for column in (config.case_column, config.activity_column, config.timestamp_column):
        if column is not None and column not in reader.fieldnames:
            raise LogConfigError(f"configured column {column!r} not in CSV header {reader.fieldnames}")

    cases: dict[str, list] = {}
    for row_number, row in enumerate(reader, start=2):
        case = row[config.case_column]
        activity = row[config.activity_column]
        if activity is None or case is None:
            raise LogParseError(f"row {row_number} lacks case or activity values")
        timestamp = None
        if config.timestamp_column is not None:
            raw = row[config.timestamp_column]
            try:
                timestamp = _parse_timestamp(raw)
            except (ValueError, AttributeError) as exc:
                raise LogParseError(f"row {row_number}: unparseable timestamp {raw!r}") from exc
        cases.setdefault(case, []).append((timestamp, row_number, activity))

    entries = []
    for case, events in cases.items():
        if config.timestamp_column is not None:
            events.sort(key=lambda e: (e[0], e[1]))
        attributes = {"case_id": case}
        stamps = [ts for ts, _, _ in events if ts is not None]
        if stamps:
            attributes[START_TIME_KEY] = events[0][0]
            attributes[END_TIME_KEY] = events[-1][0]
        entries.append((Trace((a for _, _, a in events), attributes), 1))
    return EventLog(entries)


# --- canonical text form (tests, fixtures) ---------------------------------

def log_to_text(log: EventLog) -> str:
    """One variant per line: comma-separated activities with a ^n multiplicity suffix."""
    lines = []
    for seq, count in sorted(log.variant_counts().items()):
        body = ",".join(seq)
        if count > 1 or not seq:
            body += f"^{count}"
        lines.append(body)
    return "\n".join(lines) + ("\n" if lines else "")


def log_from_text(text: str) -> EventLog:
    variants: Counter = Counter()
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        count = 1
        if "^" in line:
            body, _, suffix = line.rpartition("^")
            try:
                count = int(suffix)
            except ValueError:
                raise LogParseError(f"bad multiplicity suffix in line {raw!r}") from None
            line = body
        seq = tuple(a for a in line.split(",") if a) if line else ()
        variants[seq] += count
    return EventLog.from_variants(variants)
