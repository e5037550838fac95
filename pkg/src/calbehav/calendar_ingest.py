"""Restricted iCalendar ingestion and recurrence expansion.

Only the subset of RFC 5545 that calendar exports of ordinary appointments
actually use is supported: VEVENT blocks with DTSTART, DTEND, SUMMARY and an
optional RRULE limited to FREQ (DAILY/WEEKLY/MONTHLY), INTERVAL, BYDAY,
COUNT, UNTIL and WKST.  TZID parameters are carried as opaque labels; all
comparisons happen in local wall-clock time.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta
from enum import Enum

from dateutil import rrule as _rrule

from .errors import ContractViolation, Diagnostic

logger = logging.getLogger(__name__)

WEEKDAY_CODES = ("MO", "TU", "WE", "TH", "FR", "SA", "SU")
WEEKDAY_NAMES = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")


class Frequency(str, Enum):
    DAILY = "DAILY"
    WEEKLY = "WEEKLY"
    MONTHLY = "MONTHLY"


class EventType(str, Enum):
    RECURRING = "Recurring"
    NON_RECURRING = "NonRecurring"


@dataclass(frozen=True)
class RecurrenceSpec:
    frequency: Frequency
    interval: int = 1
    by_day: frozenset[str] | None = None
    count: int | None = None
    until: datetime | None = None
    until_is_date: bool = False
    wkst: str | None = None

    def __post_init__(self) -> None:
        if self.interval < 1:
            raise ContractViolation(f"INTERVAL must be >= 1, got {self.interval}")
        if self.by_day is not None:
            if not self.by_day:
                raise ContractViolation("BYDAY must not be empty")
            bad = set(self.by_day) - set(WEEKDAY_CODES)
            if bad:
                raise ContractViolation(f"invalid BYDAY codes: {sorted(bad)}")
        if self.count is not None and self.until is not None:
            raise ContractViolation("COUNT and UNTIL are mutually exclusive")
        if self.count is not None and self.count < 1:
            raise ContractViolation(f"COUNT must be >= 1, got {self.count}")


@dataclass(frozen=True)
class CalendarEvent:
    uid: str
    name: str
    start: datetime
    end: datetime
    recurrence: RecurrenceSpec | None = None
    status: str = ""
    location: str | None = None
    tzid: str | None = None
    end_tzid: str | None = None
    all_day: bool = False

    def __post_init__(self) -> None:
        if not self.name.strip():
            raise ContractViolation("event name must be non-empty")
        if self.end <= self.start:
            raise ContractViolation(f"event {self.uid!r} ends at or before its start")

    @property
    def event_type(self) -> EventType:
        return EventType.RECURRING if self.recurrence is not None else EventType.NON_RECURRING

    @property
    def duration(self) -> timedelta:
        return self.end - self.start


@dataclass(frozen=True, order=True)
class EventOccurrence:
    date: date
    start_time: time
    end_time: time
    event_uid: str = field(compare=True)
    event_name: str = field(default="", compare=True)
    event_type: EventType = field(default=EventType.NON_RECURRING, compare=False)

    def __post_init__(self) -> None:
        if not self.start_time < self.end_time:
            raise ContractViolation("occurrence must start before it ends")

    @property
    def start(self) -> datetime:
        return datetime.combine(self.date, self.start_time)

    @property
    def end(self) -> datetime:
        return datetime.combine(self.date, self.end_time)

    def contains(self, moment: datetime) -> bool:
        """Closed-open containment: [start, end)."""
        return self.start <= moment < self.end

    @property
    def day_time(self) -> str:
        return f"{WEEKDAY_NAMES[self.date.weekday()]}[{_hhmm(self.start_time)}-{_hhmm(self.end_time)}]"


def _hhmm(t: time) -> str:
    if t == time.max:
        return "24:00"
    return f"{t.hour:02d}:{t.minute:02d}"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class _BlockError(Exception):
    def __init__(self, kind: str, line: int, message: str) -> None:
        super().__init__(message)
        self.kind = kind
        self.line = line
        self.message = message


def _unfold(text: str) -> list[tuple[int, str]]:
    """Return logical lines as (first physical line number, content)."""
    out: list[tuple[int, str]] = []
    for lineno, raw in enumerate(re.split(r"\r\n|\n|\r", text), start=1):
        if raw[:1] in (" ", "\t") and out:
            n, prev = out[-1]
            out[-1] = (n, prev + raw[1:])
        elif raw:
            out.append((lineno, raw))
    return out


def _split_property(line: str) -> tuple[str, dict[str, str], str]:
    # The value starts at the first colon outside a quoted parameter value.
    in_quotes = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_quotes = not in_quotes
        elif ch == ":" and not in_quotes:
            head, value = line[:i], line[i + 1 :]
            break
    else:
        raise ValueError("no ':' separator")
    name, *raw_params = head.split(";")
    params = {}
    for p in raw_params:
        key, _, val = p.partition("=")
        params[key.upper()] = val.strip('"')
    return name.upper(), params, value


def _unescape(value: str) -> str:
    return re.sub(r"\\([\\;,nN])", lambda m: "\n" if m.group(1) in "nN" else m.group(1), value)


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace(";", "\\;").replace(",", "\\,").replace("\n", "\\n")


def _parse_datetime(value: str, params: dict[str, str]) -> tuple[datetime, str | None, bool]:
    tzid = params.get("TZID")
    if params.get("VALUE") == "DATE" or re.fullmatch(r"\d{8}", value):
        return datetime.strptime(value, "%Y%m%d"), tzid, True
    if value.endswith("Z"):
        return datetime.strptime(value[:-1], "%Y%m%dT%H%M%S"), tzid or "UTC", False
    return datetime.strptime(value, "%Y%m%dT%H%M%S"), tzid, False


def _parse_rrule(value: str, lineno: int) -> RecurrenceSpec:
    parts: dict[str, str] = {}
    for chunk in value.split(";"):
        if not chunk:
            continue
        key, sep, val = chunk.partition("=")
        if not sep:
            raise _BlockError("MalformedBlock", lineno, f"bad RRULE part {chunk!r}")
        parts[key.upper()] = val.upper()
    freq = parts.pop("FREQ", None)
    if freq is None:
        raise _BlockError("MalformedBlock", lineno, "RRULE without FREQ")
    if freq not in Frequency.__members__:
        raise _BlockError("UnsupportedRecurrence", lineno, f"FREQ={freq} is not supported")
    interval = parts.pop("INTERVAL", "1")
    by_day = parts.pop("BYDAY", None)
    count = parts.pop("COUNT", None)
    until = parts.pop("UNTIL", None)
    wkst = parts.pop("WKST", None)
    if parts:
        raise _BlockError(
            "UnsupportedRecurrence", lineno, f"unsupported RRULE parts: {', '.join(sorted(parts))}"
        )
    days = None
    if by_day is not None:
        days = frozenset(by_day.split(","))
        if not days or not days <= set(WEEKDAY_CODES):
            raise _BlockError("UnsupportedRecurrence", lineno, f"BYDAY={by_day} is not supported")
    until_dt = None
    until_is_date = False
    if until is not None:
        try:
            until_dt, _, until_is_date = _parse_datetime(until, {})
        except ValueError:
            raise _BlockError("MalformedBlock", lineno, f"bad UNTIL {until!r}") from None
    try:
        return RecurrenceSpec(
            frequency=Frequency(freq),
            interval=int(interval),
            by_day=days,
            count=int(count) if count is not None else None,
            until=until_dt,
            until_is_date=until_is_date,
            wkst=wkst,
        )
    except (ValueError, ContractViolation) as exc:
        raise _BlockError("MalformedBlock", lineno, f"bad RRULE: {exc}") from None


def _build_event(props: dict[str, tuple[int, dict[str, str], str]], begin_line: int, index: int) -> CalendarEvent:
    for required in ("DTSTART", "DTEND", "SUMMARY"):
        if required not in props:
            raise _BlockError("MalformedBlock", begin_line, f"VEVENT missing required {required}")
    parsed = {}
    for key in ("DTSTART", "DTEND"):
        lineno, params, value = props[key]
        try:
            parsed[key] = _parse_datetime(value.strip(), params)
        except ValueError:
            raise _BlockError("MalformedBlock", lineno, f"unparseable {key} {value!r}") from None
    start, tzid, all_day = parsed["DTSTART"]
    end, end_tzid, _ = parsed["DTEND"]
    name = _unescape(props["SUMMARY"][2]).strip()
    if not name:
        raise _BlockError("MalformedBlock", props["SUMMARY"][0], "empty SUMMARY")
    if end <= start:
        raise _BlockError("MalformedBlock", props["DTEND"][0], "DTEND is not after DTSTART")
    recurrence = None
    if "RRULE" in props:
        lineno, _, value = props["RRULE"]
        recurrence = _parse_rrule(value, lineno)
    uid = props["UID"][2].strip() if "UID" in props else f"event-{index}"
    location = _unescape(props["LOCATION"][2]) if "LOCATION" in props else None
    return CalendarEvent(
        uid=uid,
        name=name,
        start=start,
        end=end,
        recurrence=recurrence,
        status=props["STATUS"][2].strip() if "STATUS" in props else "",
        location=location,
        tzid=tzid,
        end_tzid=end_tzid,
        all_day=all_day,
    )


def parse_icalendar(text: str, diagnostics: list[Diagnostic] | None = None) -> list[CalendarEvent]:
    """Parse VEVENT blocks from iCalendar text.

    Malformed blocks and blocks with unsupported recurrence are skipped; a
    :class:`Diagnostic` naming the offending line is appended to
    ``diagnostics`` when a list is supplied (and logged either way).
    """
    events: list[CalendarEvent] = []
    problems: list[Diagnostic] = []

    props: dict | None = None
    begin_line = 0
    nested: list[str] = []
    block_index = 0

    def reject(kind: str, line: int, message: str) -> None:
        problems.append(Diagnostic(kind, line, message))

    for lineno, line in _unfold(text):
        upper = line.upper()
        if upper == "BEGIN:VEVENT":
            if props is not None:
                reject("MalformedBlock", begin_line, "VEVENT not closed before next BEGIN:VEVENT")
            props, begin_line, nested = {}, lineno, []
            block_index += 1
            continue
        if props is None:
            continue
        if upper.startswith("BEGIN:"):
            nested.append(upper[6:])
            continue
        if upper.startswith("END:"):
            component = upper[4:]
            if nested and nested[-1] == component:
                nested.pop()
                continue
            if component == "VEVENT":
                try:
                    events.append(_build_event(props, begin_line, block_index))
                except _BlockError as exc:
                    reject(exc.kind, exc.line, exc.message)
            else:
                reject("MalformedBlock", begin_line, f"missing END:VEVENT (found END:{component} at line {lineno})")
            props = None
            continue
        if nested:
            continue
        try:
            name, params, value = _split_property(line)
        except ValueError:
            reject("MalformedBlock", lineno, f"unparseable content line {line!r}")
            props = None
            continue
        # First occurrence wins for repeated properties.
        props.setdefault(name, (lineno, params, value))

    if props is not None:
        reject("MalformedBlock", begin_line, "missing END:VEVENT at end of input")

    for d in problems:
        logger.warning("calendar: %s", d)
    if diagnostics is not None:
        diagnostics.extend(problems)
    return events


def _fmt_dt(dt: datetime, all_day: bool) -> str:
    return dt.strftime("%Y%m%d") if all_day else dt.strftime("%Y%m%dT%H%M%S")


def _fold(line: str) -> str:
    # 75 octets per physical line, continuation lines start with one space.
    encoded = line.encode("utf-8")
    if len(encoded) <= 75:
        return line
    chunks, current = [], b""
    limit = 75
    for ch in line:
        b = ch.encode("utf-8")
        if len(current) + len(b) > limit:
            chunks.append(current.decode("utf-8"))
            current, limit = b"", 74
        current += b
    chunks.append(current.decode("utf-8"))
    return "\r\n ".join(chunks)


def _rrule_text(r: RecurrenceSpec) -> str:
    parts = [f"FREQ={r.frequency.value}"]
    if r.interval != 1:
        parts.append(f"INTERVAL={r.interval}")
    if r.by_day:
        parts.append("BYDAY=" + ",".join(c for c in WEEKDAY_CODES if c in r.by_day))
    if r.count is not None:
        parts.append(f"COUNT={r.count}")
    if r.until is not None:
        parts.append("UNTIL=" + _fmt_dt(r.until, r.until_is_date))
    if r.wkst:
        parts.append(f"WKST={r.wkst}")
    return ";".join(parts)


def to_icalendar(events: list[CalendarEvent], extra_headers: dict[str, str] | None = None) -> str:
    """Emit a minimal VCALENDAR that :func:`parse_icalendar` reads back field-equal."""
    lines = ["BEGIN:VCALENDAR", "VERSION:2.0", "PRODID:-//calbehav//EN"]
    for key, value in (extra_headers or {}).items():
        lines.append(f"{key}:{value}")
    for ev in events:
        lines.append("BEGIN:VEVENT")
        for prop, dt, tz in (("DTSTART", ev.start, ev.tzid), ("DTEND", ev.end, ev.end_tzid)):
            params = ";VALUE=DATE" if ev.all_day else ""
            if tz and tz != "UTC":
                params += f";TZID={tz}"
            suffix = "Z" if tz == "UTC" and not ev.all_day else ""
            lines.append(f"{prop}{params}:{_fmt_dt(dt, ev.all_day)}{suffix}")
        if ev.recurrence is not None:
            lines.append("RRULE:" + _rrule_text(ev.recurrence))
        lines.append(f"UID:{ev.uid}")
        if ev.location is not None:
            lines.append(f"LOCATION:{_escape(ev.location)}")
        if ev.status:
            lines.append(f"STATUS:{ev.status}")
        lines.append(f"SUMMARY:{_escape(ev.name)}")
        lines.append("END:VEVENT")
    lines.append("END:VCALENDAR")
    return "\r\n".join(_fold(line) for line in lines) + "\r\n"


# ---------------------------------------------------------------------------
# Expansion
# ---------------------------------------------------------------------------

_FREQ = {Frequency.DAILY: _rrule.DAILY, Frequency.WEEKLY: _rrule.WEEKLY, Frequency.MONTHLY: _rrule.MONTHLY}
_WEEKDAYS = dict(zip(WEEKDAY_CODES, (_rrule.MO, _rrule.TU, _rrule.WE, _rrule.TH, _rrule.FR, _rrule.SA, _rrule.SU)))


def _occurrence_starts(event: CalendarEvent, first: datetime, last: datetime) -> list[datetime]:
    r = event.recurrence
    if r is None:
        return [event.start] if first <= event.start <= last else []
    until = r.until
    if until is not None and r.until_is_date:
        until = datetime.combine(until.date(), time.max)
    rule = _rrule.rrule(
        _FREQ[r.frequency],
        dtstart=event.start,
        interval=r.interval,
        byweekday=[_WEEKDAYS[c] for c in WEEKDAY_CODES if c in r.by_day] if r.by_day else None,
        count=r.count,
        until=until,
        wkst=_WEEKDAYS[r.wkst] if r.wkst in _WEEKDAYS else None,
    )
    return rule.between(first, last, inc=True)


def expand_occurrences(event: CalendarEvent, window: tuple[date, date]) -> list[EventOccurrence]:
    """All dated instances of ``event`` whose start date lies in the closed ``window``.

    Instances that would run past midnight are truncated at the end of their
    start day.
    """
    lo, hi = window
    if lo > hi:
        raise ContractViolation(f"inverted window {lo} > {hi}")
    first = datetime.combine(lo, time.min)
    last = datetime.combine(hi, time.max)
    out = []
    for start in _occurrence_starts(event, first, last):
        end = start + event.duration
        end_time = end.time() if end.date() == start.date() else time.max
        out.append(
            EventOccurrence(
                date=start.date(),
                start_time=start.time(),
                end_time=end_time,
                event_uid=event.uid,
                event_name=event.name,
                event_type=event.event_type,
            )
        )
    out.sort()
    return out


def expand_all(events: list[CalendarEvent], window: tuple[date, date]) -> list[EventOccurrence]:
    occurrences = [occ for ev in events for occ in expand_occurrences(ev, window)]
    occurrences.sort()
    return occurrences
