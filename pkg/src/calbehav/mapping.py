"""Temporal join of calendar occurrences with classified calls."""

from __future__ import annotations

import bisect
import csv
import io
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from datetime import datetime

from .calendar_ingest import CalendarEvent, EventOccurrence, EventType
from .phonelog import CallBehavior, ClassifiedCall, RelationshipMap, TIMESTAMP_FORMAT

ATTRIBUTES = ("event_name", "event_type", "day_time", "relationship")


@dataclass(frozen=True)
class ContextVector:
    event_name: str
    event_type: EventType
    day_time: str
    relationship: str

    def get(self, attribute: str) -> str:
        value = getattr(self, attribute)
        return value.value if isinstance(value, EventType) else value

    def as_dict(self) -> dict[str, str]:
        return {a: self.get(a) for a in ATTRIBUTES}


@dataclass(frozen=True)
class EventBehaviorInstance:
    context: ContextVector
    behavior: CallBehavior
    source_timestamp: datetime


def build_context_vector(
    occurrence: EventOccurrence,
    event: CalendarEvent | None,
    call: ClassifiedCall,
    relationships: RelationshipMap,
) -> ContextVector:
    name = event.name if event is not None else occurrence.event_name
    event_type = event.event_type if event is not None else occurrence.event_type
    return ContextVector(
        event_name=name,
        event_type=event_type,
        day_time=occurrence.day_time,
        relationship=relationships.resolve(call.contact),
    )


def map_events_to_behavior(
    occurrences: Sequence[EventOccurrence],
    calls: Sequence[ClassifiedCall],
    relationships: RelationshipMap | None = None,
) -> list[EventBehaviorInstance]:
    """Pair every occurrence with every call ringing inside its ``[start, end)`` span.

    A call inside k overlapping occurrences yields k instances; calls outside
    every occurrence yield none. Output is ordered by occurrence date, then
    call timestamp.
    """
    relationships = relationships or RelationshipMap()
    ordered_calls = sorted(calls, key=lambda c: c.timestamp)
    stamps = [c.timestamp for c in ordered_calls]
    keyed = []
    for occ in occurrences:
        lo = bisect.bisect_left(stamps, occ.start)
        hi = bisect.bisect_left(stamps, occ.end)
        for i in range(lo, hi):
            call = ordered_calls[i]
            ctx = build_context_vector(occ, None, call, relationships)
            keyed.append(((occ.date, call.timestamp, occ.start_time, occ.event_uid, i), ctx, call))
    keyed.sort(key=lambda k: k[0])
    return [EventBehaviorInstance(ctx, call.behavior, call.timestamp) for _, ctx, call in keyed]


EB_COLUMNS = ("event_name", "event_type", "day_time", "relationship", "behavior", "timestamp")


def to_event_behavior_csv(instances: Iterable[EventBehaviorInstance]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EB_COLUMNS)
    for inst in instances:
        c = inst.context
        writer.writerow(
            [c.event_name, c.event_type.value, c.day_time, c.relationship, inst.behavior.value,
             inst.source_timestamp.strftime(TIMESTAMP_FORMAT)]
        )
    return buf.getvalue()


def parse_event_behavior_csv(text: str) -> list[EventBehaviorInstance]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        ctx = ContextVector(row["event_name"], EventType(row["event_type"]), row["day_time"], row["relationship"])
        out.append(
            EventBehaviorInstance(ctx, CallBehavior(row["behavior"]), datetime.strptime(row["timestamp"], TIMESTAMP_FORMAT))
        )
    return out
