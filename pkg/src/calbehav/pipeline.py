"""Glue from raw bundle files to event-behavior instances."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .calendar_ingest import CalendarEvent, EventOccurrence, expand_all, parse_icalendar
from .errors import Diagnostic
from .mapping import EventBehaviorInstance, map_events_to_behavior
from .phonelog import (
    CallRecord,
    ClassifiedCall,
    RelationshipMap,
    classify_calls,
    parse_call_log,
    parse_relationships,
)

CALENDAR_FILE = "calendar.ics"
CALLS_FILE = "calls.csv"
RELATIONSHIPS_FILE = "relationships.csv"


@dataclass(frozen=True)
class Bundle:
    """One user's raw inputs as text."""

    calendar: str
    calls: str
    relationships: str = "contact,relationship\n"
    name: str = "user"

    @classmethod
    def from_dir(cls, path: str | Path) -> Bundle:
        path = Path(path)
        rel = path / RELATIONSHIPS_FILE
        return cls(
            calendar=(path / CALENDAR_FILE).read_text(encoding="utf-8"),
            calls=(path / CALLS_FILE).read_text(encoding="utf-8"),
            relationships=rel.read_text(encoding="utf-8") if rel.exists() else "contact,relationship\n",
            name=path.name,
        )

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        for fname, text in ((CALENDAR_FILE, self.calendar), (CALLS_FILE, self.calls),
                            (RELATIONSHIPS_FILE, self.relationships)):
            with open(path / fname, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)


@dataclass
class PipelineResult:
    events: list[CalendarEvent]
    records: list[CallRecord]
    calls: list[ClassifiedCall]
    relationships: RelationshipMap
    window: tuple[date, date] | None
    occurrences: list[EventOccurrence]
    instances: list[EventBehaviorInstance]
    diagnostics: list[Diagnostic] = field(default_factory=list)


def default_window(records: list[CallRecord]) -> tuple[date, date] | None:
    """Span of the call log, which bounds which occurrences can ever be mapped."""
    if not records:
        return None
    return records[0].timestamp.date(), records[-1].timestamp.date()


def run_pipeline(
    calendar_text: str,
    calls_text: str,
    relationships: RelationshipMap | str | None = None,
    window: tuple[date, date] | None = None,
) -> PipelineResult:
    diagnostics: list[Diagnostic] = []
    events = parse_icalendar(calendar_text, diagnostics)
    records = parse_call_log(calls_text, diagnostics)
    if isinstance(relationships, str):
        relationships = parse_relationships(relationships)
    relationships = relationships or RelationshipMap()
    calls = classify_calls(records)
    window = window or default_window(records)
    occurrences = expand_all(events, window) if window else []
    instances = map_events_to_behavior(occurrences, calls, relationships)
    return PipelineResult(events, records, calls, relationships, window, occurrences, instances, diagnostics)


def run_bundle(bundle: Bundle, window: tuple[date, date] | None = None) -> PipelineResult:
    return run_pipeline(bundle.calendar, bundle.calls, bundle.relationships, window)
