"""Call-log ingestion, behavior classification and relationship lookup."""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum

from .errors import ContractViolation, Diagnostic, FormatError

logger = logging.getLogger(__name__)

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"
CALL_LOG_COLUMNS = ("timestamp", "call_type", "duration_sec", "contact")
UNKNOWN_RELATIONSHIP = "unknown"


class CallType(str, Enum):
    INCOMING = "incoming"
    MISSED = "missed"
    OUTGOING = "outgoing"


class CallBehavior(str, Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"
    MISSED = "Missed"


# Dominant-class tie-break: rejecting is the conservative choice.
BEHAVIOR_ORDER = (CallBehavior.REJECT, CallBehavior.ACCEPT, CallBehavior.MISSED)


@dataclass(frozen=True)
class CallRecord:
    timestamp: datetime
    call_type: CallType
    duration_sec: int
    contact: str

    def __post_init__(self) -> None:
        if self.duration_sec < 0:
            raise ContractViolation("duration_sec must be >= 0")
        if self.call_type is CallType.MISSED and self.duration_sec != 0:
            raise ContractViolation("missed calls have zero duration")


@dataclass(frozen=True)
class ClassifiedCall:
    record: CallRecord
    behavior: CallBehavior

    @property
    def timestamp(self) -> datetime:
        return self.record.timestamp

    @property
    def contact(self) -> str:
        return self.record.contact


@dataclass(frozen=True)
class RelationshipMap:
    entries: Mapping[str, str] = field(default_factory=dict)
    default: str = UNKNOWN_RELATIONSHIP

    def resolve(self, contact: str) -> str:
        return self.entries.get(contact, self.default)


def parse_call_log(text: str, diagnostics: list[Diagnostic] | None = None) -> list[CallRecord]:
    """Read a ``timestamp,call_type,duration_sec,contact`` CSV.

    Rows that fail to parse are skipped with a diagnostic. A missed call
    logged with a non-zero duration is kept as missed (the explicit type
    wins), its duration zeroed, and the disagreement reported.
    """
    reader = csv.DictReader(io.StringIO(text))
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [c for c in CALL_LOG_COLUMNS if c not in header]
    if missing:
        raise FormatError(f"call log is missing column(s): {', '.join(missing)}")
    reader.fieldnames = header

    problems: list[Diagnostic] = []
    records: list[CallRecord] = []
    for row in reader:
        lineno = reader.line_num
        try:
            ts = datetime.strptime(row["timestamp"].strip(), TIMESTAMP_FORMAT)
            call_type = CallType(row["call_type"].strip().lower())
            duration = int(row["duration_sec"].strip())
            contact = row["contact"].strip()
            if duration < 0:
                raise ValueError("negative duration")
        except (ValueError, AttributeError, KeyError) as exc:
            problems.append(Diagnostic("UnparseableRow", lineno, str(exc)))
            continue
        if call_type is CallType.MISSED and duration != 0:
            problems.append(
                Diagnostic("TypeDurationDisagreement", lineno, f"missed call with duration {duration}s; kept as missed")
            )
            duration = 0
        records.append(CallRecord(ts, call_type, duration, contact))

    for d in problems:
        logger.warning("call log: %s", d)
    if diagnostics is not None:
        diagnostics.extend(problems)
    records.sort(key=lambda r: r.timestamp)
    return records


def to_call_log_csv(records: Iterable[CallRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CALL_LOG_COLUMNS)
    for r in records:
        writer.writerow([r.timestamp.strftime(TIMESTAMP_FORMAT), r.call_type.value, r.duration_sec, r.contact])
    return buf.getvalue()


def classify_behavior(record: CallRecord) -> CallBehavior | None:
    """Incoming with zero duration is a reject, with positive duration an accept.

    Outgoing calls carry no response behavior and yield ``None``.
    """
    if record.call_type is CallType.MISSED:
        return CallBehavior.MISSED
    if record.call_type is CallType.INCOMING:
        return CallBehavior.ACCEPT if record.duration_sec > 0 else CallBehavior.REJECT
    return None


def classify_calls(records: Iterable[CallRecord]) -> list[ClassifiedCall]:
    out = []
    for r in records:
        behavior = classify_behavior(r)
        if behavior is not None:
            out.append(ClassifiedCall(r, behavior))
    return out


def resolve_relationship(contact: str, relationships: RelationshipMap) -> str:
    return relationships.resolve(contact)


def parse_relationships(text: str) -> RelationshipMap:
    reader = csv.DictReader(io.StringIO(text))
    header = [h.strip() for h in (reader.fieldnames or [])]
    if header[:2] != ["contact", "relationship"]:
        raise FormatError("relationship map must have header 'contact,relationship'")
    reader.fieldnames = header
    entries = {}
    for row in reader:
        contact = (row["contact"] or "").strip()
        label = (row["relationship"] or "").strip()
        if contact and label:
            entries[contact] = label
    return RelationshipMap(entries)


def to_relationships_csv(relationships: RelationshipMap) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["contact", "relationship"])
    for contact in sorted(relationships.entries):
        writer.writerow([contact, relationships.entries[contact]])
    return buf.getvalue()
