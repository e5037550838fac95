"""Seeded synthetic user bundles with known behavior policies.

All randomness comes from :class:`~calbehav._rng.SplitMix64` so a bundle is
fully determined by its profile, including the seed, which is written into
the calendar header as ``X-CALBEHAV-SEED``.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from datetime import date, datetime, time, timedelta
from pathlib import Path

from ._rng import GENERATOR_NAME, SplitMix64
from .calendar_ingest import (
    WEEKDAY_CODES,
    CalendarEvent,
    EventOccurrence,
    Frequency,
    RecurrenceSpec,
    expand_all,
    to_icalendar,
)
from .errors import ContractViolation
from .phonelog import (
    CallBehavior,
    CallRecord,
    CallType,
    RelationshipMap,
    to_call_log_csv,
    to_relationships_csv,
)
from .pipeline import Bundle

BEHAVIORS = (CallBehavior.ACCEPT, CallBehavior.REJECT, CallBehavior.MISSED)
TZID = "Australia/Sydney"


@dataclass(frozen=True)
class EventTemplate:
    name: str
    start: str  # "HH:MM"
    end: str
    weekday: str = "MO"
    frequency: str | None = "WEEKLY"  # None for one-off events
    interval: int = 1
    dates: tuple[str, ...] = ()  # explicit one-off dates (ISO)
    count: int = 0  # number of random one-off dates when ``dates`` is empty

    @property
    def recurring(self) -> bool:
        return self.frequency is not None


@dataclass(frozen=True)
class PolicyEntry:
    when: dict[str, str]
    dist: dict[str, float]

    def matches(self, context: dict[str, str]) -> bool:
        return all(context.get(k) == v for k, v in self.when.items())


@dataclass(frozen=True)
class Contact:
    id: str
    relationship: str | None  # None: not in the relationship map
    weight: float = 1.0


@dataclass
class UserProfile:
    seed: int
    events: list[EventTemplate]
    contacts: list[Contact]
    policy: list[PolicyEntry] = field(default_factory=list)
    default: dict[str, float] = field(default_factory=lambda: {"Accept": 1.0})
    call_rate: float = 3.0
    noise: float = 0.0
    background_rate: float = 0.5
    outgoing_rate: float = 0.5

    def __post_init__(self) -> None:
        if self.call_rate <= 0:
            raise ContractViolation("call_rate must be positive")
        if not 0 <= self.noise < 0.5:
            raise ContractViolation("noise must be in [0, 0.5)")
        for dist in [e.dist for e in self.policy] + [self.default]:
            if abs(sum(dist.values()) - 1.0) > 1e-9:
                raise ContractViolation(f"policy distribution does not sum to 1: {dist}")
            for k in dist:
                CallBehavior(k)

    def behavior_distribution(self, context: dict[str, str]) -> dict[str, float]:
        """Most specific matching policy entry; earlier entries win ties."""
        best, best_len = self.default, -1
        for entry in self.policy:
            if entry.matches(context) and len(entry.when) > best_len:
                best, best_len = entry.dist, len(entry.when)
        return best

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> UserProfile:
        d = json.loads(text)
        return cls(
            seed=int(d["seed"]),
            events=[EventTemplate(**{**e, "dates": tuple(e.get("dates", ()))}) for e in d["events"]],
            contacts=[Contact(**c) for c in d["contacts"]],
            policy=[PolicyEntry(p["when"], p["dist"]) for p in d.get("policy", [])],
            default=d.get("default", {"Accept": 1.0}),
            call_rate=float(d.get("call_rate", 3.0)),
            noise=float(d.get("noise", 0.0)),
            background_rate=float(d.get("background_rate", 0.5)),
            outgoing_rate=float(d.get("outgoing_rate", 0.5)),
        )


@dataclass(frozen=True)
class GeneratedBundle:
    bundle: Bundle
    truth: dict

    def write(self, path: str | Path) -> None:
        self.bundle.write(path)
        Path(path, "truth.json").write_text(json.dumps(self.truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _hm(s: str) -> time:
    return datetime.strptime(s, "%H:%M").time()


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-") or "event"


def _first_on_or_after(d: date, weekday: str) -> date:
    return d + timedelta(days=(WEEKDAY_CODES.index(weekday) - d.weekday()) % 7)


def _calendar_events(profile: UserProfile, span: tuple[date, date], rng: SplitMix64) -> list[CalendarEvent]:
    lo, hi = span
    events = []
    for ti, t in enumerate(profile.events):
        slug = _slug(t.name)
        if t.recurring:
            first = _first_on_or_after(lo, t.weekday)
            events.append(
                CalendarEvent(
                    uid=f"{slug}-{ti}@calbehav",
                    name=t.name,
                    start=datetime.combine(first, _hm(t.start)),
                    end=datetime.combine(first, _hm(t.end)),
                    recurrence=RecurrenceSpec(Frequency(t.frequency), t.interval, frozenset({t.weekday})),
                    status="CONFIRMED",
                    tzid=TZID,
                    end_tzid=TZID,
                )
            )
            continue
        if t.dates:
            days = sorted(date.fromisoformat(s) for s in t.dates)
        else:
            candidates = []
            d = _first_on_or_after(lo, t.weekday)
            while d <= hi:
                candidates.append(d)
                d += timedelta(days=7)
            days = []
            for _ in range(min(t.count, len(candidates))):
                days.append(candidates.pop(rng.randbelow(len(candidates))))
            days.sort()
        for di, d in enumerate(days):
            events.append(
                CalendarEvent(
                    uid=f"{slug}-{ti}-{di}@calbehav",
                    name=t.name,
                    start=datetime.combine(d, _hm(t.start)),
                    end=datetime.combine(d, _hm(t.end)),
                    status="CONFIRMED",
                    tzid=TZID,
                    end_tzid=TZID,
                )
            )
    return events


def _record_for(behavior: CallBehavior, ts: datetime, contact: str, rng: SplitMix64) -> CallRecord:
    if behavior is CallBehavior.ACCEPT:
        return CallRecord(ts, CallType.INCOMING, rng.randint(5, 600), contact)
    if behavior is CallBehavior.REJECT:
        return CallRecord(ts, CallType.INCOMING, 0, contact)
    return CallRecord(ts, CallType.MISSED, 0, contact)


def _sample_behavior(dist: dict[str, float], rng: SplitMix64) -> CallBehavior:
    keys = [b for b in BEHAVIORS if dist.get(b.value, 0) > 0]
    return rng.choice_weighted(keys, [dist[b.value] for b in keys])


def _inside_any(ts: datetime, occurrences: list[EventOccurrence]) -> bool:
    return any(o.contains(ts) for o in occurrences if o.date == ts.date())


def generate_bundle(profile: UserProfile, span: tuple[date, date], name: str = "user") -> GeneratedBundle:
    """Calendar, call log and relationship map for one synthetic user."""
    lo, hi = span
    if lo > hi:
        raise ContractViolation("span must be non-empty")
    rng = SplitMix64(profile.seed)
    events = _calendar_events(profile, span, rng)
    occurrences = expand_all(events, span)
    contact_ids = [c.id for c in profile.contacts]
    weights = [c.weight for c in profile.contacts]
    relationships = RelationshipMap({c.id: c.relationship for c in profile.contacts if c.relationship})

    records: list[CallRecord] = []
    for occ in occurrences:
        seconds = int((occ.end - occ.start).total_seconds())
        for _ in range(rng.poisson(profile.call_rate)):
            ts = occ.start + timedelta(seconds=rng.randbelow(seconds))
            contact = rng.choice_weighted(contact_ids, weights)
            context = {
                "event_name": occ.event_name,
                "event_type": occ.event_type.value,
                "day_time": occ.day_time,
                "relationship": relationships.resolve(contact),
            }
            behavior = _sample_behavior(profile.behavior_distribution(context), rng)
            if profile.noise and rng.random() < profile.noise:
                others = [b for b in BEHAVIORS if b is not behavior]
                behavior = others[rng.randbelow(2)]
            records.append(_record_for(behavior, ts, contact, rng))

    d = lo
    while d <= hi:
        day_start = datetime.combine(d, time.min)
        for _ in range(rng.poisson(profile.background_rate)):
            ts = day_start + timedelta(seconds=rng.randbelow(86400))
            contact = rng.choice_weighted(contact_ids, weights)
            if not _inside_any(ts, occurrences):
                records.append(_record_for(_sample_behavior(profile.default, rng), ts, contact, rng))
        for _ in range(rng.poisson(profile.outgoing_rate)):
            ts = day_start + timedelta(seconds=rng.randbelow(86400))
            records.append(CallRecord(ts, CallType.OUTGOING, rng.randint(0, 900),
                                      rng.choice_weighted(contact_ids, weights)))
        d += timedelta(days=1)

    records.sort(key=lambda r: r.timestamp)
    header = {"X-CALBEHAV-SEED": str(profile.seed), "X-CALBEHAV-GENERATOR": GENERATOR_NAME}
    bundle = Bundle(
        calendar=to_icalendar(events, header),
        calls=to_call_log_csv(records),
        relationships=to_relationships_csv(relationships),
        name=name,
    )
    truth = {
        "seed": profile.seed,
        "generator": GENERATOR_NAME,
        "span": [lo.isoformat(), hi.isoformat()],
        "profile": asdict(profile),
    }
    return GeneratedBundle(bundle, truth)


# ---------------------------------------------------------------------------
# Canned fixtures
# ---------------------------------------------------------------------------

WORKED_EXAMPLE_SPAN = (date(2016, 6, 1), date(2016, 11, 30))

# (event, relationship, behavior, count); chosen so the mined tree carries
# Lecture 42/42 Reject, Meeting 34/40 Reject, Seminar+Recurring 23/25 Accept,
# Seminar+NonRecurring 19/20 Missed, Meeting+boss 3/3 Accept and a Meeting
# colleague branch at 17/20 Reject that is redundant against Meeting.
_WORKED_EXAMPLE_CALLS = (
    ("lecture", "friend", CallBehavior.REJECT, 21),
    ("lecture", "mother", CallBehavior.REJECT, 21),
    ("meeting", "boss", CallBehavior.ACCEPT, 3),
    ("meeting", "colleague", CallBehavior.REJECT, 17),
    ("meeting", "colleague", CallBehavior.MISSED, 3),
    # Sparse contacts: each below min_support, so none gets its own branch.
    *(("meeting", rel, CallBehavior.REJECT, 2) for rel in
      ("mother", "father", "sister", "brother", "partner", "neighbour", "classmate", "cousin")),
    ("meeting", "landlord", CallBehavior.REJECT, 1),
    ("seminar", "colleague", CallBehavior.ACCEPT, 23),
    ("seminar", "colleague", CallBehavior.REJECT, 2),
    ("seminar-once", "colleague", CallBehavior.MISSED, 19),
    ("seminar-once", "colleague", CallBehavior.REJECT, 1),
)


def _fixture_bundle(events: list[CalendarEvent], plan, span, relationships: RelationshipMap,
                    contact_of: dict[str, str], seed: int, name: str, extra_records=()) -> GeneratedBundle:
    occurrences = expand_all(events, span)
    by_key: dict[str, list[EventOccurrence]] = {}
    for occ in occurrences:
        # "seminar-once-2@calbehav" -> "seminar-once"; recurring uids carry no index.
        by_key.setdefault(re.sub(r"-\d+$", "", occ.event_uid.split("@")[0]), []).append(occ)
    records = list(extra_records)
    used: dict[str, int] = {}
    for key, rel, behavior, n in plan:
        occs = by_key[key]
        for _ in range(n):
            j = used.get(key, 0)
            used[key] = j + 1
            occ = occs[j % len(occs)]
            ts = occ.start + timedelta(minutes=1 + 2 * (j // len(occs)))
            contact = contact_of[rel]
            if behavior is CallBehavior.ACCEPT:
                records.append(CallRecord(ts, CallType.INCOMING, 30 + j, contact))
            elif behavior is CallBehavior.REJECT:
                records.append(CallRecord(ts, CallType.INCOMING, 0, contact))
            else:
                records.append(CallRecord(ts, CallType.MISSED, 0, contact))
    records.sort(key=lambda r: r.timestamp)
    header = {"X-CALBEHAV-SEED": str(seed), "X-CALBEHAV-GENERATOR": "fixture"}
    bundle = Bundle(to_icalendar(events, header), to_call_log_csv(records),
                    to_relationships_csv(relationships), name)
    truth = {"seed": seed, "generator": "fixture", "span": [span[0].isoformat(), span[1].isoformat()],
             "plan": [[k, r, b.value, n] for k, r, b, n in plan]}
    return GeneratedBundle(bundle, truth)


def worked_example_fixture() -> GeneratedBundle:
    """Bundle whose mined tree at 80% confidence reproduces the five textbook rules exactly."""
    span = WORKED_EXAMPLE_SPAN

    def weekly(uid, name, d, start, end, weekday, interval):
        return CalendarEvent(uid=f"{uid}@calbehav", name=name,
                             start=datetime.combine(d, _hm(start)), end=datetime.combine(d, _hm(end)),
                             recurrence=RecurrenceSpec(Frequency.WEEKLY, interval, frozenset({weekday})),
                             status="CONFIRMED", tzid=TZID, end_tzid=TZID)

    events = [
        weekly("lecture", "Lecture", date(2016, 6, 6), "10:00", "12:00", "MO", 1),
        weekly("meeting", "Meeting", date(2016, 6, 2), "08:00", "09:00", "TH", 2),
        weekly("seminar", "Seminar", date(2016, 6, 7), "14:00", "15:00", "TU", 2),
    ]
    # One-off seminars on the off-weeks of the biweekly series, same slot.
    for i, d in enumerate((date(2016, 6, 14), date(2016, 6, 28), date(2016, 7, 12), date(2016, 7, 26))):
        events.append(CalendarEvent(uid=f"seminar-once-{i}@calbehav", name="Seminar",
                                    start=datetime.combine(d, time(14)), end=datetime.combine(d, time(15)),
                                    status="CONFIRMED", tzid=TZID, end_tzid=TZID))
    rels = ["boss", "colleague", "friend", "mother", "father", "sister", "brother", "partner",
            "neighbour", "classmate", "cousin", "landlord"]
    contact_of = {rel: f"C{i + 1:02d}" for i, rel in enumerate(rels)}
    relationships = RelationshipMap({c: r for r, c in contact_of.items()})
    # Calls that must not become instances: outgoing, and outside every event.
    extra = [
        CallRecord(datetime(2016, 6, 1, 9, 0), CallType.OUTGOING, 120, "C03"),
        CallRecord(datetime(2016, 6, 6, 13, 30), CallType.INCOMING, 45, "C04"),
        CallRecord(datetime(2016, 11, 30, 20, 0), CallType.INCOMING, 0, "C99"),
    ]
    return _fixture_bundle(events, _WORKED_EXAMPLE_CALLS, span, relationships, contact_of, 0, "worked-example", extra)


GENERALIZATION_SPAN = (date(2016, 9, 1), date(2016, 9, 30))


def generalization_fixture() -> GeneratedBundle:
    """Ten one-off events E1..E10; E1-E8 have two calls each (mostly rejected), E9 and E10 none."""
    span = GENERALIZATION_SPAN
    events = []
    plan = []
    for i in range(1, 11):
        d = date(2016, 9, 1) + timedelta(days=2 * i)
        hour = 8 + i
        events.append(CalendarEvent(uid=f"e{i}-0@calbehav", name=f"E{i}",
                                    start=datetime.combine(d, time(hour)), end=datetime.combine(d, time(hour, 50)),
                                    status="CONFIRMED", tzid=TZID, end_tzid=TZID))
        if i <= 7:
            plan.append((f"e{i}", "unknown", CallBehavior.REJECT, 2))
        elif i == 8:
            plan.append((f"e{i}", "unknown", CallBehavior.REJECT, 1))
            plan.append((f"e{i}", "unknown", CallBehavior.ACCEPT, 1))
    contact_of = {"unknown": "C50"}
    extra = [CallRecord(datetime(2016, 9, 1, 7, 0), CallType.INCOMING, 10, "C51"),
             CallRecord(datetime(2016, 9, 30, 22, 0), CallType.OUTGOING, 10, "C51")]
    return _fixture_bundle(events, plan, span, RelationshipMap(), contact_of, 0, "generalization", extra)


# ---------------------------------------------------------------------------
# Heterogeneous cohort
# ---------------------------------------------------------------------------

COHORT_SPAN = (date(2016, 3, 1), date(2016, 8, 31))

_EVENT_POOL = (
    ("Meeting", "TH", "08:00", "09:00", 2),
    ("Lecture", "MO", "10:00", "12:00", 1),
    ("Seminar", "TU", "14:00", "15:00", 1),
    ("Practical", "WE", "17:00", "19:00", 1),
    ("Tea-party", "FR", "16:00", "17:00", 2),
    ("Busy", "FR", "11:00", "15:00", 1),
    ("Class", "MO", "13:00", "15:00", 1),
    ("Lunch", "WE", "12:00", "13:00", 1),
    ("Appointment", "SA", "09:00", "10:00", 2),
    ("Gym", "SU", "18:00", "20:00", 1),
)
_RELATIONS = ("boss", "colleague", "friend", "mother", "partner")


def _peaked(dominant: CallBehavior, strength: float, rng: SplitMix64) -> dict[str, float]:
    others = [b for b in BEHAVIORS if b is not dominant]
    split = 0.25 + 0.5 * rng.random()
    rest = 1.0 - strength
    return {dominant.value: strength, others[0].value: rest * split, others[1].value: rest * (1 - split)}


def cohort_profiles(n_users: int = 10, seed: int = 2016) -> list[UserProfile]:
    """Users whose per-event dominant behavior is drawn independently of event names."""
    rng = SplitMix64(seed)
    profiles = []
    for u in range(n_users):
        pool = list(_EVENT_POOL)
        rng.shuffle(pool)
        chosen = pool[: 4 + rng.randbelow(3)]
        templates = [EventTemplate(n, s, e, wd, "WEEKLY", iv) for n, wd, s, e, iv in chosen]
        # One sparse event type: a handful of one-off events.
        templates.append(EventTemplate("Workshop", "10:00", "12:00", WEEKDAY_CODES[rng.randbelow(5)],
                                       None, count=6))
        policy = []
        for t in templates:
            dom = BEHAVIORS[rng.randbelow(3)]
            policy.append(PolicyEntry({"event_name": t.name}, _peaked(dom, 0.85 + 0.1 * rng.random(), rng)))
        # A relationship that overrides event behavior, as with calls from family.
        vip = _RELATIONS[rng.randbelow(len(_RELATIONS))]
        policy.append(PolicyEntry({"relationship": vip}, {"Accept": 1.0}))
        contacts = [Contact(f"C{i:02d}", rel, 1.0 + rng.randbelow(3)) for i, rel in enumerate(_RELATIONS)]
        contacts.append(Contact("C90", None, 1.0))
        profiles.append(UserProfile(seed=seed * 100 + u, events=templates, contacts=contacts, policy=policy,
                                    default={"Accept": 0.7, "Missed": 0.3}, call_rate=3.0, noise=0.05))
    return profiles


def cohort_bundles(n_users: int = 10, seed: int = 2016) -> list[GeneratedBundle]:
    return [generate_bundle(p, COHORT_SPAN, name=f"user{i:02d}") for i, p in enumerate(cohort_profiles(n_users, seed))]
