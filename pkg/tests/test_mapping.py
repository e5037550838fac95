from __future__ import annotations

import random
from collections import Counter
from datetime import date, datetime, time

import pytest

from calbehav.calendar_ingest import EventOccurrence, EventType
from calbehav.mapping import (
    ContextVector,
    map_events_to_behavior,
    parse_event_behavior_csv,
    to_event_behavior_csv,
)
from calbehav.phonelog import CallBehavior, CallRecord, CallType, ClassifiedCall, RelationshipMap
from oracles import all_pairs_join, random_join_case


def _call(ts: datetime, behavior=CallBehavior.REJECT, contact="c1") -> ClassifiedCall:
    ctype = CallType.MISSED if behavior is CallBehavior.MISSED else CallType.INCOMING
    dur = 10 if behavior is CallBehavior.ACCEPT else 0
    return ClassifiedCall(CallRecord(ts, ctype, dur, contact), behavior)


MEETING = EventOccurrence(date(2016, 6, 2), time(8), time(9), "m", "Meeting", EventType.RECURRING)


def _as_rows(instances):
    return sorted(
        (i.context.event_name, i.context.event_type.value, i.context.day_time, i.context.relationship,
         i.behavior.value, i.source_timestamp)
        for i in instances
    )


class TestBoundaries:
    @pytest.mark.parametrize(
        "moment, inside",
        [(datetime(2016, 6, 2, 8, 0), True), (datetime(2016, 6, 2, 8, 59, 59), True),
         (datetime(2016, 6, 2, 9, 0), False), (datetime(2016, 6, 2, 7, 59, 59), False)],
    )
    def test_closed_open(self, moment, inside):
        out = map_events_to_behavior([MEETING], [_call(moment)])
        assert len(out) == int(inside)

    def test_context_vector(self):
        rel = RelationshipMap({"c1": "boss"})
        (inst,) = map_events_to_behavior([MEETING], [_call(datetime(2016, 6, 2, 8, 30))], rel)
        assert inst.context == ContextVector("Meeting", EventType.RECURRING, "Thursday[08:00-09:00]", "boss")
        assert inst.behavior is CallBehavior.REJECT

    def test_overlap_duplicates_call(self):
        other = EventOccurrence(date(2016, 6, 2), time(8, 30), time(10), "x", "Gym")
        out = map_events_to_behavior([MEETING, other], [_call(datetime(2016, 6, 2, 8, 45))])
        assert sorted(i.context.event_name for i in out) == ["Gym", "Meeting"]

    def test_empty_inputs(self):
        assert map_events_to_behavior([], [_call(datetime(2016, 6, 2, 8, 30))]) == []
        assert map_events_to_behavior([MEETING], []) == []


class TestAgainstJoinOracle:
    @pytest.mark.parametrize("seed", range(25))
    def test_equals_all_pairs(self, seed):
        occs, calls = random_join_case(random.Random(seed))
        rel = RelationshipMap({"c1": "boss", "c2": "mother"})
        out = map_events_to_behavior(occs, calls, rel)
        assert _as_rows(out) == all_pairs_join(occs, calls, rel)
        hits = Counter()
        for c in calls:
            hits[c.timestamp] += sum(1 for o in occs if o.contains(c.timestamp))
        assert len(out) == sum(sum(1 for o in occs if o.contains(c.timestamp)) for c in calls)

    def test_order_is_input_independent(self):
        occs, calls = random_join_case(random.Random(7))
        a = map_events_to_behavior(occs, calls)
        b = map_events_to_behavior(list(reversed(occs)), list(reversed(calls)))
        assert _as_rows(a) == _as_rows(b)


def test_eb_csv_roundtrip(worked_example_instances):
    assert parse_event_behavior_csv(to_event_behavior_csv(worked_example_instances)) == worked_example_instances
