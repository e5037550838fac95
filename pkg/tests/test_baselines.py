from __future__ import annotations

import pytest

from calbehav.baselines import KeywordRuleTable, bm1_predict, bm2_predict
from calbehav.calendar_ingest import EventType
from calbehav.errors import ContractViolation
from calbehav.mapping import ContextVector
from calbehav.phonelog import CallBehavior


def ctx(name: str) -> ContextVector:
    return ContextVector(name, EventType.NON_RECURRING, "Monday[09:00-10:00]", "friend")


class TestBM1:
    def test_event_means_reject(self):
        assert bm1_predict(ctx("Anything")) is CallBehavior.REJECT

    def test_no_event_means_accept(self):
        assert bm1_predict(None) is CallBehavior.ACCEPT


class TestBM2:
    @pytest.mark.parametrize(
        "name, expected",
        [("Meeting", CallBehavior.REJECT), ("MEETING", CallBehavior.REJECT), ("Team meeting", CallBehavior.REJECT),
         ("Lecture 3", CallBehavior.REJECT), ("Gym", CallBehavior.ACCEPT), ("Meetings", CallBehavior.ACCEPT)],
    )
    def test_default_table(self, name, expected):
        assert bm2_predict(ctx(name), KeywordRuleTable.default_table()) is expected

    def test_whole_name_beats_word(self):
        table = KeywordRuleTable({"lunch meeting": CallBehavior.ACCEPT, "meeting": CallBehavior.REJECT})
        assert bm2_predict(ctx("Lunch Meeting"), table) is CallBehavior.ACCEPT

    def test_duplicate_after_casefold(self):
        with pytest.raises(ContractViolation):
            KeywordRuleTable({"Gym": CallBehavior.ACCEPT, "gym": CallBehavior.REJECT})

    def test_json_roundtrip(self):
        table = KeywordRuleTable({"Gym": CallBehavior.MISSED}, CallBehavior.REJECT)
        assert KeywordRuleTable.from_json(table.to_json()) == table
