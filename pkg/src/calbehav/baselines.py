"""Static calendar baselines: event existence (BM1) and event-name keywords (BM2)."""

from __future__ import annotations

import json
import re
from collections.abc import Mapping
from dataclasses import dataclass, field

from .errors import ContractViolation
from .mapping import ContextVector
from .phonelog import CallBehavior

DEFAULT_KEYWORDS = ("meeting", "lecture", "seminar", "appointment", "class")


def bm1_predict(context: ContextVector | None) -> CallBehavior:
    """Unavailable (reject) whenever any event is scheduled, available otherwise."""
    return CallBehavior.REJECT if context is not None else CallBehavior.ACCEPT


@dataclass(frozen=True)
class KeywordRuleTable:
    keywords: Mapping[str, CallBehavior] = field(default_factory=dict)
    default: CallBehavior = CallBehavior.ACCEPT

    def __post_init__(self) -> None:
        folded = {}
        for k, v in self.keywords.items():
            key = k.casefold()
            if key in folded:
                raise ContractViolation(f"duplicate keyword after case folding: {k!r}")
            folded[key] = CallBehavior(v)
        object.__setattr__(self, "keywords", folded)

    @classmethod
    def default_table(cls) -> KeywordRuleTable:
        return cls({k: CallBehavior.REJECT for k in DEFAULT_KEYWORDS}, CallBehavior.ACCEPT)

    @classmethod
    def from_json(cls, text: str) -> KeywordRuleTable:
        d = json.loads(text)
        return cls(
            {k: CallBehavior(v) for k, v in d.get("keywords", {}).items()},
            CallBehavior(d.get("default", CallBehavior.ACCEPT.value)),
        )

    def to_json(self) -> str:
        return json.dumps(
            {"keywords": {k: v.value for k, v in sorted(self.keywords.items())}, "default": self.default.value},
            indent=2,
        ) + "\n"


def bm2_predict(context: ContextVector, table: KeywordRuleTable) -> CallBehavior:
    """Match the event name against the keyword table, case-insensitively.

    The whole name is tried first, then each word of it in order, so
    "Team Meeting" hits the ``meeting`` keyword.
    """
    name = context.event_name.casefold()
    if name in table.keywords:
        return table.keywords[name]
    for word in re.findall(r"\w+", name):
        if word in table.keywords:
            return table.keywords[word]
    return table.default
