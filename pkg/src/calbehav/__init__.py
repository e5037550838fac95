"""Personalized behavioral association rules from calendar and call-log data."""

from .baselines import KeywordRuleTable, bm1_predict, bm2_predict
from .calendar_ingest import (
    CalendarEvent,
    EventOccurrence,
    EventType,
    Frequency,
    RecurrenceSpec,
    expand_occurrences,
    parse_icalendar,
    to_icalendar,
)
from .errors import CalBehavError, ContractViolation, Diagnostic, FormatError
from .evaluation import (
    MetricsReport,
    MiningConfig,
    compare_methods,
    error_rate,
    k_fold_cv,
    match_rule,
    rule_accuracy,
    rule_coverage,
    tradeoff_sweep,
)
from .mapping import ATTRIBUTES, ContextVector, EventBehaviorInstance, build_context_vector, map_events_to_behavior
from .miner import (
    AGTNode,
    BehavioralRule,
    BehaviorDistribution,
    build_agt,
    dominant_behavior,
    entropy,
    extract_rules,
    format_tree,
    information_gain,
    mine_rules,
    rank_contexts,
)
from .phonelog import (
    CallBehavior,
    CallRecord,
    CallType,
    RelationshipMap,
    classify_behavior,
    parse_call_log,
    parse_relationships,
    resolve_relationship,
)
from .pipeline import Bundle, run_bundle, run_pipeline
from .synth import UserProfile, worked_example_fixture, generate_bundle

__version__ = "0.1.0"
