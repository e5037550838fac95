"""
Rules for events with little evidence
=====================================

Ten one-off events, none called often enough on its own to earn a rule.
Pooled together they still say something about one-off events in general.
"""

from collections import Counter

from calbehav import mine_rules, run_bundle
from calbehav.synth import generalization_fixture

instances = run_bundle(generalization_fixture().bundle).instances
print("calls per event:", dict(sorted(Counter(i.context.event_name for i in instances).items())))

for rule in mine_rules(instances, min_confidence=0.8, min_support=3):
    print(rule)
