"""
Mining call-response rules from a calendar
==========================================

Build the canned worked-example bundle, join calls to calendar occurrences, and
read the association generation tree.
"""

from calbehav import build_agt, extract_rules, format_tree, run_bundle
from calbehav.synth import worked_example_fixture

bundle = worked_example_fixture().bundle
result = run_bundle(bundle)
print(f"{len(result.events)} events, {len(result.calls)} incoming calls, "
      f"{len(result.instances)} calls inside an event")

# the tree is grown once; thresholds only decide which nodes become rules
root = build_agt(result.instances, min_confidence=0.8, min_support=3)
print(format_tree(root))

for threshold in (0.8, 1.0):
    print(f"rules at {threshold:.0%}:")
    for rule in extract_rules(root, threshold):
        print("  ", rule)
