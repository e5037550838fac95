"""Context ranking, association generation tree and non-redundant rule extraction.

Tree growth, in outline:

* Attributes are ordered by information gain (ties broken by the fixed order
  of :data:`ATTRIBUTES`), once on the full data (``"global"``) or afresh on
  each node's subset (``"per_node"``).
* A node is split on the first remaining attribute; one child per value with
  at least ``min_support`` instances.  Instances whose value is too rare are
  pooled and offered to the next attribute, so sparse events can still
  contribute evidence to a coarser antecedent such as ``event_type``.
* Below the root, an attribute with a single value on the node's subset is
  passed over: its child would repeat the parent exactly.
* Nodes at 100% confidence are not elaborated.
* A node is REDUNDANT when an ancestor predicts the same behavior, itself
  qualifies as a rule, and is at least as confident.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ContractViolation
from .mapping import ATTRIBUTES, ContextVector, EventBehaviorInstance
from .phonelog import BEHAVIOR_ORDER, CallBehavior

DEFAULT_MIN_SUPPORT = 3
DEFAULT_MIN_CONFIDENCE = 0.80
PRECEDENCE_MODES = ("global", "per_node")

# IG values closer than this are ties; sums over the same partition may
# differ in the last bits depending on iteration order.
_IG_TIE_DIGITS = 12


def as_fraction(x: float | Fraction | str) -> Fraction:
    """Exact ratio for a threshold given as 0.8, "0.8" or Fraction(4, 5)."""
    if isinstance(x, Fraction):
        return x
    return Fraction(str(x))


def percent(ratio: Fraction) -> int:
    """Integer percent, rounding half up."""
    return (200 * ratio.numerator + ratio.denominator) // (2 * ratio.denominator)


@dataclass(frozen=True)
class BehaviorDistribution:
    counts: tuple[tuple[CallBehavior, int], ...]

    def __post_init__(self) -> None:
        if self.total < 1:
            raise ContractViolation("a distribution needs at least one instance")

    @classmethod
    def of(cls, behaviors: Iterable[CallBehavior]) -> BehaviorDistribution:
        c = Counter(behaviors)
        return cls(tuple((b, c[b]) for b in BEHAVIOR_ORDER))

    @classmethod
    def from_counts(cls, counts: dict[CallBehavior, int]) -> BehaviorDistribution:
        return cls(tuple((b, counts.get(b, 0)) for b in BEHAVIOR_ORDER))

    @property
    def total(self) -> int:
        return sum(n for _, n in self.counts)

    def __getitem__(self, behavior: CallBehavior) -> int:
        return dict(self.counts)[behavior]

    def __str__(self) -> str:
        return ", ".join(f"{b.value}:{n}" for b, n in self.counts if n)


def dominant_behavior(distribution: BehaviorDistribution) -> tuple[CallBehavior, Fraction]:
    """Most frequent class and its share; ties go Reject, then Accept, then Missed."""
    best, best_n = BEHAVIOR_ORDER[0], -1
    for b, n in distribution.counts:
        if n > best_n:
            best, best_n = b, n
    return best, Fraction(best_n, distribution.total)


def _entropy_counts(counts: Iterable[int]) -> float:
    counts = [n for n in counts if n]
    total = sum(counts)
    return -sum((n / total) * math.log2(n / total) for n in counts)


def entropy(instances: Sequence[EventBehaviorInstance]) -> float:
    """Shannon entropy in bits of the behavior labels."""
    if not instances:
        raise ContractViolation("entropy of an empty set is undefined")
    return _entropy_counts(Counter(i.behavior for i in instances).values())


def _partition(instances: Sequence[EventBehaviorInstance], attribute: str) -> dict[str, list[EventBehaviorInstance]]:
    groups: dict[str, list[EventBehaviorInstance]] = {}
    for inst in instances:
        groups.setdefault(inst.context.get(attribute), []).append(inst)
    return groups


def information_gain(attribute: str, instances: Sequence[EventBehaviorInstance]) -> float:
    if attribute not in ATTRIBUTES:
        raise ContractViolation(f"unknown attribute {attribute!r}")
    if not instances:
        raise ContractViolation("information gain of an empty set is undefined")
    n = len(instances)
    remainder = sum(len(g) / n * entropy(g) for g in _partition(instances, attribute).values())
    return max(0.0, entropy(instances) - remainder)


def rank_contexts(
    instances: Sequence[EventBehaviorInstance], attributes: Sequence[str] = ATTRIBUTES
) -> list[str]:
    """Attributes by descending information gain, ties in :data:`ATTRIBUTES` order."""
    if not instances:
        raise ContractViolation("cannot rank contexts without instances")
    fixed = {a: i for i, a in enumerate(ATTRIBUTES)}
    gains = {a: round(information_gain(a, instances), _IG_TIE_DIGITS) for a in attributes}
    return sorted(attributes, key=lambda a: (-gains[a], fixed[a]))


@dataclass(frozen=True)
class BuildParams:
    min_confidence: Fraction
    min_support: int
    precedence: str
    attribute_order: tuple[str, ...]


@dataclass
class AGTNode:
    context_path: tuple[tuple[str, str], ...]
    distribution: BehaviorDistribution
    dominant: CallBehavior
    confidence: Fraction
    support_count: int
    redundant: bool = False
    children: list[AGTNode] = field(default_factory=list)
    node_id: int = 0
    cover: tuple[int, ...] = ()
    params: BuildParams | None = None

    @property
    def dominant_count(self) -> int:
        return self.distribution[self.dominant]

    def qualifies(self, min_confidence: Fraction, min_support: int) -> bool:
        return self.confidence >= min_confidence and self.dominant_count >= min_support

    def walk(self) -> Iterable[AGTNode]:
        """Breadth-first traversal."""
        queue = [self]
        while queue:
            node = queue.pop(0)
            yield node
            queue.extend(node.children)


def _make_node(instances: Sequence[EventBehaviorInstance], cover: list[int], path) -> AGTNode:
    dist = BehaviorDistribution.of(instances[i].behavior for i in cover)
    dom, conf = dominant_behavior(dist)
    return AGTNode(path, dist, dom, conf, len(cover), cover=tuple(cover))


def build_agt(
    instances: Sequence[EventBehaviorInstance],
    min_confidence: float | Fraction = DEFAULT_MIN_CONFIDENCE,
    min_support: int = DEFAULT_MIN_SUPPORT,
    precedence: str = "global",
) -> AGTNode:
    """Grow the association generation tree and flag redundant nodes."""
    if not instances:
        raise ContractViolation("cannot build a tree without instances")
    min_conf = as_fraction(min_confidence)
    if not 0 < min_conf <= 1:
        raise ContractViolation(f"min_confidence must be in (0, 1], got {min_confidence}")
    if min_support < 1:
        raise ContractViolation(f"min_support must be >= 1, got {min_support}")
    if precedence not in PRECEDENCE_MODES:
        raise ContractViolation(f"precedence must be one of {PRECEDENCE_MODES}")

    order = tuple(rank_contexts(instances))
    fixed = {a: i for i, a in enumerate(ATTRIBUTES)}

    def values_of(cover: Sequence[int], attribute: str) -> dict[str, list[int]]:
        groups: dict[str, list[int]] = {}
        for i in cover:
            groups.setdefault(instances[i].context.get(attribute), []).append(i)
        return groups

    def expand(node: AGTNode, ancestors: list[AGTNode], remaining: tuple[str, ...]) -> None:
        is_root = not ancestors and not node.context_path
        if node.confidence == 1:
            return
        if precedence == "per_node" and remaining:
            subset = [instances[i] for i in node.cover]
            remaining = tuple(rank_contexts(subset, remaining))
        lineage = ancestors + ([] if is_root else [node])
        pool = list(node.cover)
        for pos, attribute in enumerate(remaining):
            full = values_of(node.cover, attribute)
            if len(full) == 1 and not is_root:
                continue
            leftover = []
            for value, members in values_of(pool, attribute).items():
                if len(members) < min_support:
                    leftover.extend(members)
                    continue
                child = _make_node(instances, full[value], node.context_path + ((attribute, value),))
                child.redundant = any(
                    a.dominant is child.dominant
                    and a.qualifies(min_conf, min_support)
                    and child.confidence <= a.confidence
                    for a in lineage
                )
                node.children.append(child)
                expand(child, lineage, remaining[pos + 1 :])
            pool = sorted(leftover)
            if not pool:
                break
        node.children.sort(
            key=lambda c: (-c.support_count, fixed[c.context_path[-1][0]], c.context_path[-1][1])
        )

    root = _make_node(instances, list(range(len(instances))), ())
    root.params = BuildParams(min_conf, min_support, precedence, order)
    expand(root, [], order)
    for i, node in enumerate(root.walk()):
        node.node_id = i
    return root


@dataclass(frozen=True)
class BehavioralRule:
    antecedent: tuple[tuple[str, str], ...]
    consequent: CallBehavior
    support_count: int
    confidence: Fraction
    antecedent_support: int = 0
    node_id: int | None = None

    @property
    def antecedent_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(self.antecedent)

    @property
    def confidence_pct(self) -> int:
        return percent(self.confidence)

    def covers(self, context: ContextVector) -> bool:
        return all(context.get(a) == v for a, v in self.antecedent)

    def __str__(self) -> str:
        lhs = ", ".join(f"{a}={v}" for a, v in self.antecedent)
        return f"{lhs} => {self.consequent.value} (conf={self.confidence_pct}%, sup={self.support_count})"

    def to_json(self) -> dict:
        return {
            "antecedent": [{"attribute": a, "value": v} for a, v in self.antecedent],
            "consequent": self.consequent.value,
            "support_count": self.support_count,
            "confidence_ratio": [self.confidence.numerator, self.confidence.denominator],
            "confidence_pct": self.confidence_pct,
        }

    @classmethod
    def from_json(cls, d: dict) -> BehavioralRule:
        num, den = d["confidence_ratio"]
        return cls(
            antecedent=tuple((p["attribute"], p["value"]) for p in d["antecedent"]),
            consequent=CallBehavior(d["consequent"]),
            support_count=int(d["support_count"]),
            confidence=Fraction(num, den),
        )


def rule_sort_key(rule: BehavioralRule):
    return (-rule.confidence, -rule.support_count, len(rule.antecedent), rule.antecedent, rule.consequent.value)


def extract_rules(
    root: AGTNode, min_confidence: float | Fraction, min_support: int | None = None
) -> list[BehavioralRule]:
    """Rules read off qualifying, non-redundant nodes, most confident first.

    Redundancy is re-evaluated at ``min_confidence`` against every other
    qualifying node whose antecedent is a subset (ancestors included), so the
    result is free of subsumed rules even across branches.
    """
    min_conf = as_fraction(min_confidence)
    if min_support is None:
        min_support = root.params.min_support if root.params else DEFAULT_MIN_SUPPORT
    candidates = [n for n in root.walk() if n.context_path and n.qualifies(min_conf, min_support)]
    keyed = [(frozenset(n.context_path), n) for n in candidates]
    rules = []
    for ant, node in keyed:
        subsumed = any(
            other is not node
            and o_ant < ant
            and other.dominant is node.dominant
            and node.confidence <= other.confidence
            for o_ant, other in keyed
        )
        if subsumed:
            continue
        rules.append(
            BehavioralRule(
                antecedent=node.context_path,
                consequent=node.dominant,
                support_count=node.dominant_count,
                confidence=node.confidence,
                antecedent_support=node.support_count,
                node_id=node.node_id,
            )
        )
    rules.sort(key=rule_sort_key)
    return rules


def mine_rules(
    instances: Sequence[EventBehaviorInstance],
    min_confidence: float | Fraction = DEFAULT_MIN_CONFIDENCE,
    min_support: int = DEFAULT_MIN_SUPPORT,
    precedence: str = "global",
) -> list[BehavioralRule]:
    root = build_agt(instances, min_confidence, min_support, precedence)
    return extract_rules(root, min_confidence, min_support)


def format_tree(root: AGTNode) -> str:
    """Indented text rendering; redundant nodes end in ``REDUNDANT``."""
    lines = []

    def emit(node: AGTNode, depth: int) -> None:
        label = f"{node.context_path[-1][0]}={node.context_path[-1][1]}" if node.context_path else "ROOT"
        line = (
            f"{'  ' * depth}[{node.node_id}] {label}  {node.dominant.value} "
            f"{node.dominant_count}/{node.support_count} ({percent(node.confidence)}%)"
        )
        if node.redundant:
            line += " REDUNDANT"
        lines.append(line)
        for child in node.children:
            emit(child, depth + 1)

    emit(root, 0)
    return "\n".join(lines) + "\n"


def rules_to_json(rules: Sequence[BehavioralRule]) -> str:
    return json.dumps([r.to_json() for r in rules], indent=2) + "\n"


def rules_from_json(text: str) -> list[BehavioralRule]:
    return [BehavioralRule.from_json(d) for d in json.loads(text)]
