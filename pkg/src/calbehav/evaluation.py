"""Rule metrics, k-fold cross-validation and the baseline comparison."""

from __future__ import annotations

import csv
import io
import json
import statistics
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from ._rng import SplitMix64
from .baselines import KeywordRuleTable, bm1_predict, bm2_predict
from .errors import ContractViolation
from .mapping import ContextVector, EventBehaviorInstance
from .miner import (
    DEFAULT_MIN_CONFIDENCE,
    DEFAULT_MIN_SUPPORT,
    BehavioralRule,
    as_fraction,
    mine_rules,
)
from .phonelog import CallBehavior
from .pipeline import Bundle, run_bundle

CALBEHAV = "CalBehav"
BM1 = "BM1"
BM2 = "BM2"


@dataclass(frozen=True)
class MiningConfig:
    min_confidence: float = DEFAULT_MIN_CONFIDENCE
    min_support: int = DEFAULT_MIN_SUPPORT
    precedence: str = "global"

    def __post_init__(self) -> None:
        if not 0 < as_fraction(self.min_confidence) <= 1:
            raise ContractViolation(f"min_confidence must be in (0, 1], got {self.min_confidence}")
        if self.min_support < 1:
            raise ContractViolation("min_support must be >= 1")

    def mine(self, instances: Sequence[EventBehaviorInstance]) -> list[BehavioralRule]:
        if not instances:
            return []
        return mine_rules(instances, self.min_confidence, self.min_support, self.precedence)


def _covered(rule: BehavioralRule, dataset: Sequence[EventBehaviorInstance]) -> list[EventBehaviorInstance]:
    return [inst for inst in dataset if rule.covers(inst.context)]


def rule_accuracy(rule: BehavioralRule, dataset: Sequence[EventBehaviorInstance]) -> float | None:
    """100 * n_correct / n_covers, or ``None`` when the rule covers nothing."""
    covered = _covered(rule, dataset)
    if not covered:
        return None
    correct = sum(1 for inst in covered if inst.behavior is rule.consequent)
    return 100.0 * correct / len(covered)


def rule_accuracy_exact(rule: BehavioralRule, dataset: Sequence[EventBehaviorInstance]) -> Fraction | None:
    covered = _covered(rule, dataset)
    if not covered:
        return None
    return Fraction(sum(1 for inst in covered if inst.behavior is rule.consequent), len(covered))


def rule_coverage(rule: BehavioralRule, dataset: Sequence[EventBehaviorInstance]) -> float:
    if not dataset:
        raise ContractViolation("coverage over an empty dataset is undefined")
    return 100.0 * len(_covered(rule, dataset)) / len(dataset)


def union_coverage(rules: Sequence[BehavioralRule], dataset: Sequence[EventBehaviorInstance]) -> float:
    """Percentage of instances covered by at least one rule."""
    if not dataset:
        raise ContractViolation("coverage over an empty dataset is undefined")
    hit = sum(1 for inst in dataset if any(r.covers(inst.context) for r in rules))
    return 100.0 * hit / len(dataset)


def match_rule(ruleset: Sequence[BehavioralRule], context: ContextVector) -> BehavioralRule | None:
    """Most specific covering rule; ties by confidence, then support, then list order."""
    best = None
    best_key = None
    for rule in ruleset:
        if not rule.covers(context):
            continue
        key = (len(rule.antecedent), rule.confidence, rule.support_count)
        if best_key is None or key > best_key:
            best, best_key = rule, key
    return best


@dataclass(frozen=True)
class ErrorRate:
    incorrect: int
    matched: int
    uncovered: int

    @property
    def rate(self) -> float | None:
        """Percent of matched test instances predicted wrongly; ``None`` if nothing matched."""
        if self.matched == 0:
            return None
        return 100.0 * self.incorrect / self.matched


def error_rate(ruleset: Sequence[BehavioralRule], test_instances: Sequence[EventBehaviorInstance]) -> ErrorRate:
    incorrect = matched = uncovered = 0
    for inst in test_instances:
        rule = match_rule(ruleset, inst.context)
        if rule is None:
            uncovered += 1
            continue
        matched += 1
        if rule.consequent is not inst.behavior:
            incorrect += 1
    return ErrorRate(incorrect, matched, uncovered)


def prediction_error(
    predict: Callable[[ContextVector], CallBehavior], test_instances: Sequence[EventBehaviorInstance]
) -> ErrorRate:
    """Error of a predictor that always answers (used for the static baselines)."""
    incorrect = sum(1 for inst in test_instances if predict(inst.context) is not inst.behavior)
    return ErrorRate(incorrect, len(test_instances), 0)


def kfold_partition(n: int, k: int, seed: int) -> list[list[int]]:
    """Seeded shuffle of ``range(n)`` cut into k folds whose sizes differ by at most one."""
    if k < 2:
        raise ContractViolation(f"k must be >= 2, got {k}")
    if n < k:
        raise ContractViolation(f"need at least k={k} instances, got {n}")
    order = list(range(n))
    SplitMix64(seed).shuffle(order)
    base, extra = divmod(n, k)
    folds, start = [], 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(sorted(order[start : start + size]))
        start += size
    return folds


@dataclass
class RuleStat:
    rule: str
    consequent: str
    confidence_pct: int
    accuracy: float | None
    coverage: float


@dataclass
class MetricsReport:
    method: str
    fold_errors: list[float | None]
    fold_uncovered: list[int]
    fold_matched: list[int]
    fold_rule_counts: list[int]
    rule_count: int = 0
    rules: list[RuleStat] = field(default_factory=list)

    @property
    def error_rate(self) -> float | None:
        defined = [e for e in self.fold_errors if e is not None]
        return statistics.fmean(defined) if defined else None

    @property
    def uncovered_rate(self) -> float:
        total = sum(self.fold_uncovered) + sum(self.fold_matched)
        return 100.0 * sum(self.fold_uncovered) / total if total else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["error_rate"] = self.error_rate
        d["uncovered_rate"] = self.uncovered_rate
        return d


def _fold_report(method: str, results: list[ErrorRate], rule_counts: list[int]) -> MetricsReport:
    return MetricsReport(
        method=method,
        fold_errors=[r.rate for r in results],
        fold_uncovered=[r.uncovered for r in results],
        fold_matched=[r.matched for r in results],
        fold_rule_counts=rule_counts,
    )


def _split(instances, folds, i):
    test_idx = set(folds[i])
    train = [inst for j, inst in enumerate(instances) if j not in test_idx]
    test = [instances[j] for j in folds[i]]
    return train, test


def k_fold_cv(
    instances: Sequence[EventBehaviorInstance],
    k: int = 5,
    config: MiningConfig | None = None,
    seed: int = 0,
    folds: list[list[int]] | None = None,
) -> MetricsReport:
    """Mine on k-1 folds, score the held-out fold, for each fold in turn."""
    config = config or MiningConfig()
    folds = folds or kfold_partition(len(instances), k, seed)
    results, counts = [], []
    for i in range(len(folds)):
        train, test = _split(instances, folds, i)
        rules = config.mine(train)
        counts.append(len(rules))
        results.append(error_rate(rules, test))
    report = _fold_report(CALBEHAV, results, counts)
    full_rules = config.mine(instances)
    report.rule_count = len(full_rules)
    report.rules = [
        RuleStat(str(r), r.consequent.value, r.confidence_pct, rule_accuracy(r, instances), rule_coverage(r, instances))
        for r in full_rules
    ]
    return report


def baseline_cv(
    method: str,
    instances: Sequence[EventBehaviorInstance],
    folds: list[list[int]],
    table: KeywordRuleTable | None = None,
) -> MetricsReport:
    """Score a static baseline on the same held-out folds (nothing is trained)."""
    if method == BM1:
        predict = bm1_predict
    elif method == BM2:
        table = table or KeywordRuleTable.default_table()
        predict = lambda ctx: bm2_predict(ctx, table)  # noqa: E731
    else:
        raise ContractViolation(f"unknown baseline {method!r}")
    results = [prediction_error(predict, [instances[j] for j in fold]) for fold in folds]
    return _fold_report(method, results, [0] * len(folds))


def compare_on_instances(
    instances: Sequence[EventBehaviorInstance],
    config: MiningConfig | None = None,
    k: int = 5,
    seed: int = 0,
    table: KeywordRuleTable | None = None,
) -> list[MetricsReport]:
    folds = kfold_partition(len(instances), k, seed)
    return [
        k_fold_cv(instances, k, config, seed, folds=folds),
        baseline_cv(BM1, instances, folds),
        baseline_cv(BM2, instances, folds, table),
    ]


def compare_methods(
    bundle: Bundle,
    config: MiningConfig | None = None,
    k: int = 5,
    seed: int = 0,
    table: KeywordRuleTable | None = None,
) -> list[MetricsReport]:
    """CalBehav, BM1 and BM2 on one user's bundle, sharing the fold split."""
    instances = run_bundle(bundle).instances
    return compare_on_instances(instances, config, k, seed, table)


def reports_to_csv(reports_by_user: dict[str, list[MetricsReport]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["user", "method", "fold", "error", "uncovered", "rule_count"])
    for user, reports in reports_by_user.items():
        for rep in reports:
            for i, (e, u, c) in enumerate(zip(rep.fold_errors, rep.fold_uncovered, rep.fold_rule_counts)):
                w.writerow([user, rep.method, i, "" if e is None else f"{e:.6f}", u, c])
            mean = rep.error_rate
            w.writerow([user, rep.method, "mean", "" if mean is None else f"{mean:.6f}",
                        sum(rep.fold_uncovered), rep.rule_count])
    return buf.getvalue()


def summary_table(reports_by_user: dict[str, list[MetricsReport]]) -> dict[str, float | None]:
    """Mean over users of each method's CV error rate."""
    per_method: dict[str, list[float]] = {}
    for reports in reports_by_user.values():
        for rep in reports:
            if rep.error_rate is not None:
                per_method.setdefault(rep.method, []).append(rep.error_rate)
    return {m: statistics.fmean(v) for m, v in per_method.items()}


def reports_to_json(reports_by_user: dict[str, list[MetricsReport]]) -> str:
    payload = {
        "users": {u: [r.to_dict() for r in reps] for u, reps in reports_by_user.items()},
        "mean_error": summary_table(reports_by_user),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class TradeoffPoint:
    threshold: float
    rule_count: int
    mean_accuracy: float | None
    min_confidence: float | None
    union_coverage: float


def tradeoff_sweep(
    instances: Sequence[EventBehaviorInstance],
    thresholds: Sequence[float] = (0.6, 0.7, 0.8, 0.9, 1.0),
    min_support: int = DEFAULT_MIN_SUPPORT,
    precedence: str = "global",
) -> list[TradeoffPoint]:
    """Training-set accuracy and coverage of the mined rule set at each threshold."""
    points = []
    for t in thresholds:
        rules = MiningConfig(t, min_support, precedence).mine(instances)
        accs = [rule_accuracy(r, instances) for r in rules]
        points.append(
            TradeoffPoint(
                threshold=t,
                rule_count=len(rules),
                mean_accuracy=statistics.fmean(accs) if accs else None,
                min_confidence=float(min(r.confidence for r in rules)) if rules else None,
                union_coverage=union_coverage(rules, instances) if instances else 0.0,
            )
        )
    return points


def tradeoff_plot_data(points: Sequence[TradeoffPoint]) -> str:
    """Whitespace-separated columns for gnuplot: threshold, accuracy, coverage, rules."""
    lines = ["# confidence_pct accuracy_pct coverage_pct rule_count"]
    for p in points:
        acc = "NaN" if p.mean_accuracy is None else f"{p.mean_accuracy:.4f}"
        lines.append(f"{round(p.threshold * 100)} {acc} {p.union_coverage:.4f} {p.rule_count}")
    return "\n".join(lines) + "\n"
