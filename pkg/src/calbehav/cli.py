"""Command-line front end: mine, evaluate, compare, synth, expand.

Exit codes: 0 success, 1 input error, 2 no behavioral evidence, 3 internal
invariant violation. Every text artifact is written next to a JSON twin.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from datetime import date, time
from pathlib import Path

from .baselines import KeywordRuleTable
from .calendar_ingest import expand_all, parse_icalendar
from .errors import CalBehavError, ContractViolation, Diagnostic, FormatError, InvariantViolation
from .evaluation import (
    MiningConfig,
    compare_on_instances,
    k_fold_cv,
    reports_to_csv,
    reports_to_json,
    summary_table,
    tradeoff_plot_data,
    tradeoff_sweep,
)
from .mapping import to_event_behavior_csv
from .miner import AGTNode, build_agt, extract_rules, format_tree, rules_to_json
from .pipeline import Bundle, PipelineResult, run_pipeline
from .synth import (
    COHORT_SPAN,
    GENERALIZATION_SPAN,
    UserProfile,
    cohort_profiles,
    worked_example_fixture,
    generalization_fixture,
    generate_bundle,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_EVIDENCE = 2
EXIT_INVARIANT = 3

CONFIG_ENV = "CALBEHAV_CONFIG"
FATAL_DIAGNOSTICS = frozenset({"MalformedBlock", "UnsupportedRecurrence", "UnparseableRow"})


class NoEvidence(CalBehavError):
    pass


@dataclass(frozen=True)
class RunConfig:
    calendar: str | None = None
    calls: str | None = None
    relationships: str | None = None
    keywords: str | None = None
    min_confidence: float = 0.80
    min_support: int = 3
    precedence: str = "global"
    folds: int = 5
    seed: int = 0
    out: str = "out"

    def __post_init__(self) -> None:
        MiningConfig(self.min_confidence, self.min_support, self.precedence)
        if self.folds < 2:
            raise ContractViolation(f"--folds must be >= 2, got {self.folds}")

    @property
    def mining(self) -> MiningConfig:
        return MiningConfig(self.min_confidence, self.min_support, self.precedence)


def load_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides defaults."""
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    values: dict = {}
    if path:
        try:
            values = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        unknown = set(values) - known
        if unknown:
            raise FormatError(f"unknown config keys: {sorted(unknown)}")
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    if "precedence" in values:
        values["precedence"] = values["precedence"].replace("-", "_")
    return RunConfig(**values)


def _read(path: str | None, what: str, required: bool = True) -> str | None:
    if path is None:
        if required:
            raise FormatError(f"missing --{what}")
        return None
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {what} file {path}: {exc}") from exc


def _report_diagnostics(diags: list[Diagnostic], lenient: bool) -> None:
    for d in diags:
        print(f"warning: {d}", file=sys.stderr)
    fatal = [d for d in diags if d.kind in FATAL_DIAGNOSTICS]
    if fatal and not lenient:
        raise FormatError(f"{len(fatal)} ingestion error(s); rerun with --lenient to skip them")


def _ingest(cfg: RunConfig, lenient: bool) -> PipelineResult:
    result = run_pipeline(
        _read(cfg.calendar, "calendar"),
        _read(cfg.calls, "calls"),
        _read(cfg.relationships, "relationships", required=False),
    )
    _report_diagnostics(result.diagnostics, lenient)
    if not result.instances:
        raise NoEvidence("no call falls inside any calendar occurrence; no rules can be mined")
    return result


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def tree_to_dict(node: AGTNode) -> dict:
    return {
        "node_id": node.node_id,
        "context_path": [{"attribute": a, "value": v} for a, v in node.context_path],
        "distribution": {b.value: node.distribution[b] for b in type(node.dominant)},
        "dominant": node.dominant.value,
        "confidence_ratio": [node.confidence.numerator, node.confidence.denominator],
        "support_count": node.support_count,
        "redundant": node.redundant,
        "children": [tree_to_dict(c) for c in node.children],
    }


def _check_rules(rules, instances) -> None:
    for r in rules:
        covered = [i for i in instances if r.covers(i.context)]
        hits = sum(1 for i in covered if i.behavior is r.consequent)
        if not covered or r.support_count != hits or r.confidence * len(covered) != hits:
            raise InvariantViolation(f"stored statistics of rule {r} disagree with the data")


def cmd_mine(cfg: RunConfig, args: argparse.Namespace) -> int:
    result = _ingest(cfg, args.lenient)
    root = build_agt(result.instances, cfg.min_confidence, cfg.min_support, cfg.precedence)
    rules = extract_rules(root, cfg.min_confidence, cfg.min_support)
    _check_rules(rules, result.instances)
    out = Path(cfg.out)
    _write(out, "rules.json", rules_to_json(rules))
    _write(out, "rules.txt", "".join(f"R{i}: {r}\n" for i, r in enumerate(rules, 1)))
    _write(out, "tree.txt", format_tree(root))
    _write(out, "tree.json", _dump(tree_to_dict(root)))
    _write(out, "instances.csv", to_event_behavior_csv(result.instances))
    summary = {
        "events": len(result.events),
        "call_records": len(result.records),
        "classified_calls": len(result.calls),
        "occurrences": len(result.occurrences),
        "instances": len(result.instances),
        "diagnostics": len(result.diagnostics),
        "rules": len(rules),
        "attribute_order": list(root.params.attribute_order),
        "config": {k: v for k, v in asdict(cfg).items() if k != "out"},
    }
    _write(out, "summary.json", _dump(summary))
    _write(out, "summary.txt", "".join(f"{k}: {v}\n" for k, v in summary.items() if k != "config"))
    print(f"{len(rules)} rules from {len(result.instances)} instances -> {out}")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, args: argparse.Namespace) -> int:
    result = _ingest(cfg, args.lenient)
    report = k_fold_cv(result.instances, cfg.folds, cfg.mining, cfg.seed)
    sweep = tradeoff_sweep(result.instances, min_support=cfg.min_support, precedence=cfg.precedence)
    out = Path(cfg.out)
    by_user = {"user": [report]}
    _write(out, "report.json", _dump(report.to_dict()))
    _write(out, "report.csv", reports_to_csv(by_user))
    _write(out, "tradeoff.dat", tradeoff_plot_data(sweep))
    _write(out, "tradeoff.json", _dump([asdict(p) for p in sweep]))
    err = report.error_rate
    print(f"{cfg.folds}-fold error rate: {'n/a' if err is None else f'{err:.2f}%'}; "
          f"uncovered {report.uncovered_rate:.2f}%; {report.rule_count} rules on full data")
    return EXIT_OK


def _user_bundles(args: argparse.Namespace, cfg: RunConfig) -> list[tuple[str, Bundle]]:
    if args.users:
        root = Path(args.users)
        if not root.is_dir():
            raise FormatError(f"--users {root} is not a directory")
        dirs = sorted(p for p in root.iterdir() if (p / "calendar.ics").exists())
        if not dirs:
            raise FormatError(f"no user bundles (calendar.ics) under {root}")
        return [(d.name, Bundle.from_dir(d)) for d in dirs]
    return [("user", Bundle(_read(cfg.calendar, "calendar"), _read(cfg.calls, "calls"),
                            _read(cfg.relationships, "relationships", required=False) or "contact,relationship\n"))]


def cmd_compare(cfg: RunConfig, args: argparse.Namespace) -> int:
    table = KeywordRuleTable.from_json(_read(cfg.keywords, "keywords")) if cfg.keywords else None
    users = _user_bundles(args, cfg)

    def one(item):
        name, bundle = item
        result = run_pipeline(bundle.calendar, bundle.calls, bundle.relationships)
        return name, result

    # pipelines run concurrently; map() keeps user order so writes stay deterministic
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(one, users))
    by_user = {}
    for name, result in results:
        _report_diagnostics(result.diagnostics, args.lenient)
        if len(result.instances) < cfg.folds:
            raise NoEvidence(f"{name}: {len(result.instances)} instances, fewer than {cfg.folds} folds")
        by_user[name] = compare_on_instances(result.instances, cfg.mining, cfg.folds, cfg.seed, table)
    out = Path(cfg.out)
    means = summary_table(by_user)
    lines = [f"{'user':<12}" + "".join(f"{m:>10}" for m in means)]
    for name, reports in by_user.items():
        cells = "".join(f"{'n/a' if r.error_rate is None else f'{r.error_rate:.2f}':>10}" for r in reports)
        lines.append(f"{name:<12}{cells}")
    lines.append(f"{'mean':<12}" + "".join(f"{v:>10.2f}" for v in means.values()))
    text = "\n".join(lines) + "\n"
    _write(out, "comparison.txt", text)
    _write(out, "comparison.csv", reports_to_csv(by_user))
    _write(out, "comparison.json", reports_to_json(by_user))
    print(text, end="")
    return EXIT_OK


def _span(args: argparse.Namespace, default: tuple[date, date]) -> tuple[date, date]:
    lo = date.fromisoformat(args.start) if args.start else default[0]
    hi = date.fromisoformat(args.end) if args.end else default[1]
    if lo > hi:
        raise ContractViolation(f"empty span {lo}..{hi}")
    return lo, hi


def cmd_synth(cfg: RunConfig, args: argparse.Namespace) -> int:
    out = Path(cfg.out)
    if args.profile:
        profile = UserProfile.from_json(_read(args.profile, "profile"))
        if args.seed is not None:
            profile = replace(profile, seed=args.seed)
        if not (args.start and args.end):
            raise FormatError("--profile needs --start and --end")
        generate_bundle(profile, _span(args, COHORT_SPAN), name=out.name).write(out)
        written = [out]
    elif args.preset == "worked-example":
        worked_example_fixture().write(out)
        written = [out]
    elif args.preset == "generalization":
        generalization_fixture().write(out)
        written = [out]
    elif args.preset == "cohort":
        seed = 2016 if args.seed is None else args.seed
        span = _span(args, COHORT_SPAN)
        written = []
        for i, profile in enumerate(cohort_profiles(args.users_count, seed)):
            name = f"user{i:02d}"
            generate_bundle(profile, span, name=name).write(out / name)
            _write(out / name, "profile.json", profile.to_json())
            written.append(out / name)
    else:
        raise FormatError("synth needs --preset or --profile")
    manifest = {"bundles": [p.relative_to(out).as_posix() or "." for p in written], "preset": args.preset, "profile": args.profile}
    _write(out, "manifest.json", _dump(manifest))
    print(f"wrote {len(written)} bundle(s) under {out}")
    return EXIT_OK


def cmd_expand(cfg: RunConfig, args: argparse.Namespace) -> int:
    diags: list[Diagnostic] = []
    events = parse_icalendar(_read(cfg.calendar, "calendar"), diags)
    _report_diagnostics(diags, args.lenient)
    if not (args.start and args.end):
        raise FormatError("expand needs --start and --end")
    occs = expand_all(events, _span(args, GENERALIZATION_SPAN))
    text = "".join(
        f"{o.date.isoformat()} {o.day_time} {o.event_type.value} {o.event_name} ({o.event_uid})\n" for o in occs
    )
    payload = [
        {
            "date": o.date.isoformat(),
            "start_time": o.start_time.isoformat(),
            "end_time": "24:00:00" if o.end_time == time.max else o.end_time.isoformat(),
            "event_uid": o.event_uid,
            "event_name": o.event_name,
            "event_type": o.event_type.value,
            "day_time": o.day_time,
        }
        for o in occs
    ]
    if args.out:
        _write(Path(cfg.out), "occurrences.txt", text)
        _write(Path(cfg.out), "occurrences.json", _dump(payload))
    print(_dump(payload) if args.json else text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="calbehav", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    common.add_argument("--calendar", help="iCalendar file")
    common.add_argument("--calls", help="call log CSV")
    common.add_argument("--relationships", help="contact,relationship CSV")
    common.add_argument("--keywords", help="BM2 keyword table JSON")
    common.add_argument("--min-confidence", dest="min_confidence", type=float)
    common.add_argument("--min-support", dest="min_support", type=int)
    common.add_argument("--precedence", choices=("global", "per-node"))
    common.add_argument("--folds", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--lenient", action="store_true", help="skip malformed input instead of failing")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("mine", parents=[common], help="mine rules; write rules, tree and summary")
    sub.add_parser("evaluate", parents=[common], help="k-fold error rate and trade-off sweep")
    p = sub.add_parser("compare", parents=[common], help="CalBehav vs BM1 vs BM2")
    p.add_argument("--users", help="directory of per-user bundle directories")
    p.add_argument("--jobs", type=int, default=4)
    p = sub.add_parser("synth", parents=[common], help="write synthetic bundles")
    p.add_argument("--preset", choices=("worked-example", "generalization", "cohort"))
    p.add_argument("--profile", help="UserProfile JSON")
    p.add_argument("--start")
    p.add_argument("--end")
    p.add_argument("--users-count", dest="users_count", type=int, default=10)
    p = sub.add_parser("expand", parents=[common], help="list occurrences in a date window")
    p.add_argument("--start")
    p.add_argument("--end")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")
    return parser


COMMANDS = {
    "mine": cmd_mine,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "synth": cmd_synth,
    "expand": cmd_expand,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg, args)
    except NoEvidence as exc:
        print(f"no evidence: {exc}", file=sys.stderr)
        return EXIT_NO_EVIDENCE
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (CalBehavError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
