"""End-to-end acceptance gate; one PASS/FAIL line per criterion is reported."""

from __future__ import annotations

import json
import random
import time
from datetime import date
from fractions import Fraction
from pathlib import Path

from calbehav.calendar_ingest import expand_occurrences, parse_icalendar
from calbehav.cli import main
from calbehav.evaluation import tradeoff_plot_data, tradeoff_sweep
from calbehav.mapping import ATTRIBUTES, map_events_to_behavior
from calbehav.miner import entropy, information_gain, mine_rules
from calbehav.phonelog import CallBehavior, RelationshipMap
from calbehav.pipeline import run_bundle
from calbehav.synth import cohort_bundles, worked_example_fixture, generalization_fixture
from oracles import (
    BIWEEKLY_MEETING_ICS,
    all_pairs_join,
    entropy_direct,
    enumerate_rules,
    information_gain_direct,
    instances_from_counts,
    random_instances,
    random_join_case,
    violates_non_redundancy,
    weekly_dates_by_walking,
)

R, A, M = CallBehavior.REJECT, CallBehavior.ACCEPT, CallBehavior.MISSED
CORPUS_SIZE = 200


def _corpus():
    """Seeded random datasets with their mining parameters."""
    for seed in range(CORPUS_SIZE):
        rng = random.Random(seed)
        data = random_instances(rng, n_max=60)
        yield seed, data, rng.randint(1, 4), rng.choice([0.5, 0.6, 0.7, 0.8, 0.9, 1.0])


def _oracle_order(data) -> tuple[str, ...]:
    gains = {a: round(information_gain_direct(a, data), 12) for a in ATTRIBUTES}
    return tuple(sorted(ATTRIBUTES, key=lambda a: (-gains[a], ATTRIBUTES.index(a))))


def _bundle_args(d: Path) -> list[str]:
    return ["--calendar", str(d / "calendar.ics"), "--calls", str(d / "calls.csv"),
            "--relationships", str(d / "relationships.csv")]


def test_c01_worked_example_exact(criterion):
    with criterion(1, "worked-example fixture yields exactly the five expected rules at 0.80") as c:
        t0 = time.perf_counter()
        instances = run_bundle(worked_example_fixture().bundle).instances
        rules = mine_rules(instances, 0.80)
        elapsed = time.perf_counter() - t0
        got = {(frozenset(r.antecedent), r.consequent, r.confidence_pct) for r in rules}
        expected = {
            (frozenset({("event_name", "Lecture")}), R, 100),
            (frozenset({("event_name", "Meeting")}), R, 85),
            (frozenset({("event_name", "Seminar"), ("event_type", "Recurring")}), A, 92),
            (frozenset({("event_name", "Seminar"), ("event_type", "NonRecurring")}), M, 95),
            (frozenset({("event_name", "Meeting"), ("relationship", "boss")}), A, 100),
        }
        assert len(rules) == 5
        assert got == expected
        assert elapsed < 1.0, f"took {elapsed:.3f}s"
        c.detail = f"5/5 rules, {elapsed * 1000:.0f} ms"


def test_c02_non_redundancy_and_enumerator(criterion):
    with criterion(2, "non-redundant and equal to brute-force enumeration on 200 datasets") as c:
        nonempty = 0
        for seed, data, min_sup, min_conf in _corpus():
            rules = mine_rules(data, min_conf, min_sup)
            assert not violates_non_redundancy(rules), f"seed {seed}"
            got = {(r.antecedent_set, r.consequent, r.support_count, r.confidence) for r in rules}
            assert got == enumerate_rules(data, min_conf, min_sup, _oracle_order(data)), f"seed {seed}"
            nonempty += bool(rules)
        assert nonempty >= CORPUS_SIZE // 2
        c.detail = f"{CORPUS_SIZE} datasets, {nonempty} with rules"


def test_c03_confidence_exact(criterion):
    with criterion(3, "stored confidence equals recomputed ratio exactly") as c:
        checked = 0
        for _, data, min_sup, min_conf in _corpus():
            for r in mine_rules(data, min_conf, min_sup):
                covered = [i for i in data if all(i.context.get(a) == v for a, v in r.antecedent)]
                hits = sum(1 for i in covered if i.behavior is r.consequent)
                assert r.confidence == Fraction(hits, len(covered))
                assert r.support_count == hits >= min_sup
                checked += 1
        c.detail = f"{checked} rules"


def test_c04_information_gain_oracle(criterion):
    with criterion(4, "entropy and IG match direct formulas within 1e-9") as c:
        rng = random.Random(4)
        for _ in range(100):
            counts = {b: rng.randint(0, 50) for b in (R, A, M)}
            if not any(counts.values()):
                counts[R] = 1
            assert abs(entropy(instances_from_counts(counts)) - entropy_direct(list(counts.values()))) <= 1e-9
        for seed in range(100):
            data = random_instances(random.Random(10_000 + seed))
            for a in ATTRIBUTES:
                assert abs(information_gain(a, data) - information_gain_direct(a, data)) <= 1e-9
        for b in (R, A, M):
            assert entropy(instances_from_counts({b: 13})) == 0.0
        assert entropy(instances_from_counts({A: 21, R: 21})) == 1.0
        c.detail = "100 distributions, 100 datasets x 4 attributes"


def test_c05_mapping_oracle(criterion):
    with criterion(5, "mapping equals all-pairs containment join") as c:
        rel = RelationshipMap({"c1": "boss", "c2": "mother"})
        pairs = 0
        for seed in range(100):
            occs, calls = random_join_case(random.Random(seed), max_occ=50, max_calls=500)
            out = map_events_to_behavior(occs, calls, rel)
            rows = sorted((i.context.event_name, i.context.event_type.value, i.context.day_time,
                           i.context.relationship, i.behavior.value, i.source_timestamp) for i in out)
            assert rows == all_pairs_join(occs, calls, rel), f"seed {seed}"
            assert len(out) == sum(sum(1 for o in occs if o.contains(k.timestamp)) for k in calls)
            pairs += len(out)
        c.detail = f"100 cases, {pairs} pairs"


def test_c06_generalization(criterion):
    with criterion(6, "event_type-level rule from sparse one-off events") as c:
        instances = run_bundle(generalization_fixture().bundle).instances
        rules = mine_rules(instances, 0.80, 3)
        assert any(r.antecedent == (("event_type", "NonRecurring"),) and r.consequent is R for r in rules)
        named = {v for r in rules for a, v in r.antecedent if a == "event_name"}
        assert not named & {"E9", "E10"}
        c.detail = "; ".join(str(r) for r in rules)


def test_c07_tradeoff(criterion, tmp_path):
    with criterion(7, "coverage non-increasing, min confidence non-decreasing") as c:
        bundles = [worked_example_fixture(), generalization_fixture(), *cohort_bundles()]
        for g in bundles:
            pts = tradeoff_sweep(run_bundle(g.bundle).instances)
            covs = [p.union_coverage for p in pts]
            mins = [p.min_confidence for p in pts if p.min_confidence is not None]
            assert covs == sorted(covs, reverse=True), g.bundle.name
            assert mins == sorted(mins), g.bundle.name
            assert tradeoff_plot_data(pts).count("\n") == 6
        for _, data, min_sup, _ in _corpus():
            pts = tradeoff_sweep(data, min_support=min_sup)
            covs = [p.union_coverage for p in pts]
            assert covs == sorted(covs, reverse=True)
        worked_example_dir = tmp_path / "worked-example"
        bundles[0].write(worked_example_dir)
        assert main(["evaluate", *_bundle_args(worked_example_dir), "--out", str(tmp_path / "e")]) == 0
        assert (tmp_path / "e" / "tradeoff.dat").read_text().startswith("#")
        c.detail = f"{len(bundles)} bundles + {CORPUS_SIZE} corpus sets; plot data written"


def test_c08_baseline_ordering(criterion, tmp_path):
    with criterion(8, "CalBehav below BM1 and BM2 on >= 9/10 users") as c:
        users = tmp_path / "users"
        t0 = time.perf_counter()
        assert main(["synth", "--preset", "cohort", "--out", str(users)]) == 0
        assert main(["compare", "--users", str(users), "--min-confidence", "0.8", "--folds", "5",
                     "--out", str(tmp_path / "cmp")]) == 0
        elapsed = time.perf_counter() - t0
        payload = json.loads((tmp_path / "cmp" / "comparison.json").read_text())
        wins = 0
        for reports in payload["users"].values():
            err = {r["method"]: r["error_rate"] for r in reports}
            wins += err["CalBehav"] < min(err["BM1"], err["BM2"])
        mean = payload["mean_error"]
        assert len(payload["users"]) == 10
        assert wins >= 9
        assert mean["CalBehav"] < mean["BM1"] and mean["CalBehav"] < mean["BM2"]
        assert elapsed < 30
        c.detail = (f"{wins}/10 users; mean error CalBehav {mean['CalBehav']:.1f}% BM1 {mean['BM1']:.1f}% "
                    f"BM2 {mean['BM2']:.1f}%; {elapsed:.1f}s")


def test_c09_rrule(criterion):
    with criterion(9, "biweekly Thursday expands to 2, 16, 30 June 2016") as c:
        (event,) = parse_icalendar(BIWEEKLY_MEETING_ICS)
        june = (date(2016, 6, 1), date(2016, 6, 30))
        dates = [o.date for o in expand_occurrences(event, june)]
        assert dates == [date(2016, 6, 2), date(2016, 6, 16), date(2016, 6, 30)]
        assert dates == weekly_dates_by_walking(date(2016, 6, 2), 2, 3, *june)
        c.detail = ", ".join(d.isoformat() for d in dates)


def _snapshot(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_c10_determinism(criterion, tmp_path, capsys):
    with criterion(10, "every command byte-identical across two runs") as c:
        src = tmp_path / "src"
        worked_example_fixture().write(src / "worked-example")
        ics = src / "meeting.ics"
        ics.write_text(BIWEEKLY_MEETING_ICS)
        commands = {
            "synth-worked-example": ["synth", "--preset", "worked-example"],
            "synth-generalization": ["synth", "--preset", "generalization"],
            "synth-cohort": ["synth", "--preset", "cohort", "--users-count", "4", "--seed", "7"],
            "mine": ["mine", *_bundle_args(src / "worked-example")],
            "mine-per-node": ["mine", *_bundle_args(src / "worked-example"), "--precedence", "per-node"],
            "evaluate": ["evaluate", *_bundle_args(src / "worked-example"), "--seed", "3"],
            "compare": ["compare", *_bundle_args(src / "worked-example"), "--seed", "3"],
            "expand": ["expand", "--calendar", str(ics), "--start", "2016-06-01", "--end", "2016-08-31"],
        }
        for name, argv in commands.items():
            outputs = []
            for run in ("a", "b"):
                out = tmp_path / run / name
                assert main([*argv, "--out", str(out)]) == 0, name
                stdout = capsys.readouterr().out.replace(str(tmp_path / run), "<tmp>")
                outputs.append((_snapshot(out), stdout))
            assert outputs[0][0], name
            assert outputs[0] == outputs[1], name
        c.detail = f"{len(commands)} commands"
