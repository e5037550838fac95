from __future__ import annotations

import math
from collections import Counter
from datetime import date

import pytest

from calbehav._rng import SplitMix64
from calbehav.errors import ContractViolation
from calbehav.phonelog import CallBehavior
from calbehav.pipeline import run_bundle
from calbehav.synth import (
    Contact,
    EventTemplate,
    PolicyEntry,
    UserProfile,
    cohort_bundles,
    cohort_profiles,
    generate_bundle,
)

SPAN = (date(2016, 1, 1), date(2016, 12, 31))


class TestRng:
    def test_reference_vector(self):
        rng = SplitMix64(0)
        assert [rng.next_u64() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]

    def test_randbelow_range(self):
        rng = SplitMix64(5)
        assert {rng.randbelow(3) for _ in range(200)} == {0, 1, 2}

    def test_poisson_mean(self):
        rng = SplitMix64(11)
        draws = [rng.poisson(3.0) for _ in range(4000)]
        assert sum(draws) / len(draws) == pytest.approx(3.0, abs=0.15)


def _profile(seed=1, noise=0.0, dist=None):
    return UserProfile(
        seed=seed,
        events=[EventTemplate("Standup", "09:00", "10:00", "MO")],
        contacts=[Contact("c1", "boss"), Contact("c2", None)],
        policy=[PolicyEntry({"event_name": "Standup"}, dist or {"Reject": 0.7, "Accept": 0.2, "Missed": 0.1})],
        call_rate=8.0,
        noise=noise,
    )


class TestGenerate:
    def test_deterministic(self):
        a = generate_bundle(_profile(), SPAN).bundle
        b = generate_bundle(_profile(), SPAN).bundle
        assert a == b
        assert generate_bundle(_profile(seed=2), SPAN).bundle.calls != a.calls

    def test_header_names_generator_and_seed(self):
        cal = generate_bundle(_profile(seed=42), SPAN).bundle.calendar
        assert "X-CALBEHAV-SEED:42" in cal and "X-CALBEHAV-GENERATOR:splitmix64" in cal

    def test_unmapped_contact_is_unknown(self):
        rels = {i.context.relationship for i in run_bundle(generate_bundle(_profile(), SPAN).bundle).instances}
        assert rels == {"boss", "unknown"}

    @pytest.mark.parametrize("dist", [{"Reject": 0.7, "Accept": 0.2, "Missed": 0.1}, {"Accept": 0.5, "Missed": 0.5}])
    def test_policy_frequencies_within_tolerance(self, dist):
        instances = run_bundle(generate_bundle(_profile(dist=dist), SPAN).bundle).instances
        n = len(instances)
        assert n > 300
        counts = Counter(i.behavior.value for i in instances)
        for b in CallBehavior:
            p = dist.get(b.value, 0.0)
            assert abs(counts[b.value] / n - p) <= 0.07
            # and well inside a 4-sigma binomial band
            assert abs(counts[b.value] - n * p) <= 4 * math.sqrt(n * p * (1 - p)) + 1

    def test_noise_moves_mass(self):
        instances = run_bundle(generate_bundle(_profile(noise=0.3, dist={"Reject": 1.0}), SPAN).bundle).instances
        share = sum(1 for i in instances if i.behavior is CallBehavior.REJECT) / len(instances)
        assert abs(share - 0.7) <= 0.07

    def test_profile_json_roundtrip(self):
        p = _profile()
        assert UserProfile.from_json(p.to_json()) == p

    @pytest.mark.parametrize("bad", [dict(call_rate=0), dict(noise=0.6), dict(default={"Reject": 0.5})])
    def test_profile_validation(self, bad):
        with pytest.raises(ContractViolation):
            UserProfile(seed=1, events=[], contacts=[Contact("c", None)], **bad)

    def test_empty_span(self):
        with pytest.raises(ContractViolation):
            generate_bundle(_profile(), (date(2016, 2, 1), date(2016, 1, 1)))


class TestFixtures:
    def test_worked_example_counts(self, worked_example_instances):
        assert len(worked_example_instances) == 127
        by_name = Counter(i.context.event_name for i in worked_example_instances)
        assert by_name == {"Lecture": 42, "Meeting": 40, "Seminar": 45}

    def test_generalization_fixture(self, generalization):
        instances = run_bundle(generalization.bundle).instances
        names = Counter(i.context.event_name for i in instances)
        assert all(c < 3 for c in names.values())
        assert "E9" not in names and "E10" not in names

    def test_cohort_heterogeneous(self):
        profiles = cohort_profiles()
        assert len(profiles) == 10
        assert len({tuple(e.name for e in p.events) for p in profiles}) > 5
        a = [b.bundle for b in cohort_bundles(3)]
        assert a == [b.bundle for b in cohort_bundles(3)]
