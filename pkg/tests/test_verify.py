import pytest

from bwrank.utils.checks import check
from bwrank.utils.verify import PROPERTIES, Property, run_verify

MODULES = {"matkernels", "manifolds", "bwgeom", "geodesics", "logmaps"}


def test_every_module_has_properties():
    assert {p.module for p in PROPERTIES} == MODULES
    assert len({p.name for p in PROPERTIES}) == len(PROPERTIES)


def test_single_trial_passes_everywhere():
    reports = run_verify(seed=0, trials=1)
    failing = [(r.name, r.message) for r in reports if not r.passed]
    assert failing == []
    assert all(r.trials == 1 for r in reports)


def test_zero_trials_is_vacuous():
    reports = run_verify(seed=0, trials=0)
    assert len(reports) == len(PROPERTIES)
    assert all(r.passed and r.trials == 0 for r in reports)


def test_coarse_step_breaks_the_geodesic_properties():
    geodesic_props = [p for p in PROPERTIES if p.name in
                      ("energy_and_momentum_conservation", "oracle_equivalence")]
    reports = run_verify(seed=1, trials=2, dt=0.5, properties=geodesic_props)
    assert not all(r.passed for r in reports)


def test_crashing_property_is_reported_as_failure():
    def boom(rng, opts):
        raise RuntimeError("kaput")

    reports = run_verify(trials=2, properties=[Property("boom", "matkernels", boom)])
    assert reports[0].failures == 2
    assert "kaput" in reports[0].message


def test_trials_are_seeded_deterministically():
    seen = []

    def record(rng, opts):
        seen.append(float(rng.random()))
        return check("record", 0.0, 1.0)

    prop = [Property("record", "matkernels", record)]
    run_verify(seed=5, trials=3, properties=prop, max_workers=1)
    first = sorted(seen)
    seen.clear()
    run_verify(seed=5, trials=3, properties=prop, max_workers=3)
    assert sorted(seen) == pytest.approx(first)
