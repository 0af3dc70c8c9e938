"""The self-verification battery: full table, filtering, failure detection."""

import pytest

import fracnlse.functionals
from fracnlse import run_checks
from fracnlse.verify import CHECKS

CONSTANT_DEPENDENT = {
    "geometry-gap-positivity",
    "geometry-radius-decay",
    "sobolev-inequality-with-estimate",
    "gn-inequality-with-estimate",
    "compactness-threshold-margin",
}


def test_full_battery_passes_with_constants(constants_1d):
    rows = run_checks(constants=constants_1d)
    assert [r.name for r in rows] == [name for name, _ in CHECKS]
    failures = [(r.name, r.detail) for r in rows if r.status != "pass"]
    assert failures == []


def test_constant_dependent_rows_skip_without_constants():
    rows = run_checks(names=sorted(CONSTANT_DEPENDENT))
    assert {r.name for r in rows} == CONSTANT_DEPENDENT
    assert all(r.status == "skip" for r in rows)


def test_name_filter_preserves_registry_order():
    wanted = ["manifold-energy-identity", "fiber-derivative-identity"]
    rows = run_checks(names=wanted)
    # Registry order, not request order.
    assert [r.name for r in rows] == ["fiber-derivative-identity",
                                      "manifold-energy-identity"]
    rows = run_checks(names=["no-such-check"])
    assert rows == []


def test_battery_detects_broken_identities(monkeypatch):
    # Flip the sign of the Pohozaev functional: the two checks that compare
    # independent computations of it must fail, while a check that never
    # touches it must keep passing. This guards the battery itself.
    names = ["fiber-derivative-identity", "manifold-energy-identity",
             "multiplier-sign-identity"]
    true_pohozaev = fracnlse.functionals.pohozaev
    monkeypatch.setattr(fracnlse.functionals, "pohozaev",
                        lambda s4, params: -true_pohozaev(s4, params))
    rows = {r.name: r.status for r in run_checks(names=names)}
    assert rows["fiber-derivative-identity"] == "fail"
    assert rows["manifold-energy-identity"] == "fail"
    assert rows["multiplier-sign-identity"] == "pass"


def test_seed_controls_randomized_rows(constants_1d):
    names = ["fiber-derivative-identity"]
    a = run_checks(names=names, seed=1)[0]
    b = run_checks(names=names, seed=1)[0]
    assert a.detail == b.detail
