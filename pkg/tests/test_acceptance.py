"""The ten verification criteria, one test each.

These call the same check functions that back `flp verify-paper`, so a
green suite here and a green CLI table are the same statement.  The
randomized checks run at the default seed unless FLP_SEED is set.
"""

from __future__ import annotations

from filippov import acceptance


def test_criterion_01_random_sweep():
    ok, detail = acceptance.check_sliding_count_sweep()
    assert ok, detail


def test_criterion_02_example_configurations():
    ok, detail = acceptance.check_example_configurations()
    assert ok, detail


def test_criterion_03_crossing_exclusions():
    ok, detail = acceptance.check_crossing_exclusions()
    assert ok, detail


def test_criterion_04_rho_scenario():
    ok, detail = acceptance.check_rho_scenario()
    assert ok, detail


def test_criterion_05_eta_scenario():
    ok, detail = acceptance.check_eta_scenario()
    assert ok, detail


def test_criterion_06_halfmap_oracle():
    ok, detail = acceptance.check_halfmap_oracle()
    assert ok, detail


def test_criterion_07_asymptotic_slopes():
    ok, detail = acceptance.check_asymptotic_slopes()
    assert ok, detail


def test_criterion_08_half_turn_constants():
    ok, detail = acceptance.check_half_turn_constants()
    assert ok, detail


def test_criterion_09_filippov_identity():
    ok, detail = acceptance.check_filippov_identity()
    assert ok, detail


def test_criterion_10_coexistence_witnesses():
    ok, detail = acceptance.check_coexistence_witnesses()
    assert ok, detail
