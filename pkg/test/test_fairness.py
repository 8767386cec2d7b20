# type: ignore
"""

    test_fairness.py

    Tests for the rate imbalance between operators and the slot
    width search

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.

"""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sbv_sim import ParameterError
from sbv_sim.fairness import (
    FAIRNESS_COLUMNS,
    distance_grid,
    fairness_sweep,
    fairness_table,
    rate_delta,
    relative_spread,
    select_slot_width,
    upper_rates,
)
from sbv_sim.scenario import Scenario
from sbv_sim.toneplan import PartitionPolicy, build_band_plan


@pytest.fixture(scope="module")
def scenario():
    return Scenario(100.0)


rates = st.lists(
    st.one_of(st.just(0.0), st.floats(min_value=1.0, max_value=1e9)), min_size=2, max_size=6
)


def test_alternate_is_fair(scenario):
    report = fairness_sweep(PartitionPolicy.alternate(), scenario)
    assert report.distances[0] == 50.0 and report.distances[-1] == 600.0
    assert len(report.delta_rb) == 23
    assert report.passed
    assert report.max_delta == max(report.delta_rb) < 0.05
    assert report.slot_width_hz is None and report.policy == "alternate"


def test_division_is_unfair(scenario):
    report = fairness_sweep(PartitionPolicy.division(), scenario)
    assert not report.passed
    assert report.max_delta > 0.05


def test_swap_improves_fairness(scenario):
    plain = fairness_sweep(PartitionPolicy.block(4.4e6), scenario, 50.0, 375.0, 25.0)
    swapped = fairness_sweep(
        PartitionPolicy.block(4.4e6, swap=True), scenario, 50.0, 375.0, 25.0
    )
    assert swapped.max_delta <= plain.max_delta
    assert swapped.passed
    assert not plain.passed
    assert swapped.swap and swapped.slot_width_hz == 4.4e6


@pytest.mark.parametrize("swap", (False, True))
def test_block_plan_near_cutoff(scenario, swap):
    # Only the first block still carries bits, and it has a single owner
    report = fairness_sweep(
        PartitionPolicy.block(4.4e6, swap=swap), scenario, 550.0, 575.0, 25.0
    )
    assert list(report.distances) == pytest.approx([550.0, 575.0])
    assert list(report.delta_rb) == pytest.approx([1.0, 1.0])
    assert not report.passed


def test_select_slot_width(scenario):
    candidates = [1.1e6, 2.2e6, 4.4e6]
    assert select_slot_width(candidates, scenario, 50.0, 300.0, 25.0) == 2.2e6
    assert select_slot_width(candidates, scenario, 50.0, 300.0, 25.0, delta0=1.0) == 4.4e6
    assert select_slot_width(candidates, scenario, 50.0, 300.0, 25.0, delta0=0.0) is None
    with pytest.raises(ParameterError):
        select_slot_width([], scenario)
    with pytest.raises(ParameterError):
        select_slot_width([4.4e6, 2.2e6], scenario)


def test_rate_delta(scenario):
    plan = build_band_plan(scenario.tone_grid(), 2, PartitionPolicy.division())
    # Beyond about 600 m no partitioned tone carries bits
    assert rate_delta(plan, scenario, 700.0) < 1e-6
    assert rate_delta(plan, scenario, 150.0) > 0.05
    lone = Scenario(100.0, n_operators=1)
    plan1 = build_band_plan(lone.tone_grid(), 1, PartitionPolicy.alternate())
    with pytest.raises(ParameterError):
        rate_delta(plan1, lone, 100.0)


def test_upper_rates(scenario):
    plan = build_band_plan(scenario.tone_grid(), 2, PartitionPolicy.alternate())
    r = upper_rates(plan, scenario)
    assert len(r) == 2
    # All partitioned tones are saturated at 100 m
    assert r[0] == pytest.approx(2034 * 15 * 4000.0)
    assert r[1] == pytest.approx(2033 * 15 * 4000.0)


def test_distance_grid():
    assert distance_grid(50.0, 600.0, 25.0)[-1] == 600.0
    assert len(distance_grid(50.0, 600.0, 25.0)) == 23
    assert distance_grid(100.0, 100.0, 25.0) == [100.0]
    assert distance_grid(0.0, 0.3, 0.1) == pytest.approx([0.0, 0.1, 0.2, 0.3])
    with pytest.raises(ParameterError):
        distance_grid(600.0, 50.0, 25.0)
    with pytest.raises(ParameterError):
        distance_grid(50.0, 600.0, 0.0)
    with pytest.raises(ParameterError):
        distance_grid(-50.0, 600.0, 25.0)


@given(rates, st.floats(min_value=1e-3, max_value=1e3))
def test_spread_scale_invariant(values, scale):
    a = relative_spread(values)
    b = relative_spread([v * scale for v in values])
    assert 0.0 <= a <= 1.0
    assert b == pytest.approx(a, abs=1e-9)


@given(rates, st.randoms())
def test_spread_order_invariant(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert relative_spread(shuffled) == relative_spread(values)


def test_spread_edges():
    assert relative_spread([0.0, 0.0]) == 0.0
    assert relative_spread([5.0, 5.0, 5.0]) == 0.0
    assert relative_spread([10.0, 0.0]) == 1.0


def test_fairness_table(scenario):
    a = fairness_sweep(PartitionPolicy.block(2.2e6, swap=True), scenario, 100.0, 200.0, 50.0)
    b = fairness_sweep(PartitionPolicy.alternate(), scenario, 100.0, 200.0, 50.0)
    table = fairness_table([a, b])
    assert table.columns == FAIRNESS_COLUMNS
    assert len(table) == 6
    assert table.rows[0][2:] == (2.2e6, "block", True)
    assert table.rows[3][2:] == (None, "alternate", False)
    lines = table.to_csv().splitlines()
    assert lines[0] == "d_m,delta_rb,slot_width_hz,policy,swap"
    assert lines[1].startswith("100,") and lines[1].endswith(",2200000,block,true")


if __name__ == "__main__":
    # When invoked as a main module, do a verbose test
    s = Scenario(100.0)
    test_alternate_is_fair(s)
    test_swap_improves_fairness(s)
    test_select_slot_width(s)
