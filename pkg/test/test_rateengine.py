# type: ignore
"""

    test_rateengine.py

    Tests for bit loading, NV and SBV rates and the Monte Carlo
    percentile estimate

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.

"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbv_sim import ParameterError
from sbv_sim.channel import FextModel, FextRealization, direct_gain, sample_fext
from sbv_sim.rateengine import (
    DIAGNOSTIC_COLUMNS,
    combined_operator_rate,
    fext_power,
    monte_carlo_percentile,
    nv_rate,
    percentile_lower,
    sbv_rate,
    tone_bits,
    tone_diagnostics,
)
from sbv_sim.scenario import Scenario, allocate_power
from sbv_sim.toneplan import PartitionPolicy, build_band_plan


UPPER = (4, 5, 6, 7)


def make_plan(scenario, policy=None, **kwargs):
    return build_band_plan(
        scenario.tone_grid(),
        scenario.n_operators,
        policy or PartitionPolicy.alternate(),
        **kwargs,
    )


@pytest.fixture(scope="module")
def scenario300():
    return Scenario(300.0)


@pytest.fixture(scope="module")
def plan300(scenario300):
    return make_plan(scenario300)


def test_tone_bits():
    unit = dict(noise_psd_w_hz=1.0, delta_f=1.0, fext_w=0.0, r_v_linear=1.0, gamma_linear=1.0)
    # log2(1 + 3) is exactly the minimum loading
    assert tone_bits(1.0, 3.0, **unit) == 2.0
    assert tone_bits(1.0, 2.9, **unit) == 0.0
    assert tone_bits(1.0, 1.0, **unit) == 0.0
    assert tone_bits(1.0, 1e9, **unit) == 15.0
    assert tone_bits(1.0, 4.0, **unit) == pytest.approx(np.log2(5.0))
    assert tone_bits(1.0, 4.0, integer_bits=True, **unit) == 2.0
    assert tone_bits(1.0, 4.0, bit_min=0.0, **unit) == pytest.approx(np.log2(5.0))
    bits = tone_bits(np.array([1.0, 0.5]), 7.0, **unit)
    assert isinstance(bits, np.ndarray)
    assert bits.tolist() == pytest.approx([3.0, np.log2(4.5)])


def test_tone_bits_noise_terms():
    # FEXT and enhanced noise add up in the denominator
    a = tone_bits(1.0, 15.0, 1.0, 1.0, 2.0, 3.0, 1.0)
    assert a == pytest.approx(2.0)
    b = tone_bits(1.0, 60.0, 1.0, 1.0, 0.0, 1.0, 4.0)
    assert b == pytest.approx(np.log2(16.0))


def test_tone_bits_errors():
    with pytest.raises(ParameterError):
        tone_bits(1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.5)
    with pytest.raises(ParameterError):
        tone_bits(1.0, 1.0, 1.0, 1.0, 0.0, 0.5, 1.0)
    with pytest.raises(ParameterError):
        tone_bits(1.0, 1.0, 1.0, 1.0, 0.0, np.array([1.0, 0.9]), 1.0)


def test_fext_power():
    s = Scenario(300.0, n_disturbers=24)
    r = FextRealization(np.full((1, 24), 11.65), seed=0)
    kw = dict(victim_distance=300.0)
    assert fext_power(2000, 0, [], r, s.cable, s.fext, 1e-5, **kw) == 0.0
    one = fext_power(2000, 0, range(1), r, s.cable, s.fext, 1e-5, **kw)
    assert one > 0.0
    assert fext_power(2000, 0, range(24), r, s.cable, s.fext, 1e-5, **kw) == pytest.approx(
        24 * one, rel=1e-12
    )
    # A disturber on a shorter loop couples over a shorter length
    short = fext_power(
        2000, 0, [0], r, s.cable, s.fext, {0: 1e-5},
        disturber_distances={0: 150.0}, **kw
    )
    assert short == pytest.approx(one / 2.0, rel=1e-12)


@given(
    d=st.floats(min_value=50.0, max_value=800.0),
    seed=st.integers(min_value=0, max_value=2 ** 32 - 1),
    position=st.integers(min_value=0, max_value=6519),
)
@settings(max_examples=20, deadline=None)
def test_nv_matches_scalar_loading(d, seed, position):
    s = Scenario(d)
    plan = make_plan(s)
    r = sample_fext(s.fext, 2, s.n_disturbers, seed)
    result = nv_rate(0, plan, s, r, per_tone=True)
    alloc = allocate_power(s, plan)
    k = int(plan.tone_indexes[position])
    f = k * s.delta_f
    p = alloc.lower.p_tone_nv if plan.lower_mask[position] else alloc.upper.p_tone_nv
    fext_w = fext_power(
        k, 0, range(s.n_disturbers), r, s.cable, s.fext, p, victim_distance=d
    )
    expected = tone_bits(
        direct_gain(s.cable, f, d), p, s.noise_psd_w_hz, s.delta_f, fext_w,
        1.0, s.gamma_linear,
    )
    assert result.per_tone_bits[position] == pytest.approx(expected, rel=1e-9, abs=1e-9)


@given(
    d=st.floats(min_value=50.0, max_value=800.0),
    r_v_db=st.floats(min_value=0.0, max_value=20.0),
    operator=st.integers(min_value=0, max_value=2),
)
@settings(max_examples=20, deadline=None)
def test_sbv_matches_scalar_loading(d, r_v_db, operator):
    s = Scenario(d, n_operators=3, r_v_db=r_v_db)
    plan = make_plan(s, PartitionPolicy.block(2.2e6, swap=True))
    result = sbv_rate(operator, plan, s, per_tone=True)
    alloc = allocate_power(s, plan)
    owned = plan.operator_mask(operator)
    expected = tone_bits(
        direct_gain(s.cable, plan.frequencies, d),
        alloc.p_tone_sbv(operator),
        s.noise_psd_w_hz,
        s.delta_f,
        0.0,
        s.r_v_linear,
        s.gamma_linear,
    )
    assert np.allclose(result.per_tone_bits[owned], expected[owned], rtol=1e-12, atol=0.0)
    assert not np.any(result.per_tone_bits[~owned])


def brute_force_rate(s, plan, r, operator, sbv):
    """Aggregate rate by a plain per-tone loop over the plan, with every
    quantity written out from the model definitions"""
    c, fx = s.cable, s.fext
    watt = lambda dbm: 10.0 ** ((dbm - 30.0) / 10.0)
    p_upper = watt(s.p_upper_dbm)
    p_lower = watt(s.p_total_dbm) - p_upper
    bands = plan.band_numbers.tolist()
    owners = plan.owners.tolist()
    n_lower = sum(1 for b in bands if b <= 3)
    n_upper = len(bands) - n_lower
    owned = sum(1 for o, b in zip(owners, bands) if b > 3 and o == operator)
    noise = watt(s.n0_dbm_hz) * s.delta_f
    gamma = 10.0 ** (s.gamma_db / 10.0)
    d = s.cab_nt_distance
    total = 0.0
    for k, b, o in zip(plan.tone_indexes.tolist(), bands, owners):
        f = k * s.delta_f
        mhz = f / 1e6
        loss_db = d / 100.0 * (c.a0 + c.a1 * math.sqrt(mhz) + c.a2 * mhz)
        g = 10.0 ** (-loss_db / 10.0)
        if b <= 3 or not sbv:
            p = p_lower / n_lower if b <= 3 else p_upper / n_upper
            fext_w = 0.0
            for m in range(s.n_disturbers):
                fext_w += (
                    10.0 ** (fx.k99_db / 10.0)
                    * (f / fx.f0) ** 2
                    * (d / fx.l0)
                    * g
                    * 10.0 ** (-r.x_db[operator][m] / 10.0)
                    * p
                )
            snr = g * p / ((noise + fext_w) * gamma)
        elif o == operator:
            p = p_upper / owned
            snr = g * p / (noise * 10.0 ** (s.r_v_db / 10.0) * gamma)
        else:
            continue
        bits = math.log2(1.0 + snr)
        total += 0.0 if bits < 2.0 else min(bits, 15.0)
    return total * s.symbol_rate


@given(
    d=st.floats(min_value=50.0, max_value=600.0),
    n_operators=st.integers(min_value=1, max_value=3),
    n_disturbers=st.integers(min_value=1, max_value=24),
    r_v_db=st.floats(min_value=0.0, max_value=20.0),
    seed=st.integers(min_value=0, max_value=2 ** 32 - 1),
    data=st.data(),
)
@settings(max_examples=50, deadline=None)
def test_rates_match_brute_force(d, n_operators, n_disturbers, r_v_db, seed, data):
    # A coarse grid keeps the plan small: 9 shared tones, 15 partitioned
    s = Scenario(
        d,
        n_operators=n_operators,
        n_disturbers=n_disturbers,
        r_v_db=r_v_db,
        delta_f=1.2e6,
    )
    plan = make_plan(s)
    assert len(plan.tone_indexes) <= 32
    operator = data.draw(st.integers(min_value=0, max_value=n_operators - 1))
    r = sample_fext(s.fext, n_operators, n_disturbers, seed)
    nv = nv_rate(operator, plan, s, r)
    combined = combined_operator_rate(operator, plan, s, r)
    assert nv.aggregate_bps == pytest.approx(
        brute_force_rate(s, plan, r, operator, False), rel=1e-12, abs=1e-6
    )
    assert combined.aggregate_bps == pytest.approx(
        brute_force_rate(s, plan, r, operator, True), rel=1e-12, abs=1e-6
    )


def test_nv_without_fext_equals_single_operator_sbv():
    s = Scenario(300.0, n_operators=1, r_v_db=0.0, fext=FextModel(fluct_mean_db=1e6))
    plan = make_plan(s)
    r = sample_fext(s.fext, 1, s.n_disturbers, 3)
    nv = nv_rate(0, plan, s, r)
    sbv = sbv_rate(0, plan, s)
    for b in UPPER:
        assert nv.per_band_bps[b] == pytest.approx(sbv.per_band_bps[b], rel=1e-12)
    assert sbv.band_sum((1, 2, 3)) == 0.0


def test_sbv_ignores_disturbers(plan300, scenario300):
    rates = [
        sbv_rate(0, plan300, scenario300.replace(n_disturbers=n)).aggregate_bps
        for n in (2, 6, 12, 24)
    ]
    assert rates[0] > 0.0
    assert rates == [rates[0]] * 4


def test_nv_decreases_with_load(scenario300):
    r = sample_fext(scenario300.fext, 2, 24, 1)
    rates = []
    for n in (2, 6, 12, 24):
        s = scenario300.replace(n_disturbers=n)
        rates.append(nv_rate(0, make_plan(s), s, r).aggregate_bps)
    assert all(a > b for a, b in zip(rates, rates[1:]))


def test_combined_is_nv_below_partitioned_band():
    s = Scenario(300.0, f_max=17.6e6)
    plan = make_plan(s)
    assert plan.band_numbers_in_plan == [1, 2, 3]
    r = sample_fext(s.fext, 2, s.n_disturbers, 11)
    assert combined_operator_rate(0, plan, s, r).aggregate_bps == nv_rate(0, plan, s, r).aggregate_bps
    assert sbv_rate(0, plan, s).aggregate_bps == 0.0


def test_combined_composition(plan300, scenario300):
    r1 = sample_fext(scenario300.fext, 2, 12, 1)
    r2 = sample_fext(scenario300.fext, 2, 12, 2)
    for op in (0, 1):
        c1 = combined_operator_rate(op, plan300, scenario300, r1)
        c2 = combined_operator_rate(op, plan300, scenario300, r2)
        nv = nv_rate(op, plan300, scenario300, r1)
        sbv = sbv_rate(op, plan300, scenario300)
        for b in (1, 2, 3):
            assert c1.per_band_bps[b] == pytest.approx(nv.per_band_bps[b], rel=1e-12)
        for b in UPPER:
            assert c1.per_band_bps[b] == pytest.approx(sbv.per_band_bps[b], rel=1e-12)
            # The partitioned tones do not see the FEXT draw
            assert c1.per_band_bps[b] == c2.per_band_bps[b]
        assert c1.aggregate_bps == pytest.approx(sum(c1.per_band_bps.values()))


def test_rate_checks(plan300, scenario300):
    r = sample_fext(scenario300.fext, 2, 12, 1)
    with pytest.raises(ParameterError):
        sbv_rate(2, plan300, scenario300)
    with pytest.raises(ParameterError):
        nv_rate(0, plan300, scenario300, sample_fext(scenario300.fext, 2, 6, 1))
    with pytest.raises(ParameterError):
        combined_operator_rate(1, plan300, scenario300, sample_fext(scenario300.fext, 1, 12, 1))
    assert nv_rate(1, plan300, scenario300, r).operator == 1


def test_noise_enhancement(plan300, scenario300):
    low = sbv_rate(0, plan300, scenario300.replace(r_v_db=6.0)).aggregate_bps
    high = sbv_rate(0, plan300, scenario300.replace(r_v_db=20.0)).aggregate_bps
    assert low > high > 0.0
    # A per-band override only changes that band
    s = scenario300.replace(r_v_band_db=((5, 20.0),))
    base = sbv_rate(0, plan300, scenario300)
    over = sbv_rate(0, plan300, s)
    assert over.per_band_bps[5] < base.per_band_bps[5]
    assert over.per_band_bps[4] == base.per_band_bps[4]


def test_long_loop():
    s = Scenario(2000.0)
    assert sbv_rate(0, make_plan(s), s).aggregate_bps == 0.0


def test_lower_band_vectored():
    s = Scenario(300.0, n_operators=1)
    r = sample_fext(s.fext, 1, s.n_disturbers, 4)
    plain = combined_operator_rate(0, make_plan(s), s, r)
    vectored = combined_operator_rate(0, make_plan(s, lower_band_vectored=True), s, r)
    # All disturbers belong to the single operator and get cancelled
    assert vectored.band_sum((1, 2, 3)) > plain.band_sum((1, 2, 3))
    assert vectored.band_sum(UPPER) == plain.band_sum(UPPER)


def test_headline_rates():
    for f_max, lo, hi in ((35.2e6, 150e6, 270e6), (105.6e6, 430e6, 810e6)):
        s = Scenario(100.0, f_max=f_max)
        result = monte_carlo_percentile(0, make_plan(s), s, trials=100, master_seed=1)
        assert lo < result.p10_bps < hi
        assert result.p10_bps <= result.median


def test_monte_carlo_reproducible(plan300, scenario300):
    a = monte_carlo_percentile(0, plan300, scenario300, trials=20, master_seed=7)
    b = monte_carlo_percentile(0, plan300, scenario300, trials=20, master_seed=7)
    c = monte_carlo_percentile(0, plan300, scenario300, trials=20, master_seed=8)
    assert a.samples == b.samples and a.p10_bps == b.p10_bps
    assert a.samples != c.samples
    assert a.p10_bps in a.samples
    assert a.trial_count == 20 and len(a.samples) == 20
    assert sorted(a.per_band_p10_bps) == [1, 2, 3, 4, 5, 6, 7]


def test_monte_carlo_workers(plan300, scenario300):
    serial = monte_carlo_percentile(0, plan300, scenario300, trials=20, master_seed=3)
    parallel = monte_carlo_percentile(
        0, plan300, scenario300, trials=20, master_seed=3, workers=2
    )
    assert serial.samples == parallel.samples
    assert serial.per_band_p10_bps == parallel.per_band_p10_bps


def test_monte_carlo_kinds(plan300, scenario300):
    nv = monte_carlo_percentile(0, plan300, scenario300, trials=20, kind="nv")
    combined = monte_carlo_percentile(0, plan300, scenario300, trials=20)
    assert nv.kind == "nv" and combined.kind == "combined"
    # Same draws, so the shared bands agree trial by trial
    for b in (1, 2, 3):
        assert nv.per_band_p10_bps[b] == combined.per_band_p10_bps[b]
    with pytest.raises(ParameterError):
        monte_carlo_percentile(0, plan300, scenario300, trials=20, kind="sbv")


def test_monte_carlo_without_fluctuation():
    s = Scenario(300.0, fext=FextModel(fluct_std_db=0.0))
    result = monte_carlo_percentile(0, make_plan(s), s, trials=10)
    assert len(set(result.samples)) == 1


def test_monte_carlo_arguments(plan300, scenario300):
    with pytest.raises(ParameterError):
        monte_carlo_percentile(0, plan300, scenario300, trials=9)
    with pytest.raises(ParameterError):
        monte_carlo_percentile(0, plan300, scenario300, trials=10, workers=0)
    with pytest.raises(ParameterError):
        monte_carlo_percentile(5, plan300, scenario300, trials=10)


def test_percentile_lower():
    assert percentile_lower([10.0 * i for i in range(1, 11)]) == 10.0
    assert percentile_lower([3.0, 1.0, 2.0], 50.0) == 2.0
    with pytest.raises(ParameterError):
        percentile_lower([])


def test_tone_diagnostics(plan300, scenario300):
    r = sample_fext(scenario300.fext, 2, 12, 9)
    table = tone_diagnostics(0, plan300, scenario300, r)
    assert table.columns == DIAGNOSTIC_COLUMNS
    owned = int(np.count_nonzero(plan300.operator_mask(0)))
    assert len(table) == 2453 + owned
    combined = combined_operator_rate(0, plan300, scenario300, r)
    total = sum(table.column("bits")) * scenario300.symbol_rate
    assert total == pytest.approx(combined.aggregate_bps, rel=1e-6)
    for row in table.where(regime="partitioned_vectored")[:10]:
        assert row[3] == 0 and row[6] == 0.0
    assert all(row[6] > 0.0 for row in table.where(regime="shared")[:10])


if __name__ == "__main__":
    # When invoked as a main module, do a verbose test
    test_tone_bits()
    test_fext_power()
    test_long_loop()
    test_headline_rates()
