# type: ignore
"""

    test_channel.py

    Tests for the cable attenuation and FEXT coupling models

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.

"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbv_sim import ConfigError, ModelRangeError, ParameterError
from sbv_sim.channel import (
    CableModel,
    FextModel,
    FextRealization,
    default_channel_params,
    derive_trial_seed,
    direct_gain,
    fext_gain_99,
    fext_gain_sampled,
    load_channel_params,
    sample_fext,
)


CABLE = CableModel()
FEXT = FextModel()

frequencies = st.floats(min_value=0.0, max_value=300e6)
distances = st.floats(min_value=0.0, max_value=3000.0)


def test_attenuation():
    # 4 * (2 * sqrt(17) + 0.08 * 17) dB
    assert CABLE.attenuation_db(17e6, 400.0) == pytest.approx(38.42, abs=0.01)
    assert CABLE.attenuation_db(17e6, 0.0) == 0.0
    assert CABLE.attenuation_db(0.0, 400.0) == 0.0
    assert CABLE.attenuation_coeffs == (0.0, 2.0, 0.08)
    f = np.array([1e6, 17e6, 100e6])
    a = CABLE.attenuation_db(f, 100.0)
    assert isinstance(a, np.ndarray) and a.shape == (3,)
    assert a[1] == pytest.approx(CABLE.attenuation_db(17e6, 100.0))


@given(frequencies, frequencies, distances, distances)
@settings(max_examples=50)
def test_attenuation_monotone(f1, f2, d1, d2):
    f1, f2 = sorted((f1, f2))
    d1, d2 = sorted((d1, d2))
    assert CABLE.attenuation_db(f1, d1) >= 0.0
    assert CABLE.attenuation_db(f1, d1) <= CABLE.attenuation_db(f2, d1)
    assert CABLE.attenuation_db(f1, d1) <= CABLE.attenuation_db(f1, d2)


def test_direct_gain():
    assert direct_gain(CABLE, 17e6, 400.0) == pytest.approx(10 ** (-38.4248 / 10), rel=1e-4)
    assert direct_gain(CABLE, 30e6, 0.0) == 1.0
    g = direct_gain(CABLE, np.linspace(1e6, 100e6, 5), 300.0)
    assert np.all(np.diff(g) < 0.0)
    with pytest.raises(ModelRangeError):
        direct_gain(CABLE, 301e6, 100.0)
    with pytest.raises(ModelRangeError):
        direct_gain(CABLE, np.array([1e6, 400e6]), 100.0)
    assert direct_gain(CABLE, 400e6, 100.0, extrapolate=True) > 0.0
    with pytest.raises(ParameterError):
        direct_gain(CABLE, 1e6, -1.0)


def test_fext_gain_99():
    d = 300.0
    g = fext_gain_99(FEXT, CABLE, 10e6, d, d)
    # -54 dB at 1 MHz over 100 m, rising with f^2 and coupling length
    expected = 10 ** (-5.4) * 100.0 * 3.0 * direct_gain(CABLE, 10e6, d)
    assert g == pytest.approx(expected, rel=1e-12)
    assert fext_gain_99(FEXT, CABLE, 10e6, d, 0.0) == 0.0
    assert fext_gain_99(FEXT, CABLE, 10e6, d, 150.0) == pytest.approx(g / 2.0, rel=1e-12)
    with pytest.raises(ParameterError):
        fext_gain_99(FEXT, CABLE, 10e6, d, d + 1.0)
    with pytest.raises(ParameterError):
        fext_gain_99(FEXT, CABLE, 10e6, d, -1.0)
    arr = fext_gain_99(FEXT, CABLE, np.array([1e6, 2e6]), d, d)
    assert arr.shape == (2,)


def test_fext_gain_sampled():
    g99 = fext_gain_99(FEXT, CABLE, 20e6, 200.0, 200.0)
    assert fext_gain_sampled(FEXT, CABLE, 20e6, 200.0, 200.0, 10.0) == pytest.approx(
        g99 / 10.0, rel=1e-12
    )
    assert fext_gain_sampled(FEXT, CABLE, 20e6, 200.0, 200.0, 0.0) == pytest.approx(g99)


def test_fluctuation_statistics():
    r = sample_fext(FEXT, 100, 1000, seed=2026)
    assert r.x_db.shape == (100, 1000)
    assert r.n_victims == 100 and r.n_disturbers == 1000
    assert float(np.mean(r.x_db)) == pytest.approx(11.65, abs=0.05)
    assert float(np.std(r.x_db)) == pytest.approx(5.0, abs=0.05)


def test_realization_reproducible():
    a = sample_fext(FEXT, 3, 24, seed=17)
    b = sample_fext(FEXT, 3, 24, seed=17)
    c = sample_fext(FEXT, 3, 24, seed=18)
    assert np.array_equal(a.x_db, b.x_db)
    assert not np.array_equal(a.x_db, c.x_db)
    # Fewer disturbers see a prefix of the same weights
    assert np.array_equal(a.weights(1, 6), a.weights(1)[:6])
    with pytest.raises(ParameterError):
        a.weights(3)
    with pytest.raises(ParameterError):
        a.weights(0, 25)
    with pytest.raises(ValueError):
        a.x_db[0, 0] = 0.0


def test_zero_std():
    r = sample_fext(FextModel(fluct_std_db=0.0), 2, 4, seed=5)
    assert np.all(r.x_db == 11.65)


def test_weights():
    r = FextRealization(np.array([[0.0, 10.0, 20.0]]), seed=0)
    assert r.weights(0).tolist() == pytest.approx([1.0, 0.1, 0.01])


def test_trial_seeds():
    seeds = [derive_trial_seed(42, t) for t in range(100)]
    assert len(set(seeds)) == 100
    assert seeds == [derive_trial_seed(42, t) for t in range(100)]
    assert derive_trial_seed(43, 0) != seeds[0]
    assert all(0 <= s < 2 ** 64 for s in seeds)
    with pytest.raises(ParameterError):
        derive_trial_seed(-1, 0)


def test_model_validation():
    with pytest.raises(ParameterError):
        CableModel(a1=-1.0)
    with pytest.raises(ParameterError):
        FextModel(fluct_std_db=-1.0)
    with pytest.raises(ParameterError):
        FextModel(f0=0.0)
    # Integer arguments give the same model as floats
    assert CableModel(a0=0, a1=2, a2=0.08) == CABLE
    assert isinstance(CableModel(valid_f_max=300000000).valid_f_max, float)


def test_default_params():
    cable, fext = default_channel_params()
    assert cable == CABLE
    assert fext == FEXT


def test_load_params():
    cable, fext = load_channel_params(
        text="# Thinner pair\nname = thin\na1 = 2.5\nfluct_std_db = 4\n"
    )
    assert cable.name == "thin"
    assert cable.a1 == 2.5 and cable.a2 == 0.08
    assert fext.fluct_std_db == 4.0 and fext.k99_db == -54.0
    with pytest.raises(ConfigError) as e:
        load_channel_params(text="a1 = 2.5\nb7 = 1\n")
    assert e.value.line == 2
    assert "b7" in str(e.value)
    with pytest.raises(ConfigError) as e:
        load_channel_params(text="a1 = -2.5\n")
    assert "a1" in str(e.value)


def test_params_include(tmp_path):
    base = tmp_path / "base.conf"
    base.write_text("a1 = 2.2\nk99_db = -50\n", encoding="utf-8")
    top = tmp_path / "top.conf"
    top.write_text("$include base.conf\na2 = 0.1\n", encoding="utf-8")
    cable, fext = load_channel_params(str(top))
    assert (cable.a1, cable.a2, fext.k99_db) == (2.2, 0.1, -50.0)
    # Defining a key twice is an error, also across files
    top.write_text("$include base.conf\na1 = 2.0\n", encoding="utf-8")
    with pytest.raises(ConfigError) as e:
        load_channel_params(str(top))
    assert "Multiple definition" in str(e.value)
    with pytest.raises(ConfigError):
        load_channel_params(str(tmp_path / "missing.conf"))


if __name__ == "__main__":
    # When invoked as a main module, do a verbose test
    test_attenuation()
    test_direct_gain()
    test_fext_gain_99()
    test_fluctuation_statistics()
    test_load_params()
