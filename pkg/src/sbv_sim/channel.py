"""

    sbv-sim: Sub-band vectoring simulator for multi-operator VDSL2

    Channel module

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.


    This module models the binder: the direct path gain of a pair of
    a given length, the 99% worst case FEXT coupling between two pairs,
    and the random per-pair fluctuation of that coupling.

    All gains are linear power gains (squared magnitudes). The phase of
    the FEXT transfer function is not modeled since only powers enter
    the rate computation. Frequency arguments may be scalars or numpy
    arrays; array inputs give array outputs.

    Random draws are always made from an explicit seed, so that Monte
    Carlo trials can run in any order or in parallel and still produce
    the same samples.

"""

from typing import Dict, Optional, Tuple, Union, overload

import dataclasses
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from typing_extensions import Final

from .basics import ConfigError, ModelRangeError, ParameterError, coerce_float_fields
from .settings import Settings


LOGGER = logging.getLogger(__name__)

# Name of the shipped parameter file, relative to the package
DEFAULT_PARAMS_FILE: Final = "config/Cable.conf"

FloatOrArray = Union[float, np.ndarray]


@dataclass(frozen=True)
class CableModel:

    """Cable attenuation as a power law in frequency, linear in length:
    A(f, d) = (d / 100 m) * (a0 + a1 * sqrt(f/MHz) + a2 * f/MHz) dB"""

    name: str = "LQ-Gamma-approx"
    a0: float = 0.0
    a1: float = 2.0
    a2: float = 0.08
    valid_f_max: float = 300e6

    def __post_init__(self) -> None:
        coerce_float_fields(self)
        for key in ("a0", "a1", "a2"):
            if getattr(self, key) < 0.0:
                raise ParameterError("{0} must be non-negative".format(key))
        if not self.valid_f_max > 0.0:
            raise ParameterError("valid_f_max_hz must be positive")

    @property
    def attenuation_coeffs(self) -> Tuple[float, float, float]:
        return (self.a0, self.a1, self.a2)

    @overload
    def attenuation_db(self, f: float, d: float) -> float:
        ...

    @overload
    def attenuation_db(self, f: np.ndarray, d: float) -> np.ndarray:
        ...

    def attenuation_db(self, f: FloatOrArray, d: float) -> FloatOrArray:
        f_mhz = np.asarray(f, dtype=np.float64) / 1e6
        a = (d / 100.0) * (self.a0 + self.a1 * np.sqrt(f_mhz) + self.a2 * f_mhz)
        return float(a) if a.ndim == 0 else a


@dataclass(frozen=True)
class FextModel:

    """Worst case (99%) FEXT coupling, and the Gaussian fluctuation
    in dB by which actual pair-to-pair coupling falls short of it"""

    k99_db: float = -54.0
    f0: float = 1e6
    l0: float = 100.0
    freq_exponent: float = 2.0
    length_exponent: float = 1.0
    fluct_mean_db: float = 11.65
    fluct_std_db: float = 5.0

    def __post_init__(self) -> None:
        coerce_float_fields(self)
        if not self.f0 > 0.0:
            raise ParameterError("f0_hz must be positive")
        if not self.l0 > 0.0:
            raise ParameterError("l0_m must be positive")
        if not self.freq_exponent > 0.0:
            raise ParameterError("freq_exponent must be positive")
        if not self.length_exponent > 0.0:
            raise ParameterError("length_exponent must be positive")
        if self.fluct_std_db < 0.0:
            raise ParameterError("fluct_std_db must be non-negative")


@dataclass(frozen=True, eq=False)
class FextRealization:

    """One draw of FEXT fluctuations, x_db[victim, disturber], in dB.
    Disturber columns are lines other than the victims, so no entry
    couples a line with itself."""

    x_db: np.ndarray
    seed: int

    @property
    def n_victims(self) -> int:
        return int(self.x_db.shape[0])

    @property
    def n_disturbers(self) -> int:
        return int(self.x_db.shape[1])

    def weights(self, victim: int, n_disturbers: Optional[int] = None) -> np.ndarray:
        """Linear coupling factors 10^(-x/10) of the victim's first
        n_disturbers disturbers"""
        if not 0 <= victim < self.n_victims:
            raise ParameterError(
                "Victim {0} not in realization with {1} victims".format(
                    victim, self.n_victims
                )
            )
        n = self.n_disturbers if n_disturbers is None else n_disturbers
        if n > self.n_disturbers:
            raise ParameterError(
                "Realization has {0} disturbers, {1} needed".format(
                    self.n_disturbers, n
                )
            )
        return np.power(10.0, -self.x_db[victim, :n] / 10.0)


def _check_frequency(cable: CableModel, f: np.ndarray, extrapolate: bool) -> None:
    if np.any(f < 0.0):
        raise ParameterError("Frequency cannot be negative")
    if not extrapolate and np.any(f > cable.valid_f_max):
        raise ModelRangeError(
            "Frequency {0:.0f} Hz is above the {1:.0f} Hz range of cable model {2}".format(
                float(np.max(f)), cable.valid_f_max, cable.name
            )
        )


def direct_gain(
    cable: CableModel, f: FloatOrArray, d: float, *, extrapolate: bool = False
) -> FloatOrArray:
    """Power gain of the direct path over a pair of length d (m)"""
    fa = np.asarray(f, dtype=np.float64)
    if d < 0.0:
        raise ParameterError("Distance cannot be negative")
    _check_frequency(cable, fa, extrapolate)
    g = np.power(10.0, -np.asarray(cable.attenuation_db(fa, d)) / 10.0)
    return float(g) if g.ndim == 0 else g


def fext_gain_99(
    fext: FextModel,
    cable: CableModel,
    f: FloatOrArray,
    d: float,
    l: float,
    *,
    extrapolate: bool = False,
) -> FloatOrArray:
    """Worst case FEXT power gain into a victim pair of length d from a
    disturber sharing the binder over a coupling length l"""
    if l < 0.0:
        raise ParameterError("Coupling length cannot be negative")
    if l > d:
        raise ParameterError(
            "Coupling length {0} m exceeds the victim loop length {1} m".format(l, d)
        )
    fa = np.asarray(f, dtype=np.float64)
    g = (
        10.0 ** (fext.k99_db / 10.0)
        * np.power(fa / fext.f0, fext.freq_exponent)
        * (l / fext.l0) ** fext.length_exponent
        * np.asarray(direct_gain(cable, fa, d, extrapolate=extrapolate))
    )
    return float(g) if g.ndim == 0 else g


def fext_gain_sampled(
    fext: FextModel,
    cable: CableModel,
    f: FloatOrArray,
    d: float,
    l: float,
    x_db_entry: float,
    *,
    extrapolate: bool = False,
) -> FloatOrArray:
    """FEXT power gain of one disturber, given its fluctuation draw"""
    g = np.asarray(fext_gain_99(fext, cable, f, d, l, extrapolate=extrapolate))
    g = g * 10.0 ** (-x_db_entry / 10.0)
    return float(g) if g.ndim == 0 else g


def sample_fext(
    fext: FextModel, n_victims: int, n_disturbers: int, seed: int
) -> FextRealization:
    """Draw independent Normal(fluct_mean_db, fluct_std_db^2) fluctuations,
    one per (victim, disturber) pair, constant over frequency"""
    if n_victims < 1 or n_disturbers < 1:
        raise ParameterError("A realization needs at least one victim and one disturber")
    rng = np.random.default_rng(seed)
    x = rng.normal(fext.fluct_mean_db, fext.fluct_std_db, size=(n_victims, n_disturbers))
    x.flags.writeable = False
    return FextRealization(x, seed)


def derive_trial_seed(master_seed: int, trial: int) -> int:
    """The seed of one Monte Carlo trial, a pure function of the master
    seed and the trial index"""
    if master_seed < 0 or trial < 0:
        raise ParameterError("Seeds and trial indexes must be non-negative")
    ss = np.random.SeedSequence([master_seed, trial])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# Parameter file keys and the model fields they set
CABLE_KEY_FIELDS: Final[Dict[str, str]] = {
    "name": "name",
    "a0": "a0",
    "a1": "a1",
    "a2": "a2",
    "valid_f_max_hz": "valid_f_max",
}
FEXT_KEY_FIELDS: Final[Dict[str, str]] = {
    "k99_db": "k99_db",
    "f0_hz": "f0",
    "l0_m": "l0",
    "freq_exponent": "freq_exponent",
    "length_exponent": "length_exponent",
    "fluct_mean_db": "fluct_mean_db",
    "fluct_std_db": "fluct_std_db",
}


def models_from_settings(
    settings: Settings,
    cable_section: str,
    fext_section: str,
    base: Optional[Tuple[CableModel, FextModel]] = None,
) -> Tuple[CableModel, FextModel]:
    """Apply the keys present in the given sections on top of
    the base models"""
    cable, fext = base or (CableModel(), FextModel())
    cable_changes: Dict[str, object] = {}
    for key, field in CABLE_KEY_FIELDS.items():
        if settings.has(cable_section, key):
            if key == "name":
                cable_changes[field] = settings.get_str(cable_section, key)
            else:
                cable_changes[field] = settings.get_float(cable_section, key)
    fext_changes: Dict[str, object] = {}
    for key, field in FEXT_KEY_FIELDS.items():
        if settings.has(fext_section, key):
            fext_changes[field] = settings.get_float(fext_section, key)
    try:
        cable = dataclasses.replace(cable, **cable_changes)
        fext = dataclasses.replace(fext, **fext_changes)
    except ParameterError as e:
        raise ConfigError(str(e))
    return cable, fext


def load_channel_params(
    fname: Optional[str] = None,
    *,
    text: Optional[str] = None,
    package_name: Optional[str] = None,
) -> Tuple[CableModel, FextModel]:
    """Read a cable/FEXT parameter file. Keys that are not present
    keep their default values."""
    settings = Settings.read_params(fname, text=text, package_name=package_name)
    return models_from_settings(settings, "params", "params")


@lru_cache(maxsize=None)
def default_channel_params() -> Tuple[CableModel, FextModel]:
    """The calibration shipped with the package"""
    cable, fext = load_channel_params(DEFAULT_PARAMS_FILE, package_name="sbv_sim")
    LOGGER.debug("Default channel parameters: %s, %s", cable, fext)
    return cable, fext
