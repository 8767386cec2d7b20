"""

    sbv-sim: Sub-band vectoring simulator for multi-operator VDSL2

    Scenario module

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.


    This module holds the Scenario class, the full parameterization of
    one simulated situation: how many operators share the cabinet, how
    many disturbing lines are active, the loop length, the spectrum
    and power limits, and the cable and FEXT models. It also computes
    the flat power allocation of a band plan.

    Power budgets:

    * p_upper_dbm is the power transmitted above 17.6 MHz. Each operator
      transmits this full budget on its own partition.
    * The lower band gets the remainder, p_total_dbm - p_upper_dbm, in
      linear terms.
    * Under shared (NV) use, a budget is spread evenly over all tones of
      its region; under SBV, over the operator's own tones. Power of
      tones that end up carrying no bits is not reassigned.

"""

from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from enum import IntEnum

from typing_extensions import Final

from .basics import ConfigError, ParameterError, ScenarioError, coerce_float_fields
from .channel import (
    CableModel,
    FextModel,
    default_channel_params,
    load_channel_params,
    models_from_settings,
)
from .settings import Settings
from .toneplan import (
    DELTA_F,
    SUBCHANNEL_HZ,
    SYMBOL_RATE,
    BandPlan,
    ToneGrid,
    build_tone_grid,
)


LOGGER = logging.getLogger(__name__)


class LoadLevel(IntEnum):

    """Named numbers of active disturbing lines"""

    VERY_LOW = 2
    LOW = 6
    MEDIUM = 12
    HIGH = 24


def parse_load(value: Union[str, int]) -> int:
    """Return the number of disturbers for a load name or a count"""
    if isinstance(value, int):
        return value
    s = value.strip()
    try:
        return LoadLevel[s.upper()].value
    except KeyError:
        pass
    try:
        return int(s)
    except ValueError:
        raise ConfigError(
            "Invalid load '{0}', expected a count or one of {1}".format(
                value, ", ".join(level.name.lower() for level in LoadLevel)
            ),
            key="n_disturbers",
        )


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class Scenario:

    """Parameters of one simulated situation. Instances are immutable
    and validated on construction; use replace() to vary them."""

    cab_nt_distance: float
    n_operators: int = 2
    n_disturbers: int = LoadLevel.MEDIUM.value
    f_max: float = 35.2e6
    r_v_db: float = 10.0
    p_upper_dbm: float = 13.4
    p_total_dbm: float = 17.0
    gamma_db: float = 12.0
    n0_dbm_hz: float = -140.0
    bit_min: float = 2.0
    bit_max: float = 15.0
    lower_band_vectored: bool = False
    integer_bits: bool = False
    delta_f: float = DELTA_F
    symbol_rate: float = SYMBOL_RATE
    # Per-band override of r_v_db, as (band number, dB) pairs
    r_v_band_db: Tuple[Tuple[int, float], ...] = ()
    # Per-disturber loop lengths; empty means all equal to cab_nt_distance
    disturber_distances: Tuple[float, ...] = ()
    cable: CableModel = field(default_factory=CableModel)
    fext: FextModel = field(default_factory=FextModel)
    extrapolate: bool = False

    def __post_init__(self) -> None:
        coerce_float_fields(self)

        def fail(key: str, msg: str) -> None:
            raise ScenarioError("'{0}' {1}".format(key, msg), key=key)

        if not self.cab_nt_distance >= 0.0:
            fail("cab_nt_distance", "must be non-negative, got {0}".format(self.cab_nt_distance))
        if self.n_operators < 1:
            fail("n_operators", "must be at least 1")
        if self.n_disturbers < 1:
            fail("n_disturbers", "must be at least 1")
        if not self.f_max >= SUBCHANNEL_HZ:
            fail("f_max", "must be at least {0:.0f} Hz".format(SUBCHANNEL_HZ))
        if self.r_v_db < 0.0:
            fail("r_v_db", "must be non-negative")
        if not self.p_total_dbm > self.p_upper_dbm:
            fail("p_total_dbm", "must exceed p_upper_dbm")
        if self.gamma_db < 0.0:
            fail("gamma_db", "must be non-negative")
        if not 0.0 <= self.bit_min <= self.bit_max:
            fail("bit_min", "must lie between 0 and bit_max")
        if not self.delta_f > 0.0:
            fail("delta_f", "must be positive")
        if not self.symbol_rate > 0.0:
            fail("symbol_rate", "must be positive")
        for band, db in self.r_v_band_db:
            if db < 0.0:
                fail("r_v_band_db", "of band {0} must be non-negative".format(band))
        if self.disturber_distances:
            if len(self.disturber_distances) != self.n_disturbers:
                fail(
                    "disturber_distances",
                    "must list {0} distances, one per disturber".format(self.n_disturbers),
                )
            if min(self.disturber_distances) < 0.0:
                fail("disturber_distances", "cannot be negative")
        if not self.extrapolate and self.f_max > self.cable.valid_f_max:
            fail("f_max", "is above the valid range of cable model {0}".format(self.cable.name))

    def replace(self, **changes: Any) -> "Scenario":
        """Return a validated copy with some fields changed"""
        return dataclasses.replace(self, **changes)

    @property
    def gamma_linear(self) -> float:
        return db_to_linear(self.gamma_db)

    @property
    def r_v_linear(self) -> float:
        return db_to_linear(self.r_v_db)

    def r_v_db_for_band(self, band_number: int) -> float:
        for band, db in self.r_v_band_db:
            if band == band_number:
                return db
        return self.r_v_db

    @property
    def noise_psd_w_hz(self) -> float:
        return dbm_to_watt(self.n0_dbm_hz)

    @property
    def p_upper_w(self) -> float:
        return dbm_to_watt(self.p_upper_dbm)

    @property
    def p_total_w(self) -> float:
        return dbm_to_watt(self.p_total_dbm)

    @property
    def p_lower_w(self) -> float:
        return self.p_total_w - self.p_upper_w

    @property
    def disturber_lengths(self) -> Tuple[float, ...]:
        """Loop lengths of the disturbers"""
        if self.disturber_distances:
            return self.disturber_distances
        return (self.cab_nt_distance,) * self.n_disturbers

    def disturber_operator(self, victim_operator: int, disturber: int) -> int:
        """Operator serving a disturber (numbered from 0). Disturbers
        are spread round-robin over the operators, starting with the
        one after the victim's."""
        return (victim_operator + disturber + 1) % self.n_operators

    def tone_grid(self) -> ToneGrid:
        return build_tone_grid(self.f_max, self.delta_f, self.symbol_rate)


@dataclass(frozen=True)
class RegionPower:

    """Flat per-tone powers within one region of the spectrum"""

    budget_w: float
    tone_count: int
    p_tone_nv: float
    # Per operator, indexed by operator id
    p_tone_sbv: Tuple[float, ...]
    operator_tone_counts: Tuple[int, ...]

    def operator_total_w(self, operator_id: int) -> float:
        return self.p_tone_sbv[operator_id] * self.operator_tone_counts[operator_id]


@dataclass(frozen=True)
class PowerAllocation:

    """Per-tone transmit powers of a plan, by region"""

    lower: RegionPower
    upper: RegionPower
    n_operators: int

    @property
    def p_tone_nv(self) -> float:
        """Shared-use power of an upper-band tone"""
        return self.upper.p_tone_nv

    def p_tone_sbv(self, operator_id: int) -> float:
        """Power of one of the operator's partitioned upper-band tones"""
        return self.upper.p_tone_sbv[operator_id]


def _region_power(
    name: str, budget_w: float, tone_count: int, owned: Sequence[int], partitioned: bool
) -> RegionPower:
    n_operators = len(owned)
    if tone_count == 0:
        return RegionPower(0.0, 0, 0.0, (0.0,) * n_operators, (0,) * n_operators)
    p_nv = budget_w / tone_count
    if not partitioned:
        return RegionPower(
            budget_w, tone_count, p_nv, (p_nv,) * n_operators, (tone_count,) * n_operators
        )
    p_sbv: List[float] = []
    for op, count in enumerate(owned):
        if count == 0:
            raise ScenarioError(
                "Operator {0} owns no tones in the {1} region".format(op, name),
                key="n_operators",
            )
        if count * n_operators == tone_count:
            p_sbv.append(n_operators * p_nv)
        else:
            p_sbv.append(budget_w / count)
    return RegionPower(budget_w, tone_count, p_nv, tuple(p_sbv), tuple(owned))


def allocate_power(scenario: Scenario, plan: BandPlan) -> PowerAllocation:
    """Spread the power budgets evenly over the tones of each region"""
    grid = scenario.tone_grid()
    if plan.grid.delta_f != grid.delta_f or plan.grid.max_tone_index != grid.max_tone_index:
        raise ScenarioError(
            "The band plan reaches {0:.0f} Hz but the scenario has f_max {1:.0f} Hz".format(
                plan.f_top, scenario.f_max
            ),
            key="f_max",
        )
    if plan.n_operators != scenario.n_operators:
        raise ScenarioError(
            "The band plan has {0} operators, the scenario {1}".format(
                plan.n_operators, scenario.n_operators
            ),
            key="n_operators",
        )
    lower, upper = plan.lower_mask, plan.upper_mask
    ops = range(plan.n_operators)
    lower_owned = [int((plan.owners[lower] == op).sum()) for op in ops]
    upper_owned = [int((plan.owners[upper] == op).sum()) for op in ops]
    alloc = PowerAllocation(
        lower=_region_power(
            "lower", scenario.p_lower_w, plan.lower_tone_count, lower_owned,
            plan.partition_lower_band,
        ),
        upper=_region_power(
            "upper", scenario.p_upper_w, plan.upper_tone_count, upper_owned, True
        ),
        n_operators=plan.n_operators,
    )
    LOGGER.debug(
        "Power per tone: lower NV %.3g W, upper NV %.3g W, upper SBV %s W",
        alloc.lower.p_tone_nv,
        alloc.upper.p_tone_nv,
        ["%.3g" % p for p in alloc.upper.p_tone_sbv],
    )
    return alloc


# Scenario fields that are read from the [scenario] section as numbers
_FLOAT_KEYS: Final = (
    "cab_nt_distance",
    "f_max",
    "r_v_db",
    "p_upper_dbm",
    "p_total_dbm",
    "gamma_db",
    "n0_dbm_hz",
    "bit_min",
    "bit_max",
    "delta_f",
    "symbol_rate",
)
_BOOL_KEYS: Final = ("lower_band_vectored", "integer_bits", "extrapolate")


def _parse_band_overrides(settings: Settings) -> Tuple[Tuple[int, float], ...]:
    items = settings.get_list("scenario", "r_v_band_db") or []
    result: List[Tuple[int, float]] = []
    for item in items:
        band, sep, db = item.partition(":")
        try:
            if not sep:
                raise ValueError
            result.append((int(band), float(db)))
        except ValueError:
            raise settings.error(
                "scenario",
                "r_v_band_db",
                "Expected band:dB pairs, got '{0}'".format(item),
            )
    return tuple(result)


def _relative_to(name: str, fname: Optional[str]) -> str:
    """Resolve a file name relative to the config file that names it"""
    if os.path.isabs(name) or not fname or fname.startswith("<"):
        return name
    return os.path.join(os.path.dirname(fname), name)


def scenario_from_settings(
    settings: Settings, *, require_distance: bool = True
) -> Scenario:
    """Build a validated Scenario from the [scenario], [cable] and
    [fext] sections of a configuration"""
    kwargs: Dict[str, Any] = {}
    for key in _FLOAT_KEYS:
        v = settings.get_float("scenario", key)
        if v is not None:
            kwargs[key] = v
    for key in _BOOL_KEYS:
        b = settings.get_bool("scenario", key)
        if b is not None:
            kwargs[key] = b
    n_operators = settings.get_int("scenario", "n_operators")
    if n_operators is not None:
        kwargs["n_operators"] = n_operators
    load = settings.get("scenario", "n_disturbers")
    if load is not None:
        try:
            kwargs["n_disturbers"] = parse_load(load.text)
        except ConfigError as e:
            e.set_pos(load.fname, load.line)
            raise
    distances = settings.get_floats("scenario", "disturber_distances")
    if distances is not None:
        kwargs["disturber_distances"] = tuple(distances)
    if settings.has("scenario", "r_v_band_db"):
        kwargs["r_v_band_db"] = _parse_band_overrides(settings)
    if "cab_nt_distance" not in kwargs:
        if require_distance:
            raise ScenarioError(
                "Missing required key 'cab_nt_distance' in [scenario]",
                key="cab_nt_distance",
            )
        kwargs["cab_nt_distance"] = 100.0

    base = default_channel_params()
    params_file = settings.get("cable", "params_file")
    if params_file is not None:
        try:
            base = load_channel_params(_relative_to(params_file.text, params_file.fname))
        except ConfigError as e:
            e.set_pos(params_file.fname, params_file.line)
            raise
    kwargs["cable"], kwargs["fext"] = models_from_settings(settings, "cable", "fext", base)

    try:
        return Scenario(**kwargs)
    except ScenarioError as e:
        if e.key:
            cv = settings.get("scenario", e.key)
            if cv is not None:
                e.set_pos(cv.fname, cv.line)
        raise


def load_scenario(config_text: str) -> Scenario:
    """Parse configuration text into a validated Scenario. Omitted
    fields get their defaults; cab_nt_distance is required."""
    return scenario_from_settings(Settings.read(text=config_text))


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """The scenario as plain JSON-compatible values"""
    d = dataclasses.asdict(scenario)
    d["r_v_band_db"] = [list(pair) for pair in scenario.r_v_band_db]
    d["disturber_distances"] = list(scenario.disturber_distances)
    return d


def scenario_from_dict(d: Mapping[str, Any]) -> Scenario:
    kwargs = dict(d)
    try:
        kwargs["cable"] = CableModel(**kwargs.get("cable", {}))
        kwargs["fext"] = FextModel(**kwargs.get("fext", {}))
    except (TypeError, ParameterError) as e:
        raise ConfigError("Invalid channel model: {0}".format(e))
    kwargs["r_v_band_db"] = tuple(
        (int(band), float(db)) for band, db in kwargs.get("r_v_band_db", ())
    )
    kwargs["disturber_distances"] = tuple(
        float(x) for x in kwargs.get("disturber_distances", ())
    )
    try:
        return Scenario(**kwargs)
    except TypeError as e:
        raise ConfigError("Invalid scenario: {0}".format(e))


def scenario_dumps(scenario: Scenario, **kwargs: Any) -> str:
    """Canonical JSON form of a scenario: sorted keys, fixed separators"""
    kwargs.setdefault("separators", (",", ":"))
    return json.dumps(scenario_to_dict(scenario), sort_keys=True, **kwargs)


def scenario_loads(text: str) -> Scenario:
    return scenario_from_dict(json.loads(text))


def scenario_hash(scenario: Scenario) -> str:
    """SHA-256 of the canonical form, equal for equivalent scenarios"""
    return hashlib.sha256(scenario_dumps(scenario).encode("utf-8")).hexdigest()
