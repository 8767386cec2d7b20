"""

    sbv-sim: Sub-band vectoring simulator for multi-operator VDSL2

    Experiment harness module

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.


    This module turns an experiment configuration into a table of
    results. An experiment is a sweep of one kind over a grid of
    scenario variations:

    band_comparison     NV and SBV rate percentiles per comparison band
    rate_vs_distance    aggregate percentiles against loop length
    rate_vs_fmax        aggregate percentiles against the top frequency
    degradation         SBV per-band rates against the r_v factor
    fairness_vs_b       operator rate imbalance against slot width
    operator_capacity   worst operator percentile against operator count

    Every grid point draws its FEXT fluctuations from the same master
    seed, so that the points of a sweep differ only in the parameter
    being varied. Output rows are sorted on their key columns, which
    makes a result file a function of the configuration alone.

"""

from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import dataclasses
import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, field
from enum import Enum

from typing_extensions import Final

from .basics import ConfigError, ParameterError, ResultTable
from .fairness import (
    DEFAULT_D_MAX,
    DEFAULT_D_MIN,
    DEFAULT_D_STEP,
    DEFAULT_DELTA0,
    fairness_sweep,
)
from .rateengine import DEFAULT_TRIALS, MIN_TRIALS, PercentileResult, monte_carlo_percentile
from .scenario import (
    LoadLevel,
    Scenario,
    allocate_power,
    parse_load,
    scenario_from_settings,
    scenario_to_dict,
)
from .settings import Settings
from .toneplan import BandPlan, PartitionPolicy, build_band_plan
from .version import __version__


LOGGER = logging.getLogger(__name__)

SEED_ENV_VAR: Final = "SBV_SIM_SEED"
DEFAULT_TARGET_BPS: Final = 100e6

# Band number used for the aggregate in per-band tables
AGGREGATE_BAND: Final = 0


class ExperimentKind(str, Enum):

    BAND_COMPARISON = "band_comparison"
    FAIRNESS_VS_B = "fairness_vs_b"
    RATE_VS_DISTANCE = "rate_vs_distance"
    RATE_VS_FMAX = "rate_vs_fmax"
    DEGRADATION = "degradation"
    OPERATOR_CAPACITY = "operator_capacity"


ALL_LOADS: Final = tuple(level.value for level in LoadLevel)
FMAX_AXIS: Final = (35.2e6, 52.8e6, 70.4e6, 88.0e6, 105.6e6)

# Sweep axes used when the configuration does not give them
DEFAULT_AXES: Final[Mapping[ExperimentKind, Mapping[str, Tuple[Any, ...]]]] = {
    ExperimentKind.BAND_COMPARISON: {
        "distances": (100.0, 250.0),
        "loads": ALL_LOADS,
        "n_operators_values": (2, 3),
    },
    ExperimentKind.FAIRNESS_VS_B: {
        "f_max_values": (35.2e6, 105.6e6),
        "slot_widths": (1.1e6, 2.2e6, 4.4e6, 8.8e6),
    },
    ExperimentKind.RATE_VS_DISTANCE: {
        "distances": tuple(float(d) for d in range(50, 801, 50)),
        "f_max_values": (35.2e6, 52.8e6, 105.6e6),
        "loads": ALL_LOADS,
    },
    ExperimentKind.RATE_VS_FMAX: {
        "distances": (100.0,),
        "f_max_values": FMAX_AXIS,
        "loads": ALL_LOADS,
    },
    ExperimentKind.DEGRADATION: {
        "distances": (100.0, 250.0),
        "n_operators_values": (3,),
        "r_v_values": (6.0, 10.0, 14.0, 20.0),
    },
    ExperimentKind.OPERATOR_CAPACITY: {
        "distances": (100.0, 200.0, 300.0),
        "n_operators_values": (1, 2, 3, 4),
    },
}

# Kinds that compare bands below 17.66 MHz, and therefore split
# the lower band between operators unless told otherwise
PARTITION_LOWER_KINDS: Final = frozenset(
    (ExperimentKind.BAND_COMPARISON, ExperimentKind.DEGRADATION)
)


@dataclass(frozen=True)
class PlanConfig:

    """How band plans are built for an experiment. A None value of
    partition_lower_band leaves the choice to the experiment kind."""

    policy: PartitionPolicy = field(default_factory=PartitionPolicy.alternate)
    guard_tones: int = 0
    partition_lower_band: Optional[bool] = None

    def build(self, scenario: Scenario, partition_lower_default: bool = False) -> BandPlan:
        partition_lower = (
            partition_lower_default
            if self.partition_lower_band is None
            else self.partition_lower_band
        )
        return build_band_plan(
            scenario.tone_grid(),
            scenario.n_operators,
            self.policy,
            lower_band_vectored=scenario.lower_band_vectored,
            guard_tones=self.guard_tones,
            partition_lower_band=partition_lower,
        )


@dataclass(frozen=True)
class ExperimentSpec:

    """A fully resolved experiment. Axes left empty are filled in
    from the kind's defaults, or from the base scenario."""

    kind: ExperimentKind
    scenario: Scenario
    plan: PlanConfig = field(default_factory=PlanConfig)
    distances: Tuple[float, ...] = ()
    f_max_values: Tuple[float, ...] = ()
    loads: Tuple[int, ...] = ()
    n_operators_values: Tuple[int, ...] = ()
    r_v_values: Tuple[float, ...] = ()
    slot_widths: Tuple[float, ...] = ()
    trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    output: Optional[str] = None
    workers: int = 1
    d_min: float = DEFAULT_D_MIN
    d_max: float = DEFAULT_D_MAX
    d_step: float = DEFAULT_D_STEP
    delta0: float = DEFAULT_DELTA0
    target_bps: float = DEFAULT_TARGET_BPS

    def __post_init__(self) -> None:
        defaults = DEFAULT_AXES[self.kind]
        base = {
            "distances": (self.scenario.cab_nt_distance,),
            "f_max_values": (self.scenario.f_max,),
            "loads": (self.scenario.n_disturbers,),
            "n_operators_values": (self.scenario.n_operators,),
            "r_v_values": (self.scenario.r_v_db,),
            "slot_widths": (4.4e6,),
        }
        for name, fallback in base.items():
            if not getattr(self, name):
                object.__setattr__(self, name, tuple(defaults.get(name, fallback)))
        if self.trials < MIN_TRIALS:
            raise ConfigError(
                "trials must be at least {0}".format(MIN_TRIALS), key="trials"
            )
        if self.master_seed < 0:
            raise ConfigError("master_seed cannot be negative", key="master_seed")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1", key="workers")
        if not 0.0 <= self.delta0 <= 1.0:
            raise ConfigError("delta0 must lie between 0 and 1", key="delta0")
        if self.kind is ExperimentKind.FAIRNESS_VS_B:
            if min(self.n_operators_values) < 2:
                raise ConfigError(
                    "Fairness needs at least two operators", key="n_operators"
                )

    def replace(self, **changes: Any) -> "ExperimentSpec":
        return dataclasses.replace(self, **changes)

    @property
    def partition_lower_default(self) -> bool:
        return self.kind in PARTITION_LOWER_KINDS

    def build_plan(self, scenario: Scenario) -> BandPlan:
        try:
            return self.plan.build(scenario, self.partition_lower_default)
        except ParameterError as e:
            raise ConfigError(str(e), key="policy")

    def points(self) -> List[Scenario]:
        """Every scenario of the distance x f_max x load x operators
        x r_v grid, in axis order"""
        result: List[Scenario] = []
        for n_op in self.n_operators_values:
            for f_max in self.f_max_values:
                for load in self.loads:
                    for d in self.distances:
                        for r_v in self.r_v_values:
                            result.append(
                                self.scenario.replace(
                                    n_operators=n_op,
                                    f_max=f_max,
                                    n_disturbers=load,
                                    cab_nt_distance=d,
                                    r_v_db=r_v,
                                    disturber_distances=(
                                        self.scenario.disturber_distances
                                        if load == self.scenario.n_disturbers
                                        else ()
                                    ),
                                )
                            )
        return result


def _spec_to_dict(spec: ExperimentSpec) -> Dict[str, Any]:
    """The result-relevant content of a spec as plain values"""
    policy = spec.plan.policy
    return {
        "kind": spec.kind.value,
        "scenario": scenario_to_dict(spec.scenario),
        "plan": {
            "policy": policy.label,
            "slot_width_hz": policy.slot_width_hz,
            "swap": policy.swap,
            "guard_tones": spec.plan.guard_tones,
            "partition_lower_band": spec.plan.partition_lower_band,
        },
        "distances": list(spec.distances),
        "f_max_values": list(spec.f_max_values),
        "loads": list(spec.loads),
        "n_operators_values": list(spec.n_operators_values),
        "r_v_values": list(spec.r_v_values),
        "slot_widths": list(spec.slot_widths),
        "trials": spec.trials,
        "master_seed": spec.master_seed,
        "d_grid": [spec.d_min, spec.d_max, spec.d_step],
        "delta0": spec.delta0,
        "target_bps": spec.target_bps,
    }


def config_hash(spec: ExperimentSpec) -> str:
    """SHA-256 of the canonical form of everything that determines
    the results. The output path and worker count are left out."""
    text = json.dumps(_spec_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def result_comment(spec: ExperimentSpec) -> str:
    return "config_sha256={0}, version={1}".format(config_hash(spec), __version__)


def _plan_config(settings: Settings) -> PlanConfig:
    name = settings.get_str("plan", "policy", "alternate")
    assert name is not None
    slot_width = settings.get_float("plan", "slot_width_hz")
    swap = settings.get_bool("plan", "swap", False)
    try:
        policy = PartitionPolicy.parse(name, slot_width, bool(swap))
    except ParameterError as e:
        key = "slot_width_hz" if "slot width" in str(e) else "policy"
        raise settings.error("plan", key, str(e))
    guard_tones = settings.get_int("plan", "guard_tones", 0)
    assert guard_tones is not None
    if guard_tones < 0:
        raise settings.error("plan", "guard_tones", "guard_tones cannot be negative")
    return PlanConfig(
        policy, guard_tones, settings.get_bool("plan", "partition_lower_band")
    )


def _env_seed(environ: Mapping[str, str]) -> Optional[int]:
    value = environ.get(SEED_ENV_VAR)
    if value is None or not value.strip():
        return None
    try:
        seed = int(value)
    except ValueError:
        raise ConfigError(
            "Invalid seed '{0}' in the environment".format(value), key=SEED_ENV_VAR
        )
    if seed < 0:
        raise ConfigError("Seed cannot be negative", key=SEED_ENV_VAR)
    return seed


def spec_from_settings(
    settings: Settings, environ: Optional[Mapping[str, str]] = None
) -> ExperimentSpec:
    """Build an ExperimentSpec from a parsed configuration"""
    scenario = scenario_from_settings(settings, require_distance=False)
    plan = _plan_config(settings)
    kind_name = settings.get_str("experiment", "kind", ExperimentKind.BAND_COMPARISON.value)
    assert kind_name is not None
    try:
        kind = ExperimentKind(kind_name.strip().lower())
    except ValueError:
        raise settings.error(
            "experiment",
            "kind",
            "Unknown experiment kind '{0}', expected one of {1}".format(
                kind_name, ", ".join(k.value for k in ExperimentKind)
            ),
        )
    kwargs: Dict[str, Any] = {"kind": kind, "scenario": scenario, "plan": plan}

    def floats(key: str, name: str) -> None:
        values = settings.get_floats("experiment", key)
        if values is not None:
            kwargs[name] = tuple(values)

    floats("distances", "distances")
    floats("f_max", "f_max_values")
    floats("r_v_db", "r_v_values")
    floats("slot_widths", "slot_widths")
    loads = settings.get_list("experiment", "loads")
    if loads is not None:
        try:
            kwargs["loads"] = tuple(parse_load(s) for s in loads)
        except ConfigError:
            raise settings.error(
                "experiment", "loads", "Invalid load in '{0}'".format(", ".join(loads))
            )
    n_ops = settings.get_floats("experiment", "n_operators")
    if n_ops is not None:
        if not all(x.is_integer() for x in n_ops):
            raise settings.error("experiment", "n_operators", "Operator counts must be integers")
        kwargs["n_operators_values"] = tuple(int(x) for x in n_ops)
    for key in ("trials", "master_seed", "workers"):
        v = settings.get_int("experiment", key)
        if v is not None:
            kwargs[key] = v
    for key in ("d_min", "d_max", "d_step", "delta0", "target_bps"):
        f = settings.get_float("experiment", key)
        if f is not None:
            kwargs[key] = f
    output = settings.get_str("experiment", "output")
    if output is not None:
        kwargs["output"] = output
    seed = _env_seed(os.environ if environ is None else environ)
    if seed is not None:
        kwargs["master_seed"] = seed

    try:
        spec = ExperimentSpec(**kwargs)
    except ConfigError as e:
        if e.key:
            cv = settings.get("experiment", e.key)
            if cv is not None:
                e.set_pos(cv.fname, cv.line)
        raise
    # Check that every grid point is a valid scenario before any work is done
    for scenario in spec.points():
        allocate_power(scenario, spec.build_plan(scenario))
    return spec


def load_experiment(
    fname: Optional[str] = None,
    *,
    text: Optional[str] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> ExperimentSpec:
    """Read and validate an experiment configuration"""
    return spec_from_settings(Settings.read(fname, text=text), environ)


def load_config(
    fname: Optional[str] = None,
    *,
    text: Optional[str] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> Tuple[Scenario, PlanConfig, ExperimentSpec]:
    spec = load_experiment(fname, text=text, environ=environ)
    return spec.scenario, spec.plan, spec


def _percentile(
    spec: ExperimentSpec, plan: BandPlan, scenario: Scenario, operator: int, kind: str
) -> PercentileResult:
    return monte_carlo_percentile(
        operator,
        plan,
        scenario,
        spec.trials,
        spec.master_seed,
        kind="nv" if kind == "nv" else "combined",
        workers=spec.workers,
    )


def _bps(x: float) -> int:
    return int(round(x))


BAND_COMPARISON_COLUMNS: Final = (
    "n_operators",
    "d_m",
    "n_disturbers",
    "operator_id",
    "band_number",
    "nv_p10_bps",
    "sbv_p10_bps",
)


def run_band_comparison(spec: ExperimentSpec) -> ResultTable:
    """NV and SBV 10th percentile rates per comparison band, for
    every operator of every grid point"""
    table = ResultTable(BAND_COMPARISON_COLUMNS, key_count=5)
    for scenario in spec.points():
        plan = spec.build_plan(scenario)
        for op in range(scenario.n_operators):
            nv = _percentile(spec, plan, scenario, op, "nv")
            sbv = _percentile(spec, plan, scenario, op, "combined")
            for band in plan.band_numbers_in_plan:
                table.append(
                    scenario.n_operators,
                    scenario.cab_nt_distance,
                    scenario.n_disturbers,
                    op,
                    band,
                    _bps(nv.per_band_p10_bps[band]),
                    _bps(sbv.per_band_p10_bps[band]),
                )
    return table


RATE_VS_DISTANCE_COLUMNS: Final = (
    "n_operators",
    "n_disturbers",
    "f_max_hz",
    "d_m",
    "nv_p10_bps",
    "sbv_p10_bps",
)


def run_rate_vs_distance(spec: ExperimentSpec) -> ResultTable:
    """Aggregate NV and SBV percentiles of operator 0 against loop length"""
    table = ResultTable(RATE_VS_DISTANCE_COLUMNS, key_count=4)
    for scenario in spec.points():
        plan = spec.build_plan(scenario)
        nv = _percentile(spec, plan, scenario, 0, "nv")
        sbv = _percentile(spec, plan, scenario, 0, "combined")
        table.append(
            scenario.n_operators,
            scenario.n_disturbers,
            scenario.f_max,
            scenario.cab_nt_distance,
            _bps(nv.p10_bps),
            _bps(sbv.p10_bps),
        )
    return table


RATE_VS_FMAX_COLUMNS: Final = (
    "n_operators",
    "n_disturbers",
    "f_max_hz",
    "nv_p10_bps",
    "sbv_p10_bps",
)


def run_rate_vs_fmax(spec: ExperimentSpec) -> ResultTable:
    """Aggregate NV and SBV percentiles of operator 0 against f_max,
    at the first configured distance"""
    table = ResultTable(RATE_VS_FMAX_COLUMNS, key_count=3)
    spec = spec.replace(distances=spec.distances[:1])
    for scenario in spec.points():
        plan = spec.build_plan(scenario)
        nv = _percentile(spec, plan, scenario, 0, "nv")
        sbv = _percentile(spec, plan, scenario, 0, "combined")
        table.append(
            scenario.n_operators,
            scenario.n_disturbers,
            scenario.f_max,
            _bps(nv.p10_bps),
            _bps(sbv.p10_bps),
        )
    return table


DEGRADATION_COLUMNS: Final = (
    "d_m",
    "r_v_db",
    "band_number",
    "sbv_rate_bps",
    "nv_rate_bps",
)


def run_degradation(spec: ExperimentSpec) -> ResultTable:
    """SBV and NV percentiles of operator 0 per band, and in total
    under band number 0, against the vectoring degradation factor"""
    table = ResultTable(DEGRADATION_COLUMNS, key_count=3)
    nv_cache: Dict[Tuple[float, int, float, int], PercentileResult] = {}
    for scenario in spec.points():
        plan = spec.build_plan(scenario)
        # NV use does not vector, so r_v does not enter
        key = (
            scenario.cab_nt_distance,
            scenario.n_operators,
            scenario.f_max,
            scenario.n_disturbers,
        )
        nv = nv_cache.get(key)
        if nv is None:
            nv = nv_cache[key] = _percentile(spec, plan, scenario, 0, "nv")
        sbv = _percentile(spec, plan, scenario, 0, "combined")
        table.append(
            scenario.cab_nt_distance,
            scenario.r_v_db,
            AGGREGATE_BAND,
            _bps(sbv.p10_bps),
            _bps(nv.p10_bps),
        )
        for band in plan.band_numbers_in_plan:
            table.append(
                scenario.cab_nt_distance,
                scenario.r_v_db,
                band,
                _bps(sbv.per_band_p10_bps[band]),
                _bps(nv.per_band_p10_bps[band]),
            )
    return table


FAIRNESS_VS_B_COLUMNS: Final = ("f_max_hz", "slot_width_hz", "d_m", "delta_rb")


def run_fairness_vs_b(spec: ExperimentSpec) -> ResultTable:
    """Rate imbalance between operators against distance, for every
    slot width and f_max. Plans use consecutive blocks, swapped if
    the [plan] section says so."""
    table = ResultTable(FAIRNESS_VS_B_COLUMNS, key_count=3)
    swap = spec.plan.policy.swap
    for n_op in spec.n_operators_values:
        for f_max in spec.f_max_values:
            scenario = spec.scenario.replace(n_operators=n_op, f_max=f_max)
            for b in spec.slot_widths:
                try:
                    policy = PartitionPolicy.block(b, swap)
                except ParameterError as e:
                    raise ConfigError(str(e), key="slot_widths")
                report = fairness_sweep(
                    policy,
                    scenario,
                    spec.d_min,
                    spec.d_max,
                    spec.d_step,
                    delta0=spec.delta0,
                    guard_tones=spec.plan.guard_tones,
                )
                for d, delta in zip(report.distances, report.delta_rb):
                    table.append(f_max, b, d, round(delta, 9))
    return table


OPERATOR_CAPACITY_COLUMNS: Final = (
    "d_m",
    "n_disturbers",
    "f_max_hz",
    "n_operators",
    "sbv_p10_bps",
    "meets_target",
)


def run_operator_capacity(spec: ExperimentSpec) -> ResultTable:
    """The combined percentile of the worst served operator against
    the number of operators sharing the cabinet"""
    table = ResultTable(OPERATOR_CAPACITY_COLUMNS, key_count=4)
    best: Dict[Tuple[float, int, float], int] = {}
    for scenario in spec.points():
        plan = spec.build_plan(scenario)
        worst = min(
            _percentile(spec, plan, scenario, op, "combined").p10_bps
            for op in range(scenario.n_operators)
        )
        meets = worst >= spec.target_bps
        table.append(
            scenario.cab_nt_distance,
            scenario.n_disturbers,
            scenario.f_max,
            scenario.n_operators,
            _bps(worst),
            meets,
        )
        if meets:
            key = (scenario.cab_nt_distance, scenario.n_disturbers, scenario.f_max)
            best[key] = max(best.get(key, 0), scenario.n_operators)
    for (d, load, f_max), n in sorted(best.items()):
        LOGGER.info(
            "At %.0f m, %d disturbers, f_max %.1f MHz: up to %d operators reach %.0f Mbit/s",
            d,
            load,
            f_max / 1e6,
            n,
            spec.target_bps / 1e6,
        )
    return table


RUNNERS: Final[Mapping[ExperimentKind, Callable[[ExperimentSpec], ResultTable]]] = {
    ExperimentKind.BAND_COMPARISON: run_band_comparison,
    ExperimentKind.FAIRNESS_VS_B: run_fairness_vs_b,
    ExperimentKind.RATE_VS_DISTANCE: run_rate_vs_distance,
    ExperimentKind.RATE_VS_FMAX: run_rate_vs_fmax,
    ExperimentKind.DEGRADATION: run_degradation,
    ExperimentKind.OPERATOR_CAPACITY: run_operator_capacity,
}


def run_experiment(spec: ExperimentSpec) -> ResultTable:
    """Run the experiment and return its rows sorted on the key columns"""
    LOGGER.info(
        "Running %s: %d grid points, %d trials, master seed %d",
        spec.kind.value,
        len(spec.points()),
        spec.trials,
        spec.master_seed,
    )
    t0 = time.monotonic()
    table = RUNNERS[spec.kind](spec).sorted()
    LOGGER.info(
        "Finished %s: %d rows in %.1f s", spec.kind.value, len(table), time.monotonic() - t0
    )
    return table


def experiment_csv(spec: ExperimentSpec) -> str:
    """Run the experiment and return the CSV text of its results"""
    return run_experiment(spec).to_csv(result_comment(spec))

