"""

    sbv-sim: Sub-band vectoring simulator for multi-operator VDSL2

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.


    sbv-sim estimates the downstream data rates that co-located
    operators can offer from a shared street cabinet when each of them
    vectors its own lines on a private share of the spectrum above
    17.6 MHz, and compares them with non-vectored sharing of all
    tones.

"""

# Expose the sbv-sim API

from .basics import (
    SbvSimError,
    ConfigError,
    ScenarioError,
    ParameterError,
    ModelRangeError,
    ResultTable,
)
from .settings import Settings

# Tone grid and band plans
from .toneplan import (
    ToneGrid,
    Band,
    BandPlan,
    PartitionPolicy,
    PolicyKind,
    Regime,
    build_tone_grid,
    table2_bands,
    report_bands,
    build_band_plan,
    operator_tones,
    plan_table,
)

# Binder model
from .channel import (
    CableModel,
    FextModel,
    FextRealization,
    direct_gain,
    fext_gain_99,
    fext_gain_sampled,
    sample_fext,
    derive_trial_seed,
    load_channel_params,
    default_channel_params,
)

from .scenario import (
    Scenario,
    LoadLevel,
    PowerAllocation,
    allocate_power,
    load_scenario,
    scenario_dumps,
    scenario_loads,
    scenario_hash,
)

# Rates
from .rateengine import (
    RateResult,
    PercentileResult,
    tone_bits,
    fext_power,
    nv_rate,
    sbv_rate,
    combined_operator_rate,
    monte_carlo_percentile,
    tone_diagnostics,
)

from .fairness import (
    FairnessReport,
    rate_delta,
    fairness_sweep,
    select_slot_width,
    fairness_table,
)

# Experiments
from .harness import (
    ExperimentKind,
    ExperimentSpec,
    PlanConfig,
    load_experiment,
    load_config,
    run_experiment,
    config_hash,
)

from .wrappers import run_command

from .version import __version__

__author__ = "sbv-sim authors"
__copyright__ = "(C) 2026 sbv-sim authors"

__all__ = (
    "SbvSimError",
    "ConfigError",
    "ScenarioError",
    "ParameterError",
    "ModelRangeError",
    "ResultTable",
    "Settings",
    "ToneGrid",
    "Band",
    "BandPlan",
    "PartitionPolicy",
    "PolicyKind",
    "Regime",
    "build_tone_grid",
    "table2_bands",
    "report_bands",
    "build_band_plan",
    "operator_tones",
    "plan_table",
    "CableModel",
    "FextModel",
    "FextRealization",
    "direct_gain",
    "fext_gain_99",
    "fext_gain_sampled",
    "sample_fext",
    "derive_trial_seed",
    "load_channel_params",
    "default_channel_params",
    "Scenario",
    "LoadLevel",
    "PowerAllocation",
    "allocate_power",
    "load_scenario",
    "scenario_dumps",
    "scenario_loads",
    "scenario_hash",
    "RateResult",
    "PercentileResult",
    "tone_bits",
    "fext_power",
    "nv_rate",
    "sbv_rate",
    "combined_operator_rate",
    "monte_carlo_percentile",
    "tone_diagnostics",
    "FairnessReport",
    "rate_delta",
    "fairness_sweep",
    "select_slot_width",
    "fairness_table",
    "ExperimentKind",
    "ExperimentSpec",
    "PlanConfig",
    "load_experiment",
    "load_config",
    "run_experiment",
    "config_hash",
    "run_command",
    "__version__",
    "__author__",
    "__copyright__",
)
