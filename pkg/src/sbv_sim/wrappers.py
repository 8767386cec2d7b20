"""

    sbv-sim: Sub-band vectoring simulator for multi-operator VDSL2

    Wrapper functions module

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.


    This module contains the functions behind the sbv-sim subcommands.
    Each takes the options of the command line as keyword arguments
    and returns the text to be written, so that the commands can also
    be invoked from Python code.

    Options:

    command:  One of run, plan, fairness, tones.
    config:   Path of the experiment configuration file.
    text:     Configuration text, used instead of a file if given.
    seed:     Master seed, overriding the configuration and SBV_SIM_SEED.
    trials:   Monte Carlo trial count, overriding the configuration.
    dry_run:  With run, validate and print the resolved scenario only.
    operator: With tones, the operator whose line is dumped.
    environ:  Mapping used in place of os.environ.

"""

from typing import Any, Callable, Dict, Mapping, NamedTuple, Optional

import logging

from typing_extensions import TypedDict

from .basics import ConfigError
from .channel import derive_trial_seed, sample_fext
from .fairness import fairness_sweep, fairness_table
from .harness import ExperimentSpec, config_hash, experiment_csv, load_experiment, result_comment
from .rateengine import tone_diagnostics
from .scenario import scenario_dumps
from .toneplan import plan_table


LOGGER = logging.getLogger(__name__)


class OptionsDict(TypedDict, total=False):
    command: str
    config: Optional[str]
    text: Optional[str]
    seed: Optional[int]
    trials: Optional[int]
    dry_run: bool
    operator: int
    environ: Optional[Mapping[str, str]]


class CommandOutput(NamedTuple):

    """Output text of a command, and the file it is destined for if
    the configuration names one"""

    text: str
    output: Optional[str] = None


def _spec(**options: Any) -> ExperimentSpec:
    spec = load_experiment(
        options.get("config"), text=options.get("text"), environ=options.get("environ")
    )
    changes: Dict[str, Any] = {}
    if options.get("seed") is not None:
        changes["master_seed"] = options["seed"]
    if options.get("trials") is not None:
        changes["trials"] = options["trials"]
    return spec.replace(**changes) if changes else spec


def run(**options: Any) -> CommandOutput:
    """Run the configured experiment, or describe it if dry_run is set"""
    spec = _spec(**options)
    if options.get("dry_run", False):
        lines = [
            scenario_dumps(spec.scenario, indent=2, separators=(",", ": ")),
            "kind: {0}".format(spec.kind.value),
            "grid points: {0}".format(len(spec.points())),
            "trials: {0}".format(spec.trials),
            "master seed: {0}".format(spec.master_seed),
            "config_sha256: {0}".format(config_hash(spec)),
        ]
        return CommandOutput("\n".join(lines) + "\n")
    return CommandOutput(experiment_csv(spec), spec.output)


def plan(**options: Any) -> CommandOutput:
    """Dump the band plan of the configured scenario"""
    spec = _spec(**options)
    return CommandOutput(
        plan_table(spec.build_plan(spec.scenario)).to_csv(result_comment(spec))
    )


def fairness(**options: Any) -> CommandOutput:
    """Sweep the rate imbalance of the configured plan over distance"""
    spec = _spec(**options)
    report = fairness_sweep(
        spec.plan.policy,
        spec.scenario,
        spec.d_min,
        spec.d_max,
        spec.d_step,
        delta0=spec.delta0,
        guard_tones=spec.plan.guard_tones,
    )
    LOGGER.warning(
        "Max rate difference %.4f, threshold %.4f: %s",
        report.max_delta,
        report.delta0,
        "passed" if report.passed else "FAILED",
    )
    return CommandOutput(fairness_table([report]).to_csv(result_comment(spec)))


def tones(**options: Any) -> CommandOutput:
    """Per-tone diagnostics of one operator's line under the first
    FEXT draw of the master seed"""
    spec = _spec(**options)
    scenario = spec.scenario
    operator = options.get("operator", 0)
    if not 0 <= operator < scenario.n_operators:
        raise ConfigError(
            "Operator {0} does not exist, there are {1}".format(
                operator, scenario.n_operators
            ),
            key="operator",
        )
    plan = spec.build_plan(scenario)
    realization = sample_fext(
        scenario.fext,
        scenario.n_operators,
        scenario.n_disturbers,
        derive_trial_seed(spec.master_seed, 0),
    )
    table = tone_diagnostics(operator, plan, scenario, realization)
    return CommandOutput(table.to_csv(result_comment(spec)))


COMMANDS: Mapping[str, Callable[..., CommandOutput]] = {
    "run": run,
    "plan": plan,
    "fairness": fairness,
    "tones": tones,
}


def run_command(**options: Any) -> CommandOutput:
    """Dispatch to the function of the given command"""
    command = options.get("command", "run")
    try:
        f = COMMANDS[command]
    except KeyError:
        raise ValueError("Unknown command '{0}'".format(command))
    return f(**options)
