"""

    sbv-sim: Sub-band vectoring simulator for multi-operator VDSL2

    Fairness module

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.


    When consecutive blocks of tones are assigned to operators, the
    operator that gets the lowest block of each slot enjoys the least
    attenuation, and its rate exceeds that of the others. This module
    measures that imbalance as the largest rate difference between
    operators relative to the best served one, and searches for the
    widest slot that keeps it below a threshold over a range of loop
    lengths.

    Only the partitioned spectrum above 17.66 MHz is compared. The
    lower band is the same for all operators, and its rates depend on
    the FEXT draw.

"""

from typing import List, Optional, Sequence, Tuple

import logging
import math
from dataclasses import dataclass

from typing_extensions import Final

from .basics import ParameterError, ResultTable
from .rateengine import sbv_rate
from .scenario import Scenario
from .toneplan import LOWER_BAND_COUNT, BandPlan, PartitionPolicy, build_band_plan


LOGGER = logging.getLogger(__name__)

DEFAULT_DELTA0: Final = 0.05
DEFAULT_D_MIN: Final = 50.0
DEFAULT_D_MAX: Final = 600.0
DEFAULT_D_STEP: Final = 25.0


@dataclass(frozen=True)
class FairnessReport:

    """Rate imbalance between operators over a distance grid"""

    distances: Tuple[float, ...]
    delta_rb: Tuple[float, ...]
    max_delta: float
    slot_width_hz: Optional[float]
    passed: bool
    delta0: float = DEFAULT_DELTA0
    policy: str = ""
    swap: bool = False
    f_max: float = 0.0


def upper_rates(plan: BandPlan, scenario: Scenario) -> List[float]:
    """SBV rate of every operator above 17.66 MHz"""
    rates: List[float] = []
    for op in range(plan.n_operators):
        r = sbv_rate(op, plan, scenario)
        rates.append(r.band_sum(b for b in r.per_band_bps if b > LOWER_BAND_COUNT))
    return rates


def relative_spread(rates: Sequence[float]) -> float:
    """Largest difference between rates over the largest rate,
    0 if every rate is 0"""
    top = max(rates)
    if top <= 0.0:
        return 0.0
    return (top - min(rates)) / top


def rate_delta(plan: BandPlan, scenario: Scenario, d: float) -> float:
    """Relative rate difference between the best and the worst served
    operator at loop length d"""
    if plan.n_operators < 2:
        raise ParameterError("Fairness needs at least two operators")
    return relative_spread(upper_rates(plan, scenario.replace(cab_nt_distance=d)))


def distance_grid(d_min: float, d_max: float, d_step: float) -> List[float]:
    """Distances from d_min to d_max inclusive, d_step apart"""
    if not d_step > 0.0:
        raise ParameterError("d_step must be positive")
    if d_min > d_max:
        raise ParameterError("d_min cannot exceed d_max")
    if d_min < 0.0:
        raise ParameterError("d_min cannot be negative")
    n = int(math.floor((d_max - d_min) / d_step + 1e-9))
    return [d_min + i * d_step for i in range(n + 1)]


def fairness_sweep(
    policy: PartitionPolicy,
    scenario: Scenario,
    d_min: float = DEFAULT_D_MIN,
    d_max: float = DEFAULT_D_MAX,
    d_step: float = DEFAULT_D_STEP,
    *,
    delta0: float = DEFAULT_DELTA0,
    guard_tones: int = 0,
) -> FairnessReport:
    """Evaluate rate_delta over a distance grid with a plan built
    from the policy, and compare the worst value with delta0"""
    distances = distance_grid(d_min, d_max, d_step)
    plan = build_band_plan(
        scenario.tone_grid(),
        scenario.n_operators,
        policy,
        lower_band_vectored=scenario.lower_band_vectored,
        guard_tones=guard_tones,
    )
    deltas = tuple(rate_delta(plan, scenario, d) for d in distances)
    max_delta = max(deltas)
    report = FairnessReport(
        distances=tuple(distances),
        delta_rb=deltas,
        max_delta=max_delta,
        slot_width_hz=policy.slot_width_hz,
        passed=max_delta <= delta0,
        delta0=delta0,
        policy=policy.label,
        swap=policy.swap,
        f_max=scenario.f_max,
    )
    LOGGER.info(
        "Fairness of %s (B=%s, swap=%s): max delta %.4f over %.0f-%.0f m, %s",
        policy.label,
        policy.slot_width_hz,
        policy.swap,
        max_delta,
        distances[0],
        distances[-1],
        "passed" if report.passed else "failed",
    )
    return report


def select_slot_width(
    candidates: Sequence[float],
    scenario: Scenario,
    d_min: float = DEFAULT_D_MIN,
    d_max: float = DEFAULT_D_MAX,
    d_step: float = DEFAULT_D_STEP,
    delta0: float = DEFAULT_DELTA0,
    *,
    swap: bool = False,
) -> Optional[float]:
    """Return the largest candidate slot width whose sweep passes, or
    None. Every candidate is evaluated, since the imbalance need not
    grow monotonically with the slot width."""
    if not candidates:
        raise ParameterError("No candidate slot widths given")
    if any(b >= c for b, c in zip(candidates, candidates[1:])):
        raise ParameterError("Candidate slot widths must be sorted ascending")
    best: Optional[float] = None
    for b in candidates:
        report = fairness_sweep(
            PartitionPolicy.block(b, swap), scenario, d_min, d_max, d_step, delta0=delta0
        )
        if report.passed:
            best = b
    return best


FAIRNESS_COLUMNS: Final = ("d_m", "delta_rb", "slot_width_hz", "policy", "swap")


def fairness_table(reports: Sequence[FairnessReport]) -> ResultTable:
    table = ResultTable(FAIRNESS_COLUMNS)
    for report in reports:
        for d, delta in zip(report.distances, report.delta_rb):
            table.append(d, delta, report.slot_width_hz, report.policy, report.swap)
    return table
