"""

    sbv-sim: Sub-band vectoring simulator for multi-operator VDSL2

    Rate engine module

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.


    This module computes the downstream bit loading of a line and the
    resulting data rates, for the two ways an operator can use a tone:

    * Non-vectored (NV) use of shared spectrum: every other line of the
      binder is an active FEXT disturber, and the line sees the full
      sum of their coupled power in addition to background noise.

    * Sub-band vectoring (SBV): on the tones partitioned to it, an
      operator vectors all of its lines. Self-FEXT is cancelled and no
      other operator transmits there, so no FEXT remains. Imperfect
      cancellation shows up as a noise enhancement factor r_v.

    Bit loading uses the gap approximation,

        b = log2(1 + |Hd|^2 * P / ((N0 * delta_f * r_v + I) * Gamma))

    clamped to [bit_min, bit_max], a tone below bit_min carrying nothing.
    Rates are the symbol rate times the sum of bits over tones, reported
    per comparison band and in total.

    The rate of one draw of FEXT fluctuations is a deterministic
    function of its inputs. monte_carlo_percentile() repeats the NV
    computation over independently seeded draws and reports the 10th
    percentile of the aggregate rate.

"""

from typing import (
    Dict,
    Iterable,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from typing_extensions import Final, Literal

from .basics import ParameterError, ResultTable
from .channel import (
    CableModel,
    FextModel,
    FextRealization,
    derive_trial_seed,
    direct_gain,
    fext_gain_99,
    sample_fext,
)
from .scenario import PowerAllocation, Scenario, allocate_power, db_to_linear
from .toneplan import DELTA_F, GUARD, SHARED, BandPlan


LOGGER = logging.getLogger(__name__)

RateKind = Literal["combined", "nv"]

DEFAULT_TRIALS: Final = 1000
MIN_TRIALS: Final = 10
PERCENTILE: Final = 10.0

FloatOrArray = Union[float, np.ndarray]


def tone_bits(
    signal_gain: FloatOrArray,
    p_tone: FloatOrArray,
    noise_psd_w_hz: float,
    delta_f: float,
    fext_w: FloatOrArray,
    r_v_linear: FloatOrArray,
    gamma_linear: float,
    *,
    bit_min: float = 2.0,
    bit_max: float = 15.0,
    integer_bits: bool = False,
) -> FloatOrArray:
    """Bits per symbol of one tone, or of an array of tones.
    With integer_bits set, the loading is floored before clamping."""
    if gamma_linear < 1.0:
        raise ParameterError("The SNR gap cannot be below 0 dB")
    r_v = np.asarray(r_v_linear, dtype=np.float64)
    if np.any(r_v < 1.0):
        raise ParameterError("The noise enhancement factor cannot be below 0 dB")
    eta = noise_psd_w_hz * delta_f * r_v
    snr = (
        np.asarray(signal_gain, dtype=np.float64)
        * np.asarray(p_tone, dtype=np.float64)
        / ((eta + np.asarray(fext_w, dtype=np.float64)) * gamma_linear)
    )
    bits = np.log2(1.0 + snr)
    if integer_bits:
        bits = np.floor(bits)
    bits = np.where(bits < bit_min, 0.0, np.minimum(bits, bit_max))
    return float(bits) if bits.ndim == 0 else bits


def fext_power(
    tone_k: int,
    victim: int,
    disturbers: Iterable[int],
    realization: FextRealization,
    cable: CableModel,
    fext: FextModel,
    powers: Union[float, Mapping[int, float]],
    *,
    victim_distance: float,
    disturber_distances: Optional[Mapping[int, float]] = None,
    delta_f: float = DELTA_F,
    extrapolate: bool = False,
) -> float:
    """FEXT power (W) received by a victim on tone k: the sum over the
    disturber columns of the realization of the sampled coupling gain
    times the disturber's transmit power on the tone. The coupling
    length is the shorter of the two loops."""
    f = tone_k * delta_f
    terms: List[float] = []
    for m in disturbers:
        d_m = victim_distance if disturber_distances is None else disturber_distances[m]
        l = min(victim_distance, d_m)
        g = fext_gain_99(fext, cable, f, victim_distance, l, extrapolate=extrapolate)
        p = powers if isinstance(powers, (int, float)) else powers[m]
        terms.append(g * 10.0 ** (-realization.x_db[victim, m] / 10.0) * p)
    return math.fsum(terms)


@dataclass(frozen=True)
class RateResult:

    """Rates of one operator's line, per comparison band and in total"""

    operator: int
    per_band_bps: Dict[int, float]
    aggregate_bps: float
    active_tone_count: int
    per_tone_bits: Optional[np.ndarray] = None
    tone_indexes: Optional[np.ndarray] = None

    def band_sum(self, bands: Iterable[int]) -> float:
        """The rate over a subset of the bands"""
        return math.fsum(self.per_band_bps.get(b, 0.0) for b in bands)


@dataclass(frozen=True)
class PercentileResult:

    """Monte Carlo estimate of a rate percentile. The samples are the
    aggregate rates, in trial order."""

    samples: Tuple[float, ...]
    p10_bps: float
    trial_count: int
    master_seed: int
    per_band_p10_bps: Dict[int, float]
    kind: str = "combined"
    operator: int = 0

    @property
    def median(self) -> float:
        return percentile_lower(self.samples, 50.0)


def percentile_lower(samples: Sequence[float], q: float = PERCENTILE) -> float:
    """Empirical percentile by the lower (inverse CDF) rule, which
    always returns one of the samples"""
    if not len(samples):
        raise ParameterError("Cannot take the percentile of no samples")
    return float(np.percentile(np.asarray(samples, dtype=np.float64), q, method="lower"))


class _LinkBudget(NamedTuple):

    # Per-tone quantities of one (plan, scenario) pair that do not
    # depend on the FEXT draw

    alloc: PowerAllocation
    gain: np.ndarray
    p_nv: np.ndarray
    # FEXT power into the victim per unit coupling factor, one row per
    # distinct disturber loop length
    coupling: np.ndarray
    # Row of coupling for each disturber
    groups: np.ndarray
    r_v: np.ndarray
    band_index: np.ndarray
    band_numbers: Tuple[int, ...]


@lru_cache(maxsize=64)
def _link_budget(plan: BandPlan, scenario: Scenario) -> _LinkBudget:
    alloc = allocate_power(scenario, plan)
    freqs = plan.frequencies
    d = scenario.cab_nt_distance
    gain = np.asarray(
        direct_gain(scenario.cable, freqs, d, extrapolate=scenario.extrapolate)
    )
    p_nv = np.where(plan.lower_mask, alloc.lower.p_tone_nv, alloc.upper.p_tone_nv)
    lengths = scenario.disturber_lengths
    distinct = sorted(set(lengths))
    groups = np.array([distinct.index(x) for x in lengths], dtype=np.int64)
    if len(freqs):
        coupling = np.stack(
            [
                np.asarray(
                    fext_gain_99(
                        scenario.fext,
                        scenario.cable,
                        freqs,
                        d,
                        min(d, x),
                        extrapolate=scenario.extrapolate,
                    )
                )
                * p_nv
                for x in distinct
            ]
        )
    else:
        coupling = np.zeros((len(distinct), 0))
    band_numbers = tuple(plan.band_numbers_in_plan)
    band_index = np.searchsorted(np.array(band_numbers), plan.band_numbers)
    r_v_by_band = np.array(
        [db_to_linear(scenario.r_v_db_for_band(b)) for b in band_numbers]
    )
    r_v = r_v_by_band[band_index] if len(band_numbers) else np.zeros(0)
    for a in (gain, p_nv, coupling, groups, r_v, band_index):
        a.flags.writeable = False
    return _LinkBudget(
        alloc, gain, p_nv, coupling, groups, r_v, band_index, band_numbers
    )


def _bits(
    scenario: Scenario,
    gain: np.ndarray,
    p_tone: np.ndarray,
    fext_w: FloatOrArray,
    r_v: FloatOrArray,
) -> np.ndarray:
    return np.asarray(
        tone_bits(
            gain,
            p_tone,
            scenario.noise_psd_w_hz,
            scenario.delta_f,
            fext_w,
            r_v,
            scenario.gamma_linear,
            bit_min=scenario.bit_min,
            bit_max=scenario.bit_max,
            integer_bits=scenario.integer_bits,
        )
    )


def _interference(
    lb: _LinkBudget, realization: FextRealization, victim: int, mask: Optional[np.ndarray]
) -> np.ndarray:
    """Per-tone FEXT power into the victim from the disturbers that
    are selected by mask (all of them if mask is None)"""
    n = len(lb.groups)
    w = realization.weights(victim, n)
    if mask is not None:
        w = w * mask
    per_group = np.bincount(lb.groups, weights=w, minlength=lb.coupling.shape[0])
    return per_group @ lb.coupling


def _band_rates(lb: _LinkBudget, scenario: Scenario, bits: np.ndarray) -> np.ndarray:
    return scenario.symbol_rate * np.bincount(
        lb.band_index, weights=bits, minlength=len(lb.band_numbers)
    )


def _result(
    operator: int,
    lb: _LinkBudget,
    scenario: Scenario,
    plan: BandPlan,
    bits: np.ndarray,
    per_tone: bool,
) -> RateResult:
    rates = _band_rates(lb, scenario, bits)
    per_band = {b: float(r) for b, r in zip(lb.band_numbers, rates.tolist())}
    return RateResult(
        operator=operator,
        per_band_bps=per_band,
        aggregate_bps=math.fsum(per_band.values()),
        active_tone_count=int(np.count_nonzero(bits)),
        per_tone_bits=bits if per_tone else None,
        tone_indexes=plan.tone_indexes if per_tone else None,
    )


def _check(operator: int, plan: BandPlan, scenario: Scenario) -> _LinkBudget:
    plan.check_operator(operator)
    return _link_budget(plan, scenario)


def _check_realization(
    realization: FextRealization, operator: int, scenario: Scenario
) -> None:
    if realization.n_victims <= operator or realization.n_disturbers < scenario.n_disturbers:
        raise ParameterError(
            "Realization of shape {0} does not cover operator {1} with {2} disturbers".format(
                realization.x_db.shape, operator, scenario.n_disturbers
            )
        )


def _nv_bits(
    operator: int, lb: _LinkBudget, scenario: Scenario, realization: FextRealization
) -> np.ndarray:
    fext_w = _interference(lb, realization, operator, None)
    return _bits(scenario, lb.gain, lb.p_nv, fext_w, 1.0)


def _sbv_bits(operator: int, lb: _LinkBudget, scenario: Scenario, plan: BandPlan) -> np.ndarray:
    owned = plan.operator_mask(operator)
    alloc = lb.alloc
    p_sbv = np.where(
        plan.lower_mask,
        alloc.lower.p_tone_sbv[operator],
        alloc.upper.p_tone_sbv[operator],
    )
    bits = _bits(scenario, lb.gain, p_sbv, 0.0, lb.r_v)
    return np.where(owned, bits, 0.0)


def _shared_bits(
    operator: int,
    lb: _LinkBudget,
    scenario: Scenario,
    plan: BandPlan,
    realization: FextRealization,
) -> np.ndarray:
    """Bits on the shared tones as used by the operator. If the lower
    band is vectored, FEXT from the operator's own lines is cancelled
    there at the cost of the r_v noise enhancement."""
    if plan.lower_band_vectored:
        alien = np.array(
            [
                scenario.disturber_operator(operator, j) != operator
                for j in range(scenario.n_disturbers)
            ],
            dtype=np.float64,
        )
        fext_w = _interference(lb, realization, operator, alien)
        bits = _bits(scenario, lb.gain, lb.p_nv, fext_w, lb.r_v)
    else:
        bits = _nv_bits(operator, lb, scenario, realization)
    return np.where(plan.shared_mask, bits, 0.0)


def nv_rate(
    operator: int,
    plan: BandPlan,
    scenario: Scenario,
    realization: FextRealization,
    *,
    per_tone: bool = False,
) -> RateResult:
    """Rate of the operator's line if all tones of the plan were shared
    without vectoring, under the given FEXT draw"""
    lb = _check(operator, plan, scenario)
    _check_realization(realization, operator, scenario)
    bits = _nv_bits(operator, lb, scenario, realization)
    return _result(operator, lb, scenario, plan, bits, per_tone)


def sbv_rate(
    operator: int, plan: BandPlan, scenario: Scenario, *, per_tone: bool = False
) -> RateResult:
    """Rate of the operator's line on its partitioned tones under
    sub-band vectoring. No FEXT enters, so no realization is needed."""
    lb = _check(operator, plan, scenario)
    bits = _sbv_bits(operator, lb, scenario, plan)
    return _result(operator, lb, scenario, plan, bits, per_tone)


def combined_operator_rate(
    operator: int,
    plan: BandPlan,
    scenario: Scenario,
    realization: FextRealization,
    *,
    per_tone: bool = False,
) -> RateResult:
    """The rate an operator actually gets: shared tones under NV plus
    its partitioned tones under SBV"""
    lb = _check(operator, plan, scenario)
    _check_realization(realization, operator, scenario)
    bits = _shared_bits(operator, lb, scenario, plan, realization) + _sbv_bits(
        operator, lb, scenario, plan
    )
    return _result(operator, lb, scenario, plan, bits, per_tone)


def _run_trials(
    operator: int,
    plan: BandPlan,
    scenario: Scenario,
    kind: str,
    seeds: Sequence[int],
) -> np.ndarray:
    """Per-band rates of a sequence of trials, one row per trial"""
    lb = _link_budget(plan, scenario)
    fixed: Optional[np.ndarray] = None
    if kind == "combined":
        fixed = _sbv_bits(operator, lb, scenario, plan)
    rows = np.empty((len(seeds), len(lb.band_numbers)))
    for i, seed in enumerate(seeds):
        realization = sample_fext(
            scenario.fext, plan.n_operators, scenario.n_disturbers, seed
        )
        if fixed is None:
            bits = _nv_bits(operator, lb, scenario, realization)
        else:
            bits = _shared_bits(operator, lb, scenario, plan, realization) + fixed
        rows[i] = _band_rates(lb, scenario, bits)
    return rows


def _chunks(seq: Sequence[int], n: int) -> List[Sequence[int]]:
    size = max(1, math.ceil(len(seq) / n))
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def monte_carlo_percentile(
    operator: int,
    plan: BandPlan,
    scenario: Scenario,
    trials: int = DEFAULT_TRIALS,
    master_seed: int = 0,
    *,
    kind: RateKind = "combined",
    workers: int = 1,
) -> PercentileResult:
    """Estimate the 10th percentile of an operator's rate over
    independent FEXT draws. kind "combined" gives the SBV deployment
    rate (shared tones NV plus partitioned tones SBV), kind "nv" the
    rate with all tones shared. Samples depend only on master_seed
    and the trial index, not on the number of workers."""
    if trials < MIN_TRIALS:
        raise ParameterError("At least {0} trials are needed".format(MIN_TRIALS))
    if kind not in ("combined", "nv"):
        raise ParameterError("Unknown rate kind '{0}'".format(kind))
    if workers < 1:
        raise ParameterError("workers must be at least 1")
    lb = _check(operator, plan, scenario)
    seeds = [derive_trial_seed(master_seed, t) for t in range(trials)]
    t0 = time.monotonic()
    chunks = _chunks(seeds, workers)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            parts = list(
                executor.map(
                    _run_trials,
                    [operator] * len(chunks),
                    [plan] * len(chunks),
                    [scenario] * len(chunks),
                    [kind] * len(chunks),
                    chunks,
                )
            )
    else:
        parts = [_run_trials(operator, plan, scenario, kind, seeds)]
    rows = np.concatenate(parts)
    samples = tuple(math.fsum(row) for row in rows.tolist())
    per_band = {
        b: float(np.percentile(rows[:, i], PERCENTILE, method="lower"))
        for i, b in enumerate(lb.band_numbers)
    }
    result = PercentileResult(
        samples=samples,
        p10_bps=percentile_lower(samples),
        trial_count=trials,
        master_seed=master_seed,
        per_band_p10_bps=per_band,
        kind=kind,
        operator=operator,
    )
    LOGGER.debug(
        "%s p10 of operator %d at %.0f m: %.1f Mbit/s (%d trials, %.2f s)",
        kind,
        operator,
        scenario.cab_nt_distance,
        result.p10_bps / 1e6,
        trials,
        time.monotonic() - t0,
    )
    return result


DIAGNOSTIC_COLUMNS: Final = (
    "tone_index",
    "f_hz",
    "regime",
    "operator_id",
    "snr_db",
    "bits",
    "fext_w",
)


def tone_diagnostics(
    operator: int,
    plan: BandPlan,
    scenario: Scenario,
    realization: FextRealization,
) -> ResultTable:
    """Per-tone view of the operator's combined rate: every tone the
    operator transmits on, with its SNR before the gap, its loading
    and the FEXT power it receives"""
    lb = _check(operator, plan, scenario)
    _check_realization(realization, operator, scenario)
    owned = plan.operator_mask(operator)
    shared = plan.shared_mask
    alloc = lb.alloc
    p_sbv = np.where(
        plan.lower_mask, alloc.lower.p_tone_sbv[operator], alloc.upper.p_tone_sbv[operator]
    )
    if plan.lower_band_vectored:
        alien = np.array(
            [
                scenario.disturber_operator(operator, j) != operator
                for j in range(scenario.n_disturbers)
            ],
            dtype=np.float64,
        )
        fext_shared = _interference(lb, realization, operator, alien)
        r_v_shared: FloatOrArray = lb.r_v
    else:
        fext_shared = _interference(lb, realization, operator, None)
        r_v_shared = np.ones_like(lb.r_v)
    p = np.where(shared, lb.p_nv, p_sbv)
    fext_w = np.where(shared, fext_shared, 0.0)
    r_v = np.where(shared, r_v_shared, lb.r_v)
    eta = scenario.noise_psd_w_hz * scenario.delta_f * r_v
    snr_db = 10.0 * np.log10(lb.gain * p / (eta + fext_w))
    bits = _bits(scenario, lb.gain, p, fext_w, r_v)

    table = ResultTable(DIAGNOSTIC_COLUMNS, key_count=1)
    freqs = plan.frequencies
    for i in np.flatnonzero(shared | owned).tolist():
        owner = int(plan.owners[i])
        assert owner != GUARD
        table.append(
            int(plan.tone_indexes[i]),
            float(freqs[i]),
            plan.regime(i).value,
            None if owner == SHARED else owner,
            round(float(snr_db[i]), 6),
            round(float(bits[i]), 6),
            float(fext_w[i]),
        )
    return table
