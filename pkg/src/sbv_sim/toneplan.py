"""

    sbv-sim: Sub-band vectoring simulator for multi-operator VDSL2

    Tone plan module

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.


    This module builds the DMT tone grid, the comparison bands used
    for reporting, and per-operator band plans.

    The spectrum up to 17.6 MHz keeps the downstream bands of VDSL2
    profile 17a and is shared by all operators. Above it, the spectrum
    is divided into 17.6 MHz sub-channels, and each sub-channel into
    band slots that are partitioned among the operators. Each operator
    vectors its own partition, so no FEXT crosses between operators
    there.

    Tones are identified by their integer index k on the grid, with
    frequency k * delta_f. All band intervals are half-open,
    [f_start, f_stop), which places the 17.66 MHz boundary tone (if
    the grid has one) in band 4.

    Operators are numbered from 0. In the owner arrays of a plan, the
    value SHARED (-1) marks a tone used by all operators and GUARD (-2)
    a tone that nobody transmits on.

"""

from typing import Dict, Iterable, List, Optional, Tuple

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from typing_extensions import Final

from .basics import ParameterError, ResultTable


LOGGER = logging.getLogger(__name__)

DELTA_F: Final = 4312.5
SYMBOL_RATE: Final = 4000.0

# Width of a sub-channel; the first one (0-17.6 MHz) is the legacy band
SUBCHANNEL_HZ: Final = 17.6e6
# Width of the reporting bands used above 35.2 MHz
REPORT_BAND_HZ: Final = 4.4e6
TABLE2_STOP_HZ: Final = 35.2e6

# Comparison bands: (number, f_start, f_stop). Bands 1-3 are the
# profile 17a downstream bands and make up the lower (shared) region.
TABLE2_EDGES: Final = (
    (1, 0.138e6, 3.75e6),
    (2, 5.2e6, 8.5e6),
    (3, 14.0e6, 17.66e6),
    (4, 17.66e6, 22.08e6),
    (5, 22.08e6, 26.50e6),
    (6, 26.50e6, 30.90e6),
    (7, 30.90e6, 35.20e6),
)
LOWER_BAND_COUNT: Final = 3

SHARED: Final = -1
GUARD: Final = -2


class Regime(str, Enum):

    """How a tone is used"""

    SHARED = "shared"
    PARTITIONED_VECTORED = "partitioned_vectored"
    GUARD = "guard"


class PolicyKind(str, Enum):

    """How partitioned tones are distributed among operators"""

    ALTERNATE_TONE = "alternate"
    CONSECUTIVE_BLOCK = "block"
    FREQUENCY_DIVISION = "division"


def _first_tone_from(f: float, delta_f: float) -> int:
    """Smallest k with k * delta_f >= f"""
    k = max(0, math.ceil(f / delta_f))
    while k > 0 and (k - 1) * delta_f >= f:
        k -= 1
    while k * delta_f < f:
        k += 1
    return k


def _last_tone_to(f: float, delta_f: float) -> int:
    """Largest k with k * delta_f <= f"""
    k = math.floor(f / delta_f)
    while (k + 1) * delta_f <= f:
        k += 1
    while k > 0 and k * delta_f > f:
        k -= 1
    return k


@dataclass(frozen=True)
class ToneGrid:

    """The DMT tone grid up to and including max_tone_index"""

    delta_f: float
    symbol_rate: float
    max_tone_index: int

    def __post_init__(self) -> None:
        if not self.delta_f > 0.0:
            raise ParameterError("delta_f must be positive")
        if not self.symbol_rate > 0.0:
            raise ParameterError("symbol_rate must be positive")
        if self.max_tone_index < 1:
            raise ParameterError("The grid must contain at least one tone")

    @property
    def f_top(self) -> float:
        """Frequency of the highest tone"""
        return self.max_tone_index * self.delta_f

    def frequency(self, k: int) -> float:
        return k * self.delta_f

    def frequencies(self, tones: Iterable[int]) -> np.ndarray:
        return np.asarray(tones, dtype=np.float64) * self.delta_f

    def tone_range(self, f_start: float, f_stop: float) -> range:
        """Tones k of this grid with f_start <= k * delta_f < f_stop"""
        first = _first_tone_from(f_start, self.delta_f)
        stop = _first_tone_from(f_stop, self.delta_f)
        return range(first, min(stop, self.max_tone_index + 1))


def build_tone_grid(
    f_max: float, delta_f: float = DELTA_F, symbol_rate: float = SYMBOL_RATE
) -> ToneGrid:
    """Build the grid of tones k with k * delta_f <= f_max"""
    if not (delta_f > 0.0 and f_max >= delta_f):
        raise ParameterError(
            "Tone grid needs f_max >= delta_f > 0, got f_max={0}, delta_f={1}".format(
                f_max, delta_f
            )
        )
    return ToneGrid(delta_f, symbol_rate, _last_tone_to(f_max, delta_f))


@dataclass(frozen=True)
class Band:

    """A contiguous frequency band and the grid tones within it"""

    number: int
    f_start: float
    f_stop: float
    tone_indexes: range

    def __post_init__(self) -> None:
        if not self.f_start < self.f_stop:
            raise ParameterError(
                "Band {0}: f_start must be below f_stop".format(self.number)
            )
        if len(self.tone_indexes) == 0:
            raise ParameterError("Band {0} contains no tones".format(self.number))

    @property
    def tone_count(self) -> int:
        return len(self.tone_indexes)

    @property
    def bandwidth_hz(self) -> float:
        return self.f_stop - self.f_start

    @property
    def is_lower(self) -> bool:
        return self.number <= LOWER_BAND_COUNT


def _band(number: int, f_start: float, f_stop: float, grid: ToneGrid) -> Optional[Band]:
    tones = grid.tone_range(f_start, f_stop)
    if len(tones) == 0:
        return None
    return Band(number, f_start, f_stop, tones)


def table2_bands(delta_f: float = DELTA_F) -> List[Band]:
    """The seven comparison bands from 0.138 to 35.2 MHz"""
    grid = build_tone_grid(TABLE2_STOP_HZ, delta_f)
    bands: List[Band] = []
    for number, f_start, f_stop in TABLE2_EDGES:
        band = _band(number, f_start, f_stop, grid)
        assert band is not None
        bands.append(band)
    return bands


def report_bands(grid: ToneGrid) -> List[Band]:
    """The comparison bands covered by the grid: the seven bands up to
    35.2 MHz, followed by 4.4 MHz bands numbered from 8 up to the top
    of the grid. Bands without tones are left out."""
    bands: List[Band] = []
    for number, f_start, f_stop in TABLE2_EDGES:
        band = _band(number, f_start, f_stop, grid)
        if band is not None:
            bands.append(band)
    i = 0
    while True:
        f_start = TABLE2_STOP_HZ + i * REPORT_BAND_HZ
        if f_start > grid.f_top:
            break
        band = _band(len(TABLE2_EDGES) + 1 + i, f_start, f_start + REPORT_BAND_HZ, grid)
        if band is not None:
            bands.append(band)
        i += 1
    return bands


@dataclass(frozen=True)
class PartitionPolicy:

    """The rule that assigns partitioned tones to operators.

    ALTERNATE_TONE deals tones out round-robin. CONSECUTIVE_BLOCK
    divides each 17.6 MHz sub-channel into slots of slot_width_hz and
    each slot into n_operators consecutive blocks. FREQUENCY_DIVISION
    is the trivial split: one block per operator over the whole region.
    With swap set, the owner of the lowest block rotates by one operator
    from one slot to the next."""

    kind: PolicyKind
    slot_width_hz: Optional[float] = None
    swap: bool = False

    def __post_init__(self) -> None:
        if self.kind is PolicyKind.CONSECUTIVE_BLOCK:
            if self.slot_width_hz is None or not self.slot_width_hz > 0.0:
                raise ParameterError("Consecutive blocks need a positive slot width")

    @classmethod
    def alternate(cls) -> "PartitionPolicy":
        return cls(PolicyKind.ALTERNATE_TONE)

    @classmethod
    def block(cls, slot_width_hz: float, swap: bool = False) -> "PartitionPolicy":
        return cls(PolicyKind.CONSECUTIVE_BLOCK, slot_width_hz, swap)

    @classmethod
    def division(cls) -> "PartitionPolicy":
        return cls(PolicyKind.FREQUENCY_DIVISION)

    @classmethod
    def parse(
        cls, name: str, slot_width_hz: Optional[float] = None, swap: bool = False
    ) -> "PartitionPolicy":
        """Create a policy from its configuration name"""
        try:
            kind = PolicyKind(name.strip().lower())
        except ValueError:
            raise ParameterError(
                "Unknown partition policy '{0}', expected one of {1}".format(
                    name, ", ".join(k.value for k in PolicyKind)
                )
            )
        if kind is not PolicyKind.CONSECUTIVE_BLOCK:
            slot_width_hz = None
        return cls(kind, slot_width_hz, swap)

    @property
    def label(self) -> str:
        return self.kind.value

    def slot_tones(self, delta_f: float) -> int:
        """The slot width in tones, floored to the grid"""
        assert self.slot_width_hz is not None
        return _last_tone_to(self.slot_width_hz, delta_f)


@dataclass(frozen=True, eq=False)
class BandPlan:

    """The tones of every comparison band up to f_max with the operator
    that owns each. The per-tone arrays are parallel and read-only."""

    grid: ToneGrid
    n_operators: int
    policy: PartitionPolicy
    lower_band: Tuple[Band, ...]
    upper_bands: Tuple[Band, ...]
    tone_indexes: np.ndarray
    band_numbers: np.ndarray
    owners: np.ndarray
    lower_band_vectored: bool = False
    partition_lower_band: bool = False
    guard_tones: int = 0

    @property
    def f_top(self) -> float:
        return self.grid.f_top

    @property
    def bands(self) -> Tuple[Band, ...]:
        return self.lower_band + self.upper_bands

    @property
    def band_numbers_in_plan(self) -> List[int]:
        return [b.number for b in self.bands]

    @property
    def frequencies(self) -> np.ndarray:
        return self.grid.frequencies(self.tone_indexes)

    @property
    def lower_mask(self) -> np.ndarray:
        return self.band_numbers <= LOWER_BAND_COUNT

    @property
    def upper_mask(self) -> np.ndarray:
        return self.band_numbers > LOWER_BAND_COUNT

    @property
    def shared_mask(self) -> np.ndarray:
        return self.owners == SHARED

    @property
    def upper_tone_count(self) -> int:
        return int(np.count_nonzero(self.upper_mask))

    @property
    def lower_tone_count(self) -> int:
        return int(np.count_nonzero(self.lower_mask))

    @property
    def assignment(self) -> Dict[int, int]:
        """Mapping of partitioned tone index to owning operator"""
        ix = self.owners >= 0
        return dict(zip(self.tone_indexes[ix].tolist(), self.owners[ix].tolist()))

    def operator_mask(self, operator_id: int) -> np.ndarray:
        """Mask of the tones partitioned to the operator"""
        return self.owners == operator_id

    def regime(self, position: int) -> Regime:
        owner = int(self.owners[position])
        if owner == SHARED:
            return Regime.SHARED
        if owner == GUARD:
            return Regime.GUARD
        return Regime.PARTITIONED_VECTORED

    def check_operator(self, operator_id: int) -> None:
        if not 0 <= operator_id < self.n_operators:
            raise ParameterError(
                "Unknown operator {0}; the plan has operators 0..{1}".format(
                    operator_id, self.n_operators - 1
                )
            )


def _mark_guards(owners: np.ndarray, guard_tones: int) -> np.ndarray:
    """Switch off the first guard_tones tones of every block that
    follows a block of another operator"""
    result = owners.copy()
    edges = np.flatnonzero(owners[1:] != owners[:-1]) + 1
    ends = np.append(edges[1:], len(owners))
    for start, end in zip(edges, ends):
        result[start : min(start + guard_tones, end)] = GUARD
    return result


def _assign_region(
    subchannels: np.ndarray,
    n_operators: int,
    policy: PartitionPolicy,
    slot_tones: int,
    guard_tones: int,
) -> np.ndarray:
    """Assign an ordered region of tones to operators. Slot counting
    runs across sub-channel boundaries, so that swapping continues
    from one sub-channel to the next."""
    count = len(subchannels)
    if policy.kind is PolicyKind.ALTERNATE_TONE:
        return np.arange(count) % n_operators
    if policy.kind is PolicyKind.FREQUENCY_DIVISION:
        segments = [(0, count)]
    else:
        starts = [0] + (np.flatnonzero(np.diff(subchannels)) + 1).tolist()
        segments = list(zip(starts, starts[1:] + [count]))
    owners = np.empty(count, dtype=np.int64)
    slot = 0
    for seg_start, seg_end in segments:
        step = slot_tones if policy.kind is PolicyKind.CONSECUTIVE_BLOCK else seg_end - seg_start
        for s0 in range(seg_start, seg_end, step):
            slen = min(step, seg_end - s0)
            block = slen // n_operators
            if block > 0:
                blk = np.minimum(np.arange(slen) // block, n_operators - 1)
            else:
                # A short final slot goes to the last block
                blk = np.full(slen, n_operators - 1)
            if policy.swap:
                blk = (blk + slot) % n_operators
            owners[s0 : s0 + slen] = blk
            slot += 1
    if guard_tones:
        owners = _mark_guards(owners, guard_tones)
    return owners


def build_band_plan(
    grid: ToneGrid,
    n_operators: int,
    policy: PartitionPolicy,
    f_max: Optional[float] = None,
    lower_band_vectored: bool = False,
    *,
    guard_tones: int = 0,
    partition_lower_band: bool = False,
) -> BandPlan:
    """Build the band plan of n_operators co-located operators.
    Tones above 17.66 MHz (bands 4 and up) are partitioned according
    to the policy; the lower bands stay shared unless
    partition_lower_band is set, in which case they are partitioned
    as a region of their own, with its own slot counter."""
    if n_operators < 1:
        raise ParameterError("n_operators must be at least 1")
    if guard_tones < 0:
        raise ParameterError("guard_tones cannot be negative")
    if guard_tones and policy.kind is PolicyKind.ALTERNATE_TONE:
        raise ParameterError("Guard tones cannot be used with alternate tone assignment")
    if f_max is not None:
        if f_max > grid.f_top + grid.delta_f:
            raise ParameterError(
                "f_max {0} lies beyond the tone grid (top {1})".format(f_max, grid.f_top)
            )
        top = _last_tone_to(f_max, grid.delta_f)
        if top < grid.max_tone_index:
            grid = ToneGrid(grid.delta_f, grid.symbol_rate, top)
    slot_tones = 0
    if policy.kind is PolicyKind.CONSECUTIVE_BLOCK:
        slot_tones = policy.slot_tones(grid.delta_f)
        if slot_tones < n_operators:
            raise ParameterError(
                "Slot width of {0} tones is smaller than the {1} operators".format(
                    slot_tones, n_operators
                )
            )

    bands = report_bands(grid)
    tones = np.concatenate(
        [np.arange(b.tone_indexes.start, b.tone_indexes.stop) for b in bands]
    ).astype(np.int64)
    numbers = np.concatenate(
        [np.full(b.tone_count, b.number, dtype=np.int64) for b in bands]
    )
    owners = np.full(len(tones), SHARED, dtype=np.int64)

    upper = np.flatnonzero(numbers > LOWER_BAND_COUNT)
    if len(upper):
        subchannels = np.floor(tones[upper] * grid.delta_f / SUBCHANNEL_HZ).astype(np.int64)
        owners[upper] = _assign_region(
            subchannels, n_operators, policy, slot_tones, guard_tones
        )
    if partition_lower_band:
        lower = np.flatnonzero(numbers <= LOWER_BAND_COUNT)
        owners[lower] = _assign_region(
            np.zeros(len(lower), dtype=np.int64),
            n_operators,
            policy,
            slot_tones,
            guard_tones,
        )

    for a in (tones, numbers, owners):
        a.flags.writeable = False

    plan = BandPlan(
        grid=grid,
        n_operators=n_operators,
        policy=policy,
        lower_band=tuple(b for b in bands if b.is_lower),
        upper_bands=tuple(b for b in bands if not b.is_lower),
        tone_indexes=tones,
        band_numbers=numbers,
        owners=owners,
        lower_band_vectored=lower_band_vectored,
        partition_lower_band=partition_lower_band,
        guard_tones=guard_tones,
    )
    if LOGGER.isEnabledFor(logging.DEBUG):
        LOGGER.debug(
            "Plan %s, %d operators, %d tones to %.0f Hz, upper tones per operator %s",
            policy.label,
            n_operators,
            len(tones),
            grid.f_top,
            [int(np.count_nonzero(owners[upper] == op)) for op in range(n_operators)],
        )
    return plan


def operator_tones(plan: BandPlan, operator_id: int) -> Dict[int, Regime]:
    """The tones an operator transmits on, labeled with their regime:
    its partitioned tones plus the shared lower-band tones"""
    plan.check_operator(operator_id)
    result: Dict[int, Regime] = {}
    for k in plan.tone_indexes[plan.shared_mask].tolist():
        result[k] = Regime.SHARED
    for k in plan.tone_indexes[plan.operator_mask(operator_id)].tolist():
        result[k] = Regime.PARTITIONED_VECTORED
    return result


PLAN_COLUMNS: Final = ("tone_index", "f_hz", "band_number", "regime", "operator_id")


def plan_table(plan: BandPlan) -> ResultTable:
    """The plan as a table of tones"""
    table = ResultTable(PLAN_COLUMNS, key_count=1)
    freqs = plan.frequencies
    for i, k in enumerate(plan.tone_indexes.tolist()):
        owner = int(plan.owners[i])
        table.append(
            k,
            float(freqs[i]),
            int(plan.band_numbers[i]),
            plan.regime(i).value,
            owner if owner >= 0 else None,
        )
    return table
