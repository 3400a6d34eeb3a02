"""Transformation between a survival study and per-day binary-outcome trials.

Forward: a cohort with survival times becomes a family of daily trials, one
per day i in 0..t_max, with outcome "alive at day i".  A subject is dead at
day i exactly when their event occurred at or before i; censored subjects
count as alive on every day (their event was never observed).  That is the
contract, and it overstates survival when censoring is heavy; the strict
mode in :mod:`causalsurv.cohort` is the opt-in alternative.

Backward: per-arm per-day adjusted survival counts are turned back into an
individual-level pseudo-cohort whose deaths fall on the first day each
count drops and whose survivors are censored at the horizon.

Every per-day quantity here is a step function that can only change on a
day somebody dies, so values are stored on the compressed grid of those
days; cost scales with the number of distinct death days, not with t_max.
Dense per-day arrays are available on demand for horizons that fit in
memory.
"""

from dataclasses import dataclass

import numpy as np

from .cohort import CohortDataset, stratum_assignments
from .errors import NonMonotoneCounts, PositivityViolation

__all__ = [
    "SurvivalMatrix",
    "DailyProportions",
    "AdjustedCohort",
    "to_daily_trials",
    "daily_survival_proportions",
    "from_adjusted_counts",
]

_DENSE_CELL_CAP = 200_000_000


@dataclass(frozen=True)
class SurvivalMatrix:
    """Per-subject daily survival indicators, stored as each death day.

    ``death_day[j]`` is the first day subject j counts as dead, or -1 if
    the subject stays alive through the whole window (censored subjects
    always do).  The dense matrix y[day, subject] is materialized on
    demand.
    """

    death_day: np.ndarray
    t_max: int
    n: int

    def dense(self) -> np.ndarray:
        cells = (self.t_max + 1) * self.n
        if cells > _DENSE_CELL_CAP:
            raise MemoryError(
                f"dense matrix would hold {cells} cells; use the compressed accessors"
            )
        y = np.ones((self.t_max + 1, self.n), dtype=np.uint8)
        for j, dd in enumerate(self.death_day):
            if dd >= 0:
                y[dd:, j] = 0
        return y

    def event_grid(self) -> np.ndarray:
        """Days where any survival value can change, plus both endpoints."""
        days = self.death_day[self.death_day >= 0]
        return np.unique(np.concatenate((days, [0, self.t_max]))).astype(np.int64)

    def alive_counts(self, subject_idx: np.ndarray, days: np.ndarray) -> np.ndarray:
        """Number of subjects among ``subject_idx`` alive at each of ``days``."""
        dd = self.death_day[subject_idx]
        dead_days = np.sort(dd[dd >= 0])
        dead_by = np.searchsorted(dead_days, days, side="right")
        return len(subject_idx) - dead_by


def to_daily_trials(cohort: CohortDataset) -> SurvivalMatrix:
    """Break the study into daily trials: dead at day i iff event and time <= i."""
    death_day = np.where(cohort.event == 1, cohort.time, -1).astype(np.int64)
    return SurvivalMatrix(death_day, cohort.t_max, cohort.n)


@dataclass(frozen=True)
class DailyProportions:
    """Empirical P(alive at day | arm, stratum) on the compressed day grid."""

    covariates: tuple[str, ...]
    strata: tuple[tuple[str, ...], ...]
    grid: np.ndarray
    values: np.ndarray  # shape (2, n_strata, len(grid))
    stratum_sizes: dict[tuple[int, tuple[str, ...]], int]
    marginals: dict[tuple[str, ...], int]
    t_max: int

    def at(self, arm: int, stratum_index: int, day) -> np.ndarray:
        day = np.asarray(day)
        idx = np.searchsorted(self.grid, day, side="right") - 1
        return self.values[arm, stratum_index, idx]

    def dense(self, arm: int, stratum_index: int) -> np.ndarray:
        return self.at(arm, stratum_index, np.arange(self.t_max + 1))


def daily_survival_proportions(
    matrix: SurvivalMatrix, cohort: CohortDataset, stratify_by, laplace: float = 0.0
) -> DailyProportions:
    """Fraction alive per day within each (arm, stratum) cell.

    Raises :class:`PositivityViolation` naming the first empty cell; the
    plug-in adjustment downstream needs every cell occupied.  ``laplace``
    adds a pseudocount to each cell's alive/dead tallies, (alive + a) /
    (size + 2a), steadying near-empty strata; 0 is the plain plug-in and
    0.5 is the conventional smoothing value.
    """
    covs, strata, assign = stratum_assignments(cohort, stratify_by)
    grid = matrix.event_grid()
    treatment = cohort.treatment
    values = np.empty((2, len(strata), len(grid)), dtype=np.float64)
    sizes = {}
    marginals = {}
    for si, combo in enumerate(strata):
        in_stratum = assign == si
        marginals[combo] = int(in_stratum.sum())
        for arm in (0, 1):
            idx = np.flatnonzero(in_stratum & (treatment == arm))
            sizes[(arm, combo)] = len(idx)
            if len(idx) == 0:
                raise PositivityViolation(arm, combo)
            alive = matrix.alive_counts(idx, grid)
            values[arm, si] = (alive + laplace) / (len(idx) + 2.0 * laplace)
    return DailyProportions(covs, strata, grid, values, sizes, marginals, matrix.t_max)


@dataclass(frozen=True)
class AdjustedCohort:
    """Pseudo-cohort rebuilt from integerized per-arm adjusted counts."""

    treatment: np.ndarray
    survival_time: np.ndarray
    event: np.ndarray
    source_counts: dict[int, tuple[np.ndarray, np.ndarray]]  # arm -> (days, counts)

    @property
    def subjects(self) -> list[tuple[int, int, int]]:
        return list(
            zip(
                self.treatment.tolist(),
                self.survival_time.tolist(),
                self.event.tolist(),
            )
        )

    @property
    def n(self) -> int:
        return len(self.treatment)


def _integerize_counts(days, counts, arm_size):
    """Round fractional alive-counts to integers, totals preserved exactly.

    The cumulative death count is rounded day by day (half-up, which hands
    a tied .5 to the earlier day), so each integerized count stays within
    0.5 of the real-valued one and per-day death increments stay
    non-negative.
    """
    deaths = arm_size - counts
    if np.any(deaths < -1e-9 * max(arm_size, 1)):
        raise NonMonotoneCounts("adjusted count exceeds the arm size")
    rounded = np.floor(np.maximum(deaths, 0.0) + 0.5).astype(np.int64)
    return arm_size - rounded


def from_adjusted_counts(adj, arm_sizes) -> AdjustedCohort:
    """Rebuild per-subject survival times from adjusted per-day counts.

    For each arm, a count drop of d at day i emits d pseudo-subjects with
    an event at day i; the count remaining at the horizon emits that many
    subjects censored there.  Per-arm totals equal ``arm_sizes`` exactly.
    """
    treatment, times, events = [], [], []
    source = {}
    for arm in (0, 1):
        size = int(arm_sizes[arm])
        days = np.asarray(adj.grid, dtype=np.int64)
        counts = np.asarray(adj.counts[arm], dtype=np.float64)
        if np.any(np.diff(counts) > 1e-9 * max(size, 1)):
            raise NonMonotoneCounts(
                f"arm {arm}: adjusted counts increase along the day grid"
            )
        ints = _integerize_counts(days, counts, size)
        source[arm] = (days, ints)
        prev = size
        for day, count in zip(days.tolist(), ints.tolist()):
            drop = prev - count
            if drop > 0:
                treatment.extend([arm] * drop)
                times.extend([day] * drop)
                events.extend([1] * drop)
            prev = count
        survivors = int(ints[-1])
        if survivors > 0:
            treatment.extend([arm] * survivors)
            times.extend([int(days[-1])] * survivors)
            events.extend([0] * survivors)
    return AdjustedCohort(
        np.array(treatment, dtype=np.int64),
        np.array(times, dtype=np.int64),
        np.array(events, dtype=np.int64),
        source,
    )
