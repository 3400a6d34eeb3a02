"""Cohort ingestion, validation, and stratum indexing.

A cohort is a list of subjects with a binary treatment, an integer survival
time in days, a binary event flag (1 = event at that time, 0 = censored at
that time), and finite categorical covariates.  Times must be whole days:
fractional inputs are rejected rather than rounded so that the per-day
transformation downstream stays unambiguous.  Continuous covariates are
likewise rejected in spirit: every covariate column is treated as a label,
and users must pre-discretize numeric ones.

Datasets are immutable after load and safe for shared concurrent reads.
"""

import csv
import io
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .errors import (
    CohortError,
    EmptyArm,
    MissingColumn,
    MissingValue,
    NegativeTime,
    NonBinaryEvent,
    NonBinaryTreatment,
    NonIntegerTime,
    RaggedRow,
    UnknownCovariate,
)

__all__ = [
    "SubjectRecord",
    "CohortDataset",
    "StratumIndex",
    "build_cohort",
    "load_cohort",
    "save_cohort",
    "stratum_counts",
    "truncate_followup",
    "drop_early_censored",
]


@dataclass(frozen=True)
class SubjectRecord:
    id: str
    treatment: int
    survival_time: int
    event: int
    covariates: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class CohortDataset:
    subjects: tuple[SubjectRecord, ...]
    covariate_levels: dict[str, tuple[str, ...]]
    t_max: int

    def __post_init__(self):
        object.__setattr__(
            self,
            "_treatment",
            np.array([s.treatment for s in self.subjects], dtype=np.int64),
        )
        object.__setattr__(
            self,
            "_time",
            np.array([s.survival_time for s in self.subjects], dtype=np.int64),
        )
        object.__setattr__(
            self, "_event", np.array([s.event for s in self.subjects], dtype=np.int64)
        )

    @property
    def n(self) -> int:
        return len(self.subjects)

    @property
    def treatment(self) -> np.ndarray:
        return self._treatment

    @property
    def time(self) -> np.ndarray:
        return self._time

    @property
    def event(self) -> np.ndarray:
        return self._event

    def arm_sizes(self) -> dict[int, int]:
        t = self._treatment
        return {0: int((t == 0).sum()), 1: int((t == 1).sum())}

    def covariate_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.covariate_levels))

    def covariate_column(self, name: str) -> list[str]:
        if name not in self.covariate_levels:
            raise UnknownCovariate(f"unknown covariate {name!r}")
        return [s.covariates[name] for s in self.subjects]


def build_cohort(records) -> CohortDataset:
    """Validate records and derive covariate levels and the time horizon."""
    records = tuple(records)
    if not records:
        raise EmptyArm("cohort is empty")
    names = set(records[0].covariates)
    levels: dict[str, set[str]] = {c: set() for c in names}
    arm_counts = {0: 0, 1: 0}
    for rec in records:
        if rec.treatment not in (0, 1):
            raise NonBinaryTreatment(
                f"subject {rec.id!r}: treatment must be 0 or 1, got {rec.treatment!r}"
            )
        if rec.event not in (0, 1):
            raise NonBinaryEvent(
                f"subject {rec.id!r}: event must be 0 or 1, got {rec.event!r}"
            )
        if rec.survival_time < 0:
            raise NegativeTime(
                f"subject {rec.id!r}: survival time {rec.survival_time} is negative"
            )
        if set(rec.covariates) != names:
            raise CohortError(
                f"subject {rec.id!r}: covariate keys differ from the first subject"
            )
        arm_counts[rec.treatment] += 1
        for c, v in rec.covariates.items():
            levels[c].add(v)
    for arm, count in arm_counts.items():
        if count == 0:
            raise EmptyArm(f"treatment arm {arm} has no subjects")
    t_max = max(rec.survival_time for rec in records)
    return CohortDataset(
        records,
        {c: tuple(sorted(vals)) for c, vals in sorted(levels.items())},
        t_max,
    )


def _parse_binary(value, row_num, column, exc):
    v = value.strip()
    if v not in ("0", "1"):
        raise exc(f"row {row_num}, column {column!r}: expected 0 or 1, got {value!r}")
    return int(v)


def _parse_days(value, row_num, column):
    v = value.strip()
    try:
        t = int(v)
    except ValueError:
        try:
            f = float(v)
        except ValueError:
            raise NonIntegerTime(
                f"row {row_num}, column {column!r}: {value!r} is not a day count"
            ) from None
        if not f.is_integer():
            raise NonIntegerTime(
                f"row {row_num}, column {column!r}: {value!r} is not a whole number "
                "of days (fractional times are rejected, not rounded)"
            ) from None
        t = int(f)
    if t < 0:
        raise NegativeTime(f"row {row_num}, column {column!r}: {t} is negative")
    return t


def load_cohort(csv_source, column_map) -> CohortDataset:
    """Parse a cohort CSV (RFC 4180, UTF-8, header row required).

    ``column_map`` maps roles onto header names: ``treatment``, ``time``,
    ``event``, an optional ``covariates`` list, and an optional ``id``.
    Treatment and event accept only the literals 0 and 1; rows with empty
    mapped cells are rejected.
    """
    if hasattr(csv_source, "read"):
        handle = csv_source
        close = False
    else:
        handle = open(csv_source, "r", encoding="utf-8", newline="")
        close = True
    try:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CohortError("CSV has no header row") from None
        index = {name: i for i, name in enumerate(header)}

        covariates = list(column_map.get("covariates", []))
        wanted = [column_map["treatment"], column_map["time"], column_map["event"]]
        wanted += covariates
        id_col = column_map.get("id")
        if id_col is not None:
            wanted.append(id_col)
        for col in wanted:
            if col not in index:
                raise MissingColumn(f"column {col!r} not found in header {header!r}")

        records = []
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue  # blank line
            if len(row) != len(header):
                raise RaggedRow(
                    f"row {row_num}: {len(row)} fields, header has {len(header)}"
                )
            cells = {col: row[index[col]] for col in wanted}
            for col, value in cells.items():
                if value.strip() == "":
                    raise MissingValue(f"row {row_num}: column {col!r} is empty")
            records.append(
                SubjectRecord(
                    id=cells[id_col].strip() if id_col else str(row_num - 2),
                    treatment=_parse_binary(
                        cells[column_map["treatment"]],
                        row_num,
                        column_map["treatment"],
                        NonBinaryTreatment,
                    ),
                    survival_time=_parse_days(
                        cells[column_map["time"]], row_num, column_map["time"]
                    ),
                    event=_parse_binary(
                        cells[column_map["event"]], row_num, column_map["event"], NonBinaryEvent
                    ),
                    covariates={c: cells[c].strip() for c in covariates},
                )
            )
    finally:
        if close:
            handle.close()
    return build_cohort(records)


def save_cohort(cohort: CohortDataset, destination) -> None:
    """Write the canonical cohort CSV: id, treatment, time, event, covariates."""
    covs = cohort.covariate_names()
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["id", "treatment", "time", "event", *covs])
    for s in cohort.subjects:
        writer.writerow(
            [s.id, s.treatment, s.survival_time, s.event]
            + [s.covariates[c] for c in covs]
        )
    text = buffer.getvalue()
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8")


SAVED_COLUMN_MAP = {"id": "id", "treatment": "treatment", "time": "time", "event": "event"}


def load_saved_cohort(csv_source, covariates=None) -> CohortDataset:
    """Read a CSV produced by :func:`save_cohort`."""
    column_map = dict(SAVED_COLUMN_MAP)
    if covariates is not None:
        column_map["covariates"] = list(covariates)
    return load_cohort(csv_source, column_map)


@dataclass(frozen=True)
class StratumIndex:
    """Counts per (arm, covariate-level combination), zero cells included."""

    covariates: tuple[str, ...]
    strata: tuple[tuple[str, ...], ...]
    counts: dict[tuple[int, tuple[str, ...]], int]
    marginals: dict[tuple[str, ...], int]

    def empty_cells(self) -> list[tuple[int, tuple[str, ...]]]:
        return [key for key, c in sorted(self.counts.items()) if c == 0]


def stratum_assignments(cohort: CohortDataset, covariates):
    """Cross-product strata and each subject's stratum index.

    Covariates are canonicalized to sorted name order; an empty selection
    yields a single stratum holding everyone.
    """
    covs = tuple(sorted(covariates))
    for c in covs:
        if c not in cohort.covariate_levels:
            raise UnknownCovariate(f"unknown covariate {c!r}")
    if not covs:
        return covs, ((),), np.zeros(cohort.n, dtype=np.int64)
    level_lists = [cohort.covariate_levels[c] for c in covs]
    strata = tuple(product(*level_lists))
    lookup = {combo: i for i, combo in enumerate(strata)}
    assign = np.array(
        [lookup[tuple(s.covariates[c] for c in covs)] for s in cohort.subjects],
        dtype=np.int64,
    )
    return covs, strata, assign


def stratum_counts(cohort: CohortDataset, covariates) -> StratumIndex:
    """Count subjects per arm within every covariate-level combination."""
    covs, strata, assign = stratum_assignments(cohort, covariates)
    treatment = cohort.treatment
    counts = {}
    marginals = {}
    for i, combo in enumerate(strata):
        in_stratum = assign == i
        marginals[combo] = int(in_stratum.sum())
        for arm in (0, 1):
            counts[(arm, combo)] = int((in_stratum & (treatment == arm)).sum())
    return StratumIndex(covs, strata, counts, marginals)


def truncate_followup(cohort: CohortDataset, t_max: int) -> CohortDataset:
    """Administratively censor the study at day ``t_max``.

    Subjects with survival beyond the horizon are censored at ``t_max``;
    a horizon at or past the observed maximum is a no-op.
    """
    if t_max < 0:
        raise CohortError(f"t_max must be non-negative, got {t_max}")
    if t_max >= cohort.t_max:
        return cohort
    records = []
    for s in cohort.subjects:
        if s.survival_time > t_max:
            records.append(
                SubjectRecord(s.id, s.treatment, t_max, 0, dict(s.covariates))
            )
        else:
            records.append(s)
    return build_cohort(records)


def drop_early_censored(cohort: CohortDataset) -> tuple[CohortDataset, int]:
    """Strict censoring mode: drop subjects censored before the horizon.

    The default transform counts censored subjects as alive on every day,
    which overstates survival under heavy censoring; this filter is the
    opt-in alternative.  Returns the filtered cohort and the number of
    subjects removed.
    """
    kept = [
        s
        for s in cohort.subjects
        if not (s.event == 0 and s.survival_time < cohort.t_max)
    ]
    dropped = cohort.n - len(kept)
    if dropped == 0:
        return cohort, 0
    return build_cohort(kept), dropped
