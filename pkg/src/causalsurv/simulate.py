"""Synthetic observational cohort with a controllable confounding bias.

One binary confounder ``z`` drives both treatment assignment and survival.
Assignment counts are exact rather than sampled: ``round_half_up(n * p_z1)``
subjects carry z=1, and within each z stratum ``round_half_up(n_z * p)``
subjects are treated, where p is ``p_treat_given_z[z]``.  Holding the
realized assignment table fixed keeps the injected confounding bias itself
constant across replications, so seeds vary only the noise stream; in
particular ``p_treat_given_z`` of 0.5/0.5 yields exact empirical balance
and the backdoor adjustment becomes a provable no-op.

Survival times follow an exponential ladder within each (z, x) cell: the
k-th member of a cell (k = 0, 1, ...) dies at

    time = a * exp((b + c*z + d*x + e*z*x) * k) + noise

rounded half-up to whole days and clamped at zero, with event = 1 for
everyone (no censoring).  Sorted within a cell, the death times sweep out
an exponential survival profile whose rate is the cell's exponent.

Subjects are laid out in index order as the z=0 block then the z=1 block,
treated before controls within each block.

Randomness contract: a single ``numpy.random.Generator`` seeded with
``seed`` (PCG64, numpy's default bit generator), consumed as exactly one
uniform noise draw per subject in index order.  Changing the generator,
the draw order, or the assignment layout is a breaking change; golden
tests depend on all three.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .cohort import CohortDataset, SubjectRecord, build_cohort
from .errors import InvalidConfig

__all__ = ["SimConfig", "generate_cohort"]


def _half_up(value: float) -> int:
    return math.floor(value + 0.5)


@dataclass(frozen=True)
class SimConfig:
    n: int = 200
    a: float = 5.0
    b: float = 0.025
    c: float = 0.005
    d: float = -0.015
    e: float = 0.075
    noise: tuple[float, float] = (-0.5, 0.5)
    p_treat_given_z: dict[int, float] = field(
        default_factory=lambda: {0: 0.75, 1: 0.25}
    )
    p_z1: float = 0.5
    seed: int = 0

    def validate(self) -> None:
        if self.n < 2:
            raise InvalidConfig(f"n must be at least 2, got {self.n}")
        if not 0.0 <= self.p_z1 <= 1.0:
            raise InvalidConfig(f"p_z1 must lie in [0, 1], got {self.p_z1}")
        for level in (0, 1):
            if level not in self.p_treat_given_z:
                raise InvalidConfig(f"p_treat_given_z is missing level {level}")
            p = self.p_treat_given_z[level]
            if not 0.0 <= p <= 1.0:
                raise InvalidConfig(f"p_treat_given_z[{level}]={p} outside [0, 1]")
        lo, hi = self.noise
        if not lo <= hi:
            raise InvalidConfig(f"noise bounds {self.noise} are not ordered")
        if self.seed < 0:
            raise InvalidConfig(f"seed must be non-negative, got {self.seed}")

    def assignment_plan(self) -> list[tuple[int, int]]:
        """(z, x) per subject in index order; cell counts are exact."""
        n_z1 = _half_up(self.n * self.p_z1)
        plan = []
        for z, n_z in ((0, self.n - n_z1), (1, n_z1)):
            treated = _half_up(n_z * self.p_treat_given_z[z])
            plan.extend([(z, 1)] * treated)
            plan.extend([(z, 0)] * (n_z - treated))
        return plan


def generate_cohort(config: SimConfig) -> CohortDataset:
    """Draw a cohort; identical config and seed give identical output."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    within = {}
    records = []
    for i, (z, x) in enumerate(config.assignment_plan()):
        noise = rng.uniform(config.noise[0], config.noise[1])
        k = within.get((z, x), 0)
        within[(z, x)] = k + 1
        raw = config.a * math.exp(
            (config.b + config.c * z + config.d * x + config.e * z * x) * k
        ) + noise
        records.append(
            SubjectRecord(
                id=f"p{i}",
                treatment=x,
                survival_time=max(0, _half_up(raw)),
                event=1,
                covariates={"z": str(z)},
            )
        )
    return build_cohort(records)
