"""Population testing: single-sample tests and two-stage pooled (Dorfman)
testing, with delayed result delivery and test-count/cost accounting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Compartment, Population, ScenarioConfig
from .viral_load import load_at


@dataclass(frozen=True)
class TestSpec:
    """Operating characteristics of one test type."""

    detectionCut: float
    fprSingle: float
    fnrSingle: float
    daysDelayTestResults: int
    costPerTest: float

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "TestSpec":
        return cls(
            detectionCut=config.detectionCut,
            fprSingle=config.fprSingle,
            fnrSingle=config.fnrSingle,
            daysDelayTestResults=config.daysDelayTestResults,
            costPerTest=config.costPerTest,
        )


@dataclass(frozen=True)
class Pool:
    """A group of samples tested together on one sampling day."""

    member_ids: tuple[int, ...]
    loads: tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.member_ids)


@dataclass(frozen=True)
class PendingTestResult:
    """An outcome fixed at sampling time, waiting for its delivery day."""

    agent_id: int
    sampled_day: int
    delivery_day: int
    positive: bool
    # fraction of tests this result accounts for (pool share + own follow-up)
    tests_consumed_attributed: float = 1.0


@dataclass
class TestLedger:
    """Running totals of tests administered and their cost."""

    tests_total: int = 0
    cost_total: float = 0.0
    tests_by_day: dict[int, int] = field(default_factory=dict)

    def record(self, day: int, tests: int, cost_per_test: float) -> None:
        self.tests_total += tests
        self.cost_total += tests * cost_per_test
        self.tests_by_day[day] = self.tests_by_day.get(day, 0) + tests


def single_test(viral_load: float, spec: TestSpec, rng: np.random.Generator) -> bool:
    """One test on one sample; True means positive.

    Samples at or below the detection cut can only false-positive; detectable
    samples miss at the false-negative rate.
    """
    if viral_load <= spec.detectionCut:
        return bool(rng.random() < spec.fprSingle)
    return bool(rng.random() < 1.0 - spec.fnrSingle)


def pool_test_average(pool: Pool, spec: TestSpec, rng: np.random.Generator) -> bool:
    """Stage-1 pool test where the pool's load is the mean of its samples."""
    pooled_load = sum(pool.loads) / pool.size
    return single_test(pooled_load, spec, rng)


def pool_test_exponential(pool: Pool, spec: TestSpec, rng: np.random.Generator) -> bool:
    """Stage-1 pool test driven by the number of detectable samples k.

    With no detectable sample the pool false-positives at the single-test
    rate; otherwise each detectable sample independently contributes, so the
    pool is positive with probability 1 - fnr**k.
    """
    k = sum(1 for v in pool.loads if v > spec.detectionCut)
    if k == 0:
        p_positive = spec.fprSingle
    else:
        p_positive = 1.0 - spec.fnrSingle ** k
    return bool(rng.random() < p_positive)


POOL_TESTS = {
    "average": pool_test_average,
    "exponential": pool_test_exponential,
}


def partition_into_pools(
    eligible_ids: list[int],
    loads: list[float],
    pool_size: int,
    rng: np.random.Generator,
) -> list[Pool]:
    """Randomly permute the eligible ids and chunk them into pools.

    The final pool keeps the remainder and may be smaller; pool_size 1 yields
    singletons.
    """
    if pool_size < 1:
        raise ValueError("pool_size must be >= 1")
    order = rng.permutation(len(eligible_ids))
    pools = []
    for start in range(0, len(eligible_ids), pool_size):
        chunk = order[start : start + pool_size]
        pools.append(
            Pool(
                member_ids=tuple(eligible_ids[i] for i in chunk),
                loads=tuple(loads[i] for i in chunk),
            )
        )
    return pools


def current_load(population: Population, agent_id: int, day: int) -> float:
    """Viral load of an agent on a given day; 0 without an active trajectory."""
    agent = population.agent(agent_id)
    if agent.viral_profile is None or agent.exposure_day is None:
        return 0.0
    return load_at(agent.viral_profile, day - agent.exposure_day)


def eligible_for_testing(population: Population, agent_id: int, day: int,
                         config: ScenarioConfig) -> bool:
    """In the population and past any post-isolation testing holdback."""
    agent = population.agent(agent_id)
    if agent.is_isolated:
        return False
    if agent.isolation_exit_day is not None:
        if day - agent.isolation_exit_day < config.noTestingPostIsolationDays:
            return False
    return True


def run_testing_day(
    population: Population,
    config: ScenarioConfig,
    day: int,
    pending: list[PendingTestResult],
    ledger: TestLedger,
    rng: np.random.Generator,
) -> int:
    """Sample and test every eligible agent; returns tests used today.

    Pools of one get a single test. Larger pools get a stage-1 pool test and,
    if positive, stage-2 single tests on every member. All outcomes use the
    sampling-day loads and share one delivery delay; results are appended to
    the pending queue. The ledger accrues one test per pool plus one per
    stage-2 member test.
    """
    spec = TestSpec.from_config(config)
    eligible = [
        i for i in population.in_population_ids()
        if eligible_for_testing(population, i, day, config)
    ]
    loads = [current_load(population, i, day) for i in eligible]
    pools = partition_into_pools(eligible, loads, config.poolSize, rng)
    pool_test = POOL_TESTS[config.poolingType]

    delivery_day = day + config.daysDelayTestResults
    tests_used = 0
    for pool in pools:
        if pool.size == 1:
            tests_used += 1
            outcome = single_test(pool.loads[0], spec, rng)
            pending.append(
                PendingTestResult(pool.member_ids[0], day, delivery_day, outcome, 1.0)
            )
            continue
        tests_used += 1
        share = 1.0 / pool.size
        if not pool_test(pool, spec, rng):
            for member in pool.member_ids:
                pending.append(
                    PendingTestResult(member, day, delivery_day, False, share)
                )
            continue
        for member, load in zip(pool.member_ids, pool.loads):
            tests_used += 1
            outcome = single_test(load, spec, rng)
            pending.append(
                PendingTestResult(member, day, delivery_day, outcome, share + 1.0)
            )

    ledger.record(day, tests_used, spec.costPerTest)
    return tests_used


def deliver_results(
    pending: list[PendingTestResult], day: int
) -> list[PendingTestResult]:
    """Remove and return every result due today."""
    due = [r for r in pending if r.delivery_day == day]
    if due:
        pending[:] = [r for r in pending if r.delivery_day != day]
    return due
