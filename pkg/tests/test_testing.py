"""Single and pooled testing, result delays, and test accounting."""

import numpy as np
import pytest

from episim.core import Agent, Compartment, Population, default_config, make_rng
from episim.testing import (
    PendingTestResult,
    Pool,
    TestLedger,
    TestSpec,
    deliver_results,
    eligible_for_testing,
    partition_into_pools,
    pool_test_average,
    pool_test_exponential,
    run_testing_day,
    single_test,
)
from episim.viral_load import ViralLoadProfile

# operating points for the two test types compared in the experiments
TEST_A = TestSpec(detectionCut=100.0, fprSingle=0.014, fnrSingle=0.06,
                  daysDelayTestResults=3, costPerTest=100.0)
TEST_B = TestSpec(detectionCut=1e6, fprSingle=0.007, fnrSingle=0.15,
                  daysDelayTestResults=0, costPerTest=50.0)


def frequency(fn, n=100_000):
    return sum(fn() for _ in range(n)) / n


def test_single_test_false_positive_rate():
    rng = make_rng(101)
    freq = frequency(lambda: single_test(0.0, TEST_A, rng))
    assert abs(freq - 0.014) < 0.002


def test_single_test_detection_rate():
    rng = make_rng(102)
    freq = frequency(lambda: single_test(1e6, TEST_A, rng))
    assert abs(freq - 0.94) < 0.003


def test_single_test_below_cut_only_false_positives():
    # 1e5 cp/ml is below the low-sensitivity test's cut
    rng = make_rng(103)
    freq = frequency(lambda: single_test(1e5, TEST_B, rng))
    assert abs(freq - 0.007) < 0.001


def test_partition_exact_division():
    pools = partition_into_pools(list(range(10)), [0.0] * 10, 5, make_rng(1))
    assert [p.size for p in pools] == [5, 5]
    assert sorted(i for p in pools for i in p.member_ids) == list(range(10))


def test_partition_remainder_pool_is_smaller():
    pools = partition_into_pools(list(range(12)), [0.0] * 12, 5, make_rng(1))
    assert [p.size for p in pools] == [5, 5, 2]


def test_partition_pool_size_one_gives_singletons():
    pools = partition_into_pools(list(range(7)), [0.0] * 7, 1, make_rng(1))
    assert [p.size for p in pools] == [1] * 7


def test_pool_average_deterministic_threshold_paths():
    loads = (1e6, 0.0, 0.0, 0.0, 0.0)  # mean 2e5
    pool = Pool(tuple(range(5)), loads)
    sure_a = TestSpec(100.0, 0.0, 0.0, 0, 0.0)    # 2e5 > cut: always positive
    sure_b = TestSpec(1e6, 0.0, 0.0, 0, 0.0)      # 2e5 <= cut: never positive
    rng = make_rng(1)
    assert pool_test_average(pool, sure_a, rng) is True
    assert pool_test_average(pool, sure_b, rng) is False


def test_pool_average_rates():
    loads = (1e6, 0.0, 0.0, 0.0, 0.0)
    pool = Pool(tuple(range(5)), loads)
    rng = make_rng(104)
    freq_b = frequency(lambda: pool_test_average(pool, TEST_B, rng))
    assert abs(freq_b - 0.007) < 0.001
    freq_a = frequency(lambda: pool_test_average(pool, TEST_A, rng))
    assert abs(freq_a - 0.94) < 0.003


def test_pool_average_all_zero_loads_false_positive_rate():
    pool = Pool(tuple(range(5)), (0.0,) * 5)
    rng = make_rng(105)
    freq = frequency(lambda: pool_test_average(pool, TEST_A, rng), n=50_000)
    assert abs(freq - 0.014) < 0.003


def test_pool_exponential_no_detectable_sample():
    pool = Pool(tuple(range(5)), (0.0,) * 5)
    spec = TestSpec(100.0, 0.014, 0.15, 0, 0.0)
    rng = make_rng(106)
    freq = frequency(lambda: pool_test_exponential(pool, spec, rng), n=50_000)
    assert abs(freq - 0.014) < 0.003


def test_pool_exponential_two_detectable_samples():
    # positive probability 1 - 0.15^2 = 0.9775
    pool = Pool(tuple(range(5)), (1e4, 1e4, 0.0, 0.0, 0.0))
    spec = TestSpec(100.0, 0.014, 0.15, 0, 0.0)
    rng = make_rng(107)
    freq = frequency(lambda: pool_test_exponential(pool, spec, rng))
    assert abs(freq - 0.9775) < 0.002


def test_pool_exponential_single_detectable_matches_single_test():
    pool = Pool(tuple(range(5)), (1e4, 0.0, 0.0, 0.0, 0.0))
    spec = TestSpec(100.0, 0.014, 0.15, 0, 0.0)
    rng = make_rng(108)
    freq = frequency(lambda: pool_test_exponential(pool, spec, rng), n=50_000)
    assert abs(freq - 0.85) < 0.006


def hot_population(n=100, hot_ids=(), load=1e8):
    """All-susceptible population; hot agents carry a flat high trajectory."""
    agents = [Agent(i, Compartment.SUSCEPTIBLE_UNVACCINATED) for i in range(n)]
    pop = Population(agents)
    profile = ViralLoadProfile(
        t0=0.5, V0=load, tP=1.0, VP=load, tS=0.0, tF=50.0, VF=load, symptomatic=False
    )
    for i in hot_ids:
        pop.agent(i).viral_profile = profile
        pop.agent(i).exposure_day = 0
        pop.move(pop.agent(i), Compartment.INFECTIOUS_ASYMPTOMATIC)
    return pop


def test_run_testing_day_singletons():
    pop = hot_population(100)
    cfg = default_config(daysBetweenTesting=1, firstDayOfTesting=0, poolSize=1)
    pending, ledger = [], TestLedger()
    used = run_testing_day(pop, cfg, 7, pending, ledger, make_rng(1))
    assert used == 100
    assert len(pending) == 100
    assert ledger.tests_total == 100
    assert ledger.cost_total == 100 * cfg.costPerTest


def test_run_testing_day_no_positive_pools():
    pop = hot_population(100)  # every load is 0
    cfg = default_config(
        daysBetweenTesting=1, firstDayOfTesting=0, poolSize=5, fprSingle=0.0
    )
    pending, ledger = [], TestLedger()
    used = run_testing_day(pop, cfg, 7, pending, ledger, make_rng(2))
    assert used == 20
    assert len(pending) == 100
    assert all(not r.positive for r in pending)


def test_run_testing_day_dorfman_count_three_positive_pools():
    # 3 detectable agents, fnr 0, fpr 0: positive pools = pools holding them.
    # seed 0 scatters them into 3 distinct pools (asserted below), so the
    # ledger must read 20 stage-1 tests + 3*5 follow-ups.
    pop = hot_population(100, hot_ids=(10, 40, 70))
    cfg = default_config(
        daysBetweenTesting=1, firstDayOfTesting=0, poolSize=5,
        fprSingle=0.0, fnrSingle=0.0, detectionCut=100.0,
    )
    pending, ledger = [], TestLedger()
    used = run_testing_day(pop, cfg, 3, pending, ledger, make_rng(0))
    positives = [r for r in pending if r.positive]
    assert sorted(r.agent_id for r in positives) == [10, 40, 70]
    assert used == 35
    attributed = sum(r.tests_consumed_attributed for r in pending)
    assert attributed == pytest.approx(used)


def test_member_of_negative_pool_never_positive():
    # force stage 1 negative for every pool: all members must come back
    # negative even though they are detectable
    pop = hot_population(100, hot_ids=tuple(range(0, 100, 7)))
    cfg = default_config(
        daysBetweenTesting=1, firstDayOfTesting=0, poolSize=5,
        fprSingle=0.0, fnrSingle=1.0,
    )
    pending, ledger = [], TestLedger()
    used = run_testing_day(pop, cfg, 3, pending, ledger, make_rng(3))
    assert used == 20
    assert all(not r.positive for r in pending)


def test_delivery_delay():
    pending = [PendingTestResult(1, 7, 10, True)]
    assert deliver_results(pending, 9) == []
    due = deliver_results(pending, 10)
    assert [r.agent_id for r in due] == [1]
    assert pending == []


def test_delivery_immediate_when_no_delay():
    pop = hot_population(10)
    cfg = default_config(daysBetweenTesting=1, firstDayOfTesting=0, poolSize=1,
                         daysDelayTestResults=0)
    pending, ledger = [], TestLedger()
    run_testing_day(pop, cfg, 4, pending, ledger, make_rng(4))
    assert len(deliver_results(pending, 4)) == 10


def test_delivery_empty_queue():
    assert deliver_results([], 5) == []


def test_agents_with_pending_results_are_retested():
    pop = hot_population(10)
    cfg = default_config(daysBetweenTesting=1, firstDayOfTesting=0, poolSize=1,
                         daysDelayTestResults=3)
    pending, ledger = [], TestLedger()
    run_testing_day(pop, cfg, 0, pending, ledger, make_rng(5))
    run_testing_day(pop, cfg, 1, pending, ledger, make_rng(6))
    assert len(pending) == 20


def test_post_isolation_holdback():
    pop = hot_population(3)
    pop.agent(1).isolation_exit_day = 10
    cfg = default_config(noTestingPostIsolationDays=4)
    assert eligible_for_testing(pop, 1, 12, cfg) is False
    assert eligible_for_testing(pop, 1, 14, cfg) is True
    assert eligible_for_testing(pop, 0, 12, cfg) is True


def test_isolated_agents_are_not_tested():
    pop = hot_population(10)
    pop.move(pop.agent(0), Compartment.ISOLATED_SICK)
    pop.move(pop.agent(1), Compartment.ISOLATED_HEALTHY)
    cfg = default_config(daysBetweenTesting=1, firstDayOfTesting=0, poolSize=1)
    pending, ledger = [], TestLedger()
    used = run_testing_day(pop, cfg, 0, pending, ledger, make_rng(7))
    assert used == 8
    assert {r.agent_id for r in pending} == set(range(2, 10))
