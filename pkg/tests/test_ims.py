import numpy as np
import pytest

from gomea_core import Budgets, IMSConfig, IMSScheduler
from gomea_core import benchmarks as bm
from gomea_core.ims import Runner
from gomea_core.linkage import LinkageConfig


class StubPopulation:
    def __init__(self, index, size):
        self.index = index
        self.size = size
        self.generation = 0
        self.terminated = False
        self.termination_cause = None

    def terminate(self, cause):
        self.terminated = True
        self.termination_cause = cause


def make_scheduler(c=4, max_populations=25, log=None):
    log = log if log is not None else []

    def create(index):
        return StubPopulation(index, 2 * 2**index)

    def run(pop):
        pop.generation += 1
        log.append(pop.index)

    return IMSScheduler(
        IMSConfig(base_population_size=2, subgeneration_factor=c, max_populations=max_populations),
        create,
        run,
    ), log


def unrolled_schedule(c, steps):
    """Reference unrolling of the interleaving rule, independent of the
    scheduler: population j+1 runs once whenever j completes a multiple of c."""
    log = []
    counts = {}

    def advance(j):
        counts[j] = counts.get(j, 0) + 1
        log.append(j)
        if counts[j] % c == 0:
            advance(j + 1)

    while len(log) < steps:
        advance(0)
    return log[:steps]


class TestSchedule:
    def test_first_30_generations_match_unrolled_pattern(self):
        scheduler, log = make_scheduler(c=4)
        while len(log) < 30:
            scheduler.step()
        assert log[:30] == unrolled_schedule(4, 30)
        # Spot-check the documented prefix: four of P0, then one of P1.
        assert log[:10] == [0, 0, 0, 0, 1, 0, 0, 0, 0, 1]

    def test_floor_invariant_after_every_step(self):
        scheduler, log = make_scheduler(c=4)
        for _ in range(200):
            scheduler.step()
            gens = [p.generation for p in scheduler.populations]
            for j in range(len(gens) - 1):
                assert gens[j + 1] == gens[j] // 4

    def test_population_sizes_double(self):
        scheduler, _ = make_scheduler(c=2)
        for _ in range(40):
            scheduler.step()
        sizes = [p.size for p in scheduler.populations]
        assert sizes == [2 * 2**j for j in range(len(sizes))]
        assert len(sizes) >= 3

    def test_max_populations_one_disables_interleaving(self):
        scheduler, log = make_scheduler(c=4, max_populations=1)
        for _ in range(25):
            scheduler.step()
        assert set(log) == {0}
        assert len(scheduler.populations) == 1

    def test_terminated_population_is_skipped(self):
        scheduler, log = make_scheduler(c=4)
        for _ in range(10):
            scheduler.step()
        scheduler.populations[0].terminate("converged")
        frozen = scheduler.populations[0].generation
        for _ in range(10):
            scheduler.step()
        assert scheduler.populations[0].generation == frozen
        assert scheduler.populations[1].generation > 0

    def test_all_terminated_creates_next(self):
        scheduler, log = make_scheduler(c=4, max_populations=3)
        scheduler.step()
        scheduler.populations[0].terminate("converged")
        assert scheduler.step()
        assert len(scheduler.populations) == 2
        scheduler.populations[1].terminate("converged")
        assert scheduler.step()
        assert len(scheduler.populations) == 3
        scheduler.populations[2].terminate("converged")
        assert not scheduler.step()
        assert scheduler.exhausted


class TestRunnerTermination:
    def test_vtr_stop(self):
        problem = bm.trap_problem(20, 5)
        runner = Runner(
            problem,
            "gbo",
            LinkageConfig.static_linkage_tree(),
            budgets=Budgets(max_evaluations=1e6),
            seed=0,
        )
        stats = runner.run()
        assert stats.metadata["termination_reason"] == "value_to_reach"
        assert runner.best.objective == 20.0

    def test_evaluation_budget_stop_with_bounded_overshoot(self):
        problem = bm.trap_problem(30, 5)
        runner = Runner(
            problem,
            "gbo",
            LinkageConfig.univariate(),
            budgets=Budgets(max_evaluations=50.0, vtr=1e18),
            seed=1,
        )
        stats = runner.run()
        assert stats.metadata["termination_reason"] == "max_evaluations"
        # Overshoot is bounded by one generation of the largest population.
        largest = max(p.size for p in runner.scheduler.populations)
        assert runner.counter.total < 50.0 + largest * (1 + 6)

    def test_max_seconds_stop(self):
        ticker = iter(range(100000))

        def clock():
            return float(next(ticker))

        problem = bm.trap_problem(30, 5)
        runner = Runner(
            problem,
            "gbo",
            LinkageConfig.univariate(),
            budgets=Budgets(max_seconds=25.0, vtr=1e18),
            seed=1,
            clock=clock,
        )
        stats = runner.run()
        assert stats.metadata["termination_reason"] == "max_seconds"

    def test_max_generations_cap(self):
        # Real-valued populations reach the cap instead of converging first.
        problem = bm.rosenbrock_problem(6)
        runner = Runner(
            problem,
            "gbo",
            LinkageConfig.univariate(),
            ims=IMSConfig(base_population_size=8, subgeneration_factor=4, max_populations=2),
            budgets=Budgets(max_generations=5),
            seed=3,
        )
        stats = runner.run()
        assert stats.metadata["termination_reason"] == "max_generations"
        for pop in runner.scheduler.populations:
            assert pop.generation <= 5

    def test_global_elitist_is_best_over_all_populations(self):
        problem = bm.trap_problem(20, 5)
        runner = Runner(
            problem,
            "gbo",
            LinkageConfig.static_linkage_tree(),
            budgets=Budgets(max_evaluations=2e4, vtr=1e18),
            seed=5,
        )
        runner.run()
        best = max(
            (p.elitist.objective for p in runner.scheduler.populations), default=None
        )
        assert runner.best.objective == best

    def test_defaults_per_domain(self):
        assert IMSConfig.defaults_for("discrete") == IMSConfig(2, 4, 25)
        assert IMSConfig.defaults_for("real") == IMSConfig(10, 8, 25)
