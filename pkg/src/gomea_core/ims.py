"""Interleaved multi-start scheduling and the top-level run driver.

Populations of exponentially doubling size run generations in an
interleaved fashion: after every ``subgeneration_factor`` generations of a
population, the next larger population runs one generation, created lazily
on first need. Budgets are checked between generations, so overshoot is
bounded by one generation's worth of evaluations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

from .core import ConfigurationError, make_rng
from .discrete import init_population, run_generation_discrete
from .fitness import EvaluationCounter, Evaluator, Problem, Solution, _strictly_better
from .linkage import LinkageConfig, LinkageModel, linkage_spec_string
from .realvalued import RVConfig, init_population_rv, run_generation_rv
from .stats import RECORD_EVERY, RunStatistics


@dataclass
class IMSConfig:
    """Interleaving parameters; set ``max_populations=1`` to disable."""

    base_population_size: int = 2
    subgeneration_factor: int = 4
    max_populations: int = 25

    def __post_init__(self):
        if self.base_population_size < 1:
            raise ConfigurationError("base population size must be >= 1")
        if self.subgeneration_factor < 1:
            raise ConfigurationError("subgeneration factor must be >= 1")
        if self.max_populations < 1:
            raise ConfigurationError("max_populations must be >= 1")

    @classmethod
    def defaults_for(cls, domain: str) -> "IMSConfig":
        if domain == "discrete":
            return cls(base_population_size=2, subgeneration_factor=4)
        return cls(base_population_size=10, subgeneration_factor=8)


@dataclass
class Budgets:
    """Run limits; non-positive values mean no limit, ``vtr`` overrides the
    problem's value-to-reach."""

    max_generations: int = -1
    max_evaluations: float = -1.0
    max_seconds: float = -1.0
    vtr: float | None = None


class IMSScheduler:
    """Drives the interleaved schedule over population objects.

    Populations only need ``generation``/``terminated`` attributes; creation
    and per-generation work are delegated to callbacks so the schedule can
    be exercised in isolation.
    """

    def __init__(
        self,
        config: IMSConfig,
        create_population: Callable[[int], object],
        run_generation: Callable[[object], None],
        on_generation: Callable[[object], bool] = lambda pop: False,
    ):
        self.config = config
        self.create_population = create_population
        self.run_generation = run_generation
        self.on_generation = on_generation
        self.populations: list = []
        self.scheduled: list[int] = []
        self.stop_requested = False

    @property
    def exhausted(self) -> bool:
        return len(self.populations) >= self.config.max_populations and all(
            p.terminated for p in self.populations
        )

    def step(self) -> bool:
        """Run one scheduling step; returns False when nothing can run."""
        if self.stop_requested or self.exhausted:
            return False
        base = len(self.populations)
        for j, pop in enumerate(self.populations):
            if not pop.terminated:
                base = j
                break
        if base >= self.config.max_populations:
            return False
        self._advance(base)
        return True

    def _advance(self, j: int) -> None:
        if self.stop_requested or j >= self.config.max_populations:
            return
        if j == len(self.populations):
            self.populations.append(self.create_population(j))
            self.scheduled.append(0)
        self.scheduled[j] += 1
        pop = self.populations[j]
        if not pop.terminated:
            self.run_generation(pop)
            if self.on_generation(pop):
                self.stop_requested = True
                return
        if self.scheduled[j] % self.config.subgeneration_factor == 0:
            self._advance(j + 1)


class Runner:
    """One optimization run: populations, schedule, budgets, statistics."""

    def __init__(
        self,
        problem: Problem,
        mode: str = "gbo",
        linkage: LinkageConfig | None = None,
        ims: IMSConfig | None = None,
        budgets: Budgets | None = None,
        rv: RVConfig | None = None,
        seed: int | None = None,
        clock: Callable[[], float] = time.perf_counter,
    ):
        self.problem = problem
        self.mode = mode
        self.linkage_config = linkage or LinkageConfig.static_linkage_tree()
        self.ims_config = ims or IMSConfig.defaults_for(problem.domain)
        self.budgets = budgets or Budgets()
        self.rv_config = rv or RVConfig()
        self.clock = clock
        self.rng = make_rng(seed)
        self.counter = EvaluationCounter(clock=clock)
        self.evaluator = Evaluator(problem, mode, self.counter)
        self.linkage_model = LinkageModel(self.linkage_config, problem, mode)
        self.vtr = self.budgets.vtr if self.budgets.vtr is not None else problem.vtr
        self.best: Solution | None = None
        self.start_time = 0.0
        self._last_pop = None
        self.scheduler = IMSScheduler(
            self.ims_config,
            self._create_population,
            self._run_generation,
            self._after_generation,
        )
        self.stats = RunStatistics(self._metadata())

    def _metadata(self) -> dict:
        b = self.budgets
        config_echo = ";".join(
            (
                f"problem={self.problem.name}",
                f"ell={self.problem.ell}",
                f"domain={self.problem.domain}",
                f"mode={self.mode}",
                f"linkage={linkage_spec_string(self.linkage_config)}",
                f"base_population_size={self.ims_config.base_population_size}",
                f"subgeneration_factor={self.ims_config.subgeneration_factor}",
                f"max_populations={self.ims_config.max_populations}",
                f"max_generations={b.max_generations}",
                f"max_evaluations={b.max_evaluations}",
                f"max_seconds={b.max_seconds}",
                f"vtr={self.vtr}",
            )
        )
        return {"seed": self.rng.seed, "config": config_echo}

    def _create_population(self, index: int):
        size = self.ims_config.base_population_size * (2**index)
        if self.problem.domain == "discrete":
            return init_population(size, self.evaluator, self.rng, index)
        return init_population_rv(size, self.evaluator, self.rv_config, self.rng, index)

    def _run_generation(self, pop) -> None:
        if self.problem.domain == "discrete":
            run_generation_discrete(pop, self.linkage_model, self.evaluator, self.rng)
        else:
            run_generation_rv(
                pop, self.linkage_model, self.evaluator, self.rv_config, self.rng
            )

    def _after_generation(self, pop) -> bool:
        if (
            self.budgets.max_generations > 0
            and pop.generation >= self.budgets.max_generations
            and not pop.terminated
        ):
            pop.terminate("max_generations")
        self._update_best(pop.elitist)
        self._last_pop = pop
        ims_enabled = self.ims_config.max_populations > 1
        if not ims_enabled or pop.generation % RECORD_EVERY == 0:
            self._record(pop)
        self._cull_dominated_populations()
        return self.check_termination() is not None

    def _record(self, pop) -> None:
        self.stats.record_point(
            generation=pop.generation,
            evaluations=self.counter.total,
            time=self.clock() - self.start_time,
            eval_time=self.counter.eval_seconds,
            population_index=pop.index,
            population_size=pop.size,
            best_obj_val=self.best.objective,
            best_cons_val=self.best.constraint,
        )

    def _update_best(self, candidate: Solution) -> None:
        if self.best is None or _strictly_better(
            candidate.objective,
            candidate.constraint,
            self.best.objective,
            self.best.constraint,
            self.evaluator.maximize,
        ):
            self.best = candidate.clone()

    def _cull_dominated_populations(self) -> None:
        # A population dies when any larger one has a strictly better mean.
        live = [p for p in self.scheduler.populations if not p.terminated]
        if len(live) < 2:
            return
        means = {p.index: p.mean_objective() for p in live}
        maximize = self.evaluator.maximize
        for p in live:
            for other in live:
                if other.size <= p.size or other is p:
                    continue
                better = (
                    means[other.index] > means[p.index]
                    if maximize
                    else means[other.index] < means[p.index]
                )
                if better:
                    p.terminate("culled")
                    break

    def check_termination(self) -> str | None:
        if self.best is not None and self._vtr_reached():
            return "value_to_reach"
        if 0 < self.budgets.max_evaluations <= self.counter.total:
            return "max_evaluations"
        if 0 < self.budgets.max_seconds <= self.clock() - self.start_time:
            return "max_seconds"
        if self.scheduler.populations and self.scheduler.exhausted:
            causes = {p.termination_cause for p in self.scheduler.populations}
            return "max_generations" if causes == {"max_generations"} else "converged"
        return None

    def _vtr_reached(self) -> bool:
        if self.vtr is None or self.best is None or self.best.constraint > 0.0:
            return False
        if self.evaluator.maximize:
            return self.best.objective >= self.vtr
        return self.best.objective <= self.vtr

    def run(self) -> RunStatistics:
        self.start_time = self.clock()
        while True:
            reason = self.check_termination()
            if reason is not None:
                break
            if not self.scheduler.step():
                reason = self.check_termination() or "converged"
                break
        self._record_final_state()
        self.stats.metadata["termination_reason"] = reason
        return self.stats

    def _record_final_state(self) -> None:
        # The periodic cadence can leave the last data point behind the run's
        # end state (a value-to-reach hit between recording points, say), so
        # the terminal state gets one closing record unless it is already
        # there.
        pop = self._last_pop
        if pop is None:
            return
        if self.stats.records:
            last = self.stats.records[-1]
            if (
                last.generation == pop.generation
                and last.population_index == pop.index
                and last.evaluations == round(self.counter.total, 3)
                and last.best_obj_val == self.best.objective
            ):
                return
        self._record(pop)


def optimize(
    problem: Problem,
    mode: str = "gbo",
    linkage: LinkageConfig | None = None,
    ims: IMSConfig | None = None,
    budgets: Budgets | None = None,
    rv: RVConfig | None = None,
    seed: int | None = None,
    clock: Callable[[], float] = time.perf_counter,
) -> RunStatistics:
    """Run one optimization and return its statistics."""
    return Runner(problem, mode, linkage, ims, budgets, rv, seed, clock).run()
