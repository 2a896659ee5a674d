"""Discrete optimization front end."""

from __future__ import annotations

from dataclasses import dataclass, field

from gomea_core import Budgets, ConfigurationError, IMSConfig, Runner

from .fitness import FitnessFunction, bind
from .linkage import LinkageModel, StaticLinkageTree
from .output import OutputStatistics


@dataclass
class Config:
    """All input parameters of a discrete run."""

    fitness: FitnessFunction
    linkage_model: LinkageModel = field(default_factory=StaticLinkageTree)
    max_number_of_populations: int = 25
    base_population_size: int = 2
    IMS_subgeneration_factor: int = 4
    max_number_of_generations: int = -1
    max_number_of_evaluations: float = -1.0
    max_number_of_seconds: float = -1.0
    random_seed: int = -1


class DiscreteGOMEA:
    """Gene-pool optimal mixing over discrete variables (maximization)."""

    expected_domain = "discrete"

    def __init__(self, fitness: FitnessFunction, **parameters):
        self.config = Config(fitness=fitness, **parameters)

    def _runner(self) -> Runner:
        cfg = self.config
        problem, mode = bind(cfg.fitness)
        if problem.domain != self.expected_domain:
            raise ConfigurationError(
                f"{type(self).__name__} needs a {self.expected_domain} fitness function"
            )
        ims = IMSConfig(
            base_population_size=cfg.base_population_size,
            subgeneration_factor=cfg.IMS_subgeneration_factor,
            max_populations=cfg.max_number_of_populations,
        )
        budgets = Budgets(
            max_generations=cfg.max_number_of_generations,
            max_evaluations=cfg.max_number_of_evaluations,
            max_seconds=cfg.max_number_of_seconds,
        )
        seed = None if cfg.random_seed < 0 else cfg.random_seed
        return Runner(
            problem,
            mode,
            cfg.linkage_model.to_config(),
            ims=ims,
            budgets=budgets,
            seed=seed,
        )

    def run(self) -> OutputStatistics:
        stats = self._runner().run()
        return OutputStatistics.from_run(stats)
