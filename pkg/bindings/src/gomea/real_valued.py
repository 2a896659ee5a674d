"""Real-valued optimization front end."""

from __future__ import annotations

from dataclasses import dataclass, field

from gomea_core import Budgets, ConfigurationError, IMSConfig, RVConfig, Runner

from .fitness import FitnessFunction, bind
from .linkage import LinkageModel, StaticLinkageTree
from .output import OutputStatistics


@dataclass
class Config:
    """All input parameters of a real-valued run."""

    fitness: FitnessFunction
    linkage_model: LinkageModel = field(default_factory=StaticLinkageTree)
    max_number_of_populations: int = 25
    base_population_size: int = 10
    IMS_subgeneration_factor: int = 8
    max_number_of_generations: int = -1
    max_number_of_evaluations: float = -1.0
    max_number_of_seconds: float = -1.0
    random_seed: int = -1
    lower_init_range: float = 0.0
    upper_init_range: float = 1.0


class RealValuedGOMEA:
    """Gene-pool optimal mixing over real variables (minimization)."""

    expected_domain = "real"

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
        rv = RVConfig(
            lower_init_range=cfg.lower_init_range,
            upper_init_range=cfg.upper_init_range,
        )
        seed = None if cfg.random_seed < 0 else cfg.random_seed
        return Runner(
            problem,
            mode,
            cfg.linkage_model.to_config(),
            ims=ims,
            budgets=budgets,
            rv=rv,
            seed=seed,
        )

    def run(self) -> OutputStatistics:
        stats = self._runner().run()
        return OutputStatistics.from_run(stats)
