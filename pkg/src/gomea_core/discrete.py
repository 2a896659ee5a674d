"""Discrete gene-pool optimal mixing.

Each generation walks every solution through the family of linkage sets in
random order, copying donor values per set and keeping only changes that do
not degrade fitness. A solution whose full pass changes nothing retries
with the elitist as donor and finally becomes a copy of the elitist, so no
population member can stall forever.
"""

from __future__ import annotations

import numpy as np

from .core import RngStream, random_discrete_genotype
from .fitness import Evaluator, Solution, _strictly_better
from .linkage import FOS, LinkageModel

STAGNATION_LIMIT = 100


class DiscretePopulation:
    """One interleaved population of evaluated solutions."""

    __slots__ = (
        "index",
        "solutions",
        "maximize",
        "elitist",
        "generation",
        "terminated",
        "termination_cause",
        "stagnation",
    )

    def __init__(self, index: int, solutions: list[Solution], maximize: bool = True):
        self.index = index
        self.solutions = solutions
        self.maximize = maximize
        self.elitist = solutions[0].clone()
        self.generation = 0
        self.terminated = False
        self.termination_cause: str | None = None
        self.stagnation = 0
        for sol in solutions[1:]:
            self._consider_for_elitist(sol)

    @property
    def size(self) -> int:
        return len(self.solutions)

    def mean_objective(self) -> float:
        return float(np.mean([s.objective for s in self.solutions]))

    def _consider_for_elitist(self, sol: Solution) -> bool:
        e = self.elitist
        if _strictly_better(
            sol.objective, sol.constraint, e.objective, e.constraint, self.maximize
        ):
            self.elitist = sol.clone()
            return True
        return False

    def terminate(self, cause: str) -> None:
        self.terminated = True
        self.termination_cause = cause


def init_population(n: int, evaluator: Evaluator, rng: RngStream, index: int = 0) -> DiscretePopulation:
    """Uniform random binary population, fully evaluated (n units)."""
    problem = evaluator.problem
    solutions = []
    for _ in range(n):
        genotype = random_discrete_genotype(problem.ell, problem.alphabet_size, rng)
        sol = evaluator.new_solution(genotype)
        evaluator.evaluate(sol)
        solutions.append(sol)
    return DiscretePopulation(index, solutions, maximize=evaluator.maximize)


def _mixing_pass(
    child: Solution,
    fos: FOS,
    rng: RngStream,
    evaluator: Evaluator,
    donors: list[Solution] | None,
    elitist: Solution | None,
) -> bool:
    """One pass over the linkage sets; returns whether the genotype changed.

    With ``donors`` set, a donor is drawn per linkage set; otherwise the
    elitist serves as the sole donor (forced-improvement pass).
    """
    gen = rng.gen
    sets = fos.sets
    order = gen.permutation(len(sets))
    if donors is not None:
        donor_ids = gen.integers(0, len(donors), size=len(sets))
    accepts = evaluator.accepts
    try_changes = evaluator.try_changes
    revert = evaluator.revert
    cg = child.genotype
    changed = False
    for t in range(len(order)):
        linkage_set = sets[order[t]]
        donor = donors[donor_ids[t]] if donors is not None else elitist
        dg = donor.genotype
        idxs = [u for u in linkage_set if dg[u] != cg[u]]
        if not idxs:
            continue
        vals = [dg[u] for u in idxs]
        old_obj = child.objective
        old_cons = child.constraint
        undo = try_changes(child, idxs, vals)
        if accepts(child.objective, child.constraint, old_obj, old_cons):
            changed = True
        else:
            revert(child, undo)
    return changed


def gom_discrete(
    parent: Solution,
    fos: FOS,
    donors: list[Solution],
    rng: RngStream,
    evaluator: Evaluator,
    elitist: Solution,
) -> Solution:
    """Produce the offspring of ``parent`` by optimal mixing; never worse."""
    child = parent.clone()
    changed = _mixing_pass(child, fos, rng, evaluator, donors, None)
    if not changed:
        changed = _mixing_pass(child, fos, rng, evaluator, None, elitist)
    if not changed:
        child = elitist.clone()
    return child


def run_generation_discrete(
    pop: DiscretePopulation,
    linkage_model: LinkageModel,
    evaluator: Evaluator,
    rng: RngStream,
) -> None:
    """Relearn the linkage model if applicable, then mix every solution."""
    genotypes = None
    if linkage_model.relearns_each_generation:
        genotypes = np.stack([s.genotype for s in pop.solutions])
    fos = linkage_model.build(genotypes, rng)
    improved = False
    for i in range(pop.size):
        child = gom_discrete(
            pop.solutions[i], fos, pop.solutions, rng, evaluator, pop.elitist
        )
        pop.solutions[i] = child
        if pop._consider_for_elitist(child):
            improved = True
    pop.generation += 1
    pop.stagnation = 0 if improved else pop.stagnation + 1
    first = pop.solutions[0].genotype
    if all(np.array_equal(s.genotype, first) for s in pop.solutions[1:]):
        pop.terminate("converged")
    elif pop.stagnation >= STAGNATION_LIMIT:
        pop.terminate("stagnation")
