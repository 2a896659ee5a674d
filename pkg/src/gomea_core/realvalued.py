"""Real-valued gene-pool optimal mixing.

Per linkage set, a maximum-likelihood Gaussian is estimated over the best
fraction of the population and sampled to propose new values, scaled by an
adaptive per-set distribution multiplier. Conditional families sample a set
given the current values of its graph neighbors using the Gaussian
conditional law; the full element of a conditional family is sampled by
ancestral traversal of the clique factorization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, RngStream, random_real_genotype
from .fitness import Evaluator, Solution, _strictly_better
from .linkage import FOS, LinkageModel

STAGNATION_LIMIT = 100

MULTIPLIER_EXPAND = 1.1
MULTIPLIER_DECAY = 0.9

# Generations without elitist improvement before a set's multiplier may
# shrink below 1; earlier decay bottoms out at 1 so exploration survives.
SHRINK_GATE = 25


@dataclass
class RVConfig:
    """Initialization range, selection fraction, and multiplier bounds."""

    lower_init_range: float = 0.0
    upper_init_range: float = 1.0
    selection_fraction: float = 0.35
    multiplier_floor: float = 1e-10
    multiplier_cap: float = 1e3

    def __post_init__(self):
        if not self.lower_init_range < self.upper_init_range:
            raise ConfigurationError(
                f"init range [{self.lower_init_range}, {self.upper_init_range}) is empty"
            )
        if not 0.0 < self.selection_fraction <= 1.0:
            raise ConfigurationError("selection fraction must be in (0, 1]")


def _regularized(cov: np.ndarray) -> np.ndarray:
    d = cov.shape[0]
    eps = 1e-12 * (1.0 + float(np.trace(cov)) / d)
    return cov + eps * np.eye(d)


def _safe_cholesky(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular factor; escalates diagonal jitter on failure."""
    d = cov.shape[0]
    if d == 1:
        return np.array([[math.sqrt(max(float(cov[0, 0]), 0.0))]])
    jitter = 1e-12 * (1.0 + float(np.trace(cov)) / d)
    for _ in range(12):
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(d))
        except np.linalg.LinAlgError:
            jitter *= 10.0
    # Degenerate beyond repair: fall back to independent standard deviations.
    return np.diag(np.sqrt(np.clip(np.diag(cov), 0.0, None)))


class GaussianFactor:
    """ML Gaussian over a set of variable indices.

    ``mean0``/``dev0`` carry the scalar mean and deviation for
    single-variable factors so sampling avoids array dispatch.
    """

    __slots__ = ("indices", "mean", "cov", "chol", "mean0", "dev0")

    def __init__(self, indices, mean: np.ndarray, cov: np.ndarray):
        self.indices = tuple(int(u) for u in indices)
        self.mean = np.asarray(mean, dtype=np.float64)
        self.cov = np.asarray(cov, dtype=np.float64)
        self.chol = _safe_cholesky(self.cov)
        if len(self.indices) == 1:
            self.mean0 = float(self.mean[0])
            self.dev0 = float(self.chol[0, 0])
        else:
            self.mean0 = self.dev0 = 0.0

    @classmethod
    def univariate(cls, index: int, mean: float, var: float) -> "GaussianFactor":
        factor = cls.__new__(cls)
        factor.indices = (int(index),)
        factor.mean = np.array([mean])
        factor.cov = np.array([[var]])
        factor.chol = np.array([[math.sqrt(max(var, 0.0))]])
        factor.mean0 = float(mean)
        factor.dev0 = math.sqrt(max(var, 0.0))
        return factor

    def sample(self, z: np.ndarray, multiplier: float = 1.0) -> np.ndarray:
        return self.mean + math.sqrt(multiplier) * (self.chol @ z)


def fit_gaussian(data: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Maximum-likelihood mean and covariance (regularized) of the rows."""
    data = np.asarray(data, dtype=np.float64)
    mean = data.mean(axis=0)
    centered = data - mean
    cov = (centered.T @ centered) / data.shape[0]
    return mean, _regularized(cov)


def rank_solutions(solutions: list[Solution], maximize: bool) -> list[int]:
    """Indices sorted best-first under constraint domination."""

    def key(i: int):
        s = solutions[i]
        infeasible = s.constraint > 0.0
        obj = -s.objective if maximize else s.objective
        return (infeasible, s.constraint if infeasible else 0.0, obj)

    return sorted(range(len(solutions)), key=key)


def select_top(solutions: list[Solution], tau: float, maximize: bool) -> np.ndarray:
    count = max(1, math.ceil(tau * len(solutions)))
    chosen = rank_solutions(solutions, maximize)[:count]
    return np.stack([solutions[i].genotype for i in chosen])


def estimate_factor(
    solutions: list[Solution],
    indices,
    tau: float = 0.35,
    maximize: bool = False,
) -> GaussianFactor:
    """Gaussian over ``indices`` fitted to the best ``ceil(tau*n)`` solutions."""
    if len(solutions) < 2:
        raise ConfigurationError("factor estimation needs a population of >= 2")
    data = select_top(solutions, tau, maximize)
    idx = list(indices)
    mean, cov = fit_gaussian(data[:, idx])
    return GaussianFactor(idx, mean, cov)


def conditional_gaussian(
    mean: np.ndarray,
    cov: np.ndarray,
    obs_pos,
    obs_vals: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian conditional law: free positions given observed ones."""
    d = len(mean)
    obs_pos = list(obs_pos)
    free_pos = [i for i in range(d) if i not in set(obs_pos)]
    if not obs_pos:
        return mean[free_pos], cov[np.ix_(free_pos, free_pos)]
    S_oo = _regularized(cov[np.ix_(obs_pos, obs_pos)])
    S_fo = cov[np.ix_(free_pos, obs_pos)]
    delta = np.asarray(obs_vals, dtype=np.float64) - mean[obs_pos]
    try:
        solved = np.linalg.solve(S_oo, np.column_stack([delta, S_fo.T]))
    except np.linalg.LinAlgError:
        solved, *_ = np.linalg.lstsq(S_oo, np.column_stack([delta, S_fo.T]), rcond=None)
    mean_c = mean[free_pos] + S_fo @ solved[:, 0]
    cov_c = cov[np.ix_(free_pos, free_pos)] - S_fo @ solved[:, 1:]
    cov_c = (cov_c + cov_c.T) / 2.0
    return mean_c, cov_c


class ConditionalSampler:
    """Conditional Gaussian with a fixed observation pattern.

    The gain matrix and residual covariance factor are precomputed; only the
    conditional mean depends on the observed values, so sampling is one
    small matrix-vector product per application.
    """

    __slots__ = ("free_idx", "obs_idx", "mean_free", "mean_obs", "gain", "chol")

    def __init__(self, joint_idx, mean: np.ndarray, cov: np.ndarray, n_free: int):
        self.free_idx = tuple(joint_idx[:n_free])
        self.obs_idx = tuple(joint_idx[n_free:])
        self.mean_free = mean[:n_free]
        self.mean_obs = mean[n_free:]
        if self.obs_idx:
            free_pos = list(range(n_free))
            obs_pos = list(range(n_free, len(joint_idx)))
            S_oo = _regularized(cov[np.ix_(obs_pos, obs_pos)])
            S_fo = cov[np.ix_(free_pos, obs_pos)]
            try:
                self.gain = np.linalg.solve(S_oo, S_fo.T).T
            except np.linalg.LinAlgError:
                self.gain = np.linalg.lstsq(S_oo, S_fo.T, rcond=None)[0].T
            cov_c = cov[np.ix_(free_pos, free_pos)] - self.gain @ S_fo.T
            cov_c = (cov_c + cov_c.T) / 2.0
        else:
            self.gain = None
            cov_c = cov[:n_free, :n_free]
        self.chol = _safe_cholesky(cov_c)

    def sample(self, genotype: np.ndarray, z: np.ndarray, multiplier: float) -> np.ndarray:
        mean = self.mean_free
        if self.gain is not None:
            mean = mean + self.gain @ (genotype[list(self.obs_idx)] - self.mean_obs)
        return mean + math.sqrt(multiplier) * (self.chol @ z)


class RealValuedPopulation:
    """One interleaved population of real-valued solutions."""

    __slots__ = (
        "index",
        "solutions",
        "elitist",
        "generation",
        "terminated",
        "termination_cause",
        "stagnation",
        "fos",
        "multipliers",
    )

    def __init__(self, index: int, solutions: list[Solution]):
        self.index = index
        self.solutions = solutions
        self.elitist = solutions[0].clone()
        self.generation = 0
        self.terminated = False
        self.termination_cause: str | None = None
        self.stagnation = 0
        self.fos: FOS | None = None
        self.multipliers: list[float] = []
        for sol in solutions[1:]:
            self._consider_for_elitist(sol)

    @property
    def size(self) -> int:
        return len(self.solutions)

    def mean_objective(self) -> float:
        return float(np.mean([s.objective for s in self.solutions]))

    def _consider_for_elitist(self, sol: Solution) -> bool:
        e = self.elitist
        if _strictly_better(sol.objective, sol.constraint, e.objective, e.constraint, False):
            self.elitist = sol.clone()
            return True
        return False

    def terminate(self, cause: str) -> None:
        self.terminated = True
        self.termination_cause = cause


def init_population_rv(
    n: int, evaluator: Evaluator, cfg: RVConfig, rng: RngStream, index: int = 0
) -> RealValuedPopulation:
    """Uniform random population in the init range, fully evaluated."""
    problem = evaluator.problem
    solutions = []
    for _ in range(n):
        genotype = random_real_genotype(
            problem.ell, cfg.lower_init_range, cfg.upper_init_range, rng
        )
        sol = evaluator.new_solution(genotype)
        evaluator.evaluate(sol)
        solutions.append(sol)
    return RealValuedPopulation(index, solutions)


def _estimate_models(fos: FOS, solutions: list[Solution], tau: float) -> list:
    """Per-element sampling models from the top-tau selection.

    Unconditional elements get a factor over their own indices; conditional
    elements a sampler conditioned on their neighbor variables; the full
    conditional element a sampler chain along the factorization, each factor
    observing exactly the variables assigned by its predecessors.
    """
    data = select_top(solutions, tau, maximize=False)
    ell = data.shape[1]

    def joint(indices) -> GaussianFactor:
        idx = list(indices)
        mean, cov = fit_gaussian(data[:, idx])
        return GaussianFactor(idx, mean, cov)

    def conditional(free, obs) -> ConditionalSampler:
        idx = list(free) + list(obs)
        mean, cov = fit_gaussian(data[:, idx])
        return ConditionalSampler(idx, mean, cov, len(free))

    if fos.conditioning is None:
        # Single-variable factors come straight from the column statistics.
        col_mean = data.mean(axis=0)
        col_var = data.var(axis=0)
        col_var = col_var + 1e-12 * (1.0 + col_var)
        return [
            GaussianFactor.univariate(s[0], col_mean[s[0]], col_var[s[0]])
            if len(s) == 1
            else joint(s)
            for s in fos.sets
        ]
    models = []
    for j, members in enumerate(fos.sets):
        cond = fos.conditioning[j]
        if len(members) == ell and not cond:
            # Ancestral chain: the traversal order fixes which variables are
            # already assigned when each factor samples.
            chain = []
            assigned: set[int] = set()
            for factor, fcond in fos.factorization:
                free = [u for u in factor if u not in assigned]
                if not free:
                    continue
                scope_obs = [u for u in factor + fcond if u in assigned]
                chain.append(conditional(free, scope_obs))
                assigned.update(free)
            models.append(chain)
        else:
            models.append(conditional(members, cond))
    return models


def _sample_full_conditional(
    chain: list[ConditionalSampler],
    genotype: np.ndarray,
    multiplier: float,
    rng: RngStream,
) -> tuple[np.ndarray, float]:
    """Ancestral sampling of all variables along the factorization chain."""
    newx = genotype.copy()
    gen = rng.gen
    zmax = 0.0
    for sampler in chain:
        z = gen.standard_normal(len(sampler.free_idx))
        vals = sampler.sample(newx, z, multiplier)
        for u, v in zip(sampler.free_idx, vals):
            newx[u] = v
        m = float(np.max(np.abs(z)))
        if m > zmax:
            zmax = m
    return newx, zmax


def _set_layout(fos: FOS) -> tuple[list[int], int]:
    """Flat offsets of each set in a per-pass batch of normal draws."""
    offsets = []
    total = 0
    for members in fos.sets:
        offsets.append(total)
        total += len(members)
    return offsets, total


def _sampling_pass(
    child: Solution,
    fos: FOS,
    models: list,
    multipliers: list[float],
    accept_counts: list[int],
    rng: RngStream,
    evaluator: Evaluator,
    elitist: Solution,
    cfg: RVConfig,
    layout: tuple[list[int], int] | None = None,
) -> bool:
    """One pass of per-set resampling; returns whether any change stuck."""
    gen = rng.gen
    sets = fos.sets
    order = gen.permutation(len(sets))
    accepts = evaluator.accepts
    try_changes = evaluator.try_changes
    revert = evaluator.revert
    cg = child.genotype
    ell = len(cg)
    best_obj = elitist.objective
    best_cons = elitist.constraint
    changed = False
    conditional = fos.conditioning is not None
    draws = None
    offsets = None
    if not conditional:
        if layout is None:
            layout = _set_layout(fos)
        offsets, total = layout
        draws = gen.standard_normal(total)
    for j in order:
        members = sets[j]
        mult = multipliers[j]
        model = models[j]
        if conditional:
            cond = fos.conditioning[j]
            if len(members) == ell and not cond:
                newx, zmax = _sample_full_conditional(model, cg, mult, rng)
                idxs = [u for u in range(ell) if newx[u] != cg[u]]
                vals = [newx[u] for u in idxs]
            else:
                z = gen.standard_normal(len(members))
                sampled = model.sample(cg, z, mult)
                zmax = float(np.max(np.abs(z)))
                idxs = [u for u, v in zip(members, sampled) if v != cg[u]]
                vals = [v for u, v in zip(members, sampled) if v != cg[u]]
        elif len(members) == 1:
            # Scalar fast path: one variable, one pre-drawn deviate.
            z = draws[offsets[j]]
            u = members[0]
            v = model.mean0 + math.sqrt(mult) * model.dev0 * z
            zmax = -z if z < 0.0 else z
            if v != cg[u]:
                idxs = [u]
                vals = [v]
            else:
                idxs = ()
        else:
            off = offsets[j]
            z = draws[off : off + len(members)]
            sampled = model.sample(z, mult)
            zmax = float(np.max(np.abs(z)))
            idxs = [u for u, v in zip(members, sampled) if v != cg[u]]
            vals = [v for u, v in zip(members, sampled) if v != cg[u]]
        if not idxs:
            # Degenerate distribution repeating the parent: accepted as equal.
            continue
        old_obj = child.objective
        old_cons = child.constraint
        undo = try_changes(child, idxs, vals)
        new_obj = child.objective
        new_cons = child.constraint
        if accepts(new_obj, new_cons, old_obj, old_cons):
            changed = True
            if _strictly_better(new_obj, new_cons, old_obj, old_cons, False):
                accept_counts[j] += 1
            if _strictly_better(new_obj, new_cons, best_obj, best_cons, False):
                best_obj = new_obj
                best_cons = new_cons
                if zmax > 1.0:
                    multipliers[j] = min(
                        cfg.multiplier_cap, multipliers[j] * MULTIPLIER_EXPAND
                    )
        else:
            revert(child, undo)
    return changed


def _elitist_pass(
    child: Solution,
    fos: FOS,
    rng: RngStream,
    evaluator: Evaluator,
    elitist: Solution,
) -> bool:
    """Forced improvement: copy elitist values per set, keeping what helps."""
    gen = rng.gen
    accepts = evaluator.accepts
    cg = child.genotype
    eg = elitist.genotype
    changed = False
    for j in gen.permutation(len(fos.sets)):
        members = fos.sets[j]
        idxs = [u for u in members if eg[u] != cg[u]]
        if not idxs:
            continue
        vals = [eg[u] for u in idxs]
        old_obj = child.objective
        old_cons = child.constraint
        undo = evaluator.try_changes(child, idxs, vals)
        if accepts(child.objective, child.constraint, old_obj, old_cons):
            changed = True
        else:
            evaluator.revert(child, undo)
    return changed


def gom_rv(
    parent: Solution,
    fos: FOS,
    models: list,
    multipliers: list[float],
    accept_counts: list[int],
    rng: RngStream,
    evaluator: Evaluator,
    elitist: Solution,
    cfg: RVConfig,
    layout: tuple[list[int], int] | None = None,
) -> Solution:
    """Optimal mixing of one solution by per-set Gaussian resampling.

    A solution whose sampling pass changes nothing falls back to copying
    elitist values per set, and finally to a copy of the elitist itself.
    """
    child = parent.clone()
    changed = _sampling_pass(
        child, fos, models, multipliers, accept_counts, rng, evaluator, elitist, cfg, layout
    )
    if not changed:
        changed = _elitist_pass(child, fos, rng, evaluator, elitist)
    if not changed:
        child = elitist.clone()
    return child


def run_generation_rv(
    pop: RealValuedPopulation,
    linkage_model: LinkageModel,
    evaluator: Evaluator,
    cfg: RVConfig,
    rng: RngStream,
) -> None:
    """Relearn if applicable, estimate factors, and mix every solution."""
    genotypes = None
    if linkage_model.relearns_each_generation:
        genotypes = np.stack([s.genotype for s in pop.solutions])
    fos = linkage_model.build(genotypes, rng)
    if fos is not pop.fos:
        pop.fos = fos
        pop.multipliers = [1.0] * len(fos.sets)
    models = _estimate_models(fos, pop.solutions, cfg.selection_fraction)
    accept_counts = [0] * len(fos.sets)
    layout = None if fos.conditioning is not None else _set_layout(fos)
    improved = False
    for i in range(pop.size):
        child = gom_rv(
            pop.solutions[i],
            fos,
            models,
            pop.multipliers,
            accept_counts,
            rng,
            evaluator,
            pop.elitist,
            cfg,
            layout,
        )
        pop.solutions[i] = child
        if pop._consider_for_elitist(child):
            improved = True
    pop.generation += 1
    pop.stagnation = 0 if improved else pop.stagnation + 1
    # Sets that produced no improving accepts decay; while the population is
    # still making elitist progress the decay bottoms out at 1 so the model
    # variance stays driven by selection, not by rejection streaks.
    floor = cfg.multiplier_floor if pop.stagnation > SHRINK_GATE else 1.0
    for j, count in enumerate(accept_counts):
        if count == 0:
            pop.multipliers[j] = max(floor, pop.multipliers[j] * MULTIPLIER_DECAY)
        elif pop.multipliers[j] < 1.0:
            pop.multipliers[j] = 1.0
    # Exact genotype identity is not a useful stop here: forced improvement
    # clones stalled solutions onto the elitist while the multipliers are
    # still adapting the sampling scale downward. Stagnation alone decides.
    if pop.stagnation >= STAGNATION_LIMIT:
        pop.terminate("stagnation")
