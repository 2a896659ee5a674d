"""Acceptance suite for the binding layer, one printed line per criterion."""

import time
from contextlib import contextmanager

import numpy as np
import pytest

import gomea
from gomea.fitness import (
    BBOFitnessFunctionDiscrete,
    GBOFitnessFunctionDiscrete,
    bind_bbo,
    bind_gbo,
)
from gomea_core import Evaluator
from gomea_core import benchmarks as native


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


class ConcatTrapGBO(gomea.fitness.GBOFitnessFunctionDiscrete):
    """The canonical gray-box trap written against the user API."""

    def __new__(cls, number_of_variables, k, **kwargs):
        assert number_of_variables % k == 0
        return super().__new__(cls, number_of_variables)

    def __init__(self, number_of_variables, k, **kwargs):
        super().__init__(number_of_variables, **kwargs)
        self.k = k

    def number_of_subfunctions(self) -> int:
        return self.number_of_variables // self.k

    def inputs_to_subfunction(self, subf_index):
        return range(self.k * subf_index, self.k * subf_index + self.k)

    def subfunction(self, subf_index, variables) -> float:
        trap_vars = variables[self.inputs_to_subfunction(subf_index)]
        unitation = np.sum(trap_vars)
        if unitation == self.k:
            return unitation
        return self.k - unitation - 1


class ConcatTrapBBO(BBOFitnessFunctionDiscrete):
    """Black-box trap: the whole objective per evaluation, block by block."""

    def __init__(self, number_of_variables, k, **kwargs):
        super().__init__(number_of_variables, **kwargs)
        self.k = k

    def objective_function(self, objective_index, variables) -> float:
        total = 0.0
        for start in range(0, self.number_of_variables, self.k):
            unitation = np.sum(variables[start : start + self.k])
            total += unitation if unitation == self.k else self.k - unitation - 1
        return total


def test_binding_equivalence():
    with criterion("binding equivalence: bound trap == native trap on 1000 genotypes"):
        bound = bind_gbo(ConcatTrapGBO(40, 5))
        native_problem = native.trap_problem(40, 5)
        bound_eval = Evaluator(bound, "gbo")
        native_eval = Evaluator(native_problem, "gbo")
        rng = np.random.default_rng(17)
        for _ in range(1000):
            x = rng.integers(0, 2, size=40).astype(np.int64)
            a = bound_eval.new_solution(x.copy())
            bound_eval.evaluate(a)
            b = native_eval.new_solution(x.copy())
            native_eval.evaluate(b)
            assert a.objective == b.objective

    with criterion("end-to-end run: Rosenbrock(20) + univariate reaches 1e-10"):
        frv = gomea.fitness.RosenbrockFunction(20, value_to_reach=1e-10)
        lm = gomea.linkage.Univariate()
        rvgom = gomea.RealValuedGOMEA(
            fitness=frv,
            linkage_model=lm,
            random_seed=1,
            max_number_of_evaluations=1e8,
            max_number_of_seconds=420,
        )
        result = rvgom.run()
        assert result.metadata["termination_reason"] == "value_to_reach"
        evals = result["evaluations"]
        assert all(a <= b for a, b in zip(evals, evals[1:]))
        assert result["best_obj_val"][-1] <= 1e-10


class SingleIndexRead(GBOFitnessFunctionDiscrete):
    """O(1)-read subfunction: one variable per subfunction."""

    def number_of_subfunctions(self):
        return self.number_of_variables

    def inputs_to_subfunction(self, i):
        return [i]

    def subfunction(self, i, variables):
        return float(variables[i])


def _median_callback_seconds(ell: int, partial_steps: int = 3000) -> float:
    problem = bind_gbo(SingleIndexRead(ell))
    evaluator = Evaluator(problem, "gbo")
    sol = evaluator.new_solution(np.zeros(ell, dtype=np.int64))
    evaluator.evaluate(sol)
    evaluator.counter.trace = []
    rng = np.random.default_rng(5)
    idxs = rng.integers(0, ell, size=partial_steps)
    vals = rng.integers(0, 2, size=partial_steps)
    for u, v in zip(idxs.tolist(), vals.tolist()):
        undo = evaluator.try_changes(sol, [u], [v])
    return float(np.median(evaluator.counter.trace))


def test_zero_copy_scaling():
    with criterion("zero-copy: per-callback time for ell=1e3 vs 1e5 within 2x"):
        small = _median_callback_seconds(1_000)
        large = _median_callback_seconds(100_000)
        ratio = large / small
        print(
            f"[REPORT] median per-callback: ell=1e3 {small*1e6:.2f}us, "
            f"ell=1e5 {large*1e6:.2f}us, ratio {ratio:.2f}"
        )
        assert ratio < 2.0, f"per-callback time scaled by {ratio:.2f}x"


def _timed_trap_run(fitness):
    algo = gomea.DiscreteGOMEA(
        fitness=fitness,
        linkage_model=gomea.linkage.BlockMarginalProduct(5),
        max_number_of_populations=1,
        base_population_size=32,
        max_number_of_generations=10,
        random_seed=11,
    )
    return algo.run()


def test_gbo_vs_bbo_eval_time():
    with criterion("gray-box eval time < 20% of black-box on trap ell=160"):
        gbo_stats = _timed_trap_run(ConcatTrapGBO(160, 5))
        bbo_stats = _timed_trap_run(ConcatTrapBBO(160, 5))
        # Same seed and generation budget: the two runs walk the identical
        # trajectory, so they perform the same number of evaluation events.
        assert gbo_stats["best_obj_val"] == bbo_stats["best_obj_val"]
        assert gbo_stats["generation"] == bbo_stats["generation"]
        gbo_time = gbo_stats["eval_time"][-1]
        bbo_time = bbo_stats["eval_time"][-1]
        ratio = gbo_time / bbo_time
        print(
            f"[REPORT] eval_time: gray-box {gbo_time:.3f}s vs black-box {bbo_time:.3f}s "
            f"({ratio:.1%}); unit counters: gbo {gbo_stats['evaluations'][-1]:.1f}, "
            f"bbo {bbo_stats['evaluations'][-1]:.1f}"
        )
        assert ratio < 0.20, f"gray-box used {ratio:.1%} of black-box eval time"
