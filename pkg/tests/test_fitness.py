import numpy as np
import pytest

from gomea_core import (
    ContractViolationError,
    EvaluationCounter,
    Evaluator,
    Problem,
    Solution,
    SubfunctionDecomposition,
    SubfunctionError,
    build_dependency_index,
    full_evaluate_bbo,
    full_evaluate_gbo,
    is_improvement,
    is_strict_improvement,
    partial_evaluate,
)
from gomea_core import benchmarks as bm
from gomea_core.fitness import partial_update, revert_partial

from oracles import full_gbo_reference, maxcut_objective, rosenbrock_objective, trap_objective


def evaluated(problem, genotype, mode="gbo"):
    ev = Evaluator(problem, mode)
    sol = ev.new_solution(np.asarray(genotype))
    ev.evaluate(sol)
    return ev, sol


class TestFullEvaluateGbo:
    def test_trap_all_ones(self):
        ev, sol = evaluated(bm.trap_problem(10, 5), np.ones(10, dtype=np.int64))
        assert sol.objective == 10.0
        assert sol.buffers.tolist() == [10.0]
        assert ev.counter.total == 1.0

    def test_trap_all_zeros(self):
        ev, sol = evaluated(bm.trap_problem(10, 5), np.zeros(10, dtype=np.int64))
        assert sol.objective == 8.0
        assert sol.buffers.tolist() == [8.0]

    def test_rosenbrock_optimum(self):
        ev, sol = evaluated(bm.rosenbrock_problem(2), np.array([1.0, 1.0]))
        assert sol.objective == 0.0

    def test_failing_subfunction_carries_index(self):
        def boom(i, x):
            if i == 3:
                raise ValueError("nope")
            return 0.0

        decomp = SubfunctionDecomposition(8, [(i,) for i in range(8)], boom)
        sol = Solution(np.zeros(8, dtype=np.int64), 1)
        with pytest.raises(SubfunctionError) as err:
            full_evaluate_gbo(decomp, sol, EvaluationCounter())
        assert err.value.index == 3


class TestPartialEvaluate:
    def test_trap_single_flip(self):
        problem = bm.trap_problem(10, 5)
        ev, sol = evaluated(problem, np.ones(10, dtype=np.int64))
        child = partial_evaluate(problem.decomposition, sol, [(0, 0)], ev.counter)
        assert child.objective == 5.0
        assert sol.objective == 10.0  # parent untouched
        assert sol.genotype[0] == 1
        assert ev.counter.total == 1.5  # exactly +1/2

    def test_rosenbrock_interior_change_counts_two_thirds(self):
        problem = bm.rosenbrock_problem(4)
        ev, sol = evaluated(problem, np.zeros(4))
        child = partial_evaluate(problem.decomposition, sol, {1: 0.5}, ev.counter)
        assert ev.counter.total == 1.0 + 2.0 / 3.0
        expected = rosenbrock_objective(child.genotype)
        assert child.objective == pytest.approx(expected, rel=1e-12)

    def test_empty_change_set(self):
        problem = bm.trap_problem(10, 5)
        ev, sol = evaluated(problem, np.ones(10, dtype=np.int64))
        child = partial_evaluate(problem.decomposition, sol, [], ev.counter)
        assert child.objective == sol.objective
        assert child.buffers.tolist() == sol.buffers.tolist()
        assert ev.counter.total == 1.0

    def test_unevaluated_parent_rejected(self):
        problem = bm.trap_problem(10, 5)
        sol = Solution(np.ones(10, dtype=np.int64), 1)
        with pytest.raises(ContractViolationError):
            partial_evaluate(problem.decomposition, sol, [(0, 0)], EvaluationCounter())

    def test_duplicate_indices_rejected(self):
        problem = bm.trap_problem(10, 5)
        ev, sol = evaluated(problem, np.ones(10, dtype=np.int64))
        with pytest.raises(ContractViolationError):
            partial_evaluate(problem.decomposition, sol, [(0, 0), (0, 1)], ev.counter)

    def test_revert_restores_exact_state(self):
        problem = bm.rosenbrock_problem(6)
        ev, sol = evaluated(problem, np.linspace(-1, 1, 6))
        before = (sol.genotype.copy(), sol.buffers.copy(), sol.objective)
        undo = partial_update(problem.decomposition, sol, [2, 3], [0.25, -0.5], ev.counter)
        assert sol.objective != before[2]
        revert_partial(sol, undo)
        assert np.array_equal(sol.genotype, before[0])
        assert np.array_equal(sol.buffers, before[1])
        assert sol.objective == before[2]


def _random_change_sets(problem, rng, steps):
    ell = problem.ell
    for _ in range(steps):
        width = int(rng.integers(1, min(5, ell) + 1))
        idxs = rng.choice(ell, size=width, replace=False)
        if problem.domain == "discrete":
            vals = rng.integers(0, problem.alphabet_size, size=width)
        else:
            vals = rng.uniform(-2.0, 2.0, size=width)
        yield list(zip(idxs.tolist(), vals.tolist()))


@pytest.mark.parametrize(
    "problem, exact",
    [
        (bm.trap_problem(20, 5), True),
        (bm.maxcut_torus_problem(4), True),
        (bm.rosenbrock_problem(8), False),
    ],
    ids=["trap", "maxcut", "rosenbrock"],
)
def test_buffer_consistency_random_walks(problem, exact):
    rng = np.random.default_rng(7)
    for _ in range(10):
        if problem.domain == "discrete":
            start = rng.integers(0, 2, size=problem.ell).astype(np.int64)
        else:
            start = rng.uniform(0, 1, size=problem.ell)
        ev, sol = evaluated(problem, start)
        for changes in _random_change_sets(problem, rng, 30):
            sol = partial_evaluate(problem.decomposition, sol, changes, ev.counter)
            buffers, objective, _ = full_gbo_reference(problem, sol.genotype)
            if exact:
                assert sol.objective == objective
                assert sol.buffers.tolist() == buffers.tolist()
            else:
                assert sol.objective == pytest.approx(objective, rel=1e-9)


def test_accounting_matches_touched_subfunction_fractions():
    problem = bm.rosenbrock_problem(5)
    decomp = problem.decomposition
    ev, sol = evaluated(problem, np.zeros(5))
    rng = np.random.default_rng(3)
    expected = 1.0
    for changes in _random_change_sets(problem, rng, 25):
        touched = set()
        for u, _ in changes:
            touched.update(decomp.dependents[u])
        expected += len(touched) / decomp.q
        sol = partial_evaluate(decomp, sol, changes, ev.counter)
    assert ev.counter.total == pytest.approx(expected, abs=1e-12)


class TestFullEvaluateBbo:
    def test_trap_wrapper(self):
        ev, sol = evaluated(bm.trap_problem(10, 5), np.ones(10, dtype=np.int64), mode="bbo")
        assert sol.objective == 10.0
        assert ev.counter.total == 1.0

    def test_rosenbrock_values(self):
        problem = bm.rosenbrock_problem(2)
        _, sol = evaluated(problem, np.array([-1.0, 1.0]), mode="bbo")
        assert sol.objective == 4.0
        _, sol = evaluated(problem, np.array([0.0, 0.0]), mode="bbo")
        assert sol.objective == 1.0

    def test_callback_failure_propagates(self):
        from gomea_core import BlackBoxFunction

        def bad(objective_index, x):
            raise RuntimeError("broken")

        problem = Problem("bad", 3, "discrete", black_box=BlackBoxFunction(3, bad))
        ev = Evaluator(problem, "bbo")
        sol = ev.new_solution(np.zeros(3, dtype=np.int64))
        with pytest.raises(RuntimeError):
            ev.evaluate(sol)


class TestIsImprovement:
    def make(self, obj, cons=0.0):
        sol = Solution(np.zeros(1, dtype=np.int64))
        sol.objective = obj
        sol.constraint = cons
        sol.evaluated = True
        return sol

    def test_equal_objective_accepted(self):
        assert is_improvement(self.make(5.0), self.make(5.0), "max")

    def test_worse_objective_rejected(self):
        assert not is_improvement(self.make(4.0), self.make(5.0), "max")

    def test_feasibility_first(self):
        assert is_improvement(self.make(0.0, 0.0), self.make(100.0, 2.0), "max")
        assert not is_improvement(self.make(100.0, 2.0), self.make(0.0, 0.0), "max")

    def test_less_infeasible_wins(self):
        assert is_improvement(self.make(0.0, 1.0), self.make(5.0, 2.0), "max")

    def test_min_sense(self):
        assert is_improvement(self.make(1.0), self.make(2.0), "min")
        assert not is_improvement(self.make(2.0), self.make(1.0), "min")

    def test_strict_variant(self):
        assert not is_strict_improvement(self.make(5.0), self.make(5.0), "max")
        assert is_strict_improvement(self.make(6.0), self.make(5.0), "max")

    def test_unevaluated_rejected(self):
        bare = Solution(np.zeros(1, dtype=np.int64))
        with pytest.raises(ContractViolationError):
            is_improvement(bare, self.make(1.0), "max")


class TestDependencyIndex:
    def test_trap_blocks(self):
        decomp = bm.trap_problem(10, 5).decomposition
        index = build_dependency_index(decomp)
        assert index[3] == (0,)
        assert index[7] == (1,)

    def test_rosenbrock_overlap(self):
        decomp = bm.rosenbrock_problem(4).decomposition
        index = build_dependency_index(decomp)
        assert index[1] == (0, 1)
        assert index[0] == (0,)
        assert index[3] == (2,)

    def test_single_subfunction_over_all(self):
        decomp = SubfunctionDecomposition(4, [range(4)], lambda i, x: 0.0)
        assert build_dependency_index(decomp) == ((0,), (0,), (0,), (0,))


class TestMultiBufferRouting:
    def make_problem(self):
        # f(x) = b0 * b1 with blocks (0,1) -> buffer0 and (2,3) -> buffer1.
        def sub(i, x):
            a, b = ((0, 1), (2, 3))[i]
            return float(x[a] + x[b])

        decomp = SubfunctionDecomposition(
            4,
            [(0, 1), (2, 3)],
            sub,
            buffer_count=2,
            buffer_of=[0, 1],
            objective_combiner=lambda oi, buffers: float(buffers[0] * buffers[1]),
        )
        return Problem("product", 4, "discrete", decomp)

    def test_routing_and_combiner(self):
        problem = self.make_problem()
        ev, sol = evaluated(problem, np.array([1, 1, 1, 0], dtype=np.int64))
        assert sol.buffers.tolist() == [2.0, 1.0]
        assert sol.objective == 2.0

    def test_partial_updates_per_buffer(self):
        problem = self.make_problem()
        ev, sol = evaluated(problem, np.array([1, 1, 1, 0], dtype=np.int64))
        child = partial_evaluate(problem.decomposition, sol, [(3, 1)], ev.counter)
        assert child.buffers.tolist() == [2.0, 2.0]
        assert child.objective == 4.0
        assert ev.counter.total == 1.5

    def test_combiner_cannot_write_buffers(self):
        def greedy(oi, buffers):
            buffers[0] = 99.0
            return 0.0

        decomp = SubfunctionDecomposition(
            2, [(0,), (1,)], lambda i, x: 1.0, objective_combiner=greedy
        )
        sol = Solution(np.zeros(2, dtype=np.int64), 1)
        with pytest.raises(ValueError):
            full_evaluate_gbo(decomp, sol, EvaluationCounter())


class TestCallbackViewContract:
    def test_view_is_zero_copy_and_readonly(self):
        problem = bm.trap_problem(10, 5)
        seen = {}

        def probe(i, x):
            seen["shares"] = np.shares_memory(x, sol.genotype)
            seen["writeable"] = x.flags.writeable
            seen["length"] = len(x)
            return 0.0

        decomp = SubfunctionDecomposition(10, problem.decomposition.inputs, probe)
        ev = Evaluator(Problem("probe", 10, "discrete", decomp), "gbo")
        sol = ev.new_solution(np.ones(10, dtype=np.int64))
        ev.evaluate(sol)
        assert seen == {"shares": True, "writeable": False, "length": 10}
        with pytest.raises(ValueError):
            sol.variables[0] = 3


def test_eval_time_and_call_counts_accumulate():
    problem = bm.trap_problem(10, 5)
    ev, sol = evaluated(problem, np.ones(10, dtype=np.int64))
    assert ev.counter.subfunction_calls == 2
    assert ev.counter.objective_calls == 1
    assert ev.counter.eval_seconds > 0.0
    partial_evaluate(problem.decomposition, sol, [(0, 0)], ev.counter)
    assert ev.counter.subfunction_calls == 3  # one touched subfunction recomputed


def test_counter_trace_collects_per_callback_durations():
    problem = bm.trap_problem(10, 5)
    ev = Evaluator(problem, "gbo")
    ev.counter.trace = []
    sol = ev.new_solution(np.ones(10, dtype=np.int64))
    ev.evaluate(sol)
    assert len(ev.counter.trace) == 3  # two subfunctions plus the combiner
    assert all(dt >= 0.0 for dt in ev.counter.trace)


def test_debug_checks_guard_module_boundaries():
    problem = bm.trap_problem(10, 5)
    ev = Evaluator(problem, "gbo", debug_checks=True)
    with pytest.raises(ContractViolationError):
        ev.new_solution(np.zeros(9, dtype=np.int64))  # wrong length
    with pytest.raises(ContractViolationError):
        ev.new_solution(np.full(10, 7, dtype=np.int64))  # outside alphabet
    sol = ev.new_solution(np.ones(10, dtype=np.int64))
    ev.evaluate(sol)
    with pytest.raises(ContractViolationError):
        ev.try_changes(sol, [0], [5])  # value outside alphabet
