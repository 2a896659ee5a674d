import numpy as np
import pytest

from gomea_core import ConfigurationError, Evaluator
from gomea_core import benchmarks as bm

from oracles import (
    brute_force_maxcut_optimum,
    maxcut_objective,
    rosenbrock_objective,
    trap_objective,
)


class TestTrap:
    def test_subfunction_values(self):
        x = np.array([1] * 5 + [0] * 5, dtype=np.int64)
        assert bm.trap_subfunction(0, x, 5) == 5.0
        assert bm.trap_subfunction(1, x, 5) == 4.0
        x[:5] = [1, 1, 1, 0, 0]
        assert bm.trap_subfunction(0, x, 5) == 1.0  # u=3 -> k-u-1

    def test_optimum_and_deceptive_attractor(self):
        problem = bm.trap_problem(40, 5)
        ev = Evaluator(problem, "gbo")
        top = ev.new_solution(np.ones(40, dtype=np.int64))
        ev.evaluate(top)
        assert top.objective == 40.0 == problem.vtr
        bottom = ev.new_solution(np.zeros(40, dtype=np.int64))
        ev.evaluate(bottom)
        assert bottom.objective == 40.0 - 40 / 5

    def test_divisibility_enforced(self):
        with pytest.raises(ConfigurationError):
            bm.trap_problem(11, 5)


class TestMaxCut:
    def test_subfunction(self):
        edges = bm.torus_edges(3)
        x = np.zeros(9, dtype=np.int64)
        assert bm.maxcut_subfunction(0, x, edges) == 0.0
        x[edges[0][1]] = 1
        assert bm.maxcut_subfunction(0, x, edges) == 1.0

    def test_all_equal_assignment_cuts_nothing(self):
        problem = bm.maxcut_torus_problem(4)
        ev = Evaluator(problem, "gbo")
        sol = ev.new_solution(np.zeros(16, dtype=np.int64))
        ev.evaluate(sol)
        assert sol.objective == 0.0

    def test_checkerboard_cuts_every_edge(self):
        problem = bm.maxcut_torus_problem(4)
        pattern = np.fromfunction(lambda r, c: (r + c) % 2, (4, 4)).reshape(-1)
        ev = Evaluator(problem, "gbo")
        sol = ev.new_solution(pattern.astype(np.int64))
        ev.evaluate(sol)
        assert sol.objective == 32.0 == problem.vtr

    def test_torus_is_4_regular_with_2m2_edges(self):
        for m in (3, 4, 5):
            edges = bm.torus_edges(m)
            assert len(edges) == 2 * m * m
            assert len(set(edges)) == len(edges)
            degree = np.zeros(m * m, dtype=int)
            for u, v in edges:
                assert u != v
                degree[u] += 1
                degree[v] += 1
            assert (degree == 4).all()

    def test_small_side_rejected(self):
        with pytest.raises(ConfigurationError):
            bm.torus_edges(2)

    def test_brute_force_confirms_checkerboard_optimum(self):
        edges = bm.torus_edges(4)
        assert brute_force_maxcut_optimum(4, edges) == 32

    def test_instance_round_trip(self, tmp_path):
        edges = bm.torus_edges(4)
        path = tmp_path / "torus4.txt"
        bm.write_maxcut_instance(path, 4, edges)
        m, loaded = bm.read_maxcut_instance(path)
        assert m == 4
        assert sorted(loaded) == sorted(edges)
        problem = bm.maxcut_problem_from_file(path)
        assert problem.ell == 16
        assert problem.vtr == 32.0

    def test_instance_rejects_bad_vertex(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3\n0 99\n")
        with pytest.raises(ConfigurationError):
            bm.read_maxcut_instance(path)


class TestRosenbrock:
    def test_subfunction_values(self):
        assert bm.rosenbrock_subfunction(0, np.array([1.0, 1.0])) == 0.0
        assert bm.rosenbrock_subfunction(0, np.array([0.0, 0.0])) == 1.0
        assert bm.rosenbrock_subfunction(0, np.array([-1.0, 1.0])) == 4.0

    def test_nonnegative_and_zero_only_at_optimum(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            x = rng.uniform(-2, 2, size=6)
            assert rosenbrock_objective(x) >= 0.0
        assert rosenbrock_objective(np.ones(6)) == 0.0

    def test_needs_two_variables(self):
        with pytest.raises(ConfigurationError):
            bm.rosenbrock_problem(1)


@pytest.mark.parametrize(
    "problem, oracle, discrete",
    [
        (bm.trap_problem(30, 5), lambda x: trap_objective(x, 5), True),
        (
            bm.maxcut_torus_problem(4),
            lambda x: maxcut_objective(x, bm.torus_edges(4)),
            True,
        ),
        (bm.rosenbrock_problem(12), rosenbrock_objective, False),
    ],
    ids=["trap", "maxcut", "rosenbrock"],
)
def test_gbo_and_bbo_routes_agree(problem, oracle, discrete):
    rng = np.random.default_rng(11)
    gbo = Evaluator(problem, "gbo")
    bbo = Evaluator(problem, "bbo")
    for _ in range(1000):
        if discrete:
            x = rng.integers(0, 2, size=problem.ell).astype(np.int64)
        else:
            x = rng.uniform(-2, 2, size=problem.ell)
        a = gbo.new_solution(x.copy())
        gbo.evaluate(a)
        b = bbo.new_solution(x.copy())
        bbo.evaluate(b)
        reference = oracle(x)
        if discrete:
            assert a.objective == b.objective == reference
        else:
            assert a.objective == pytest.approx(reference, rel=1e-12)
            assert b.objective == pytest.approx(reference, rel=1e-12)
