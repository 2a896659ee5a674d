"""Fitness engine: black-box and gray-box evaluation contracts.

A gray-box problem is an additive decomposition of the objective into
subfunctions over known variable subsets. Per-solution fitness buffers hold
the accumulated subfunction sums, so that after a small modification only
the dependent subfunctions are recomputed and the objective is rebuilt from
the buffers in time independent of the number of variables. Evaluation cost
is accounted fractionally: a partial evaluation touching ``k`` of ``q``
subfunctions costs ``k/q`` of one evaluation unit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import ConfigurationError, ContractViolationError, validate_genotype

# Full buffer refresh cadence for real-valued solutions, to bound the
# floating-point drift that incremental add/subtract updates accumulate.
REFRESH_INTERVAL = 10_000


class SubfunctionError(RuntimeError):
    """A fitness callback raised; carries the offending subfunction index."""

    def __init__(self, index: int, original: BaseException):
        super().__init__(f"subfunction {index} raised {original!r}")
        self.index = index
        self.original = original


def _default_combiner(objective_index: int, buffers: np.ndarray) -> float:
    return float(buffers[0])


def _default_constraint(buffers: np.ndarray) -> float:
    return 0.0


class SubfunctionDecomposition:
    """Gray-box structure ``f(x) = g(sum of routed subfunction values)``.

    Parameters
    ----------
    ell:
        Number of problem variables.
    inputs:
        For each subfunction ``i``, the variable indices it depends on.
    subfunction:
        Callback ``(i, variables) -> float``. ``variables`` is a read-only
        view of the full genotype; only indices in ``inputs[i]`` may be used.
    buffer_count / buffer_of:
        Number of fitness buffers and the routing of each subfunction to a
        buffer (callable or sequence; all route to buffer 0 by default).
    objective_combiner:
        ``(objective_index, buffers) -> float``; receives only the buffer
        vector, never the genotype. Defaults to reading buffer 0.
    constraint_combiner:
        ``(buffers) -> float`` constraint violation; defaults to 0 (feasible).
    similarity_measure:
        Optional symmetric ``(var_a, var_b) -> float`` override used by
        static linkage trees instead of graph connectivity.
    """

    __slots__ = (
        "ell",
        "q",
        "inputs",
        "subfunction",
        "buffer_count",
        "buffer_of",
        "objective_combiner",
        "constraint_combiner",
        "similarity_measure",
        "dependents",
        "trivial_combine",
    )

    def __init__(
        self,
        ell: int,
        inputs: Sequence[Sequence[int]],
        subfunction: Callable[[int, np.ndarray], float],
        *,
        buffer_count: int = 1,
        buffer_of: Callable[[int], int] | Sequence[int] | None = None,
        objective_combiner: Callable[[int, np.ndarray], float] | None = None,
        constraint_combiner: Callable[[np.ndarray], float] | None = None,
        similarity_measure: Callable[[int, int], float] | None = None,
    ):
        self.ell = int(ell)
        if self.ell < 1:
            raise ConfigurationError(f"ell must be >= 1, got {ell}")
        self.q = len(inputs)
        if self.q < 1:
            raise ConfigurationError("a decomposition needs at least one subfunction")
        normalized = []
        for i, idx in enumerate(inputs):
            members = tuple(int(u) for u in idx)
            if not members:
                raise ConfigurationError(f"subfunction {i} has an empty input set")
            if len(set(members)) != len(members):
                raise ConfigurationError(f"subfunction {i} has duplicate inputs")
            for u in members:
                if u < 0 or u >= self.ell:
                    raise ConfigurationError(
                        f"subfunction {i} input {u} out of range [0, {self.ell})"
                    )
            normalized.append(tuple(sorted(members)))
        self.inputs: tuple[tuple[int, ...], ...] = tuple(normalized)
        self.subfunction = subfunction
        self.buffer_count = int(buffer_count)
        if self.buffer_count < 1:
            raise ConfigurationError("buffer_count must be >= 1")
        if buffer_of is None:
            routing = (0,) * self.q
        elif callable(buffer_of):
            routing = tuple(int(buffer_of(i)) for i in range(self.q))
        else:
            routing = tuple(int(b) for b in buffer_of)
            if len(routing) != self.q:
                raise ConfigurationError("buffer_of must cover every subfunction")
        for i, b in enumerate(routing):
            if b < 0 or b >= self.buffer_count:
                raise ConfigurationError(
                    f"subfunction {i} routed to buffer {b} outside [0, {self.buffer_count})"
                )
        self.buffer_of: tuple[int, ...] = routing
        self.objective_combiner = objective_combiner or _default_combiner
        self.constraint_combiner = constraint_combiner or _default_constraint
        self.similarity_measure = similarity_measure
        self.dependents = build_dependency_index(self)
        # Single buffer with the built-in combiners: objective == buffers[0],
        # constraint == 0, no user callback to time.
        self.trivial_combine = (
            self.buffer_count == 1
            and objective_combiner is None
            and constraint_combiner is None
        )


def build_dependency_index(decomp: SubfunctionDecomposition) -> tuple[tuple[int, ...], ...]:
    """Invert ``inputs``: for each variable, the subfunctions depending on it."""
    per_var: list[list[int]] = [[] for _ in range(decomp.ell)]
    for i, members in enumerate(decomp.inputs):
        for u in members:
            per_var[u].append(i)
    return tuple(tuple(lst) for lst in per_var)


class BlackBoxFunction:
    """Direct objective evaluation with no structural knowledge."""

    __slots__ = ("ell", "objective", "constraint")

    def __init__(
        self,
        ell: int,
        objective: Callable[[int, np.ndarray], float],
        constraint: Callable[[np.ndarray], float] | None = None,
    ):
        self.ell = int(ell)
        if self.ell < 1:
            raise ConfigurationError(f"ell must be >= 1, got {ell}")
        self.objective = objective
        self.constraint = constraint or (lambda variables: 0.0)


class Solution:
    """A candidate: genotype plus cached objective, constraint, and buffers.

    ``subvalues`` memoizes the latest value of every subfunction so a buffer
    update only computes the subfunctions at their new inputs; the buffers
    remain the incrementally maintained sums.
    """

    __slots__ = (
        "genotype",
        "buffers",
        "subvalues",
        "objective",
        "constraint",
        "evaluated",
        "partial_updates",
        "_view",
        "_buffer_view",
    )

    def __init__(self, genotype: np.ndarray, buffer_count: int = 0):
        self.genotype = genotype
        self.buffers = np.zeros(buffer_count) if buffer_count else None
        self.subvalues: list[float] | None = None
        self.objective = float("nan")
        self.constraint = 0.0
        self.evaluated = False
        self.partial_updates = 0
        self._view = None
        self._buffer_view = None

    @property
    def variables(self) -> np.ndarray:
        """Read-only, zero-copy view of the genotype for fitness callbacks."""
        v = self._view
        if v is None:
            v = self.genotype.view()
            v.flags.writeable = False
            self._view = v
        return v

    @property
    def buffer_view(self) -> np.ndarray:
        v = self._buffer_view
        if v is None:
            v = self.buffers.view()
            v.flags.writeable = False
            self._buffer_view = v
        return v

    def clone(self) -> "Solution":
        other = Solution.__new__(Solution)
        other.genotype = self.genotype.copy()
        other.buffers = None if self.buffers is None else self.buffers.copy()
        other.subvalues = None if self.subvalues is None else self.subvalues.copy()
        other.objective = self.objective
        other.constraint = self.constraint
        other.evaluated = self.evaluated
        other.partial_updates = self.partial_updates
        other._view = None
        other._buffer_view = None
        return other

    def __repr__(self) -> str:
        return f"Solution(objective={self.objective}, constraint={self.constraint})"


class EvaluationCounter:
    """Accumulates spent evaluation units and time inside fitness callbacks.

    A full evaluation adds exactly 1.0 unit; a partial evaluation touching
    ``k`` of ``q`` subfunctions adds ``k/q``. ``eval_seconds`` measures
    wall-clock time around fitness callbacks only. When ``trace`` is set to
    a list, the duration of every individual callback is appended to it.
    """

    __slots__ = (
        "total",
        "eval_seconds",
        "subfunction_calls",
        "objective_calls",
        "clock",
        "trace",
    )

    def __init__(self, clock: Callable[[], float] = time.perf_counter):
        self.total = 0.0
        self.eval_seconds = 0.0
        self.subfunction_calls = 0
        self.objective_calls = 0
        self.clock = clock
        self.trace: list[float] | None = None

    def add_full(self) -> None:
        self.total += 1.0

    def add_partial(self, touched: int, q: int) -> None:
        self.total += touched / q


def _combine(decomp: SubfunctionDecomposition, sol: Solution, counter: EvaluationCounter):
    """Recompute objective/constraint from the buffers (never the genotype)."""
    clk = counter.clock
    bview = sol.buffer_view
    t0 = clk()
    obj = decomp.objective_combiner(0, bview)
    cons = decomp.constraint_combiner(bview)
    dt = clk() - t0
    counter.eval_seconds += dt
    counter.objective_calls += 1
    if counter.trace is not None:
        counter.trace.append(dt)
    sol.objective = float(obj)
    sol.constraint = float(cons)


def _fill_buffers(decomp: SubfunctionDecomposition, sol: Solution, counter: EvaluationCounter):
    """Compute every subfunction once and accumulate into the routed buffers."""
    x = sol.variables
    f = decomp.subfunction
    routing = decomp.buffer_of
    clk = counter.clock
    trace = counter.trace
    acc = [0.0] * decomp.buffer_count
    memo = [0.0] * decomp.q
    spent = 0.0
    for i in range(decomp.q):
        t0 = clk()
        try:
            v = f(i, x)
        except Exception as exc:  # surface the failing subfunction index
            counter.eval_seconds += spent
            raise SubfunctionError(i, exc) from exc
        dt = clk() - t0
        spent += dt
        if trace is not None:
            trace.append(dt)
        v = float(v)
        memo[i] = v
        acc[routing[i]] += v
    counter.eval_seconds += spent
    counter.subfunction_calls += decomp.q
    sol.buffers[:] = acc
    sol.subvalues = memo


def full_evaluate_gbo(
    decomp: SubfunctionDecomposition, sol: Solution, counter: EvaluationCounter
) -> Solution:
    """Evaluate all subfunctions, fill the buffers, and set the objective."""
    if sol.buffers is None or len(sol.buffers) != decomp.buffer_count:
        sol.buffers = np.zeros(decomp.buffer_count)
        sol._buffer_view = None
    _fill_buffers(decomp, sol, counter)
    _combine(decomp, sol, counter)
    counter.add_full()
    sol.evaluated = True
    sol.partial_updates = 0
    return sol


def full_evaluate_bbo(bbo: BlackBoxFunction, sol: Solution, counter: EvaluationCounter) -> Solution:
    x = sol.variables
    clk = counter.clock
    t0 = clk()
    obj = bbo.objective(0, x)
    cons = bbo.constraint(x)
    dt = clk() - t0
    counter.eval_seconds += dt
    counter.objective_calls += 1
    if counter.trace is not None:
        counter.trace.append(dt)
    sol.objective = float(obj)
    sol.constraint = float(cons)
    counter.add_full()
    sol.evaluated = True
    return sol


# Undo record layout (plain tuple, this is the hottest path):
# (idxs, old_values, old_buffer0_or_array, touched, old_subvalues,
#  old_objective, old_constraint, old_partial_updates)


def partial_update(
    decomp: SubfunctionDecomposition,
    sol: Solution,
    idxs: Sequence[int],
    vals: Sequence,
    counter: EvaluationCounter,
) -> tuple:
    """In-place partial evaluation; returns an undo record.

    Subtracts the dependent subfunctions' current values from the buffers,
    writes the new variable values, computes and adds the dependent
    subfunctions at their new inputs, and rebuilds objective/constraint from
    the buffers alone. The caller may restore the exact previous state with
    :func:`revert_partial`.
    """
    if not sol.evaluated:
        raise ContractViolationError("partial evaluation requires an evaluated parent")
    dependents = decomp.dependents
    if len(idxs) == 1:
        touched = dependents[idxs[0]]
    else:
        seen: set[int] = set()
        for u in idxs:
            seen.update(dependents[u])
        touched = sorted(seen)
    genotype = sol.genotype
    buffers = sol.buffers
    memo = sol.subvalues
    x = sol.variables
    f = decomp.subfunction
    clk = counter.clock
    trace = counter.trace
    spent = 0.0
    trivial = decomp.trivial_combine
    i = -1
    undo = (
        idxs,
        [genotype[u] for u in idxs],
        float(buffers[0]) if trivial else buffers.copy(),
        touched,
        [memo[i] for i in touched],
        sol.objective,
        sol.constraint,
        sol.partial_updates,
    )
    try:
        if trivial:
            acc = undo[2]
            for i in touched:
                acc -= memo[i]
            for u, val in zip(idxs, vals):
                genotype[u] = val
            for i in touched:
                t0 = clk()
                v = f(i, x)
                dt = clk() - t0
                spent += dt
                if trace is not None:
                    trace.append(dt)
                v = float(v)
                memo[i] = v
                acc += v
            buffers[0] = acc
        else:
            routing = decomp.buffer_of
            for i in touched:
                buffers[routing[i]] -= memo[i]
            for u, val in zip(idxs, vals):
                genotype[u] = val
            for i in touched:
                t0 = clk()
                v = f(i, x)
                dt = clk() - t0
                spent += dt
                if trace is not None:
                    trace.append(dt)
                v = float(v)
                memo[i] = v
                buffers[routing[i]] += v
    except Exception as exc:
        counter.eval_seconds += spent
        revert_partial(sol, undo)
        raise SubfunctionError(i, exc) from exc
    counter.eval_seconds += spent
    counter.subfunction_calls += len(touched)
    counter.total += len(touched) / decomp.q
    sol.partial_updates = undo[7] + 1
    if sol.partial_updates >= REFRESH_INTERVAL and genotype.dtype.kind == "f":
        # Drift control: recompute the buffers from scratch. Costs time but
        # no evaluation units.
        _fill_buffers(decomp, sol, counter)
        sol.partial_updates = 0
        if trivial:
            acc = float(buffers[0])
    if trivial:
        sol.objective = acc
        sol.constraint = 0.0
        counter.objective_calls += 1
    else:
        _combine(decomp, sol, counter)
    return undo


def revert_partial(sol: Solution, undo: tuple) -> None:
    genotype = sol.genotype
    for u, val in zip(undo[0], undo[1]):
        genotype[u] = val
    if isinstance(undo[2], float):
        sol.buffers[0] = undo[2]
    else:
        sol.buffers[:] = undo[2]
    memo = sol.subvalues
    for i, v in zip(undo[3], undo[4]):
        memo[i] = v
    sol.objective = undo[5]
    sol.constraint = undo[6]
    sol.partial_updates = undo[7]


def partial_evaluate(
    decomp: SubfunctionDecomposition,
    parent: Solution,
    changes,
    counter: EvaluationCounter,
) -> Solution:
    """Functional partial evaluation: returns an updated copy of ``parent``.

    ``changes`` is a mapping or iterable of ``(index, new_value)`` pairs with
    distinct in-range indices. The parent solution is left untouched.
    """
    if not parent.evaluated:
        raise ContractViolationError("partial evaluation requires an evaluated parent")
    pairs = list(changes.items()) if hasattr(changes, "items") else list(changes)
    idxs = [int(u) for u, _ in pairs]
    vals = [v for _, v in pairs]
    if len(set(idxs)) != len(idxs):
        raise ContractViolationError("change indices must be distinct")
    for u in idxs:
        if u < 0 or u >= decomp.ell:
            raise ContractViolationError(f"change index {u} out of range [0, {decomp.ell})")
    child = parent.clone()
    if not idxs:
        counter.add_partial(0, decomp.q)
        return child
    partial_update(decomp, child, idxs, vals, counter)
    return child


def _acceptable(new_obj, new_cons, old_obj, old_cons, maximize: bool) -> bool:
    """Constraint-domination acceptance; equal quality is accepted."""
    if new_cons > 0.0 or old_cons > 0.0:
        if new_cons != old_cons:
            return new_cons < old_cons
    if maximize:
        return new_obj >= old_obj
    return new_obj <= old_obj


def _strictly_better(new_obj, new_cons, old_obj, old_cons, maximize: bool) -> bool:
    if new_cons > 0.0 or old_cons > 0.0:
        if new_cons != old_cons:
            return new_cons < old_cons
    if maximize:
        return new_obj > old_obj
    return new_obj < old_obj


def is_improvement(a: Solution, b: Solution, sense: str) -> bool:
    """True when ``a`` is at least as good as ``b`` (feasibility first)."""
    if not (a.evaluated and b.evaluated):
        raise ContractViolationError("is_improvement requires evaluated solutions")
    return _acceptable(a.objective, a.constraint, b.objective, b.constraint, sense == "max")


def is_strict_improvement(a: Solution, b: Solution, sense: str) -> bool:
    if not (a.evaluated and b.evaluated):
        raise ContractViolationError("is_improvement requires evaluated solutions")
    return _strictly_better(a.objective, a.constraint, b.objective, b.constraint, sense == "max")


@dataclass
class Problem:
    """A problem instance: gray-box and/or black-box route plus metadata.

    Discrete problems are maximized, real-valued ones minimized. ``vtr`` is
    the value-to-reach defining success (the known optimum for the built-in
    discrete benchmarks).
    """

    name: str
    ell: int
    domain: str  # "discrete" | "real"
    decomposition: SubfunctionDecomposition | None = None
    black_box: BlackBoxFunction | None = None
    alphabet_size: int = 2
    vtr: float | None = None

    def __post_init__(self):
        if self.domain not in ("discrete", "real"):
            raise ConfigurationError(f"unknown domain {self.domain!r}")
        if self.ell < 1:
            raise ConfigurationError(f"ell must be >= 1, got {self.ell}")
        if self.decomposition is None and self.black_box is None:
            raise ConfigurationError("problem needs a decomposition or a black-box route")
        if self.decomposition is not None and self.decomposition.ell != self.ell:
            raise ConfigurationError("decomposition size does not match problem size")
        if self.black_box is not None and self.black_box.ell != self.ell:
            raise ConfigurationError("black-box size does not match problem size")

    @property
    def sense(self) -> str:
        return "max" if self.domain == "discrete" else "min"

    def vtr_reached(self, objective: float, constraint: float) -> bool:
        if self.vtr is None or constraint > 0.0:
            return False
        if self.sense == "max":
            return objective >= self.vtr
        return objective <= self.vtr


class Evaluator:
    """Evaluation facade for one run: routes to the gray-box or black-box path.

    In gray-box mode, change trials are served by buffered partial updates;
    in black-box mode every trial is a full evaluation costing one unit.
    """

    __slots__ = ("problem", "mode", "counter", "maximize", "debug_checks")

    def __init__(
        self,
        problem: Problem,
        mode: str = "gbo",
        counter: EvaluationCounter | None = None,
        debug_checks: bool = False,
    ):
        if mode not in ("gbo", "bbo"):
            raise ConfigurationError(f"unknown mode {mode!r}")
        if mode == "gbo" and problem.decomposition is None:
            raise ConfigurationError(f"problem {problem.name!r} has no gray-box route")
        if mode == "bbo" and problem.black_box is None:
            raise ConfigurationError(f"problem {problem.name!r} has no black-box route")
        self.problem = problem
        self.mode = mode
        self.counter = counter if counter is not None else EvaluationCounter()
        self.maximize = problem.sense == "max"
        self.debug_checks = debug_checks

    def new_solution(self, genotype: np.ndarray) -> Solution:
        if self.debug_checks:
            alphabet = self.problem.alphabet_size if self.problem.domain == "discrete" else None
            validate_genotype(genotype, self.problem.ell, alphabet)
        buffer_count = self.problem.decomposition.buffer_count if self.mode == "gbo" else 0
        return Solution(genotype, buffer_count)

    def evaluate(self, sol: Solution) -> Solution:
        if self.mode == "gbo":
            return full_evaluate_gbo(self.problem.decomposition, sol, self.counter)
        return full_evaluate_bbo(self.problem.black_box, sol, self.counter)

    def try_changes(self, sol: Solution, idxs: Sequence[int], vals: Sequence):
        """Apply a change set in place; returns an undo token for `revert`."""
        if self.debug_checks and self.problem.domain == "discrete":
            for v in vals:
                if v < 0 or v >= self.problem.alphabet_size:
                    raise ContractViolationError(f"value {v} outside the alphabet")
        if self.mode == "gbo":
            return partial_update(self.problem.decomposition, sol, idxs, vals, self.counter)
        genotype = sol.genotype
        undo = (
            idxs,
            [genotype[u] for u in idxs],
            None,
            (),
            (),
            sol.objective,
            sol.constraint,
            sol.partial_updates,
        )
        for u, v in zip(idxs, vals):
            genotype[u] = v
        full_evaluate_bbo(self.problem.black_box, sol, self.counter)
        return undo

    def revert(self, sol: Solution, undo: tuple) -> None:
        if self.mode == "gbo":
            revert_partial(sol, undo)
            return
        genotype = sol.genotype
        for u, v in zip(undo[0], undo[1]):
            genotype[u] = v
        sol.objective = undo[5]
        sol.constraint = undo[6]
        sol.partial_updates = undo[7]

    def accepts(self, new_obj, new_cons, old_obj, old_cons) -> bool:
        return _acceptable(new_obj, new_cons, old_obj, old_cons, self.maximize)

    def strictly_better(self, new_obj, new_cons, old_obj, old_cons) -> bool:
        return _strictly_better(new_obj, new_cons, old_obj, old_cons, self.maximize)
