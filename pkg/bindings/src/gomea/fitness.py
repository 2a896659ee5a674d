"""Fitness-function base classes users extend, plus the engine binding.

A gray-box function describes its subfunction structure through
``number_of_subfunctions`` / ``inputs_to_subfunction`` / ``subfunction``;
a black-box function only implements ``objective_function``. Callbacks
receive a read-only, zero-copy view of the full variable vector; a
subfunction must only read the indices it declared.

Setting the environment variable ``GOMEA_DEBUG=1`` enables per-call checks:
finite return values and detection of callbacks that retain the variables
view beyond the call.
"""

from __future__ import annotations

import math
import os
import sys

import numpy as np
from gomea_core import (
    BlackBoxFunction,
    ConfigurationError,
    Problem,
    SubfunctionDecomposition,
)


class BindingError(TypeError):
    """A user fitness class does not satisfy the binding contract."""


class FitnessFunction:
    """Common base: holds the variable count and the optional value-to-reach."""

    domain = None  # "discrete" | "real", set by the leaf base classes

    def __new__(cls, number_of_variables, *args, **kwargs):
        return super().__new__(cls)

    def __init__(self, number_of_variables, *args, value_to_reach=None, **kwargs):
        self.number_of_variables = int(number_of_variables)
        self.value_to_reach = value_to_reach


class GBOFitnessFunction(FitnessFunction):
    """Gray-box base class; override at least the three structure methods."""

    def number_of_subfunctions(self) -> int:
        raise NotImplementedError

    def inputs_to_subfunction(self, subfunction_index):
        raise NotImplementedError

    def subfunction(self, subfunction_index, variables) -> float:
        raise NotImplementedError

    def objective_function(self, objective_index, fitness_buffers) -> float:
        """Combine the fitness buffers into the objective; buffers only."""
        return float(fitness_buffers[0])

    def constraint_function(self, fitness_buffers) -> float:
        return 0.0

    def number_of_fitness_buffers(self) -> int:
        return 1

    def fitness_buffer_index_for_subfunction(self, subfunction_index) -> int:
        return 0

    def similarity_measure(self, var_a, var_b) -> float:
        raise NotImplementedError


class GBOFitnessFunctionDiscrete(GBOFitnessFunction):
    domain = "discrete"


class GBOFitnessFunctionRealValued(GBOFitnessFunction):
    domain = "real"


class BBOFitnessFunction(FitnessFunction):
    """Black-box base class; override ``objective_function``."""

    def objective_function(self, objective_index, variables) -> float:
        raise NotImplementedError

    def constraint_function(self, variables) -> float:
        return 0.0


class BBOFitnessFunctionDiscrete(BBOFitnessFunction):
    domain = "discrete"


class BBOFitnessFunctionRealValued(BBOFitnessFunction):
    domain = "real"


class RosenbrockFunction(GBOFitnessFunctionRealValued):
    """Built-in Rosenbrock with one subfunction per consecutive pair."""

    def number_of_subfunctions(self) -> int:
        return self.number_of_variables - 1

    def inputs_to_subfunction(self, subfunction_index):
        return range(subfunction_index, subfunction_index + 2)

    def subfunction(self, subfunction_index, variables) -> float:
        a = variables[subfunction_index]
        b = variables[subfunction_index + 1]
        return 100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2


def _debug_enabled() -> bool:
    return os.environ.get("GOMEA_DEBUG", "") not in ("", "0")


def _overrides(fitness, name: str, base: type) -> bool:
    return getattr(type(fitness), name, None) is not getattr(base, name)


def _require(fitness, names, base):
    missing = [name for name in names if not _overrides(fitness, name, base)]
    if missing:
        raise BindingError(
            f"{type(fitness).__name__} must implement {', '.join(missing)}"
        )


def _checked_dispatch(method):
    """Debug wrapper: fresh view per call, retention and finiteness checks."""

    def call(index, variables):
        view = variables[:]  # new zero-copy view object for this call only
        value = method(index, view)
        if sys.getrefcount(view) > 2:
            raise BindingError(
                "fitness callback retained the variables view; copy what you need"
            )
        value = float(value)
        if not math.isfinite(value):
            raise BindingError(f"fitness callback returned non-finite value {value}")
        return value

    return call


def bind_gbo(fitness: GBOFitnessFunction) -> Problem:
    """Turn a gray-box fitness object into an engine problem.

    Subfunction count, input sets, buffer count, and buffer routing are
    queried once here; per-evaluation calls dispatch straight to the user's
    ``subfunction`` with a zero-copy view.
    """
    if not isinstance(fitness, GBOFitnessFunction):
        raise BindingError("expected a GBOFitnessFunction subclass instance")
    if fitness.domain not in ("discrete", "real"):
        raise BindingError("use the Discrete or RealValued gray-box base class")
    _require(
        fitness,
        ("number_of_subfunctions", "inputs_to_subfunction", "subfunction"),
        GBOFitnessFunction,
    )
    ell = fitness.number_of_variables
    q = int(fitness.number_of_subfunctions())
    if q < 1:
        raise ConfigurationError("number_of_subfunctions must be >= 1")
    inputs = [
        [int(u) for u in np.asarray(fitness.inputs_to_subfunction(i)).reshape(-1)]
        for i in range(q)
    ]
    buffer_count = 1
    buffer_of = None
    if _overrides(fitness, "number_of_fitness_buffers", GBOFitnessFunction) or _overrides(
        fitness, "fitness_buffer_index_for_subfunction", GBOFitnessFunction
    ):
        buffer_count = int(fitness.number_of_fitness_buffers())
        buffer_of = [int(fitness.fitness_buffer_index_for_subfunction(i)) for i in range(q)]
    objective_combiner = None
    if _overrides(fitness, "objective_function", GBOFitnessFunction):
        user_objective = fitness.objective_function
        objective_combiner = lambda oi, buffers: float(user_objective(oi, buffers))
    constraint_combiner = None
    if _overrides(fitness, "constraint_function", GBOFitnessFunction):
        user_constraint = fitness.constraint_function
        constraint_combiner = lambda buffers: float(user_constraint(buffers))
    similarity = None
    if _overrides(fitness, "similarity_measure", GBOFitnessFunction):
        similarity = fitness.similarity_measure
        _spot_check_symmetry(similarity, ell)
    subfunction = fitness.subfunction
    if _debug_enabled():
        subfunction = _checked_dispatch(subfunction)
    decomposition = SubfunctionDecomposition(
        ell,
        inputs,
        subfunction,
        buffer_count=buffer_count,
        buffer_of=buffer_of,
        objective_combiner=objective_combiner,
        constraint_combiner=constraint_combiner,
        similarity_measure=similarity,
    )
    return Problem(
        type(fitness).__name__,
        ell,
        fitness.domain,
        decomposition=decomposition,
        vtr=fitness.value_to_reach,
    )


def _spot_check_symmetry(similarity, ell: int, pairs: int = 100) -> None:
    rng = np.random.default_rng(1337)
    for _ in range(pairs):
        a = int(rng.integers(0, ell))
        b = int(rng.integers(0, ell))
        if a == b:
            continue
        ab = float(similarity(a, b))
        ba = float(similarity(b, a))
        if not math.isclose(ab, ba, rel_tol=1e-9, abs_tol=1e-12):
            raise BindingError(
                f"similarity_measure is not symmetric: S({a},{b})={ab} vs S({b},{a})={ba}"
            )


def bind_bbo(fitness: BBOFitnessFunction) -> Problem:
    """Turn a black-box fitness object into an engine problem."""
    if not isinstance(fitness, BBOFitnessFunction):
        raise BindingError("expected a BBOFitnessFunction subclass instance")
    if fitness.domain not in ("discrete", "real"):
        raise BindingError("use the Discrete or RealValued black-box base class")
    _require(fitness, ("objective_function",), BBOFitnessFunction)
    objective = fitness.objective_function
    if _debug_enabled():
        objective = _checked_dispatch(objective)
    constraint = None
    if _overrides(fitness, "constraint_function", BBOFitnessFunction):
        user_constraint = fitness.constraint_function
        constraint = lambda variables: float(user_constraint(variables))
    box = BlackBoxFunction(fitness.number_of_variables, objective, constraint)
    return Problem(
        type(fitness).__name__,
        fitness.number_of_variables,
        fitness.domain,
        black_box=box,
        vtr=fitness.value_to_reach,
    )


def bind(fitness: FitnessFunction) -> tuple[Problem, str]:
    """Bind either kind of fitness object; returns (problem, mode)."""
    if isinstance(fitness, GBOFitnessFunction):
        return bind_gbo(fitness), "gbo"
    if isinstance(fitness, BBOFitnessFunction):
        return bind_bbo(fitness), "bbo"
    raise BindingError(
        "fitness must extend a GBOFitnessFunction or BBOFitnessFunction base class"
    )
