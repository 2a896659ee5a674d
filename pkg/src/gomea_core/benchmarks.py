"""Built-in benchmark problems with both gray-box and black-box routes.

Concatenated deceptive trap and torus MaxCut are binary maximization
problems; Rosenbrock is real-valued minimization. The black-box objectives
are implemented independently of the decompositions so the two routes can
cross-check each other.
"""

from __future__ import annotations

from functools import partial

import numpy as np

from .core import ConfigurationError
from .fitness import BlackBoxFunction, Problem, SubfunctionDecomposition


# ---------------------------------------------------------------------------
# Concatenated deceptive trap


def trap_subfunction(i: int, x: np.ndarray, k: int) -> float:
    """Deceptive trap over block ``i``: k at unitation k, else k - u - 1."""
    u = 0
    for j in range(k * i, k * i + k):
        u += x[j]
    if u == k:
        return float(k)
    return float(k - u - 1)


def _trap_bbo_objective(k: int, objective_index: int, x: np.ndarray) -> float:
    unitation = np.asarray(x).reshape(-1, k).sum(axis=1)
    return float(np.where(unitation == k, k, k - unitation - 1).sum())


def trap_problem(ell: int, k: int = 5) -> Problem:
    if ell % k != 0:
        raise ConfigurationError(f"trap size {k} must divide the variable count {ell}")
    blocks = [range(k * i, k * i + k) for i in range(ell // k)]
    decomp = SubfunctionDecomposition(ell, blocks, partial(trap_subfunction, k=k))
    bbo = BlackBoxFunction(ell, partial(_trap_bbo_objective, k))
    return Problem(f"trap{k}", ell, "discrete", decomp, bbo, vtr=float(ell))


# ---------------------------------------------------------------------------
# MaxCut on a torus grid


def maxcut_subfunction(i: int, x: np.ndarray, edges) -> float:
    u, v = edges[i]
    return 1.0 if x[u] != x[v] else 0.0


def torus_edges(m: int) -> list[tuple[int, int]]:
    """Square grid with wrap-around: each cell links right and down."""
    if m < 3:
        raise ConfigurationError(f"torus side must be >= 3, got {m}")
    edges = []
    for r in range(m):
        for c in range(m):
            u = r * m + c
            edges.append((u, ((r + 1) % m) * m + c))
            edges.append((u, r * m + (c + 1) % m))
    return [(min(u, v), max(u, v)) for u, v in edges]


def maxcut_problem(edges, n_vertices: int, name: str = "maxcut", vtr: float | None = None) -> Problem:
    edges = [tuple(int(w) for w in e) for e in edges]
    us = np.array([e[0] for e in edges])
    vs = np.array([e[1] for e in edges])

    def bbo_objective(objective_index: int, x: np.ndarray) -> float:
        return float((x[us] != x[vs]).sum())

    decomp = SubfunctionDecomposition(
        n_vertices, edges, partial(maxcut_subfunction, edges=edges)
    )
    bbo = BlackBoxFunction(n_vertices, bbo_objective)
    return Problem(name, n_vertices, "discrete", decomp, bbo, vtr=vtr)


def maxcut_torus_problem(m: int) -> Problem:
    edges = torus_edges(m)
    # Even-sided tori are bipartite: the checkerboard cuts every edge.
    vtr = float(2 * m * m) if m % 2 == 0 else None
    return maxcut_problem(edges, m * m, name=f"maxcut{m}x{m}", vtr=vtr)


def write_maxcut_instance(path, m: int, edges) -> None:
    """Torus instance file: first line the grid side, then one edge per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{m}\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")


def read_maxcut_instance(path) -> tuple[int, list[tuple[int, int]]]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ConfigurationError(f"{path}: empty MaxCut instance")
    m = int(lines[0])
    n = m * m
    edges = []
    for ln in lines[1:]:
        u, v = (int(tok) for tok in ln.split())
        if not (0 <= u < n and 0 <= v < n):
            raise ConfigurationError(f"{path}: edge ({u}, {v}) outside [0, {n})")
        edges.append((min(u, v), max(u, v)))
    return m, edges


def maxcut_problem_from_file(path) -> Problem:
    m, edges = read_maxcut_instance(path)
    vtr = float(2 * m * m) if m % 2 == 0 else None
    return maxcut_problem(edges, m * m, name=f"maxcut{m}x{m}", vtr=vtr)


# ---------------------------------------------------------------------------
# Rosenbrock


def rosenbrock_subfunction(i: int, x: np.ndarray) -> float:
    a = x[i]
    b = x[i + 1]
    d = b - a * a
    e = 1.0 - a
    return 100.0 * d * d + e * e


def _rosenbrock_bbo_objective(objective_index: int, x: np.ndarray) -> float:
    x = np.asarray(x)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rosenbrock_problem(ell: int, vtr: float = 1e-10) -> Problem:
    if ell < 2:
        raise ConfigurationError(f"rosenbrock needs at least 2 variables, got {ell}")
    inputs = [(i, i + 1) for i in range(ell - 1)]
    decomp = SubfunctionDecomposition(ell, inputs, rosenbrock_subfunction)
    bbo = BlackBoxFunction(ell, _rosenbrock_bbo_objective)
    return Problem("rosenbrock", ell, "real", decomp, bbo, vtr=vtr)
