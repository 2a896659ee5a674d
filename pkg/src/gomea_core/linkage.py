"""Linkage models: families of subsets over the problem variables.

Covers the marginal-product models (univariate, consecutive blocks, full),
linkage trees learned by UPGMA clustering of a pairwise similarity measure
(mutual information or its normalized variant), static linkage trees derived
from the variable interaction graph of a gray-box decomposition, custom
user-supplied families, and conditional models built from the maximal
cliques of the interaction graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ConfigurationError, RngStream
from .fitness import Problem, SubfunctionDecomposition

FILTER_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FOS:
    """An ordered family of linkage sets, each a sorted tuple of indices.

    ``conditioning`` (parallel to ``sets``) lists, for conditional models,
    the variables a set is conditioned on during sampling. ``factorization``
    holds the clique factors used for forward sampling of a full element,
    ordered for ancestral traversal.
    """

    kind: str
    sets: tuple[tuple[int, ...], ...]
    conditioning: tuple[tuple[int, ...], ...] | None = None
    factorization: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] | None = None

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)


class VIG:
    """Variable interaction graph: an edge joins variables co-occurring in
    some subfunction input set."""

    __slots__ = ("ell", "adjacency", "edges")

    def __init__(self, ell: int, edges):
        self.ell = ell
        pairs = set()
        for u, v in edges:
            if u == v:
                continue
            pairs.add((min(u, v), max(u, v)))
        neigh: list[set[int]] = [set() for _ in range(ell)]
        for u, v in pairs:
            if not (0 <= u < ell and 0 <= v < ell):
                raise ConfigurationError(f"edge ({u}, {v}) outside [0, {ell})")
            neigh[u].add(v)
            neigh[v].add(u)
        self.edges = frozenset(pairs)
        self.adjacency: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(s)) for s in neigh
        )

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adjacency[u]

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def connected_components(self) -> list[list[int]]:
        seen = [False] * self.ell
        components = []
        for start in range(self.ell):
            if seen[start]:
                continue
            queue = [start]
            seen[start] = True
            comp = []
            while queue:
                u = queue.pop(0)
                comp.append(u)
                for v in self.adjacency[u]:
                    if not seen[v]:
                        seen[v] = True
                        queue.append(v)
            components.append(comp)
        return components

    def bfs_order(self) -> list[int]:
        """Breadth-first variable order per component, neighbors ascending."""
        order = []
        seen = [False] * self.ell
        for start in range(self.ell):
            if seen[start]:
                continue
            queue = [start]
            seen[start] = True
            while queue:
                u = queue.pop(0)
                order.append(u)
                for v in self.adjacency[u]:
                    if not seen[v]:
                        seen[v] = True
                        queue.append(v)
        return order


def build_vig(decomp: SubfunctionDecomposition) -> VIG:
    edges = []
    for members in decomp.inputs:
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                edges.append((members[a], members[b]))
    return VIG(decomp.ell, edges)


# ---------------------------------------------------------------------------
# Marginal-product and custom families


def build_univariate(ell: int) -> FOS:
    return FOS("univariate", tuple((i,) for i in range(ell)))


def build_block_mp(ell: int, block_size: int) -> FOS:
    if block_size < 1 or ell % block_size != 0:
        raise ConfigurationError(
            f"block size {block_size} must divide the variable count {ell}"
        )
    sets = tuple(
        tuple(range(i, i + block_size)) for i in range(0, ell, block_size)
    )
    return FOS("block-mp", sets)


def build_full(ell: int, domain: str = "real") -> FOS:
    if domain == "discrete":
        raise ConfigurationError("the full linkage model is real-valued only")
    return FOS("full", (tuple(range(ell)),))


def parse_custom_fos(source, ell: int) -> FOS:
    """Custom family from explicit sets or a text file.

    File format: one linkage set per line, indices separated by commas or
    spaces (any mix), zero-based decimal, all within ``[0, ell)``.
    """
    if isinstance(source, (list, tuple)):
        sets = []
        for lineno, entry in enumerate(source, start=1):
            members = _validated_set(entry, ell, source="set", lineno=lineno)
            sets.append(members)
    else:
        with open(source, encoding="utf-8") as fh:
            lines = fh.read().split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        sets = []
        for lineno, line in enumerate(lines, start=1):
            tokens = line.replace(",", " ").split()
            if not tokens:
                raise ConfigurationError(f"{source}:{lineno}: empty linkage set")
            try:
                members = [int(tok) for tok in tokens]
            except ValueError as exc:
                raise ConfigurationError(f"{source}:{lineno}: {exc}") from None
            sets.append(_validated_set(members, ell, source=str(source), lineno=lineno))
    if not sets:
        raise ConfigurationError("custom family contains no linkage sets")
    return FOS("custom", tuple(sets))


def _validated_set(entry, ell: int, source: str, lineno: int) -> tuple[int, ...]:
    members = tuple(sorted(int(u) for u in entry))
    if not members:
        raise ConfigurationError(f"{source}:{lineno}: empty linkage set")
    if len(set(members)) != len(members):
        raise ConfigurationError(f"{source}:{lineno}: duplicate index")
    for u in members:
        if u < 0 or u >= ell:
            raise ConfigurationError(
                f"{source}:{lineno}: index {u} out of range [0, {ell})"
            )
    return members


# ---------------------------------------------------------------------------
# Similarity estimation


def estimate_similarity(genotypes: np.ndarray, measure: str = "MI") -> np.ndarray:
    """Pairwise mutual information (nats) of discrete population columns.

    ``measure='NMI'`` divides by the joint entropy, with 0/0 defined as 0.
    The diagonal is unused and left at zero.
    """
    if measure not in ("MI", "NMI"):
        raise ConfigurationError(f"unknown similarity measure {measure!r}")
    genotypes = np.asarray(genotypes)
    n, ell = genotypes.shape
    if n < 2:
        raise ConfigurationError("similarity estimation needs a population of >= 2")
    symbols = np.unique(genotypes)
    indicators = [(genotypes == s).astype(np.float64) for s in symbols]
    marginals = [ind.mean(axis=0) for ind in indicators]
    mi = np.zeros((ell, ell))
    joint_entropy = np.zeros((ell, ell))
    for a, ind_a in enumerate(indicators):
        pa = marginals[a]
        for b, ind_b in enumerate(indicators):
            pb = marginals[b]
            joint = (ind_a.T @ ind_b) / n
            outer = np.outer(pa, pb)
            mask = joint > 0.0
            contrib = np.zeros_like(joint)
            contrib[mask] = joint[mask] * (np.log(joint[mask]) - np.log(outer[mask]))
            mi += contrib
            ent = np.zeros_like(joint)
            ent[mask] = -joint[mask] * np.log(joint[mask])
            joint_entropy += ent
    np.clip(mi, 0.0, None, out=mi)
    if measure == "NMI":
        with np.errstate(invalid="ignore", divide="ignore"):
            sim = np.where(joint_entropy > 0.0, mi / joint_entropy, 0.0)
        np.clip(sim, 0.0, 1.0, out=sim)
    else:
        sim = mi
    # Matrix products accumulate in different orders for (u, v) and (v, u);
    # averaging restores exact symmetry.
    sim = (sim + sim.T) / 2.0
    np.fill_diagonal(sim, 0.0)
    return sim


def column_entropies(genotypes: np.ndarray) -> np.ndarray:
    """Empirical entropy (nats) of each population column."""
    genotypes = np.asarray(genotypes)
    n, ell = genotypes.shape
    out = np.zeros(ell)
    for s in np.unique(genotypes):
        p = (genotypes == s).mean(axis=0)
        mask = p > 0.0
        out[mask] -= p[mask] * np.log(p[mask])
    return out


def estimate_similarity_real(genotypes: np.ndarray) -> np.ndarray:
    """Absolute Pearson correlation between real-valued columns."""
    genotypes = np.asarray(genotypes, dtype=np.float64)
    centered = genotypes - genotypes.mean(axis=0)
    std = centered.std(axis=0)
    std[std == 0.0] = 1.0
    normed = centered / std
    corr = (normed.T @ normed) / genotypes.shape[0]
    sim = np.abs(corr)
    np.clip(sim, 0.0, 1.0, out=sim)
    sim = (sim + sim.T) / 2.0
    np.fill_diagonal(sim, 0.0)
    return sim


# ---------------------------------------------------------------------------
# UPGMA linkage trees


def _upgma(
    S: np.ndarray,
    rng: RngStream,
    *,
    max_set_size: int = 0,
    drop_full: bool = True,
    require_positive: bool = False,
    filtered: bool = False,
    measure: str = "MI",
    entropies: np.ndarray | None = None,
    kind: str = "linkage-tree",
) -> FOS:
    """Agglomerate singletons by maximal average pairwise similarity.

    Every merged set is recorded next to all singletons, subject to the size
    cap (merging continues past the cap; only recording stops). With
    ``require_positive``, clusters with zero average similarity are never
    merged, so separate graph components end up in separate trees. With
    ``filtered``, children of a merge at maximal similarity (NMI 1, or MI
    equal to the smaller side's entropy) are dropped in favor of the parent.
    """
    ell = S.shape[0]
    if filtered and measure == "MI" and entropies is None:
        raise ConfigurationError("MI filtering requires per-variable entropies")
    members: list[tuple[int, ...]] = [(i,) for i in range(ell)]
    sizes = np.ones(ell)
    mean_entropy = (
        entropies.astype(np.float64).copy() if entropies is not None else np.zeros(ell)
    )
    recorded: list[tuple[int, ...] | None] = [(i,) for i in range(ell)]
    record_of = list(range(ell))  # active cluster -> index into `recorded`
    M = S.astype(np.float64)
    M = (M + M.T) / 2.0  # exact symmetry, so every max has an i < j witness
    np.fill_diagonal(M, -np.inf)
    active = np.ones(ell, dtype=bool)
    gen = rng.gen
    n_active = ell
    while n_active > 1:
        best = M.max()
        if best == -np.inf or (require_positive and best <= 0.0):
            break
        pairs = np.argwhere(M == best)
        pairs = pairs[pairs[:, 0] < pairs[:, 1]]
        a, b = pairs[gen.integers(len(pairs))]
        merged = tuple(sorted(members[a] + members[b]))
        na, nb = sizes[a], sizes[b]
        row = (na * M[a, :] + nb * M[b, :]) / (na + nb)
        # Cluster a becomes the merge; b is retired.
        members[a] = merged
        sizes[a] = na + nb
        M[a, :] = row
        M[:, a] = row
        M[a, a] = -np.inf
        M[b, :] = -np.inf
        M[:, b] = -np.inf
        active[b] = False
        n_active -= 1
        keep = max_set_size <= 0 or len(merged) <= max_set_size
        if drop_full and len(merged) == ell:
            keep = False
        if filtered:
            if measure == "NMI":
                superfluous = best >= 1.0 - FILTER_TOLERANCE
            else:
                cap = min(mean_entropy[a], mean_entropy[b])
                superfluous = best >= cap - FILTER_TOLERANCE
            if superfluous:
                for child in (record_of[a], record_of[b]):
                    if child is not None:
                        recorded[child] = None
        mean_entropy[a] = (na * mean_entropy[a] + nb * mean_entropy[b]) / (na + nb)
        if keep:
            record_of[a] = len(recorded)
            recorded.append(merged)
        else:
            record_of[a] = None
    sets = tuple(s for s in recorded if s is not None)
    return FOS(kind, sets)


def build_linkage_tree(
    S: np.ndarray,
    rng: RngStream,
    *,
    filtered: bool = False,
    max_set_size: int = 0,
    drop_full: bool = True,
    measure: str = "MI",
    entropies: np.ndarray | None = None,
) -> FOS:
    """Linkage tree over a similarity matrix via UPGMA clustering."""
    return _upgma(
        S,
        rng,
        max_set_size=max_set_size,
        drop_full=drop_full,
        filtered=filtered,
        measure=measure,
        entropies=entropies,
        kind="linkage-tree",
    )


def vig_distance_similarity(vig: VIG) -> np.ndarray:
    """Connectivity similarity: 1 on edges, 1/(1+d) along paths, 0 across
    components."""
    ell = vig.ell
    S = np.zeros((ell, ell))
    for start in range(ell):
        # BFS distances from `start`.
        dist = np.full(ell, -1)
        dist[start] = 0
        queue = [start]
        while queue:
            u = queue.pop(0)
            for v in vig.adjacency[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        for v in range(ell):
            if v == start or dist[v] < 0:
                continue
            S[start, v] = 1.0 if dist[v] == 1 else 1.0 / (1.0 + dist[v])
    return S


def build_static_linkage_tree(
    decomp: SubfunctionDecomposition,
    rng: RngStream,
    *,
    max_set_size: int = 0,
    drop_full: bool = True,
) -> FOS:
    """Linkage tree built once from the interaction graph of a decomposition.

    Uses graph connectivity as similarity unless the decomposition carries a
    custom similarity measure. Variables in different graph components never
    share a set.
    """
    vig = build_vig(decomp)
    if decomp.similarity_measure is not None:
        ell = decomp.ell
        S = np.zeros((ell, ell))
        f = decomp.similarity_measure
        for u in range(ell):
            for v in range(u + 1, ell):
                S[u, v] = S[v, u] = float(f(u, v))
        if not np.all(np.isfinite(S)) or S.min() < 0.0:
            raise ConfigurationError("custom similarity must be finite and >= 0")
    else:
        S = vig_distance_similarity(vig)
    return _upgma(
        S,
        rng,
        max_set_size=max_set_size,
        drop_full=drop_full,
        require_positive=True,
        kind="static-linkage-tree",
    )


# ---------------------------------------------------------------------------
# Conditional models


def maximal_cliques(vig: VIG) -> list[tuple[int, ...]]:
    """All maximal cliques via recursive pivoting enumeration."""
    adjacency = [set(nb) for nb in vig.adjacency]
    cliques: list[tuple[int, ...]] = []

    def expand(clique: list[int], candidates: set[int], excluded: set[int]):
        if not candidates and not excluded:
            cliques.append(tuple(sorted(clique)))
            return
        pivot = max(
            candidates | excluded,
            key=lambda u: (len(candidates & adjacency[u]), -u),
        )
        for v in sorted(candidates - adjacency[pivot]):
            expand(
                clique + [v],
                candidates & adjacency[v],
                excluded & adjacency[v],
            )
            candidates.remove(v)
            excluded.add(v)

    expand([], set(range(vig.ell)), set())
    return sorted(cliques)


def _capped_factors(vig: VIG, max_clique_size: int) -> list[tuple[int, ...]]:
    from itertools import combinations

    if max_clique_size < 1:
        raise ConfigurationError("max_clique_size must be >= 1")
    factors: set[tuple[int, ...]] = set()
    for clique in maximal_cliques(vig):
        if len(clique) <= max_clique_size:
            factors.add(clique)
        else:
            factors.update(combinations(clique, max_clique_size))
    # Discard factors dominated by a strict superset.
    kept = []
    as_sets = [set(f) for f in factors]
    ordered = sorted(factors)
    for f in ordered:
        fs = set(f)
        if any(fs < other for other in as_sets):
            continue
        kept.append(f)
    return kept


def build_conditional(
    vig: VIG,
    max_clique_size: int,
    include_cliques: bool,
    include_full: bool,
) -> FOS:
    """Conditional family from the interaction graph's maximal cliques.

    Factors are the maximal cliques capped at ``max_clique_size``; each FOS
    element is conditioned on every graph neighbor of its members outside
    the element. ``include_cliques`` adds one element per factor,
    ``include_full`` adds the all-variables element sampled by ancestral
    traversal of the factorization.
    """
    if not include_cliques and not include_full:
        raise ConfigurationError(
            "conditional model needs cliques, the full element, or both"
        )
    factors = _capped_factors(vig, max_clique_size)

    def conditioning_of(members) -> tuple[int, ...]:
        cond: set[int] = set()
        for u in members:
            cond.update(vig.adjacency[u])
        cond.difference_update(members)
        return tuple(sorted(cond))

    rank = {u: r for r, u in enumerate(vig.bfs_order())}
    ordered_factors = sorted(factors, key=lambda f: (min(rank[u] for u in f), f))
    factorization = tuple((f, conditioning_of(f)) for f in ordered_factors)

    sets: list[tuple[int, ...]] = []
    conditioning: list[tuple[int, ...]] = []
    if include_cliques:
        for f, cond in factorization:
            sets.append(f)
            conditioning.append(cond)
    if include_full:
        sets.append(tuple(range(vig.ell)))
        conditioning.append(())
    return FOS("conditional", tuple(sets), tuple(conditioning), factorization)


# ---------------------------------------------------------------------------
# Validation


def validate_fos(fos: FOS, ell: int, domain: str = "discrete", filtered: bool = False) -> None:
    """Check the structural invariants of a family for its kind."""
    if not fos.sets:
        raise ConfigurationError("family contains no linkage sets")
    full = tuple(range(ell))
    for s in fos.sets:
        if not s:
            raise ConfigurationError("empty linkage set")
        if len(set(s)) != len(s):
            raise ConfigurationError(f"duplicate index in {s}")
        if s[0] < 0 or s[-1] >= ell:
            raise ConfigurationError(f"set {s} outside [0, {ell})")
        if tuple(sorted(s)) != s:
            raise ConfigurationError(f"set {s} is not sorted")
        if domain == "discrete" and s == full and fos.kind != "custom":
            raise ConfigurationError("full set present in a discrete family")
    if fos.kind in ("univariate", "block-mp", "full"):
        covered: set[int] = set()
        for s in fos.sets:
            if covered & set(s):
                raise ConfigurationError("marginal-product sets overlap")
            covered.update(s)
        if covered != set(range(ell)):
            raise ConfigurationError("marginal-product sets do not cover all variables")
    if fos.kind in ("linkage-tree", "static-linkage-tree") and not filtered:
        singletons = {s for s in fos.sets if len(s) == 1}
        if len(singletons) != ell:
            raise ConfigurationError("linkage tree is missing singleton sets")


# ---------------------------------------------------------------------------
# Configuration and model resolution


@dataclass
class LinkageConfig:
    """Parameters of a linkage model; nothing is built until first needed."""

    kind: str
    block_size: int = 0
    sim_measure: str = "MI"
    filtered: bool = False
    max_set_size: int = 0
    custom_path: str | None = None
    custom_sets: Sequence[Sequence[int]] | None = None
    max_clique_size: int = 1
    include_cliques: bool = False
    include_full: bool = False

    @classmethod
    def univariate(cls) -> "LinkageConfig":
        return cls("univariate")

    @classmethod
    def block(cls, block_size: int) -> "LinkageConfig":
        return cls("block-mp", block_size=block_size)

    @classmethod
    def linkage_tree(
        cls, sim_measure: str = "MI", filtered: bool = False, max_set_size: int = 0
    ) -> "LinkageConfig":
        return cls(
            "linkage-tree",
            sim_measure=sim_measure,
            filtered=filtered,
            max_set_size=max_set_size,
        )

    @classmethod
    def static_linkage_tree(cls, max_set_size: int = 0) -> "LinkageConfig":
        return cls("static-linkage-tree", max_set_size=max_set_size)

    @classmethod
    def custom(cls, path: str | None = None, sets=None) -> "LinkageConfig":
        if (path is None) == (sets is None):
            raise ConfigurationError("custom model needs exactly one of path or sets")
        return cls("custom", custom_path=path, custom_sets=sets)

    @classmethod
    def full(cls) -> "LinkageConfig":
        return cls("full")

    @classmethod
    def conditional(
        cls, max_clique_size: int, include_cliques: bool, include_full: bool
    ) -> "LinkageConfig":
        return cls(
            "conditional",
            max_clique_size=max_clique_size,
            include_cliques=include_cliques,
            include_full=include_full,
        )

    @classmethod
    def ucond_gg(cls) -> "LinkageConfig":
        return cls.conditional(1, include_cliques=False, include_full=True)

    @classmethod
    def ucond_fg(cls) -> "LinkageConfig":
        return cls.conditional(1, include_cliques=True, include_full=False)

    @classmethod
    def ucond_hg(cls) -> "LinkageConfig":
        return cls.conditional(1, include_cliques=True, include_full=True)

    @classmethod
    def mcond_hg(cls, max_clique_size: int) -> "LinkageConfig":
        return cls.conditional(max_clique_size, include_cliques=True, include_full=True)


def parse_linkage_spec(spec: str) -> LinkageConfig:
    """Parse the command-line linkage grammar.

    ``univariate | full | block:<b> | lt:<mi|nmi>[:filtered][:max=<s>]
    | slt[:max=<s>] | custom:<path>
    | cond:<ucondgg|ucondfg|ucondhg|mcondhg:<c>>``
    """
    parts = spec.strip().split(":")
    head = parts[0].lower()
    if head == "univariate" and len(parts) == 1:
        return LinkageConfig.univariate()
    if head == "full" and len(parts) == 1:
        return LinkageConfig.full()
    if head == "block" and len(parts) == 2:
        return LinkageConfig.block(_parse_int(parts[1], spec))
    if head == "lt" and 2 <= len(parts) <= 4:
        measure = parts[1].lower()
        if measure not in ("mi", "nmi"):
            raise ConfigurationError(f"bad linkage spec {spec!r}: measure must be mi or nmi")
        filtered = False
        max_set_size = 0
        for extra in parts[2:]:
            if extra == "filtered":
                filtered = True
            elif extra.startswith("max="):
                max_set_size = _parse_int(extra[4:], spec)
            else:
                raise ConfigurationError(f"bad linkage spec {spec!r}: unknown option {extra!r}")
        return LinkageConfig.linkage_tree(measure.upper(), filtered, max_set_size)
    if head == "slt" and len(parts) <= 2:
        max_set_size = 0
        if len(parts) == 2:
            if not parts[1].startswith("max="):
                raise ConfigurationError(f"bad linkage spec {spec!r}")
            max_set_size = _parse_int(parts[1][4:], spec)
        return LinkageConfig.static_linkage_tree(max_set_size)
    if head == "custom" and len(parts) >= 2:
        return LinkageConfig.custom(path=":".join(parts[1:]))
    if head == "cond" and len(parts) >= 2:
        variant = parts[1].lower()
        if variant == "ucondgg" and len(parts) == 2:
            return LinkageConfig.ucond_gg()
        if variant == "ucondfg" and len(parts) == 2:
            return LinkageConfig.ucond_fg()
        if variant == "ucondhg" and len(parts) == 2:
            return LinkageConfig.ucond_hg()
        if variant == "mcondhg" and len(parts) == 3:
            return LinkageConfig.mcond_hg(_parse_int(parts[2], spec))
    raise ConfigurationError(f"bad linkage spec {spec!r}")


def _parse_int(text: str, spec: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigurationError(f"bad linkage spec {spec!r}: {text!r} is not an integer") from None


def linkage_spec_string(config: LinkageConfig) -> str:
    """Inverse of :func:`parse_linkage_spec` for reporting."""
    if config.kind == "univariate":
        return "univariate"
    if config.kind == "full":
        return "full"
    if config.kind == "block-mp":
        return f"block:{config.block_size}"
    if config.kind == "linkage-tree":
        out = f"lt:{config.sim_measure.lower()}"
        if config.filtered:
            out += ":filtered"
        if config.max_set_size > 0:
            out += f":max={config.max_set_size}"
        return out
    if config.kind == "static-linkage-tree":
        out = "slt"
        if config.max_set_size > 0:
            out += f":max={config.max_set_size}"
        return out
    if config.kind == "custom":
        return f"custom:{config.custom_path or '<sets>'}"
    if config.kind == "conditional":
        if config.max_clique_size == 1:
            if config.include_cliques and config.include_full:
                return "cond:ucondhg"
            if config.include_full:
                return "cond:ucondgg"
            return "cond:ucondfg"
        return f"cond:mcondhg:{config.max_clique_size}"
    return config.kind


class LinkageModel:
    """Resolves a linkage configuration to concrete families for one run.

    Static kinds are built once and cached; the learned linkage tree is
    rebuilt from the population at the start of every generation.
    """

    def __init__(self, config: LinkageConfig, problem: Problem, mode: str):
        kind = config.kind
        if kind not in (
            "univariate",
            "block-mp",
            "linkage-tree",
            "static-linkage-tree",
            "custom",
            "full",
            "conditional",
        ):
            raise ConfigurationError(f"unknown linkage kind {kind!r}")
        if kind == "full" and problem.domain == "discrete":
            raise ConfigurationError("the full linkage model is real-valued only")
        if kind == "conditional" and problem.domain == "discrete":
            raise ConfigurationError("conditional linkage models are real-valued only")
        if kind in ("static-linkage-tree", "conditional") and mode != "gbo":
            raise ConfigurationError(
                f"{kind} requires the gray-box setting (no interaction graph in black-box mode)"
            )
        if kind == "block-mp" and (
            config.block_size < 1 or problem.ell % config.block_size != 0
        ):
            raise ConfigurationError(
                f"block size {config.block_size} must divide the variable count {problem.ell}"
            )
        if kind == "linkage-tree" and config.sim_measure not in ("MI", "NMI"):
            raise ConfigurationError(f"unknown similarity measure {config.sim_measure!r}")
        self.config = config
        self.problem = problem
        self.mode = mode
        self._static_fos: FOS | None = None

    @property
    def relearns_each_generation(self) -> bool:
        return self.config.kind == "linkage-tree"

    def build(self, genotypes: np.ndarray | None, rng: RngStream) -> FOS:
        cfg = self.config
        if cfg.kind == "linkage-tree":
            if genotypes is None:
                raise ConfigurationError("learned linkage tree needs population genotypes")
            drop_full = self.problem.domain == "discrete"
            if self.problem.domain == "discrete":
                S = estimate_similarity(genotypes, cfg.sim_measure)
                entropies = (
                    column_entropies(genotypes)
                    if cfg.filtered and cfg.sim_measure == "MI"
                    else None
                )
                measure = cfg.sim_measure
            else:
                S = estimate_similarity_real(genotypes)
                measure = "NMI"  # |corr| is already normalized to [0, 1]
                entropies = None
            return build_linkage_tree(
                S,
                rng,
                filtered=cfg.filtered,
                max_set_size=cfg.max_set_size,
                drop_full=drop_full,
                measure=measure,
                entropies=entropies,
            )
        if self._static_fos is not None:
            return self._static_fos
        ell = self.problem.ell
        if cfg.kind == "univariate":
            fos = build_univariate(ell)
        elif cfg.kind == "block-mp":
            fos = build_block_mp(ell, cfg.block_size)
        elif cfg.kind == "full":
            fos = build_full(ell, self.problem.domain)
        elif cfg.kind == "custom":
            source = cfg.custom_path if cfg.custom_path is not None else cfg.custom_sets
            fos = parse_custom_fos(source, ell)
        elif cfg.kind == "static-linkage-tree":
            fos = build_static_linkage_tree(
                self.problem.decomposition,
                rng,
                max_set_size=cfg.max_set_size,
                drop_full=self.problem.domain == "discrete",
            )
        elif cfg.kind == "conditional":
            vig = build_vig(self.problem.decomposition)
            fos = build_conditional(
                vig, cfg.max_clique_size, cfg.include_cliques, cfg.include_full
            )
        else:  # pragma: no cover
            raise ConfigurationError(f"unknown linkage kind {cfg.kind!r}")
        self._static_fos = fos
        return fos
