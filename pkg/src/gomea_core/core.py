"""Shared value types: problem sizing, genotype helpers, and seeded RNG streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_SEED = 2**63 - 1


class ConfigurationError(ValueError):
    """Invalid problem, linkage, or run configuration."""


class ContractViolationError(RuntimeError):
    """An operation was called outside its documented preconditions."""


@dataclass(frozen=True)
class ProblemSize:
    """Number of problem variables. All variable indices lie in [0, ell)."""

    ell: int

    def __post_init__(self):
        if self.ell < 1:
            raise ConfigurationError(f"problem size must be >= 1, got {self.ell}")

    @property
    def indices(self) -> range:
        return range(self.ell)


class RngStream:
    """A seeded random stream; the same seed reproduces the same draws.

    The effective seed is kept on the stream so any run can be replayed.
    """

    __slots__ = ("seed", "gen")

    def __init__(self, seed: int):
        seed = int(seed)
        if seed < 0 or seed > MAX_SEED:
            raise ConfigurationError(f"seed must be in [0, 2^63), got {seed}")
        self.seed = seed
        self.gen = np.random.Generator(np.random.PCG64(seed))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed})"


def make_rng(seed: int | None = None) -> RngStream:
    """Create a random stream, drawing a seed from OS entropy when unset."""
    if seed is None:
        seed = int(np.random.SeedSequence().entropy) % (MAX_SEED + 1)
    return RngStream(seed)


def random_discrete_genotype(ell: int, alphabet_size: int, rng: RngStream) -> np.ndarray:
    return rng.gen.integers(0, alphabet_size, size=ell, dtype=np.int64)


def random_real_genotype(ell: int, lower: float, upper: float, rng: RngStream) -> np.ndarray:
    return rng.gen.uniform(lower, upper, size=ell)


def validate_genotype(x: np.ndarray, ell: int, alphabet_size: int | None = None) -> None:
    """Boundary check used by debug assertions; raises on any violation."""
    if x.shape != (ell,):
        raise ContractViolationError(f"genotype length {x.shape} != ({ell},)")
    if alphabet_size is not None:
        if not np.issubdtype(x.dtype, np.integer):
            raise ContractViolationError("discrete genotype must be an integer array")
        if x.min() < 0 or x.max() >= alphabet_size:
            raise ContractViolationError(
                f"discrete genotype values must lie in [0, {alphabet_size})"
            )
    else:
        if not np.all(np.isfinite(x)):
            raise ContractViolationError("real genotype contains NaN or Inf")
