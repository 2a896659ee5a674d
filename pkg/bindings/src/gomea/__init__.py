"""GOMEA for Python: define fitness functions here, optimize in the engine.

Black-box and gray-box fitness functions subclass the bases in
``gomea.fitness``; linkage models come from ``gomea.linkage``; runs return a
``gomea.output.OutputStatistics``.
"""

from . import discrete, fitness, linkage, output, real_valued
from .discrete import DiscreteGOMEA
from .real_valued import RealValuedGOMEA

__all__ = [
    "DiscreteGOMEA",
    "RealValuedGOMEA",
    "discrete",
    "fitness",
    "linkage",
    "output",
    "real_valued",
]

__version__ = "0.1.0"
