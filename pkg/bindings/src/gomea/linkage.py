"""Linkage model selectors.

Instantiating one of these stores the model parameters only; the engine
builds the actual family of subsets when the run first needs it.
"""

from __future__ import annotations

from gomea_core import ConfigurationError, LinkageConfig


class LinkageModel:
    """Base selector wrapping an engine linkage configuration."""

    def __init__(self, config: LinkageConfig):
        self._config = config

    def to_config(self) -> LinkageConfig:
        return self._config

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class Univariate(LinkageModel):
    def __init__(self):
        super().__init__(LinkageConfig.univariate())


class BlockMarginalProduct(LinkageModel):
    def __init__(self, block_size: int):
        super().__init__(LinkageConfig.block(int(block_size)))


class LinkageTree(LinkageModel):
    def __init__(self, sim_measure: str = "MI", filtered: bool = False, max_set_size: int = -1):
        measure = str(sim_measure).upper()
        if measure not in ("MI", "NMI"):
            raise ConfigurationError("sim_measure must be 'MI' or 'NMI'")
        super().__init__(
            LinkageConfig.linkage_tree(measure, bool(filtered), max(0, int(max_set_size)))
        )


class StaticLinkageTree(LinkageModel):
    def __init__(self, max_set_size: int = -1):
        super().__init__(LinkageConfig.static_linkage_tree(max(0, int(max_set_size))))


class Custom(LinkageModel):
    def __init__(self, file: str | None = None, fos=None):
        super().__init__(LinkageConfig.custom(path=file, sets=fos))


class Full(LinkageModel):
    def __init__(self):
        super().__init__(LinkageConfig.full())


class Conditional(LinkageModel):
    def __init__(self, max_clique_size: int, inc_cliques: bool, inc_full: bool):
        super().__init__(
            LinkageConfig.conditional(int(max_clique_size), bool(inc_cliques), bool(inc_full))
        )


class UCondGG(Conditional):
    def __init__(self):
        super().__init__(1, inc_cliques=False, inc_full=True)


class UCondFG(Conditional):
    def __init__(self):
        super().__init__(1, inc_cliques=True, inc_full=False)


class UCondHG(Conditional):
    def __init__(self):
        super().__init__(1, inc_cliques=True, inc_full=True)


class MCondHG(Conditional):
    def __init__(self, max_clique_size: int):
        super().__init__(max_clique_size, inc_cliques=True, inc_full=True)
