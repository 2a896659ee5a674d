"""Run output: a metrics dictionary detached from the engine's internals.

Everything is copied out of the engine's statistics when a run ends, so the
returned object stays valid across later runs of the same algorithm object.
"""

from __future__ import annotations


class OutputStatistics:
    """Per-metric lists of data points, indexed by metric name."""

    def __init__(self, metrics_dict: dict, metadata: dict | None = None):
        self.metrics_dict = {key: list(values) for key, values in metrics_dict.items()}
        self.metadata = dict(metadata or {})

    @classmethod
    def from_run(cls, stats) -> "OutputStatistics":
        return cls(
            {key: stats[key] for key in stats.metrics},
            stats.metadata,
        )

    @property
    def metrics(self) -> list[str]:
        return list(self.metrics_dict.keys())

    def __getitem__(self, key: str) -> list:
        return self.metrics_dict[key]

    def __len__(self) -> int:
        lengths = {len(v) for v in self.metrics_dict.values()}
        return lengths.pop() if lengths else 0

    def __repr__(self) -> str:
        return f"OutputStatistics(metrics={self.metrics}, points={len(self)})"
