"""Run statistics: the eight standard metrics, recording cadence, and CSV IO.

With interleaving enabled a data point is appended after every 10
generations of each population; without interleaving, after every
generation. Records with the same index describe the same instant of the
run.
"""

from __future__ import annotations

from dataclasses import dataclass

METRIC_KEYS = (
    "generation",
    "evaluations",
    "time",
    "eval_time",
    "population_index",
    "population_size",
    "best_obj_val",
    "best_cons_val",
)

RECORD_EVERY = 10  # generations per population, when interleaving is on

_INT_KEYS = {"generation", "population_index", "population_size"}


@dataclass(frozen=True)
class StatRecord:
    generation: int
    evaluations: float
    time: float
    eval_time: float
    population_index: int
    population_size: int
    best_obj_val: float
    best_cons_val: float

    def as_row(self) -> str:
        return ",".join(
            (
                f"{self.generation:d}",
                f"{self.evaluations:.3f}",
                f"{self.time:.17g}",
                f"{self.eval_time:.17g}",
                f"{self.population_index:d}",
                f"{self.population_size:d}",
                f"{self.best_obj_val:.17g}",
                f"{self.best_cons_val:.17g}",
            )
        )


class RunStatistics:
    """Time series of run metrics plus run metadata (seed, config, reason)."""

    def __init__(self, metadata: dict | None = None):
        self.records: list[StatRecord] = []
        self.metadata: dict[str, str] = {k: str(v) for k, v in (metadata or {}).items()}

    def record_point(
        self,
        generation: int,
        evaluations: float,
        time: float,
        eval_time: float,
        population_index: int,
        population_size: int,
        best_obj_val: float,
        best_cons_val: float,
    ) -> None:
        """Append one snapshot. Evaluation units are kept at 3 decimals so
        the written CSV round-trips exactly."""
        self.records.append(
            StatRecord(
                int(generation),
                round(float(evaluations), 3),
                float(time),
                float(eval_time),
                int(population_index),
                int(population_size),
                float(best_obj_val),
                float(best_cons_val),
            )
        )

    @property
    def metrics(self) -> list[str]:
        return list(METRIC_KEYS)

    def __getitem__(self, key: str) -> list:
        if key not in METRIC_KEYS:
            raise KeyError(key)
        return [getattr(r, key) for r in self.records]

    def __len__(self) -> int:
        return len(self.records)

    def write_csv(self, path) -> None:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                for key, value in self.metadata.items():
                    fh.write(f"# {key}={value}\n")
                fh.write(",".join(METRIC_KEYS) + "\n")
                for record in self.records:
                    fh.write(record.as_row() + "\n")
        except OSError as exc:
            raise OSError(f"failed to write statistics to {path}: {exc}") from exc

    @classmethod
    def read_csv(cls, path) -> "RunStatistics":
        stats = cls()
        with open(path, encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
        body = []
        for ln in lines:
            if ln.startswith("#"):
                key, _, value = ln[1:].strip().partition("=")
                stats.metadata[key.strip()] = value
            elif ln:
                body.append(ln)
        if not body or body[0] != ",".join(METRIC_KEYS):
            raise ValueError(f"{path}: missing or unexpected header row")
        for ln in body[1:]:
            fields = ln.split(",")
            values = {
                key: (int(tok) if key in _INT_KEYS else float(tok))
                for key, tok in zip(METRIC_KEYS, fields)
            }
            stats.records.append(StatRecord(**values))
        return stats
