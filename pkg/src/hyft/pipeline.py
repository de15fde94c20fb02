"""Timing model of the vector-wise max / exp+sum / div pipeline, and the FOM metric."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .errors import InvalidInputError

STAGE_NAMES = ("max", "expsum", "div")

# model parameters for N=8 on a two-layer tree, not measured values
DEFAULT_STAGE_CYCLES = (2, 4, 2)


@dataclass(frozen=True)
class PipelineConfig:
    stage_cycles: tuple[int, ...] = DEFAULT_STAGE_CYCLES
    num_vectors: int = 1
    vector_len: int = 8
    layers: int = 2

    def __post_init__(self):
        object.__setattr__(self, "stage_cycles", tuple(int(c) for c in self.stage_cycles))
        if len(self.stage_cycles) != 3:
            raise InvalidInputError("pipeline has exactly three stages")
        if any(c < 1 for c in self.stage_cycles):
            raise InvalidInputError("stage cycle counts must be >= 1")
        if self.num_vectors < 1:
            raise InvalidInputError("need at least one vector")
        if self.vector_len < 1 or self.layers < 1:
            raise InvalidInputError("vector_len and layers must be >= 1")


@dataclass
class PipelineTrace:
    # spans[k][s] = (start, finish) of vector k in stage s; finish is exclusive
    spans: list[list[tuple[int, int]]]
    total_cycles: int
    stage_utilization: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spans"] = [[list(span) for span in row] for row in self.spans]
        return d


def closed_form_total(cfg: PipelineConfig) -> int:
    c = cfg.stage_cycles
    return sum(c) + (cfg.num_vectors - 1) * max(c)


def simulate_pipeline(cfg: PipelineConfig) -> PipelineTrace:
    """In-order, unbuffered: a stage takes vector k once it has finished k-1
    and the previous stage has finished k."""
    c = cfg.stage_cycles
    spans: list[list[tuple[int, int]]] = []
    prev_row = None
    for k in range(cfg.num_vectors):
        row = []
        ready = 0
        for s, cycles in enumerate(c):
            start = max(ready, prev_row[s][1] if prev_row else 0)
            row.append((start, start + cycles))
            ready = start + cycles
        spans.append(row)
        prev_row = row
    total = spans[-1][-1][1]
    util = [cfg.num_vectors * cs / total for cs in c]
    return PipelineTrace(spans, total, util)


def fom(fmax_mhz: float, n: int, w: int, lut: int, ff: int) -> float:
    """Fmax * N * W / (LUT + FF)."""
    if lut + ff <= 0:
        raise InvalidInputError("LUT + FF must be positive")
    return fmax_mhz * n * w / (lut + ff)
