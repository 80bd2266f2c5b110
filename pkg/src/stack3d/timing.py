"""Path-sum delay model and 2D-vs-3D path statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .netlist import Netlist, Placement, path_length, tier_crossings

# ns/µm. A median 1000-cell synthetic path placed in 2D is about 128 µm of
# wire and 0.44 ns of cell delay, so 0.003 makes the two terms comparable.
DEFAULT_WIRE_DELAY_PER_UM = 0.003


@dataclass(frozen=True)
class DelayModel:
    wire_delay_per_um: float = DEFAULT_WIRE_DELAY_PER_UM
    tier_hop_delay: float = 0.0

    def __post_init__(self):
        if self.wire_delay_per_um < 0 or self.tier_hop_delay < 0:
            raise ValueError("delay coefficients must be >= 0")


@dataclass(frozen=True)
class PathRecord:
    path_id: str
    n_cells: int
    length: float
    delay: float
    slack: float


def evaluate_paths(netlist: Netlist, placement: Placement, model: DelayModel = DelayModel()) -> list[PathRecord]:
    """Delay and slack of every declared path, most critical first.

    ``delay = sum(cell delays) + wire_delay_per_um * length
    + tier_hop_delay * crossings`` and ``slack = required - delay``.
    """
    cmap = netlist.cell_map
    out = []
    for p in netlist.paths:
        length = path_length(p, netlist, placement)
        crossings = tier_crossings(p, placement)
        intrinsic = math.fsum(cmap[c].delay for c in p.cells)
        delay = intrinsic + model.wire_delay_per_um * length + model.tier_hop_delay * crossings
        out.append(PathRecord(p.id, len(p.cells), length, delay, p.required_time - delay))
    out.sort(key=lambda r: (r.slack, r.path_id))
    return out


@dataclass(frozen=True)
class DesignSummary:
    max_length: float
    failing: int
    mean_length: float
    std_length: float
    worst_slack: float


@dataclass(frozen=True)
class PathStats:
    summary_2d: DesignSummary
    summary_3d: DesignSummary
    scatter: list[tuple[str, str, int, float, float]]  # (design, path_id, n_cells, length, slack)
    buckets: list[dict]

    @property
    def delta_max_length(self) -> float:
        return self.summary_3d.max_length - self.summary_2d.max_length

    @property
    def delta_failing_count(self) -> int:
        return self.summary_3d.failing - self.summary_2d.failing

    @property
    def delta_stddev(self) -> float:
        return self.summary_3d.std_length - self.summary_2d.std_length

    def to_dict(self) -> dict:
        def s(d: DesignSummary):
            return {
                "max_length_um": d.max_length,
                "failing_paths": d.failing,
                "mean_length_um": d.mean_length,
                "std_length_um": d.std_length,
                "worst_slack_ns": d.worst_slack,
            }

        return {
            "2d": s(self.summary_2d),
            "3d": s(self.summary_3d),
            "delta_max_length_um": self.delta_max_length,
            "delta_failing_count": self.delta_failing_count,
            "delta_stddev_um": self.delta_stddev,
            "buckets": self.buckets,
        }


def _summary(records: list[PathRecord]) -> DesignSummary:
    lengths = np.array([r.length for r in records])
    return DesignSummary(
        max_length=float(lengths.max()),
        failing=sum(1 for r in records if r.slack < 0),
        mean_length=float(lengths.mean()),
        std_length=float(lengths.std()),
        worst_slack=min(r.slack for r in records),
    )


def path_stats(records_2d: list[PathRecord], records_3d: list[PathRecord], bucket_width: int = 5) -> PathStats:
    """Summaries, deltas (3D minus 2D) and an n_cells-bucketed scatter table."""
    if not records_2d or not records_3d:
        raise ValueError("path_stats needs non-empty record lists for both designs")
    scatter = [("2d", r.path_id, r.n_cells, r.length, r.slack) for r in records_2d]
    scatter += [("3d", r.path_id, r.n_cells, r.length, r.slack) for r in records_3d]
    buckets = []
    top = max(r.n_cells for r in records_2d + records_3d)
    for lo in range(1, top + 1, bucket_width):
        hi = lo + bucket_width - 1
        row = {"n_cells_lo": lo, "n_cells_hi": hi}
        for name, recs in (("2d", records_2d), ("3d", records_3d)):
            sel = [r for r in recs if lo <= r.n_cells <= hi]
            row[f"{name}_count"] = len(sel)
            row[f"{name}_mean_length_um"] = float(np.mean([r.length for r in sel])) if sel else None
            row[f"{name}_failing"] = sum(1 for r in sel if r.slack < 0)
        buckets.append(row)
    return PathStats(_summary(records_2d), _summary(records_3d), scatter, buckets)
