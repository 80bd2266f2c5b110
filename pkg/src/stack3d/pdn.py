"""Bump-limited power delivery: per-bump current, power density, IR drop.

Bumps sit on a square grid of the given pitch inside a square footprint.
The on-die grid is an ``m x m`` resistive mesh with one sheet-resistance
square between neighbouring nodes; bump nodes are held at VDD and cell
currents sink at the nearest mesh node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .netlist import Netlist, Placement


class PdnError(ValueError):
    pass


@dataclass(frozen=True)
class PdnSpec:
    total_power: float  # W
    vdd: float  # V
    footprint: float  # mm²
    bump_pitch: float  # µm
    mesh_sheet_resistance: float | None = None  # ohm/sq
    keepout: float = 0.0  # fraction of the side lost at each edge pair

    def __post_init__(self):
        for name in ("total_power", "vdd", "footprint", "bump_pitch"):
            if not getattr(self, name) > 0:
                raise PdnError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.mesh_sheet_resistance is not None and not self.mesh_sheet_resistance > 0:
            raise PdnError("mesh_sheet_resistance must be > 0")
        if not 0 <= self.keepout < 1:
            raise PdnError("keepout must be in [0, 1)")


@dataclass(frozen=True)
class PdnReport:
    bump_count: int
    current_per_bump: float
    power_density: float
    worst_ir_drop: float | None = None  # mV

    def to_dict(self) -> dict:
        return {
            "bump_count": self.bump_count,
            "current_per_bump_A": self.current_per_bump,
            "power_density_W_mm2": self.power_density,
            "worst_ir_drop_mV": self.worst_ir_drop,
        }


def bumps_per_side(footprint_mm2: float, pitch_um: float, keepout: float = 0.0) -> int:
    if not (footprint_mm2 > 0 and pitch_um > 0):
        raise PdnError("footprint and pitch must be > 0")
    side = math.sqrt(footprint_mm2) * (1.0 - keepout)
    # guard against 10.000000001 style rounding
    return int(math.floor(side / (pitch_um / 1000.0) + 1e-9))


def bump_count(footprint_mm2: float, pitch_um: float, keepout: float = 0.0) -> int:
    k = bumps_per_side(footprint_mm2, pitch_um, keepout)
    if k < 1:
        raise PdnError(f"no bump of pitch {pitch_um} µm fits a {footprint_mm2} mm² footprint")
    return k * k


def analyze(spec: PdnSpec, loads: Mapping[tuple[float, float], float] | None = None,
            mesh_size: int = 32, damping: float = 0.9) -> PdnReport:
    n = bump_count(spec.footprint, spec.bump_pitch, spec.keepout)
    drop = None
    if spec.mesh_sheet_resistance is not None and loads is not None:
        drop = ir_drop(spec, loads, mesh_size=mesh_size, damping=damping).worst_drop_mv
    return PdnReport(n, spec.total_power / (spec.vdd * n), spec.total_power / spec.footprint, drop)


# --------------------------------------------------------------------------
# IR drop


@dataclass(frozen=True)
class MeshProblem:
    """Discretized mesh: node sink currents (A) and the bump mask."""

    size: int
    sinks: np.ndarray
    bumps: np.ndarray
    resistance: float


@dataclass(frozen=True)
class IrDropResult:
    drop: np.ndarray  # V, per mesh node
    worst_drop_mv: float
    iterations: int
    residual: float


def bump_nodes(spec: PdnSpec, m: int) -> np.ndarray:
    k = bumps_per_side(spec.footprint, spec.bump_pitch, spec.keepout)
    if k < 1:
        raise PdnError("no bumps fit the footprint")
    side = math.sqrt(spec.footprint)
    pitch = spec.bump_pitch / 1000.0
    margin = (side - k * pitch) / 2
    centers = margin + (np.arange(k) + 0.5) * pitch
    idx = np.clip(np.floor(centers / side * m).astype(int), 0, m - 1)
    mask = np.zeros((m, m), dtype=bool)
    mask[np.ix_(idx, idx)] = True
    return mask


def build_mesh(spec: PdnSpec, loads: Mapping[tuple[float, float], float], mesh_size: int = 32) -> MeshProblem:
    """Map ``{(x_mm, y_mm): power_W}`` loads onto mesh nodes as currents."""
    if spec.mesh_sheet_resistance is None:
        raise PdnError("IR drop needs mesh_sheet_resistance")
    if mesh_size < 2:
        raise PdnError("mesh_size must be >= 2")
    m = mesh_size
    side = math.sqrt(spec.footprint)
    sinks = np.zeros((m, m))
    for (x, y), p in loads.items():
        if not (0 <= x <= side and 0 <= y <= side):
            raise PdnError(f"load at ({x}, {y}) mm lies outside the {side:.6g} mm footprint")
        i = min(int(x / side * m), m - 1)
        j = min(int(y / side * m), m - 1)
        sinks[i, j] += p / spec.vdd
    return MeshProblem(m, sinks, bump_nodes(spec, m), float(spec.mesh_sheet_resistance))


def solve_mesh(problem: MeshProblem, damping: float = 0.9, rtol: float = 1e-9,
               max_iter: int = 500_000) -> IrDropResult:
    """Damped Jacobi relaxation of the nodal equations for the drop ``v``.

    At a free node ``sum_nbr (v_i - v_j) / R = I_i``; bump nodes are pinned
    at zero drop. Stops when the largest nodal current imbalance falls below
    ``rtol`` times the total sink current.
    """
    sinks, bumps, R = problem.sinks, problem.bumps, problem.resistance
    m = problem.size
    total = float(sinks.sum())
    v = np.zeros((m, m))
    if total == 0.0:
        return IrDropResult(v, 0.0, 0, 0.0)
    if not bumps.any():
        raise PdnError("mesh has no bump nodes")
    if bumps.all():
        # every node is pinned: current goes straight into the bumps
        return IrDropResult(v, 0.0, 0, 0.0)
    deg = np.full((m, m), 4.0)
    deg[0, :] -= 1
    deg[-1, :] -= 1
    deg[:, 0] -= 1
    deg[:, -1] -= 1
    free = ~bumps
    tol = rtol * total
    nsum = np.empty_like(v)
    for it in range(1, max_iter + 1):
        _neighbour_sum(v, nsum)
        target = (nsum + R * sinks) / deg
        v = np.where(free, v + damping * (target - v), 0.0)
        if it % 50 == 0 or it == max_iter:
            _neighbour_sum(v, nsum)
            resid = np.abs((deg * v - nsum) / R - sinks)[free].max()
            if resid < tol:
                return IrDropResult(v, float(v.max() * 1000.0), it, float(resid))
    raise PdnError(f"IR-drop relaxation did not converge in {max_iter} iterations (residual {resid:.3g} A)")


def _neighbour_sum(v: np.ndarray, out: np.ndarray) -> None:
    out[...] = 0.0
    out[1:, :] += v[:-1, :]
    out[:-1, :] += v[1:, :]
    out[:, 1:] += v[:, :-1]
    out[:, :-1] += v[:, 1:]


def ir_drop(spec: PdnSpec, loads: Mapping[tuple[float, float], float], mesh_size: int = 32,
            damping: float = 0.9) -> IrDropResult:
    return solve_mesh(build_mesh(spec, loads, mesh_size), damping=damping)


def placement_loads(netlist: Netlist, placement: Placement, spec: PdnSpec) -> dict[tuple[float, float], float]:
    """Spread ``spec.total_power`` over cells by area and map to chip coordinates.

    The placement footprint (µm) is stretched onto the PDN footprint (mm);
    cells on every tier draw through the same bump field.
    """
    side = math.sqrt(spec.footprint)
    w, h = placement.footprint
    total_area = sum(c.area for c in netlist.cells)
    loads: dict[tuple[float, float], float] = {}
    for c in netlist.cells:
        x, y, _ = placement.coords[c.id]
        key = (x / w * side, y / h * side)
        loads[key] = loads.get(key, 0.0) + spec.total_power * c.area / total_area
    return loads
