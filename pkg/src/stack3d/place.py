"""Multi-tier co-placement on a shrunk shared footprint.

The 3D flow partitions cells across tiers, then anneals every cell on a
footprint ``footprint_scale`` times the 2D one. All tiers share one slot
grid geometry; cross-tier moves are allowed as long as the per-tier area
balance stays within ``balance_tol``. The 2D baseline is the same annealer
with one tier and the full footprint.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from . import _anneal
from .netlist import Netlist, Placement
from .partition import FMPartitioner, TierAssignment
from .validation import check_fraction, check_netlist, check_seed, check_tier_map


class PlacementError(ValueError):
    pass


@dataclass(frozen=True)
class PlaceConfig:
    """Annealing and footprint settings.

    ``t0 <= 0`` picks the start temperature so that about 80% of probing
    moves that increase cost would be accepted. ``moves_per_temp`` is a
    multiplier on the number of movable cells.
    """

    footprint_scale: float = 0.5
    num_tiers: int = 2
    seed: int = 0
    t0: float = 0.0
    cooling: float = 0.95
    moves_per_temp: int = 100
    stop_accept: float = 0.01
    max_temps: int = 400
    balance_tol: float = 0.05
    via_penalty: float = 0.0
    utilization: float = 0.7
    cross_tier_prob: float = 0.2

    def __post_init__(self):
        check_fraction("footprint_scale", self.footprint_scale)
        check_fraction("cooling", self.cooling, high_open=True)
        check_fraction("utilization", self.utilization)
        check_fraction("cross_tier_prob", self.cross_tier_prob, low_open=False)
        if self.num_tiers < 1:
            raise ValueError("num_tiers must be >= 1")
        if self.moves_per_temp < 1 or self.max_temps < 1:
            raise ValueError("moves_per_temp and max_temps must be >= 1")
        if self.via_penalty < 0:
            raise ValueError("via_penalty must be >= 0")
        if not 0 <= self.balance_tol <= 1:
            raise ValueError("balance_tol must be in [0, 1]")

    def estimator(self, **overrides) -> "AnnealingPlacer":
        params = dict(
            num_tiers=self.num_tiers,
            footprint_scale=self.footprint_scale,
            utilization=self.utilization,
            t0=self.t0,
            cooling=self.cooling,
            moves_per_temp=self.moves_per_temp,
            stop_accept=self.stop_accept,
            max_temps=self.max_temps,
            balance_tol=self.balance_tol,
            via_penalty=self.via_penalty,
            cross_tier_prob=self.cross_tier_prob,
            random_state=self.seed,
        )
        params.update(overrides)
        return AnnealingPlacer(**params)


def footprint_2d(netlist: Netlist, utilization: float) -> float:
    """2D footprint area (µm²) holding all cells at the given utilization."""
    return netlist.total_area / utilization


class AnnealingPlacer(BaseEstimator):
    """Simulated-annealing placer over a per-tier slot grid.

    Attributes
    ----------
    placement_ : Placement
    initial_cost_, cost_ : float
        Wirelength cost (HPWL plus via penalty) before and after annealing.
    cost_trace_, best_trace_ : ndarray
        Current and best-so-far cost at each temperature boundary.
    move_log_ : ndarray of shape (n_moves, 4)
        Accepted cross-tier moves ``(cell, from_tier, to_tier, partner)``,
        partner ``-1`` for an empty slot. Only filled with ``record_moves``.
    tier_areas_start_ : ndarray
    band_ : tuple of float
        Allowed per-tier area range.
    """

    def __init__(self, num_tiers=2, footprint_scale=0.5, utilization=0.7, t0=0.0,
                 cooling=0.95, moves_per_temp=100, stop_accept=0.01, max_temps=400,
                 balance_tol=0.05, via_penalty=0.0, cross_tier_prob=0.2,
                 record_moves=False, random_state=0):
        self.num_tiers = num_tiers
        self.footprint_scale = footprint_scale
        self.utilization = utilization
        self.t0 = t0
        self.cooling = cooling
        self.moves_per_temp = moves_per_temp
        self.stop_accept = stop_accept
        self.max_temps = max_temps
        self.balance_tol = balance_tol
        self.via_penalty = via_penalty
        self.cross_tier_prob = cross_tier_prob
        self.record_moves = record_moves
        self.random_state = random_state

    def _config(self) -> PlaceConfig:
        return PlaceConfig(
            footprint_scale=self.footprint_scale, num_tiers=self.num_tiers,
            seed=check_seed(self.random_state), t0=self.t0, cooling=self.cooling,
            moves_per_temp=self.moves_per_temp, stop_accept=self.stop_accept,
            max_temps=self.max_temps, balance_tol=self.balance_tol,
            via_penalty=self.via_penalty, utilization=self.utilization,
            cross_tier_prob=self.cross_tier_prob,
        )

    def fit(self, X, y=None, assignment: TierAssignment | None = None):
        cfg = self._config()
        netlist = check_netlist(X)
        if not netlist.cells:
            raise PlacementError("cannot place an empty netlist")
        n = len(netlist.cells)
        T = cfg.num_tiers
        cells = netlist.cells

        tier_of = self._initial_tiers(netlist, assignment, cfg)
        tier0 = np.array([tier_of[c.id] for c in cells], dtype=np.int64)
        area = np.array([c.area for c in cells])
        total = float(area.sum())

        fp_area = cfg.footprint_scale * footprint_2d(netlist, cfg.utilization)
        side = math.sqrt(fp_area)
        tier_area = np.bincount(tier0, weights=area, minlength=T).astype(float)
        for t in range(T):
            if tier_area[t] > fp_area * (1 + 1e-12):
                raise PlacementError(
                    f"utilization overflow on tier {t}: {tier_area[t]:.6g} µm² of cells "
                    f"on a {fp_area:.6g} µm² footprint"
                )
        if T > 1:
            lo = total * (1.0 / T - cfg.balance_tol)
            hi = total * (1.0 / T + cfg.balance_tol)
            # the band never excludes the starting assignment's own skew
            lo = min(lo, float(tier_area.min()))
            hi = max(hi, float(tier_area.max()))
            hi = min(hi, fp_area)
        else:
            lo, hi = -np.inf, np.inf

        movable_mask = np.array([not c.fixed for c in cells])
        per_tier_cap = int(np.ceil((hi if T > 1 else total) / total * movable_mask.sum())) if total else 1
        per_tier_cap = max(per_tier_cap, int(np.bincount(tier0[movable_mask], minlength=T).max(initial=0)))
        g = max(1, math.ceil(math.sqrt(1.1 * per_tier_cap)))
        pitch = side / g
        cols = np.arange(g)
        sx = np.tile((cols + 0.5) * pitch, g)
        sy = np.repeat((cols + 0.5) * pitch, g)
        slot_x = np.tile(sx, T)
        slot_y = np.tile(sy, T)
        per_tier = g * g

        rng = np.random.default_rng(cfg.seed)
        x = np.zeros(n)
        y = np.zeros(n)
        slot_of = np.full(n, -1, dtype=np.int64)
        occ = np.full(per_tier * T, -1, dtype=np.int64)
        for i, c in enumerate(cells):
            if c.fixed:
                fx, fy, ft = c.fixed_pos
                if not (0 <= fx <= side and 0 <= fy <= side) or ft >= T:
                    raise PlacementError(f"fixed cell {c.id!r} lies outside the {side:.6g} µm footprint")
                x[i], y[i] = fx, fy
        for t in range(T):
            members = np.flatnonzero(movable_mask & (tier0 == t))
            if len(members) > per_tier:
                raise PlacementError(f"tier {t}: {len(members)} cells exceed {per_tier} slots")
            slots = rng.choice(per_tier, size=len(members), replace=False)
            for i, s in zip(members, slots):
                s = int(s) + t * per_tier
                slot_of[i] = s
                occ[s] = i
                x[i], y[i] = slot_x[s], slot_y[s]
        tier = tier0.copy()

        net_ptr, net_pins, cell_ptr, cell_nets = netlist.csr()
        movable = np.flatnonzero(movable_mask).astype(np.int64)
        log_cap = 1_000_000 if self.record_moves else 0
        self.tier_areas_start_ = tier_area.copy()
        initial, best, n_temps, cur_trace, best_trace, log, n_log = _anneal.anneal(
            cfg.seed, movable, slot_of, occ, slot_x, slot_y, g, g, T,
            x, y, tier, area, tier_area, float(lo), float(hi),
            net_ptr, net_pins, cell_ptr, cell_nets, float(cfg.via_penalty),
            float(cfg.t0), float(cfg.cooling), int(cfg.moves_per_temp * max(len(movable), 1)),
            float(cfg.stop_accept), int(cfg.max_temps), float(cfg.cross_tier_prob),
            bool(self.record_moves), log_cap,
        )
        if n == 1 and movable_mask[0]:
            # a lone cell has no wirelength to optimize; centre it
            x[0] = y[0] = side / 2

        coords = {c.id: (float(x[i]), float(y[i]), int(tier[i])) for i, c in enumerate(cells)}
        self.initial_cost_ = float(initial)
        self.cost_ = float(best)
        self.n_temps_ = int(n_temps)
        self.cost_trace_ = np.asarray(cur_trace)
        self.best_trace_ = np.asarray(best_trace)
        self.move_log_ = np.asarray(log)
        self.band_ = (float(lo), float(hi))
        self.grid_ = (g, pitch)
        self.tier_areas_ = tier_area.copy()
        meta = {
            "seed": str(cfg.seed),
            "config_hash": config_hash(cfg),
            "cost": repr(self.cost_),
            "grid_pitch": repr(float(pitch)),
        }
        self.placement_ = Placement(coords, (side, side), T, meta)
        return self

    def _initial_tiers(self, netlist, assignment, cfg) -> dict[str, int]:
        T = cfg.num_tiers
        if T == 1:
            for c in netlist.cells:
                if c.fixed and c.fixed_pos[2] != 0:
                    raise PlacementError(f"fixed cell {c.id!r} is on tier {c.fixed_pos[2]} of a 1-tier design")
            return {c.id: 0 for c in netlist.cells}
        if assignment is not None:
            if assignment.num_tiers != T:
                raise PlacementError(f"assignment has {assignment.num_tiers} tiers, config has {T}")
            return check_tier_map(assignment.tier_of, netlist, T)
        if len(netlist.cells) < 2:
            return {c.id: (c.fixed_pos[2] if c.fixed else 0) for c in netlist.cells}
        if T == 2:
            fm = FMPartitioner(balance_tol=cfg.balance_tol, random_state=cfg.seed).fit(netlist)
            return fm.assignment_.tier_of
        # more tiers: area-greedy round robin in seeded order
        rng = np.random.default_rng(cfg.seed)
        areas = [0.0] * T
        out = {}
        for i in rng.permutation(len(netlist.cells)):
            c = netlist.cells[i]
            t = c.fixed_pos[2] if c.fixed else int(np.argmin(areas))
            out[c.id] = t
            areas[t] += c.area
        return out


def config_hash(cfg: PlaceConfig) -> str:
    text = repr(sorted(cfg.__dict__.items()))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def coplace(netlist: Netlist, assignment: TierAssignment, cfg: PlaceConfig = PlaceConfig()) -> Placement:
    return cfg.estimator(num_tiers=assignment.num_tiers).fit(netlist, assignment=assignment).placement_


def place_2d(netlist: Netlist, cfg: PlaceConfig = PlaceConfig()) -> Placement:
    return cfg.estimator(num_tiers=1, footprint_scale=1.0).fit(netlist).placement_


# --------------------------------------------------------------------------
# 3D connection accounting


def count_3d_vias(netlist: Netlist, placement: Placement) -> int:
    """Sum over nets of tiers spanned minus one."""
    coords = placement.coords
    total = 0
    for net in netlist.nets:
        tiers = [coords[p][2] for p in net.pins]
        total += max(tiers) - min(tiers)
    return total


@dataclass(frozen=True)
class ViaDensity:
    supply: float
    utilization: float
    passed: bool


def via_density_check(via_count: int, footprint_mm2: float, pitch_um: float) -> ViaDensity:
    """Compare 3D connection demand with the supply a bond pitch allows."""
    if not pitch_um > 0:
        raise ValueError(f"pitch must be > 0, got {pitch_um}")
    if not footprint_mm2 > 0:
        raise ValueError(f"footprint must be > 0, got {footprint_mm2}")
    supply = footprint_mm2 / (pitch_um / 1000.0) ** 2
    util = via_count / supply
    return ViaDensity(supply, util, util <= 1.0)
