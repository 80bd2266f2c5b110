"""Die yield, dies-per-wafer and die/stack cost models.

Areas are in mm², defect densities in defects/cm², costs in arbitrary
currency units per wafer. Scenario comparisons follow the 2D-vs-3D
trade-off study: a reference-node monolithic die, the same design shrunk
onto a newer node, a same-node two-die stack and a mixed-node stack.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

from scipy import optimize

POISSON = "poisson"
NEGBIN = "negbin"

SCENARIOS = ("2D-ref", "2D-shrink", "3D-split-ref", "3D-hetero")


class CostModelError(ValueError):
    pass


@dataclass(frozen=True)
class TechNode:
    name: str
    d0: float
    wafer_cost: float
    alpha: float = math.inf
    wafer_diameter: float = 300.0
    area_scale: float = 1.0

    def __post_init__(self):
        if not self.d0 >= 0:
            raise CostModelError(f"{self.name}: d0 must be >= 0")
        if not self.wafer_cost > 0:
            raise CostModelError(f"{self.name}: wafer_cost must be > 0")
        if not self.wafer_diameter > 0:
            raise CostModelError(f"{self.name}: wafer_diameter must be > 0")
        if not self.area_scale > 0:
            raise CostModelError(f"{self.name}: area_scale must be > 0")
        if not self.alpha > 0:
            raise CostModelError(f"{self.name}: alpha must be > 0")


@dataclass(frozen=True)
class DieSpec:
    area: float
    node: TechNode
    repairable: bool = False

    def __post_init__(self):
        if not self.area > 0:
            raise CostModelError(f"die area must be > 0, got {self.area}")


@dataclass(frozen=True)
class StackSpec:
    dies: tuple[DieSpec, ...]
    kgd_tested: bool = True
    bond_yield: float = 1.0
    assembly_cost: float = 0.0
    kgd_test_cost: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "dies", tuple(self.dies))
        if not self.dies:
            raise CostModelError("a stack needs at least one die")
        if not 0 < self.bond_yield <= 1:
            raise CostModelError(f"bond_yield must be in (0, 1], got {self.bond_yield}")
        if self.assembly_cost < 0 or self.kgd_test_cost < 0:
            raise CostModelError("costs must be >= 0")


@dataclass(frozen=True)
class CostBreakdown:
    per_die_cost: tuple[float, ...]
    assembly: float
    test: float
    total: float
    composite_yield: float


@dataclass(frozen=True)
class CostOptions:
    """Knobs shared by die, stack and scenario costing."""

    yield_model: str = POISSON
    repair_floor: float = 0.95
    kgd_tested: bool = True
    bond_yield: float = 1.0
    assembly_cost: float = 0.0
    kgd_test_cost: float = 0.0
    hetero_scale: float | None = None  # None: use the new node's area_scale

    def __post_init__(self):
        if self.yield_model not in (POISSON, NEGBIN):
            raise CostModelError(f"unknown yield model {self.yield_model!r}")
        if not 0 < self.repair_floor <= 1:
            raise CostModelError("repair_floor must be in (0, 1]")
        if self.hetero_scale is not None and not self.hetero_scale > 0:
            raise CostModelError("hetero_scale must be > 0")


DEFAULT_OPTIONS = CostOptions()


# --------------------------------------------------------------------------
# yield and geometry


def yield_poisson(area: float, d0: float) -> float:
    if area < 0 or d0 < 0:
        raise CostModelError("area and d0 must be non-negative")
    return math.exp(-(area / 100.0) * d0)


def yield_negbin(area: float, d0: float, alpha: float) -> float:
    """Negative-binomial (clustered defect) yield; Poisson as ``alpha -> inf``."""
    if not alpha > 0:
        raise CostModelError(f"alpha must be > 0, got {alpha}")
    if area < 0 or d0 < 0:
        raise CostModelError("area and d0 must be non-negative")
    if math.isinf(alpha):
        return yield_poisson(area, d0)
    return math.exp(-alpha * math.log1p((area / 100.0) * d0 / alpha))


def dies_per_wafer(die_area: float, wafer_diameter: float = 300.0) -> int:
    """Gross die sites: ``pi r^2 / A - pi d / sqrt(2 A)``, floored, never negative."""
    if not die_area > 0:
        raise CostModelError(f"die area must be > 0, got {die_area}")
    if not wafer_diameter > 0:
        raise CostModelError(f"wafer diameter must be > 0, got {wafer_diameter}")
    d = wafer_diameter
    est = math.pi * (d / 2) ** 2 / die_area - math.pi * d / math.sqrt(2 * die_area)
    if est < 1:
        warnings.warn(
            f"{die_area} mm² die does not fit on a {d} mm wafer", RuntimeWarning, stacklevel=2
        )
        return 0
    return int(math.floor(est))


def die_yield(die: DieSpec, options: CostOptions = DEFAULT_OPTIONS, area: float | None = None) -> float:
    a = die.area if area is None else area
    if options.yield_model == NEGBIN:
        y = yield_negbin(a, die.node.d0, die.node.alpha)
    else:
        y = yield_poisson(a, die.node.d0)
    if die.repairable:
        y = max(y, options.repair_floor)
    return y


def raw_die_cost(die: DieSpec) -> float:
    """Silicon cost per die site, before yield loss."""
    n = dies_per_wafer(die.area, die.node.wafer_diameter)
    if n == 0:
        raise CostModelError(f"{die.area} mm² die: zero dies per wafer")
    return die.node.wafer_cost / n


def die_cost(die: DieSpec, options: CostOptions = DEFAULT_OPTIONS) -> float:
    return raw_die_cost(die) / die_yield(die, options)


# --------------------------------------------------------------------------
# stacks


def stack_cost(stack: StackSpec, options: CostOptions = DEFAULT_OPTIONS) -> CostBreakdown:
    """Cost of an assembled stack.

    With known-good-die testing every die is paid at its yielded cost and
    only bonding losses compound. Without it, raw silicon is stacked blind
    and die yields multiply.
    """
    n = len(stack.dies)
    bond = stack.bond_yield ** (n - 1)
    yields = [die_yield(d, options) for d in stack.dies]
    composite = math.prod(yields) * bond
    if stack.kgd_tested:
        per_die = tuple(die_cost(d, options) / bond for d in stack.dies)
        test = n * stack.kgd_test_cost / bond
        assembly = stack.assembly_cost / bond
    else:
        per_die = tuple(raw_die_cost(d) / composite for d in stack.dies)
        test = 0.0
        assembly = stack.assembly_cost
    total = math.fsum(per_die) + assembly + test
    return CostBreakdown(per_die, assembly, test, total, composite)


def monolithic3d_cost(
    total_area: float,
    node: TechNode,
    tiers: int = 2,
    critical_area_factor: float = 0.5,
    tier_cost_multiplier: float = 1.0,
    options: CostOptions = DEFAULT_OPTIONS,
) -> float:
    """Sequentially integrated die of footprint ``total_area / tiers``.

    Defect-sensitive area is ``total_area * critical_area_factor``. Each tier
    beyond the first adds ``tier_cost_multiplier`` base wafers of processing.
    """
    if int(tiers) != tiers or tiers < 1:
        raise CostModelError(f"tiers must be a positive integer, got {tiers}")
    if not 0 < critical_area_factor <= 1:
        raise CostModelError(f"critical_area_factor must be in (0, 1], got {critical_area_factor}")
    if tier_cost_multiplier < 0:
        raise CostModelError("tier_cost_multiplier must be >= 0")
    footprint = total_area / tiers
    wafer = node.wafer_cost * (1.0 + (tiers - 1) * tier_cost_multiplier)
    die = DieSpec(footprint, replace(node, wafer_cost=wafer))
    y = die_yield(die, options, area=total_area * critical_area_factor)
    return raw_die_cost(die) / y


# --------------------------------------------------------------------------
# scenarios


@dataclass(frozen=True)
class ScenarioRow:
    scenario: str
    total_area: float
    breakdown: CostBreakdown
    saving: float = field(default=0.0)


def scenario_stack(
    name: str,
    total_area: float,
    ref_node: TechNode,
    new_node: TechNode,
    options: CostOptions = DEFAULT_OPTIONS,
) -> StackSpec:
    kw = dict(
        kgd_tested=options.kgd_tested,
        bond_yield=options.bond_yield,
        assembly_cost=options.assembly_cost,
        kgd_test_cost=options.kgd_test_cost,
    )
    half = total_area / 2
    if name == "2D-ref":
        return StackSpec((DieSpec(total_area, ref_node),))
    if name == "2D-shrink":
        return StackSpec((DieSpec(total_area * new_node.area_scale, new_node),))
    if name == "3D-split-ref":
        return StackSpec((DieSpec(half, ref_node), DieSpec(half, ref_node)), **kw)
    if name == "3D-hetero":
        hs = new_node.area_scale if options.hetero_scale is None else options.hetero_scale
        return StackSpec((DieSpec(half, ref_node), DieSpec(half * hs, new_node)), **kw)
    raise CostModelError(f"unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}")


def scenario_compare(
    total_area: float,
    ref_node: TechNode,
    new_node: TechNode,
    scenarios: Sequence[str] = SCENARIOS,
    options: CostOptions = DEFAULT_OPTIONS,
) -> list[ScenarioRow]:
    """Cost each scenario and its saving relative to the 2D reference die."""
    if not total_area > 0:
        raise CostModelError("total_area must be > 0")
    for s in scenarios:
        if s not in SCENARIOS:
            raise CostModelError(f"unknown scenario {s!r}; expected one of {', '.join(SCENARIOS)}")
    base = stack_cost(scenario_stack("2D-ref", total_area, ref_node, new_node, options), options)
    rows = []
    for s in scenarios:
        bd = stack_cost(scenario_stack(s, total_area, ref_node, new_node, options), options)
        rows.append(ScenarioRow(s, total_area, bd, 1.0 - bd.total / base.total))
    return rows


def shrink_saving(
    ratio: float,
    total_area: float,
    ref_node: TechNode,
    new_node: TechNode,
    area_scale: float,
    options: CostOptions = DEFAULT_OPTIONS,
) -> float:
    node = replace(new_node, wafer_cost=ref_node.wafer_cost * ratio, area_scale=area_scale)
    (row,) = scenario_compare(total_area, ref_node, node, ("2D-shrink",), options)
    return row.saving


def calibrate_shrink(
    target_saving: float,
    total_area: float,
    ref_node: TechNode,
    new_node: TechNode,
    area_scale: float = 0.7,
    ratio_bounds: tuple[float, float] = (1.0, 2.0),
    options: CostOptions = DEFAULT_OPTIONS,
    tol: float = 1e-6,
) -> tuple[float, float]:
    """Find the new/ref wafer-cost ratio giving the target shrink saving.

    ``area_scale`` is held fixed and the ratio is bisected inside
    ``ratio_bounds``. Returns ``(area_scale, ratio)``.
    """
    lo, hi = ratio_bounds
    if not 0 < lo <= hi:
        raise CostModelError(f"bad ratio bounds {ratio_bounds}")

    def gap(r: float) -> float:
        return shrink_saving(r, total_area, ref_node, new_node, area_scale, options) - target_saving

    g_lo, g_hi = gap(lo), gap(hi)
    if lo == hi and abs(g_lo) <= 1e-3:
        return area_scale, lo
    if lo == hi or g_lo * g_hi > 0:
        raise CostModelError(
            f"target saving {target_saving:.4f} unreachable: ratio {lo} gives "
            f"{g_lo + target_saving:.4f}, ratio {hi} gives {g_hi + target_saving:.4f}"
        )
    ratio = optimize.bisect(gap, lo, hi, xtol=tol)
    return area_scale, float(ratio)
