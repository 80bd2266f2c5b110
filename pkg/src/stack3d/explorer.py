"""Study drivers behind the command line.

Each ``*_study`` function validates its whole config before doing any work
and returns rendered artifacts as ``{relative_path: text}``; the CLI writes
them only after every stage succeeded.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

from . import cost as C
from .artifacts import csv_text, fmt, json_text, placement_text
from .config import Config, ConfigError
from .legalize import legalize, count_overlaps
from .netlist import NetlistError, generate_synthetic, hpwl, parse_netlist
from .partition import fm_bipartition
from .pdn import PdnSpec, analyze, ir_drop, placement_loads
from .place import PlaceConfig, config_hash, coplace, count_3d_vias, place_2d
from .timing import DEFAULT_WIRE_DELAY_PER_UM, DelayModel, evaluate_paths, path_stats


class StageError(RuntimeError):
    """A pipeline stage failed; the message names the stage."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


# --------------------------------------------------------------------------
# roadmap


@dataclass(frozen=True)
class RoadmapPoint:
    label: str
    pitch: float  # µm
    density: float  # connections per mm²


DEFAULT_ROADMAP = (
    ("micro-bump", 40.0),
    ("hybrid bonding", 10.0),
    ("monolithic 3D", 0.1),
)

GRID_NOTE = "square grid: density = (1000 / pitch_um)^2"


def roadmap_table(points) -> list[RoadmapPoint]:
    out = []
    for label, pitch in points:
        if not pitch > 0:
            raise ValueError(f"pitch for {label!r} must be > 0, got {pitch}")
        out.append(RoadmapPoint(label, float(pitch), (1000.0 / pitch) ** 2))
    out.sort(key=lambda p: (-p.pitch, p.label))
    return out


def roadmap_study(cfg: Config, fmt_: str) -> dict[str, str]:
    cfg.check_keys({"points"})
    points = list(DEFAULT_ROADMAP)
    if "points" in cfg:
        points = []
        for tok in cfg.get_list("points"):
            label, sep, pitch = tok.rpartition(":")
            try:
                points.append((label.strip(), float(pitch)))
            except ValueError:
                raise ConfigError(f"expected label:pitch_um, got {tok!r}", "points", cfg.line("points")) from None
            if not sep or not label.strip():
                raise ConfigError(f"expected label:pitch_um, got {tok!r}", "points", cfg.line("points"))
            if not points[-1][1] > 0:
                raise ConfigError(f"pitch must be > 0 in {tok!r}", "points", cfg.line("points"))
        if not points:
            raise ConfigError("empty point list", "points", cfg.line("points"))
    rows = roadmap_table(points)
    if fmt_ == "json":
        return {"roadmap.json": json_text({
            "assumption": GRID_NOTE,
            "points": [{"technology": p.label, "pitch_um": p.pitch, "density_per_mm2": p.density} for p in rows],
        })}
    return {"roadmap.csv": csv_text(
        ["technology", "pitch_um", "density_per_mm2", "assumption"],
        [[p.label, fmt(p.pitch), fmt(p.density), GRID_NOTE] for p in rows],
    )}


# --------------------------------------------------------------------------
# cost


COST_KEYS = {
    "ref_name", "ref_d0", "ref_wafer_cost", "ref_alpha",
    "new_name", "new_d0", "new_alpha", "area_scale", "wafer_cost_ratio",
    "wafer_diameter", "yield_model", "repair_floor", "kgd_tested", "bond_yield",
    "assembly_cost", "kgd_test_cost", "hetero_scale",
    "areas", "scenarios", "node_curves",
    "target_saving", "calibrate_area", "ratio_lo", "ratio_hi",
}


@dataclass(frozen=True)
class CostSetup:
    ref: C.TechNode
    new: C.TechNode
    options: C.CostOptions


def cost_setup(cfg: Config) -> CostSetup:
    """Nodes and options shared by ``cost`` and ``calibrate``.

    ``wafer_cost_ratio = auto`` (the default) calibrates the new node's
    wafer cost so the 2D shrink saves ``target_saving`` at ``calibrate_area``.
    """
    diameter = cfg.get_float("wafer_diameter", 300.0, low=0, low_open=True)
    ref = C.TechNode(
        cfg.get_str("ref_name", "7nm"),
        cfg.get_float("ref_d0", 0.15, low=0),
        cfg.get_float("ref_wafer_cost", 10000.0, low=0, low_open=True),
        alpha=cfg.get_float("ref_alpha", math.inf, low=0, low_open=True),
        wafer_diameter=diameter,
    )
    new = C.TechNode(
        cfg.get_str("new_name", "5nm"),
        cfg.get_float("new_d0", 0.2, low=0),
        ref.wafer_cost,
        alpha=cfg.get_float("new_alpha", math.inf, low=0, low_open=True),
        wafer_diameter=diameter,
        area_scale=cfg.get_float("area_scale", 0.7, low=0, low_open=True),
    )
    hetero = cfg.get_float("hetero_scale", -1.0, low=0, low_open=True) if "hetero_scale" in cfg else None
    options = C.CostOptions(
        yield_model=cfg.get_str("yield_model", C.POISSON, choices=(C.POISSON, C.NEGBIN)),
        repair_floor=cfg.get_float("repair_floor", 0.95, low=0, low_open=True, high=1),
        kgd_tested=cfg.get_bool("kgd_tested", True),
        bond_yield=cfg.get_float("bond_yield", 1.0, low=0, low_open=True, high=1),
        assembly_cost=cfg.get_float("assembly_cost", 0.0, low=0),
        kgd_test_cost=cfg.get_float("kgd_test_cost", 0.0, low=0),
        hetero_scale=hetero,
    )
    ratio = cfg.get_str("wafer_cost_ratio", "auto")
    if ratio != "auto":
        r = cfg.get_float("wafer_cost_ratio", low=0, low_open=True)
        new = replace(new, wafer_cost=ref.wafer_cost * r)
    return CostSetup(ref, new, options)


def calibration_inputs(cfg: Config):
    target = cfg.get_float("target_saving", 0.13, low=-1, high=1)
    area = cfg.get_float("calibrate_area", 500.0, low=0, low_open=True)
    lo = cfg.get_float("ratio_lo", 1.0, low=0, low_open=True)
    hi = cfg.get_float("ratio_hi", 2.0, low=0, low_open=True)
    if hi < lo:
        raise ConfigError("ratio_hi must be >= ratio_lo", "ratio_hi", cfg.line("ratio_hi"))
    return target, area, (lo, hi)


def calibrated(setup: CostSetup, cfg: Config) -> tuple[CostSetup, float]:
    target, area, bounds = calibration_inputs(cfg)
    if cfg.get_str("wafer_cost_ratio", "auto") != "auto":
        return setup, setup.new.wafer_cost / setup.ref.wafer_cost
    _, ratio = C.calibrate_shrink(target, area, setup.ref, setup.new, setup.new.area_scale,
                                  bounds, setup.options)
    return replace(setup, new=replace(setup.new, wafer_cost=setup.ref.wafer_cost * ratio)), ratio


def cost_rows_for_area(args) -> list[tuple]:
    """Worker: every requested scenario at one area, as sortable tuples."""
    setup, area, scenarios, node_curves = args
    rows = []
    for r in C.scenario_compare(area, setup.ref, setup.new, scenarios, setup.options):
        rows.append((r.scenario, area, r.breakdown.composite_yield, r.breakdown.total, r.saving))
    if node_curves:
        base = C.die_cost(C.DieSpec(area, setup.ref), setup.options)
        for node in (setup.ref, setup.new):
            die = C.DieSpec(area, node)
            c = C.die_cost(die, setup.options)
            rows.append((f"2D-{node.name}", area, C.die_yield(die, setup.options), c, 1.0 - c / base))
    return rows


def cost_study(cfg: Config, fmt_: str, pool_map=map) -> dict[str, str]:
    cfg.check_keys(COST_KEYS)
    setup = cost_setup(cfg)
    scenarios = cfg.get_list("scenarios", C.SCENARIOS)
    if not scenarios:
        raise ConfigError("empty scenario list", "scenarios", cfg.line("scenarios"))
    for s in scenarios:
        if s not in C.SCENARIOS:
            raise ConfigError(f"unknown scenario {s!r}; expected one of {', '.join(C.SCENARIOS)}",
                              "scenarios", cfg.line("scenarios"))
    if len(set(scenarios)) != len(scenarios):
        raise ConfigError("duplicate scenario", "scenarios", cfg.line("scenarios"))
    areas = cfg.get_floats("areas", (100, 200, 300, 400, 500, 600, 700, 800, 900), low=0, low_open=True)
    if not areas:
        raise ConfigError("empty area list", "areas", cfg.line("areas"))
    node_curves = cfg.get_bool("node_curves", False)
    calibration_inputs(cfg)

    setup, ratio = calibrated(setup, cfg)
    per_area = list(pool_map(cost_rows_for_area, [(setup, a, scenarios, node_curves) for a in areas]))
    labels = list(scenarios) + ([f"2D-{setup.ref.name}", f"2D-{setup.new.name}"] if node_curves else [])
    order = {s: i for i, s in enumerate(labels)}
    rows = sorted((r for chunk in per_area for r in chunk), key=lambda r: (order[r[0]], r[1]))
    if fmt_ == "json":
        return {"cost.json": json_text({
            "wafer_cost_ratio": ratio,
            "rows": [
                {"scenario": s, "total_area_mm2": a, "composite_yield": y, "total_cost": c, "saving_pct": 100 * v}
                for s, a, y, c, v in rows
            ],
        })}
    return {"cost.csv": csv_text(
        ["scenario", "total_area_mm2", "composite_yield", "total_cost", "saving_pct"],
        [[s, fmt(a), fmt(y), fmt(c), fmt(100 * v)] for s, a, y, c, v in rows],
    )}


HETERO_SWEEP = (0.6, 0.7, 0.8, 0.85, 0.9, 1.0)


def calibrate_study(cfg: Config, fmt_: str) -> dict[str, str]:
    cfg.check_keys(COST_KEYS - {"areas", "scenarios", "node_curves"})
    setup = cost_setup(cfg)
    target, area, _ = calibration_inputs(cfg)
    setup, ratio = calibrated(setup, cfg)
    rows = {r.scenario: r for r in C.scenario_compare(area, setup.ref, setup.new, C.SCENARIOS, setup.options)}
    hetero_used = setup.new.area_scale if setup.options.hetero_scale is None else setup.options.hetero_scale
    sens = []
    for hs in HETERO_SWEEP:
        opts = replace(setup.options, hetero_scale=hs)
        (r,) = C.scenario_compare(area, setup.ref, setup.new, ("3D-hetero",), opts)
        sens.append((hs, r.saving))
    result = [
        ("target_saving_pct", 100 * target),
        ("total_area_mm2", area),
        ("area_scale", setup.new.area_scale),
        ("wafer_cost_ratio", ratio),
        ("shrink_saving_pct", 100 * rows["2D-shrink"].saving),
        ("hetero_scale", hetero_used),
        ("hetero_saving_pct", 100 * rows["3D-hetero"].saving),
        ("split_saving_pct", 100 * rows["3D-split-ref"].saving),
    ] + [(f"hetero_saving_pct@hetero_scale={hs:g}", 100 * v) for hs, v in sens]
    if fmt_ == "json":
        return {"calibrate.json": json_text({k: v for k, v in result})}
    return {"calibrate.csv": csv_text(["parameter", "value"], [[k, fmt(v, 8)] for k, v in result])}


# --------------------------------------------------------------------------
# power delivery


PDN_KEYS = {"total_power", "vdd", "footprint_mm2", "bump_pitch_um", "mesh_sheet_resistance",
            "keepout", "mesh_size", "footprint_scale", "dump_mesh"}


def pdn_specs(cfg: Config) -> tuple[PdnSpec, PdnSpec, int]:
    """2D spec from the config and its 3D twin at ``footprint_scale`` of the area.

    ``mesh_sheet_resistance = 0`` turns the IR-drop solve off.
    """
    scale = cfg.get_float("footprint_scale", 0.5, low=0, low_open=True, high=1)
    fp = cfg.get_float("footprint_mm2", 100.0, low=0, low_open=True)
    rs = cfg.get_float("mesh_sheet_resistance", 0.02, low=0)
    spec2d = PdnSpec(
        total_power=cfg.get_float("total_power", 10.0, low=0, low_open=True),
        vdd=cfg.get_float("vdd", 1.0, low=0, low_open=True),
        footprint=fp,
        bump_pitch=cfg.get_float("bump_pitch_um", 1000.0, low=0, low_open=True),
        mesh_sheet_resistance=rs if rs > 0 else None,
        keepout=cfg.get_float("keepout", 0.0, low=0, high=0.99),
    )
    mesh = cfg.get_int("mesh_size", 32, low=2)
    return spec2d, replace(spec2d, footprint=fp * scale), mesh


def _uniform_loads(spec: PdnSpec, m: int) -> dict:
    side = math.sqrt(spec.footprint)
    p = spec.total_power / (m * m)
    return {((i + 0.5) * side / m, (j + 0.5) * side / m): p for i in range(m) for j in range(m)}


def pdn_study(cfg: Config, fmt_: str) -> dict[str, str]:
    cfg.check_keys(PDN_KEYS)
    spec2d, spec3d, mesh = pdn_specs(cfg)
    dump = cfg.get_bool("dump_mesh", False)
    files = {}
    reports = []
    for name, spec in (("2d", spec2d), ("3d", spec3d)):
        drop = None
        if spec.mesh_sheet_resistance is not None:
            res = ir_drop(spec, _uniform_loads(spec, mesh), mesh_size=mesh)
            drop = res.worst_drop_mv
            if dump:
                files[f"pdn_mesh_{name}.csv"] = _mesh_csv(res.drop, spec)
        rep = analyze(spec)
        reports.append((name, spec, replace(rep, worst_ir_drop=drop)))
    files.update(_pdn_render(reports, fmt_))
    return files


def _mesh_csv(drop, spec: PdnSpec) -> str:
    m = drop.shape[0]
    side = math.sqrt(spec.footprint)
    rows = [[i, j, fmt((i + 0.5) * side / m), fmt((j + 0.5) * side / m), fmt(spec.vdd - drop[i, j], 9)]
            for i in range(m) for j in range(m)]
    return csv_text(["i", "j", "x_mm", "y_mm", "voltage_V"], rows)


def _pdn_render(reports, fmt_: str, stem: str = "pdn") -> dict[str, str]:
    if fmt_ == "json":
        out = {}
        for name, spec, rep in reports:
            d = rep.to_dict()
            d["footprint_mm2"] = spec.footprint
            out[name] = d
        out["note"] = "illustrative defaults: bump pitch and power are not taken from a measured design"
        return {f"{stem}.json": json_text(out)}
    header = ["design", "footprint_mm2", "bump_count", "current_per_bump_A", "power_density_W_mm2", "worst_ir_drop_mV"]
    rows = [[name, fmt(spec.footprint), rep.bump_count, fmt(rep.current_per_bump), fmt(rep.power_density),
             "" if rep.worst_ir_drop is None else fmt(rep.worst_ir_drop)] for name, spec, rep in reports]
    return {f"{stem}.csv": csv_text(header, rows)}


# --------------------------------------------------------------------------
# 2D vs 3D flow


FLOW_KEYS = {
    "netlist", "synth_cells", "rent_exponent", "avg_fanout",
    "footprint_scale", "utilization", "t0", "cooling", "moves_per_temp", "stop_accept",
    "max_temps", "balance_tol", "via_penalty", "cross_tier_prob", "row_pitch",
    "wire_delay_per_um", "tier_hop_delay",
} | {"pdn_" + k for k in PDN_KEYS - {"footprint_scale", "dump_mesh"}}


@dataclass(frozen=True)
class FlowSetup:
    netlist_text: str | None
    synth: tuple[int, float, float] | None
    place: PlaceConfig
    row_pitch: float | None  # None: the placer's slot pitch
    delay: DelayModel
    pdn2d: PdnSpec
    pdn3d: PdnSpec
    mesh: int


def flow_setup(cfg: Config) -> FlowSetup:
    cfg.check_keys(FLOW_KEYS)
    text = synth = None
    if "netlist" in cfg:
        if "synth_cells" in cfg:
            raise ConfigError("give either netlist or synth_cells, not both", "synth_cells", cfg.line("synth_cells"))
        path = cfg.get_str("netlist")
        if cfg.source != "<config>" and not os.path.isabs(path):
            path = os.path.join(os.path.dirname(cfg.source), path)
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read netlist {path!r}: {e.strerror}", "netlist", cfg.line("netlist")) from None
    else:
        synth = (
            cfg.get_int("synth_cells", 1000, low=2),
            cfg.get_float("rent_exponent", 0.6, low=0, low_open=True, high=0.999),
            cfg.get_float("avg_fanout", 3.0, low=1),
        )
    try:
        place = PlaceConfig(
            footprint_scale=cfg.get_float("footprint_scale", 0.5, low=0, low_open=True, high=1),
            utilization=cfg.get_float("utilization", 0.7, low=0, low_open=True, high=1),
            t0=cfg.get_float("t0", 0.0, low=0),
            cooling=cfg.get_float("cooling", 0.95, low=0, low_open=True, high=1),
            moves_per_temp=cfg.get_int("moves_per_temp", 100, low=1),
            stop_accept=cfg.get_float("stop_accept", 0.01, low=0, high=1),
            max_temps=cfg.get_int("max_temps", 400, low=1),
            balance_tol=cfg.get_float("balance_tol", 0.05, low=0, high=1),
            via_penalty=cfg.get_float("via_penalty", 0.0, low=0),
            cross_tier_prob=cfg.get_float("cross_tier_prob", 0.2, low=0, high=1),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from None
    delay = DelayModel(
        cfg.get_float("wire_delay_per_um", DEFAULT_WIRE_DELAY_PER_UM, low=0),
        cfg.get_float("tier_hop_delay", 0.0, low=0),
    )
    # the PDN footprint follows the placement's footprint_scale
    sub = Config({k[4:]: v for k, v in cfg.values.items() if k.startswith("pdn_")},
                 {k[4:]: v for k, v in cfg.lines.items() if k.startswith("pdn_")}, cfg.source)
    sub.values["footprint_scale"] = repr(place.footprint_scale)
    pdn2d, pdn3d, mesh = pdn_specs(sub)
    row_pitch = None
    if cfg.get_str("row_pitch", "auto") != "auto":
        row_pitch = cfg.get_float("row_pitch", low=0, low_open=True)
    return FlowSetup(text, synth, place, row_pitch, delay, pdn2d, pdn3d, mesh)


def row_pitch_for(placement, nominal: float | None, netlist=None) -> float:
    """Row pitch for legalizing ``placement``.

    Starts from ``nominal`` (default: the placer's slot pitch) fitted to the
    footprint height. With a netlist, rows are made taller (fewer, so cells
    get narrower) until a first-fit-decreasing packing of every tier fits;
    this only matters on tiny designs where whole cells do not share rows.
    """
    if nominal is None:
        nominal = float(placement.meta["grid_pitch"])
    h, w = placement.footprint[1], placement.footprint[0]
    n = max(1, int(math.floor(h / nominal + 1e-9)))
    if netlist is None:
        return h / n
    by_tier: dict[int, list[float]] = {}
    for c in netlist.cells:
        if not c.fixed:
            by_tier.setdefault(placement.coords[c.id][2], []).append(c.area)
    for rows in range(n, 0, -1):
        pitch = h / rows
        if all(_ffd_fits(sorted(areas, reverse=True), pitch, rows, w) for areas in by_tier.values()):
            return pitch
    return h


def _ffd_fits(areas, pitch, rows, width) -> bool:
    free = [width * (1 + 1e-9)] * rows
    for a in areas:
        wc = a / pitch
        for i, f in enumerate(free):
            if wc <= f:
                free[i] = f - wc
                break
        else:
            return False
    return True


def fitted_pitch(height: float, nominal: float) -> float:
    """Row pitch that tiles ``height`` exactly with rows no taller than ``nominal``."""
    n = max(1, int(math.floor(height / nominal + 1e-9)))
    return height / n


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, ArithmeticError, RuntimeError) as e:
        raise StageError(name, e) from e


def run_flow_seed(args) -> tuple[dict[str, str], dict]:
    """Worker: the full 2D-vs-3D pipeline for one seed."""
    setup, seed = args
    if setup.synth is not None:
        n, p, f = setup.synth
        netlist = _stage("netlist", generate_synthetic, n, rent_exponent=p, avg_fanout=f, seed=seed)
    else:
        netlist = _stage("netlist", parse_netlist, setup.netlist_text)
    if not netlist.paths:
        raise StageError("netlist", NetlistError("netlist declares no timing paths"))
    cfg = replace(setup.place, seed=seed)

    p2 = _stage("place_2d", place_2d, netlist, cfg)
    assign = _stage("partition", fm_bipartition, netlist, cfg.balance_tol, seed)
    p3 = _stage("coplace", coplace, netlist, assign, cfg)
    pitch2 = row_pitch_for(p2, setup.row_pitch, netlist)
    pitch3 = row_pitch_for(p3, setup.row_pitch, netlist)
    p2 = _stage("legalize_2d", legalize, p2, pitch2, netlist)
    p3 = _stage("legalize_3d", legalize, p3, pitch3, netlist)

    r2 = _stage("timing_2d", evaluate_paths, netlist, p2, setup.delay)
    r3 = _stage("timing_3d", evaluate_paths, netlist, p3, setup.delay)
    stats = _stage("path_stats", path_stats, r2, r3)

    reports = []
    drops = {}
    for name, pl, spec in (("2d", p2, setup.pdn2d), ("3d", p3, setup.pdn3d)):
        def pdn_stage(pl=pl, spec=spec):
            rep = analyze(spec)
            if spec.mesh_sheet_resistance is not None:
                res = ir_drop(spec, placement_loads(netlist, pl, spec), mesh_size=setup.mesh)
                rep = replace(rep, worst_ir_drop=res.worst_drop_mv)
            return rep
        rep = _stage(f"pdn_{name}", pdn_stage)
        reports.append((name, spec, rep))
        drops[name] = rep.worst_ir_drop

    h2 = hpwl(netlist, p2, cfg.via_penalty)
    h3 = hpwl(netlist, p3, cfg.via_penalty)
    vias = count_3d_vias(netlist, p3)
    chash = config_hash(cfg)
    d = f"seed_{seed}"
    files = {
        f"{d}/placement_2d.txt": placement_text(p2, seed=seed, config_hash=chash, hpwl=h2, cut=0),
        f"{d}/placement_3d.txt": placement_text(p3, seed=seed, config_hash=chash, hpwl=h3, cut=assign.cut_nets),
        f"{d}/paths.csv": csv_text(
            ["path_id", "n_cells", "length_um", "delay_ns", "slack_ns", "design"],
            [[r.path_id, r.n_cells, repr(r.length), repr(r.delay), repr(r.slack), name]
             for name, recs in (("2d", r2), ("3d", r3)) for r in recs],
        ),
    }
    summary = stats.to_dict()
    summary.update({"seed": seed, "hpwl_2d_um": h2, "hpwl_3d_um": h3, "cut_nets": assign.cut_nets,
                    "vias_3d": vias, "n_cells": len(netlist.cells), "n_paths": len(netlist.paths)})
    files[f"{d}/stats.json"] = json_text(summary)
    files.update({f"{d}/{k}": v for k, v in _pdn_render(reports, "json").items()})
    row = {
        "seed": seed,
        "hpwl_2d_um": h2,
        "hpwl_3d_um": h3,
        "cut_nets": assign.cut_nets,
        "vias_3d": vias,
        "max_length_2d_um": stats.summary_2d.max_length,
        "max_length_3d_um": stats.summary_3d.max_length,
        "failing_2d": stats.summary_2d.failing,
        "failing_3d": stats.summary_3d.failing,
        "std_length_2d_um": stats.summary_2d.std_length,
        "std_length_3d_um": stats.summary_3d.std_length,
        "delta_max_length_um": stats.delta_max_length,
        "delta_failing_count": stats.delta_failing_count,
        "delta_stddev_um": stats.delta_stddev,
        "ir_drop_2d_mV": drops["2d"],
        "ir_drop_3d_mV": drops["3d"],
        "overlaps": count_overlaps(netlist, p2, pitch2) + count_overlaps(netlist, p3, pitch3),
    }
    return files, row


FLOW_COLUMNS = (
    "seed", "hpwl_2d_um", "hpwl_3d_um", "cut_nets", "vias_3d",
    "max_length_2d_um", "max_length_3d_um", "failing_2d", "failing_3d",
    "std_length_2d_um", "std_length_3d_um",
    "delta_max_length_um", "delta_failing_count", "delta_stddev_um",
    "ir_drop_2d_mV", "ir_drop_3d_mV", "overlaps",
)


def flow_study(cfg: Config, fmt_: str, seeds: list[int], pool_map=map) -> dict[str, str]:
    setup = flow_setup(cfg)
    if setup.netlist_text is not None:
        try:
            parse_netlist(setup.netlist_text)
        except NetlistError as e:
            raise ConfigError(f"invalid netlist: {e}", "netlist", cfg.line("netlist")) from None
    files: dict[str, str] = {}
    rows = []
    for f, row in pool_map(run_flow_seed, [(setup, s) for s in seeds]):
        files.update(f)
        rows.append(row)
    n = len(rows)
    agg = {
        "seeds": n,
        "frac_shorter_max_length": sum(r["delta_max_length_um"] < 0 for r in rows) / n,
        "frac_not_more_failing": sum(r["delta_failing_count"] <= 0 for r in rows) / n,
        "mean_delta_stddev_um": sum(r["delta_stddev_um"] for r in rows) / n,
    }
    if fmt_ == "json":
        files["flow_summary.json"] = json_text({"aggregate": agg, "seeds": rows})
    else:
        def cell(v):
            if v is None:
                return ""
            return v if isinstance(v, int) else fmt(v, 9)
        files["flow_summary.csv"] = csv_text(FLOW_COLUMNS, [[cell(r[k]) for k in FLOW_COLUMNS] for r in rows])
    return files
