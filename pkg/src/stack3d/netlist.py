"""Netlist data model, text format, synthetic generation and wirelength.

Cells are modeled as points. Area only feeds utilization and legalization
budgets; delay is the intrinsic gate delay used by the path timer.

The text format is one record per line, ``#`` starts a comment::

    cell <id> <area_um2> <delay_ns> [fixed <x> <y> <tier>]
    net  <id> <cell_id> <cell_id> [...]
    path <id> <required_ns> <cell_id> [...]

Cells come first, then nets, then paths.

Wirelength is the usual half-perimeter wirelength (HPWL) of each net's
pin bounding box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np


class NetlistError(ValueError):
    """Raised for malformed or inconsistent netlists."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Cell:
    id: str
    area: float
    delay: float
    fixed: bool = False
    fixed_pos: tuple[float, float, int] | None = None

    def __post_init__(self):
        if not self.area > 0:
            raise NetlistError(f"cell {self.id!r}: area must be > 0, got {self.area}")
        if not self.delay >= 0:
            raise NetlistError(f"cell {self.id!r}: delay must be >= 0, got {self.delay}")
        if self.fixed and self.fixed_pos is None:
            raise NetlistError(f"cell {self.id!r}: fixed cell needs a position")


@dataclass(frozen=True)
class Net:
    id: str
    pins: tuple[str, ...]

    def __post_init__(self):
        if len(self.pins) < 2:
            raise NetlistError(f"net {self.id!r}: needs at least 2 pins")
        if len(set(self.pins)) != len(self.pins):
            raise NetlistError(f"net {self.id!r}: pins not distinct")


@dataclass(frozen=True)
class TimingPathSpec:
    id: str
    cells: tuple[str, ...]
    required_time: float

    def __post_init__(self):
        if len(self.cells) < 1:
            raise NetlistError(f"path {self.id!r}: empty")
        if not self.required_time > 0:
            raise NetlistError(f"path {self.id!r}: required time must be > 0")


@dataclass(frozen=True, eq=False)
class Netlist:
    """Immutable container of cells, nets and declared timing paths.

    Construction validates id uniqueness, pin references and path
    connectivity (consecutive path cells must share a net).
    """

    cells: tuple[Cell, ...]
    nets: tuple[Net, ...] = ()
    paths: tuple[TimingPathSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "nets", tuple(self.nets))
        object.__setattr__(self, "paths", tuple(self.paths))
        _check_unique((c.id for c in self.cells), "cell")
        _check_unique((n.id for n in self.nets), "net")
        _check_unique((p.id for p in self.paths), "path")
        index = self.cell_index
        for net in self.nets:
            for pin in net.pins:
                if pin not in index:
                    raise NetlistError(f"net {net.id!r}: dangling pin {pin!r}")
        for path in self.paths:
            for cid in path.cells:
                if cid not in index:
                    raise NetlistError(f"path {path.id!r}: unknown cell {cid!r}")
            for u, v in zip(path.cells, path.cells[1:]):
                if not self.shared_nets(u, v):
                    raise NetlistError(
                        f"path {path.id!r}: cells {u!r} and {v!r} share no net"
                    )

    def __eq__(self, other):
        if not isinstance(other, Netlist):
            return NotImplemented
        return (self.cells, self.nets, self.paths) == (other.cells, other.nets, other.paths)

    __hash__ = None

    @cached_property
    def cell_index(self) -> dict[str, int]:
        return {c.id: i for i, c in enumerate(self.cells)}

    @cached_property
    def cell_map(self) -> dict[str, Cell]:
        return {c.id: c for c in self.cells}

    @cached_property
    def nets_of_cell(self) -> dict[str, tuple[int, ...]]:
        acc: dict[str, list[int]] = {c.id: [] for c in self.cells}
        for k, net in enumerate(self.nets):
            for pin in net.pins:
                acc[pin].append(k)
        return {cid: tuple(v) for cid, v in acc.items()}

    def shared_nets(self, u: str, v: str) -> list[int]:
        nu = self.nets_of_cell[u]
        nv = set(self.nets_of_cell[v])
        return [k for k in nu if k in nv]

    @property
    def total_area(self) -> float:
        return float(sum(c.area for c in self.cells))

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Index arrays ``(net_ptr, net_pins, cell_ptr, cell_nets)``."""
        index = self.cell_index
        net_ptr = np.zeros(len(self.nets) + 1, dtype=np.int64)
        pins = []
        for k, net in enumerate(self.nets):
            pins.extend(index[p] for p in net.pins)
            net_ptr[k + 1] = len(pins)
        net_pins = np.asarray(pins, dtype=np.int64)
        cell_ptr = np.zeros(len(self.cells) + 1, dtype=np.int64)
        cnets = []
        for i, c in enumerate(self.cells):
            cnets.extend(self.nets_of_cell[c.id])
            cell_ptr[i + 1] = len(cnets)
        return net_ptr, net_pins, cell_ptr, np.asarray(cnets, dtype=np.int64)


def _check_unique(ids: Iterable[str], kind: str) -> None:
    seen = set()
    for i in ids:
        if i in seen:
            raise NetlistError(f"duplicate {kind} id {i!r}")
        seen.add(i)


@dataclass(frozen=True, eq=False)
class Placement:
    """Per-cell ``(x, y, tier)`` on a ``width x height`` footprint (µm)."""

    coords: Mapping[str, tuple[float, float, int]]
    footprint: tuple[float, float]
    num_tiers: int = 1
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_tiers < 1:
            raise ValueError("num_tiers must be >= 1")
        w, h = self.footprint
        if not (w > 0 and h > 0):
            raise ValueError(f"footprint must be positive, got {self.footprint}")
        coords = {}
        for cid, (x, y, t) in self.coords.items():
            x, y, t = float(x), float(y), int(t)
            if not (0 <= x <= w and 0 <= y <= h):
                raise ValueError(f"cell {cid!r} at ({x}, {y}) outside footprint {w}x{h}")
            if not 0 <= t < self.num_tiers:
                raise ValueError(f"cell {cid!r}: tier {t} outside [0, {self.num_tiers})")
            coords[cid] = (x, y, t)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "meta", dict(self.meta))

    def __eq__(self, other):
        if not isinstance(other, Placement):
            return NotImplemented
        return (
            self.coords == other.coords
            and tuple(self.footprint) == tuple(other.footprint)
            and self.num_tiers == other.num_tiers
        )

    __hash__ = None

    @property
    def footprint_area(self) -> float:
        return self.footprint[0] * self.footprint[1]

    def tier_areas(self, netlist: Netlist) -> list[float]:
        areas = [0.0] * self.num_tiers
        cmap = netlist.cell_map
        for cid, (_, _, t) in self.coords.items():
            areas[t] += cmap[cid].area
        return areas

    def arrays(self, netlist: Netlist) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coordinates as arrays ordered like ``netlist.cells``."""
        n = len(netlist.cells)
        x = np.empty(n)
        y = np.empty(n)
        t = np.empty(n, dtype=np.int64)
        for i, c in enumerate(netlist.cells):
            try:
                x[i], y[i], t[i] = self.coords[c.id]
            except KeyError:
                raise ValueError(f"cell {c.id!r} is not placed") from None
        return x, y, t


# --------------------------------------------------------------------------
# text format


def parse_netlist(text: str | Iterable[str]) -> Netlist:
    """Parse the line-oriented netlist format.

    Errors carry the offending line number.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    cells: list[Cell] = []
    nets: list[Net] = []
    paths: list[TimingPathSpec] = []
    known: set[str] = set()
    net_ids: set[str] = set()
    stage = 0
    order = {"cell": 0, "net": 1, "path": 2}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        if kind not in order:
            raise NetlistError(f"unknown record {kind!r}", lineno)
        if order[kind] < stage:
            raise NetlistError(f"{kind!r} record after later section", lineno)
        stage = order[kind]
        try:
            if kind == "cell":
                cell = _parse_cell(tok, lineno)
                if cell.id in known:
                    raise NetlistError(f"duplicate cell id {cell.id!r}", lineno)
                known.add(cell.id)
                cells.append(cell)
            elif kind == "net":
                if len(tok) < 4:
                    raise NetlistError("net needs an id and at least 2 pins", lineno)
                nid, pins = tok[1], tuple(tok[2:])
                if nid in net_ids:
                    raise NetlistError(f"duplicate net id {nid!r}", lineno)
                for p in pins:
                    if p not in known:
                        raise NetlistError(f"dangling pin reference {p!r}", lineno)
                net_ids.add(nid)
                nets.append(Net(nid, pins))
            else:
                if len(tok) < 4:
                    raise NetlistError("path needs id, required time and cells", lineno)
                paths.append(TimingPathSpec(tok[1], tuple(tok[3:]), _num(tok[2], lineno)))
        except NetlistError as exc:
            if exc.line is None:
                raise NetlistError(str(exc), lineno) from None
            raise
    return Netlist(tuple(cells), tuple(nets), tuple(paths))


def _num(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise NetlistError(f"expected a number, got {tok!r}", lineno) from None
    if not math.isfinite(v):
        raise NetlistError(f"non-finite number {tok!r}", lineno)
    return v


def _parse_cell(tok: list[str], lineno: int) -> Cell:
    if len(tok) == 4:
        return Cell(tok[1], _num(tok[2], lineno), _num(tok[3], lineno))
    if len(tok) == 8 and tok[4] == "fixed":
        tier = _num(tok[7], lineno)
        if tier != int(tier) or tier < 0:
            raise NetlistError(f"bad tier {tok[7]!r}", lineno)
        pos = (_num(tok[5], lineno), _num(tok[6], lineno), int(tier))
        return Cell(tok[1], _num(tok[2], lineno), _num(tok[3], lineno), True, pos)
    raise NetlistError("cell record: expected 'cell <id> <area> <delay> [fixed <x> <y> <tier>]'", lineno)


def serialize_netlist(netlist: Netlist) -> str:
    out = []
    for c in netlist.cells:
        line = f"cell {c.id} {c.area!r} {c.delay!r}"
        if c.fixed:
            x, y, t = c.fixed_pos
            line += f" fixed {float(x)!r} {float(y)!r} {int(t)}"
        out.append(line)
    for n in netlist.nets:
        out.append(f"net {n.id} " + " ".join(n.pins))
    for p in netlist.paths:
        out.append(f"path {p.id} {p.required_time!r} " + " ".join(p.cells))
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# synthetic generation


def generate_synthetic(
    n_cells: int,
    rent_exponent: float = 0.6,
    avg_fanout: float = 3.0,
    seed: int = 0,
) -> Netlist:
    """Deterministic hierarchical netlist following Rent's rule.

    Cells are laid out in a binary bisection tree. Each block of ``G`` cells
    receives nets bridging its two halves, with extra sinks drawn anywhere in
    the block, sized so that sub-block terminal counts track ``k * G**p`` with
    ``k = avg_fanout + 1`` pins per cell.
    Every bisection gets at least one bridging net, so the result is
    connected. Timing paths are random walks over the net graph covering at
    least 5% of the cells.
    """
    if int(n_cells) != n_cells or n_cells < 2:
        raise ValueError(f"n_cells must be an integer >= 2, got {n_cells}")
    if not 0 < rent_exponent < 1:
        raise ValueError(f"rent_exponent must be in (0, 1), got {rent_exponent}")
    if not avg_fanout >= 1:
        raise ValueError(f"avg_fanout must be >= 1, got {avg_fanout}")
    n_cells = int(n_cells)
    rng = np.random.default_rng(seed)
    width = len(str(n_cells - 1))

    areas = np.round(rng.uniform(0.5, 2.0, n_cells), 4)
    delays = np.round(rng.uniform(0.01, 0.03, n_cells), 5)
    cells = tuple(
        Cell(f"c{i:0{width}d}", float(areas[i]), float(delays[i])) for i in range(n_cells)
    )

    # Terminals of a block of size g come from pins of nets created at
    # enclosing levels: g * sum_{L > g} pins_per_cell(L) = k * g**p.
    k_pins = avg_fanout + 1.0
    pins_per_net = avg_fanout + 1.0
    level_frac = 1.0 - 2.0 ** (rent_exponent - 1.0)
    raw_nets: list[list[int]] = []
    seen: set[frozenset] = set()

    stack = [(0, n_cells)]
    while stack:
        lo, hi = stack.pop()
        g = hi - lo
        if g < 2:
            continue
        mid = lo + g // 2
        # the root level absorbs the tail of the sum so large blocks keep the law
        frac = 1.0 if g == n_cells else level_frac
        expect = k_pins * (g / 2) ** (rent_exponent - 1.0) * frac * g / pins_per_net
        m = max(1, int(expect) + (rng.random() < expect - int(expect)))
        for _ in range(m):
            if rng.random() < 0.5:
                drv = int(rng.integers(lo, mid))
                first = int(rng.integers(mid, hi))
            else:
                drv = int(rng.integers(mid, hi))
                first = int(rng.integers(lo, mid))
            pins = [drv, first]
            extra = int(rng.poisson(avg_fanout - 1.0)) if avg_fanout > 1 else 0
            extra = min(extra, g - 2)
            if extra > 0:
                pool = np.setdiff1d(np.arange(lo, hi), pins)
                pins.extend(int(v) for v in rng.choice(pool, size=extra, replace=False))
            key = frozenset(pins)
            if key in seen:
                continue  # a parallel copy of an existing net adds nothing
            seen.add(key)
            raw_nets.append(pins)
        stack.append((mid, hi))
        stack.append((lo, mid))

    nwidth = len(str(max(len(raw_nets) - 1, 0)))
    nets = tuple(
        Net(f"n{k:0{nwidth}d}", tuple(cells[i].id for i in pins))
        for k, pins in enumerate(raw_nets)
    )
    paths = _random_walk_paths(cells, raw_nets, delays, rng)
    return Netlist(cells, nets, paths)


def _random_walk_paths(cells, raw_nets, delays, rng) -> tuple[TimingPathSpec, ...]:
    n = len(cells)
    adj: list[set[int]] = [set() for _ in range(n)]
    for pins in raw_nets:
        for a in pins:
            adj[a].update(pins)
    for i in range(n):
        adj[i].discard(i)
    neighbors = [sorted(a) for a in adj]

    target_paths = max(1, n // 10)
    max_len = max(2, min(40, n))
    covered: set[int] = set()
    paths = []
    while len(paths) < target_paths or len(covered) < math.ceil(0.05 * n):
        start = int(rng.integers(0, n))
        want = int(rng.integers(2, max_len + 1))
        walk = [start]
        seen = {start}
        while len(walk) < want:
            options = [v for v in neighbors[walk[-1]] if v not in seen]
            if not options:
                break
            nxt = options[int(rng.integers(0, len(options)))]
            walk.append(nxt)
            seen.add(nxt)
        covered.update(walk)
        intrinsic = float(sum(delays[i] for i in walk))
        margin = float(rng.uniform(1.6, 2.6))
        paths.append(
            TimingPathSpec(
                f"p{len(paths)}", tuple(cells[i].id for i in walk), round(intrinsic * margin, 6)
            )
        )
    return tuple(paths)


def measure_rent_exponent(
    netlist: Netlist, n_samples: int = 400, seed: int = 0
) -> tuple[float, float]:
    """Fit ``log T = log k + p log G`` over sampled contiguous sub-blocks.

    Sub-blocks are windows of the cell order at random offsets with sizes
    spread log-uniformly from 4 cells to a quarter of the design. Returns
    ``(p, k)``.
    """
    n = len(netlist.cells)
    if n < 16:
        raise ValueError("need at least 16 cells to fit a Rent exponent")
    net_ptr, net_pins, _, _ = netlist.csr()
    lo_pin = np.minimum.reduceat(net_pins, net_ptr[:-1])
    hi_pin = np.maximum.reduceat(net_pins, net_ptr[:-1])
    members = [net_pins[net_ptr[k]:net_ptr[k + 1]] for k in range(len(netlist.nets))]
    rng = np.random.default_rng(seed)
    sizes = np.exp(rng.uniform(np.log(4), np.log(n / 4), n_samples)).astype(int)
    gs, ts = [], []
    for g in sizes:
        a = int(rng.integers(0, n - g + 1))
        b = a + g
        # nets with at least one pin inside [a, b) and one outside
        touch = (hi_pin >= a) & (lo_pin < b)
        crossing = touch & ((lo_pin < a) | (hi_pin >= b))
        t = 0
        for k in np.flatnonzero(crossing):
            inside = (members[k] >= a) & (members[k] < b)
            if inside.any():
                t += 1
        if t > 0:
            gs.append(g)
            ts.append(t)
    p, logk = np.polyfit(np.log(gs), np.log(ts), 1)
    return float(p), float(np.exp(logk))


# --------------------------------------------------------------------------
# wirelength


def net_hpwl(xs: Sequence[float], ys: Sequence[float], tiers: Sequence[int], via_penalty: float = 0.0) -> float:
    return (max(xs) - min(xs)) + (max(ys) - min(ys)) + via_penalty * (max(tiers) - min(tiers))


def hpwl(netlist: Netlist, placement: Placement, via_penalty: float = 0.0) -> float:
    """Total half-perimeter wirelength in µm.

    Each net contributes its bounding-box half-perimeter plus
    ``via_penalty`` µm per tier crossed.
    """
    coords = placement.coords
    total = 0.0
    for net in netlist.nets:
        try:
            pts = [coords[p] for p in net.pins]
        except KeyError as exc:
            raise ValueError(f"net {net.id!r}: cell {exc.args[0]!r} is not placed") from None
        xs, ys, ts = zip(*pts)
        total += net_hpwl(xs, ys, ts, via_penalty)
    return total


def path_length(
    path: TimingPathSpec, netlist: Netlist, placement: Placement, via_penalty: float = 0.0
) -> float:
    """Sum of pin-to-pin half-perimeter lengths along consecutive path cells."""
    coords = placement.coords
    try:
        pts = [coords[c] for c in path.cells]
    except KeyError as exc:
        raise ValueError(f"path {path.id!r}: cell {exc.args[0]!r} is not placed") from None
    total = 0.0
    for (x0, y0, t0), (x1, y1, t1) in zip(pts, pts[1:]):
        total += abs(x1 - x0) + abs(y1 - y0) + via_penalty * abs(t1 - t0)
    return total


def tier_crossings(path: TimingPathSpec, placement: Placement) -> int:
    tiers = [placement.coords[c][2] for c in path.cells]
    return int(sum(abs(b - a) for a, b in zip(tiers, tiers[1:])))
