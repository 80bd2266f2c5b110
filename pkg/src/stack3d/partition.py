"""Balanced two-way min-cut tier partitioning (Fiduccia-Mattheyses)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .netlist import Netlist
from .validation import check_fraction, check_netlist, check_seed


class InfeasibleBalanceError(ValueError):
    pass


@dataclass(frozen=True)
class TierAssignment:
    tier_of: dict[str, int]
    num_tiers: int
    cut_nets: int
    balance: tuple[float, ...]


def cut_size(netlist: Netlist, tier_of) -> int:
    """Number of nets whose pins sit on more than one tier."""
    return sum(1 for net in netlist.nets if len({tier_of[p] for p in net.pins}) > 1)


def area_fractions(netlist: Netlist, tier_of, num_tiers: int) -> tuple[float, ...]:
    areas = [0.0] * num_tiers
    for c in netlist.cells:
        areas[tier_of[c.id]] += c.area
    total = sum(areas)
    return tuple(a / total for a in areas)


class _FMState:
    """Incremental FM bookkeeping for one start.

    Cells are indexed in ascending id order so that ``min`` over a gain
    bucket implements lowest-id tie-breaking.
    """

    def __init__(self, netlist: Netlist, order: list[int]):
        cells = netlist.cells
        self.n = len(cells)
        # rank[i] = position of cell i in id order
        self.rank = np.empty(self.n, dtype=np.int64)
        self.rank[order] = np.arange(self.n)
        self.by_rank = order
        self.area = np.array([c.area for c in cells])
        net_ptr, net_pins, cell_ptr, cell_nets = netlist.csr()
        self.net_pins = [net_pins[net_ptr[k]:net_ptr[k + 1]].tolist() for k in range(len(netlist.nets))]
        self.cell_nets = [cell_nets[cell_ptr[i]:cell_ptr[i + 1]].tolist() for i in range(self.n)]
        self.movable = np.array([not c.fixed for c in cells])
        self.pmax = max((len(v) for v in self.cell_nets), default=0)

    def run(self, part: np.ndarray, lo: float, hi: float, slack: float, max_passes: int):
        part = part.copy()
        cnt = np.zeros((len(self.net_pins), 2), dtype=np.int64)
        for k, pins in enumerate(self.net_pins):
            for p in pins:
                cnt[k, part[p]] += 1
        cut = int(np.count_nonzero((cnt[:, 0] > 0) & (cnt[:, 1] > 0)))
        area0 = float(self.area[part == 0].sum())
        history = [cut]
        for _ in range(max_passes):
            part, cnt, new_cut, area0 = self._pass(part, cnt, cut, area0, lo, hi, slack)
            history.append(new_cut)
            if new_cut >= cut:
                break
            cut = new_cut
        return part, min(history), history

    def _pass(self, part, cnt, cut, area0, lo, hi, slack):
        n, off = self.n, self.pmax
        gain = np.zeros(n, dtype=np.int64)
        free = self.movable.copy()
        for i in range(n):
            if not free[i]:
                continue
            f = part[i]
            g = 0
            for k in self.cell_nets[i]:
                if cnt[k, f] == 1:
                    g += 1
                if cnt[k, 1 - f] == 0:
                    g -= 1
            gain[i] = g
        buckets = [[set() for _ in range(2 * off + 1)] for _ in range(2)]
        for i in np.flatnonzero(free):
            buckets[part[i]][gain[i] + off].add(int(self.rank[i]))

        def relocate(i, delta):
            b = buckets[part[i]]
            r = int(self.rank[i])
            b[gain[i] + off].discard(r)
            gain[i] += delta
            b[gain[i] + off].add(r)

        moves = []
        best_cut, best_len = cut, 0
        best_imb = abs(area0 - 0.5 * (lo + hi))
        cur_cut = cut
        total = float(self.area.sum())
        while True:
            pick = None
            for g_idx in range(2 * off, -1, -1):
                cands = []
                for side in (0, 1):
                    bucket = buckets[side][g_idx]
                    if not bucket:
                        continue
                    # lowest-id cell on this side whose move stays inside the relaxed band
                    for r in sorted(bucket):
                        i = self.by_rank[r]
                        a0 = area0 - self.area[i] if side == 0 else area0 + self.area[i]
                        if lo - slack <= a0 <= hi + slack:
                            cands.append((r, i, a0))
                            break
                if cands:
                    r, i, a0 = min(cands)
                    pick = (i, a0)
                    break
            if pick is None:
                break
            i, a0 = pick
            f = part[i]
            t = 1 - f
            buckets[f][gain[i] + off].discard(int(self.rank[i]))
            free[i] = False
            cur_cut -= gain[i]
            for k in self.cell_nets[i]:
                pins = self.net_pins[k]
                if cnt[k, t] == 0:
                    for p in pins:
                        if free[p]:
                            relocate(p, +1)
                elif cnt[k, t] == 1:
                    for p in pins:
                        if free[p] and part[p] == t:
                            relocate(p, -1)
                cnt[k, f] -= 1
                cnt[k, t] += 1
                if cnt[k, f] == 0:
                    for p in pins:
                        if free[p]:
                            relocate(p, -1)
                elif cnt[k, f] == 1:
                    for p in pins:
                        if free[p] and part[p] == f:
                            relocate(p, +1)
            part[i] = t
            area0 = a0
            moves.append(i)
            if lo <= area0 <= hi:
                imb = abs(area0 - 0.5 * total)
                if cur_cut < best_cut or (cur_cut == best_cut and imb < best_imb - 1e-12):
                    best_cut, best_len, best_imb = cur_cut, len(moves), imb
        # roll back moves past the best prefix
        for i in reversed(moves[best_len:]):
            f = part[i]
            for k in self.cell_nets[i]:
                cnt[k, f] -= 1
                cnt[k, 1 - f] += 1
            area0 += -self.area[i] if f == 0 else self.area[i]
            part[i] = 1 - f
        return part, cnt, best_cut, area0


class FMPartitioner(BaseEstimator):
    """Two-tier min-cut partitioner with area balance.

    Parameters
    ----------
    balance_tol : float
        Allowed deviation of each tier's area fraction from 1/2.
    n_starts : int
        Independent seeded starts; the best final cut is kept.
    max_passes : int
        Pass limit per start. Passes stop early once a pass fails to improve.
    random_state : int
        Seed for the initial assignments.

    Attributes
    ----------
    assignment_ : TierAssignment
    labels_ : ndarray of shape (n_cells,)
        Tier per cell in netlist order.
    cut_ : int
    initial_cut_ : int
        Cut of the first random starting assignment.
    pass_cuts_ : list of list of int
        Cut after each pass, per start.
    """

    def __init__(self, balance_tol=0.05, n_starts=4, max_passes=50, random_state=0):
        self.balance_tol = balance_tol
        self.n_starts = n_starts
        self.max_passes = max_passes
        self.random_state = random_state

    def fit(self, X, y=None):
        netlist = check_netlist(X)
        tol = check_fraction("balance_tol", self.balance_tol, low=0.0, high=0.5, low_open=False)
        seed = check_seed(self.random_state)
        if self.n_starts < 1 or self.max_passes < 1:
            raise ValueError("n_starts and max_passes must be >= 1")
        movable = [i for i, c in enumerate(netlist.cells) if not c.fixed]
        if len(movable) < 2:
            raise ValueError("need at least 2 movable cells to partition")

        area = np.array([c.area for c in netlist.cells])
        total = float(area.sum())
        lo, hi = total * (0.5 - tol), total * (0.5 + tol)
        if area.max() > hi:
            raise InfeasibleBalanceError(
                f"cell area {area.max()} exceeds the balance band [{lo:.6g}, {hi:.6g}]"
            )
        fixed_part = np.full(len(area), -1)
        for i, c in enumerate(netlist.cells):
            if c.fixed:
                tier = c.fixed_pos[2]
                if tier > 1:
                    raise ValueError(f"fixed cell {c.id!r} on tier {tier}; bipartition has tiers 0 and 1")
                fixed_part[i] = tier

        order = sorted(range(len(area)), key=lambda i: netlist.cells[i].id)
        state = _FMState(netlist, order)
        slack = float(area[movable].max())
        rng = np.random.default_rng(seed)

        best = None
        self.pass_cuts_ = []
        self.initial_cut_ = None
        for _ in range(self.n_starts):
            part = _initial_partition(area, fixed_part, lo, hi, rng)
            part, cut, history = state.run(part, lo, hi, slack, self.max_passes)
            if self.initial_cut_ is None:
                self.initial_cut_ = int(history[0])
            self.pass_cuts_.append([int(h) for h in history])
            if best is None or cut < best[1]:
                best = (part, cut)

        part, cut = best
        tier_of = {c.id: int(part[i]) for i, c in enumerate(netlist.cells)}
        self.labels_ = part.astype(np.int64)
        self.cut_ = int(cut)
        self.assignment_ = TierAssignment(
            tier_of, 2, self.cut_, area_fractions(netlist, tier_of, 2)
        )
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_


def _initial_partition(area, fixed_part, lo, hi, rng, attempts: int = 32) -> np.ndarray:
    """Random greedy fill, repaired by single moves and swaps toward balance.

    When the repair stalls the fill is retried largest-first, then with
    further seeded orders.
    """
    n = len(area)
    orders = [rng.permutation(n)]
    jitter = rng.random(n)
    orders.append(np.lexsort((jitter, -area)))
    for k in range(attempts):
        if k >= len(orders):
            orders.append(rng.permutation(n))
        part = _fill_and_repair(area, fixed_part, lo, hi, orders[k])
        if part is not None:
            return part
    raise InfeasibleBalanceError(
        f"no assignment places tier-0 area inside [{lo:.6g}, {hi:.6g}]"
    )


def _fill_and_repair(area, fixed_part, lo, hi, order):
    n = len(area)
    part = fixed_part.copy()
    a = [float(area[fixed_part == 0].sum()), float(area[fixed_part == 1].sum())]
    for i in order:
        if part[i] >= 0:
            continue
        side = 0 if a[0] <= a[1] else 1
        part[i] = side
        a[side] += area[i]
    target = 0.5 * (lo + hi)
    movable = np.flatnonzero(fixed_part < 0)
    for _ in range(4 * n):
        a0 = float(area[part == 0].sum())
        if lo <= a0 <= hi:
            return part
        err = a0 - target
        best, best_err = None, abs(err)
        for i in movable:
            d = -area[i] if part[i] == 0 else area[i]
            if abs(err + d) < best_err - 1e-12:
                best, best_err = (i,), abs(err + d)
        for i in movable[part[movable] == 0]:
            for j in movable[part[movable] == 1]:
                d = area[j] - area[i]
                if abs(err + d) < best_err - 1e-12:
                    best, best_err = (i, j), abs(err + d)
        if best is None:
            break
        for i in best:
            part[i] = 1 - part[i]
    return None


def fm_bipartition(netlist: Netlist, balance_tol: float = 0.05, seed: int = 0, **kwargs) -> TierAssignment:
    return FMPartitioner(balance_tol=balance_tol, random_state=seed, **kwargs).fit(netlist).assignment_
