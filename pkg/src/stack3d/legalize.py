"""Tier-aware row legalization.

Every tier is cut into rows of height ``row_pitch``; a cell of area ``A``
occupies a row segment of width ``A / row_pitch``. Cells go to their
nearest row, overfull rows spill into the nearest rows with room, and each
row is packed in order with least squared shifting. Fixed cells are left
where they are.
"""

from __future__ import annotations

import math

from sklearn.base import BaseEstimator, TransformerMixin

from .netlist import Netlist, Placement
from .validation import check_netlist, check_placement

_EPS = 1e-9


class LegalizationError(ValueError):
    pass


class RowLegalizer(TransformerMixin, BaseEstimator):
    """Snap a placement to non-overlapping row sites.

    ``fit`` records the netlist (cell widths); ``transform`` legalizes a
    placement of that netlist.
    """

    def __init__(self, row_pitch=1.0):
        self.row_pitch = row_pitch

    def fit(self, X, y=None):
        if not self.row_pitch > 0:
            raise ValueError(f"row_pitch must be > 0, got {self.row_pitch}")
        self.netlist_ = check_netlist(X)
        return self

    def transform(self, placement: Placement) -> Placement:
        netlist = self.netlist_
        check_placement(placement, netlist)
        pitch = float(self.row_pitch)
        width, height = placement.footprint
        n_rows = int(math.floor(height / pitch + _EPS))
        if n_rows < 1:
            raise LegalizationError(f"footprint height {height} fits no row of pitch {pitch}")

        coords = dict(placement.coords)
        for t in range(placement.num_tiers):
            members = [c for c in netlist.cells if not c.fixed and placement.coords[c.id][2] == t]
            if not members:
                continue
            w = {c.id: c.area / pitch for c in members}
            for cid, cw in w.items():
                if cw > width + _EPS:
                    raise LegalizationError(f"cell {cid!r} is wider ({cw:.6g}) than a row ({width:.6g})")
            if sum(w.values()) > n_rows * width * (1 + _EPS):
                raise LegalizationError(
                    f"tier {t}: {sum(w.values()):.6g} µm of cell width exceeds "
                    f"{n_rows} rows x {width:.6g} µm"
                )
            rows = _assign_rows(members, placement.coords, w, pitch, n_rows, width)
            for r, row in enumerate(rows):
                yc = (r + 0.5) * pitch
                for cid, xc in _pack_row(row, placement.coords, w, width):
                    coords[cid] = (xc, yc, t)
        return Placement(coords, placement.footprint, placement.num_tiers, placement.meta)


def _assign_rows(members, coords, w, pitch, n_rows, width):
    rows: list[list[str]] = [[] for _ in range(n_rows)]
    for c in members:
        y = coords[c.id][1]
        r = min(max(int(math.floor(y / pitch)), 0), n_rows - 1)
        rows[r].append(c.id)
    used = [sum(w[c] for c in row) for row in rows]
    cap = width * (1 + _EPS)

    # Overfull rows hand cells to the nearest row with room, choosing the
    # (cell, row) pair with the least vertical displacement each time.
    # Spilling straight to free rows avoids cascades through full ones.
    for r in range(n_rows):
        while used[r] > cap:
            best = None
            for cid in rows[r]:
                y = coords[cid][1]
                for rr in range(n_rows):
                    if rr == r or used[rr] + w[cid] > cap:
                        continue
                    key = (abs(y - (rr + 0.5) * pitch), cid, rr)
                    if best is None or key < best:
                        best = key
            if best is None:
                raise LegalizationError(f"row {r} overflows and no other row has room")
            _, cid, rr = best
            rows[r].remove(cid)
            used[r] -= w[cid]
            rows[rr].append(cid)
            used[rr] += w[cid]
    return rows


def _pack_row(row, coords, w, width):
    """Order-preserving packing with least squared displacement.

    Cells are taken left to right; a cell that would overlap the previous
    cluster joins it, and a cluster sits at the mean of its members'
    desired left edges (clamped to the row), merging leftward while it
    overlaps its predecessor.
    """
    order = sorted(row, key=lambda c: (coords[c][0], c))
    # cluster: [x, n, q, wsum, first]
    clusters: list[list] = []
    for k, cid in enumerate(order):
        want = min(max(coords[cid][0] - w[cid] / 2, 0.0), max(width - w[cid], 0.0))
        if clusters and clusters[-1][0] + clusters[-1][3] > want + _EPS:
            c = clusters[-1]
            c[1] += 1
            c[2] += want - c[3]
            c[3] += w[cid]
        else:
            clusters.append([want, 1, want, w[cid], k])
        while True:
            c = clusters[-1]
            c[0] = min(max(c[2] / c[1], 0.0), max(width - c[3], 0.0))
            if len(clusters) > 1 and clusters[-2][0] + clusters[-2][3] > c[0] + _EPS:
                p = clusters[-2]
                p[2] += c[2] - c[1] * p[3]
                p[1] += c[1]
                p[3] += c[3]
                clusters.pop()
                continue
            break
    out = []
    for ci, c in enumerate(clusters):
        stop = clusters[ci + 1][4] if ci + 1 < len(clusters) else len(order)
        left = c[0]
        if ci > 0:
            prev = clusters[ci - 1]
            left = max(left, prev[0] + prev[3])  # absorb EPS-sized overlaps
        for cid in order[c[4]:stop]:
            xc = left + w[cid] / 2
            if abs(xc - coords[cid][0]) <= 1e-7:
                xc = coords[cid][0]
            out.append((cid, min(max(xc, 0.0), width)))
            left += w[cid]
    return out


def legalize(placement: Placement, row_pitch: float, netlist: Netlist) -> Placement:
    return RowLegalizer(row_pitch).fit(netlist).transform(placement)


def count_overlaps(netlist: Netlist, placement: Placement, row_pitch: float) -> int:
    """Pairs of same-tier, same-row cells whose segments overlap."""
    buckets: dict[tuple[int, int], list[tuple[float, float]]] = {}
    for c in netlist.cells:
        if c.fixed:
            continue
        x, y, t = placement.coords[c.id]
        half = c.area / row_pitch / 2
        key = (t, int(round(y / row_pitch - 0.5)))
        buckets.setdefault(key, []).append((x - half, x + half))
    n = 0
    for segs in buckets.values():
        segs.sort()
        for (a0, a1), (b0, b1) in zip(segs, segs[1:]):
            if b0 < a1 - 1e-7:
                n += 1
    return n


def row_aligned(placement: Placement, row_pitch: float, netlist: Netlist) -> bool:
    for c in netlist.cells:
        if c.fixed:
            continue
        y = placement.coords[c.id][1]
        if abs(y / row_pitch - 0.5 - round(y / row_pitch - 0.5)) > 1e-9:
            return False
    return True

