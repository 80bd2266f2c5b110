"""Input checks shared by the estimators."""

from __future__ import annotations

import os
from typing import Mapping

import numpy as np

from .netlist import Netlist, Placement, parse_netlist


def check_netlist(X, *, min_cells: int = 0) -> Netlist:
    """Accept a ``Netlist``, a path to a netlist file, or netlist text."""
    if isinstance(X, Netlist):
        nl = X
    elif isinstance(X, os.PathLike):
        with open(X, encoding="utf-8") as fh:
            nl = parse_netlist(fh.read())
    elif isinstance(X, str):
        nl = parse_netlist(X)
    else:
        raise TypeError(f"expected a Netlist, path or netlist text, got {type(X).__name__}")
    if len(nl.cells) < min_cells:
        raise ValueError(f"netlist has {len(nl.cells)} cells, need at least {min_cells}")
    return nl


def check_placement(placement: Placement, netlist: Netlist) -> Placement:
    if not isinstance(placement, Placement):
        raise TypeError(f"expected a Placement, got {type(placement).__name__}")
    missing = [c.id for c in netlist.cells if c.id not in placement.coords]
    if missing:
        raise ValueError(f"{len(missing)} cells are not placed, e.g. {missing[0]!r}")
    return placement


def check_fraction(name: str, value: float, *, low: float = 0.0, high: float = 1.0,
                   low_open: bool = True, high_open: bool = False) -> float:
    v = float(value)
    lo_ok = v > low if low_open else v >= low
    hi_ok = v < high if high_open else v <= high
    if not (lo_ok and hi_ok):
        lb = "(" if low_open else "["
        rb = ")" if high_open else "]"
        raise ValueError(f"{name} must be in {lb}{low}, {high}{rb}, got {value}")
    return v


def check_seed(random_state) -> int:
    if isinstance(random_state, (int, np.integer)) and not isinstance(random_state, bool):
        if random_state < 0:
            raise ValueError(f"random_state must be >= 0, got {random_state}")
        return int(random_state)
    raise TypeError(f"random_state must be a non-negative int, got {random_state!r}")


def check_tier_map(tier_of: Mapping[str, int], netlist: Netlist, num_tiers: int) -> dict[str, int]:
    out = {}
    for c in netlist.cells:
        if c.id not in tier_of:
            raise ValueError(f"cell {c.id!r} has no tier")
        t = int(tier_of[c.id])
        if not 0 <= t < num_tiers:
            raise ValueError(f"cell {c.id!r}: tier {t} outside [0, {num_tiers})")
        out[c.id] = t
    return out
