"""Atomic file output and the placement/CSV/JSON artifact formats."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile

from .netlist import Placement


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file in the target directory, then rename over."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_many(files: dict[str, str]) -> None:
    """Write a batch of artifacts; only called once every one is rendered."""
    for path in sorted(files):
        atomic_write(path, files[path])


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def fmt(v: float, digits: int = 6) -> str:
    return f"{v:.{digits}g}"


# --------------------------------------------------------------------------
# placement files


def placement_text(placement: Placement, *, seed, config_hash, hpwl, cut) -> str:
    w, h = placement.footprint
    lines = [
        f"# seed {seed}",
        f"# config_hash {config_hash}",
        f"# hpwl {hpwl!r}",
        f"# cut {cut}",
        f"# footprint {w!r} {h!r} tiers {placement.num_tiers}",
    ]
    for cid in sorted(placement.coords):
        x, y, t = placement.coords[cid]
        lines.append(f"cell {cid} {x!r} {y!r} {t}")
    return "\n".join(lines) + "\n"


class PlacementFileError(ValueError):
    pass


def parse_placement(text: str) -> Placement:
    coords = {}
    meta = {}
    footprint = None
    tiers = 1
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            tok = line[1:].split()
            if tok and tok[0] == "footprint" and len(tok) == 5:
                footprint = (float(tok[1]), float(tok[2]))
                tiers = int(tok[4])
            elif len(tok) == 2:
                meta[tok[0]] = tok[1]
            continue
        tok = line.split()
        if len(tok) != 5 or tok[0] != "cell":
            raise PlacementFileError(f"line {lineno}: expected 'cell <id> <x> <y> <tier>'")
        try:
            coords[tok[1]] = (float(tok[2]), float(tok[3]), int(tok[4]))
        except ValueError:
            raise PlacementFileError(f"line {lineno}: bad number") from None
    if footprint is None:
        raise PlacementFileError("missing '# footprint <w> <h> tiers <n>' header")
    return Placement(coords, footprint, tiers, meta)
