import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from stack3d.netlist import Placement, parse_netlist  # noqa: E402

CHAIN4 = """\
# four-cell chain a-b-c-d
cell a 1.0 0.01
cell b 1.0 0.01
cell c 1.0 0.01
cell d 1.0 0.01
net n1 a b
net n2 b c
net n3 c d
path p1 0.05 a b c
"""

K4 = """\
cell a 1.0 0.01
cell b 1.0 0.01
cell c 1.0 0.01
cell d 1.0 0.01
net ab a b
net ac a c
net ad a d
net bc b c
net bd b d
net cd c d
"""


@pytest.fixture
def chain4():
    return parse_netlist(CHAIN4)


@pytest.fixture
def k4():
    return parse_netlist(K4)


@pytest.fixture
def chain_placement():
    # a(0,0) b(3,4) c(3,0): the 11 µm path fixture; d parked at the origin
    coords = {"a": (0, 0, 0), "b": (3, 4, 0), "c": (3, 0, 0), "d": (0, 0, 0)}
    return Placement(coords, (10, 10), 1)
