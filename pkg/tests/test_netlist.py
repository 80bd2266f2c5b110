import numpy as np
import pytest

from stack3d.netlist import (
    Cell, Net, Netlist, NetlistError, Placement, TimingPathSpec,
    generate_synthetic, hpwl, measure_rent_exponent, parse_netlist,
    path_length, serialize_netlist, tier_crossings,
)


def test_minimal_parse():
    nl = parse_netlist("cell a 1.0 0.01\ncell b 1.0 0.01\nnet n1 a b")
    assert len(nl.cells) == 2 and len(nl.nets) == 1


@pytest.mark.parametrize("text, line", [
    ("cell a 1.0 0.01\ncell b 1.0 0.01\nnet n1 a a", 3),
    ("cell a 1.0 0.01\ncell a 1.0 0.01", 2),
    ("cell a 1.0 0.01\nnet n1 a zz", 2),
    ("cell a 1.0 0.01\ncell b 1 0.01\nnet n1 a", 3),
    ("cell a x 0.01", 1),
    ("cell a 1.0 0.01\nnet n1 a a\ncell c 1 1", 2),
    ("wire a b", 1),
    ("cell a -1 0.01", 1),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(NetlistError) as ei:
        parse_netlist(text)
    assert ei.value.line == line
    assert f"line {line}" in str(ei.value)


def test_section_order_enforced():
    with pytest.raises(NetlistError):
        parse_netlist("cell a 1 0\ncell b 1 0\nnet n a b\ncell c 1 0")


def test_chain_fixture(chain4):
    assert len(chain4.nets) == 3
    assert chain4.paths[0].cells == ("a", "b", "c")


def test_path_must_follow_nets():
    with pytest.raises(NetlistError):
        parse_netlist("cell a 1 0\ncell b 1 0\ncell c 1 0\nnet n a b\npath p 1 a c")


def test_fixed_cells_round_trip():
    text = "cell io 1.0 0.0 fixed 1.5 2.0 1\ncell a 1.0 0.01\nnet n io a\n"
    nl = parse_netlist(text)
    assert nl.cells[0].fixed and nl.cells[0].fixed_pos == (1.5, 2.0, 1)
    assert parse_netlist(serialize_netlist(nl)) == nl


def test_cell_invariants():
    with pytest.raises(ValueError):
        Cell("a", 0.0, 0.1)
    with pytest.raises(ValueError):
        Cell("a", 1.0, -0.1)
    with pytest.raises(ValueError):
        Cell("a", 1.0, 0.1, fixed=True)
    with pytest.raises(ValueError):
        Net("n", ("a",))
    with pytest.raises(ValueError):
        TimingPathSpec("p", ("a",), 0.0)


def test_synthetic_deterministic():
    a = serialize_netlist(generate_synthetic(1000, 0.6, 3.0, seed=7))
    b = serialize_netlist(generate_synthetic(1000, 0.6, 3.0, seed=7))
    assert a == b
    assert a != serialize_netlist(generate_synthetic(1000, 0.6, 3.0, seed=8))


def test_synthetic_smallest():
    nl = generate_synthetic(2, 0.6, 1.0, seed=1)
    assert len(nl.cells) == 2 and len(nl.nets) == 1


def test_synthetic_connected_and_path_coverage():
    nl = generate_synthetic(1000, seed=7)
    # union-find over nets
    parent = {c.id: c.id for c in nl.cells}

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for net in nl.nets:
        r = find(net.pins[0])
        for p in net.pins[1:]:
            parent[find(p)] = r
    assert len({find(c.id) for c in nl.cells}) == 1
    on_paths = {c for p in nl.paths for c in p.cells}
    assert len(on_paths) >= 0.05 * len(nl.cells)


def test_synthetic_rent_exponent():
    nl = generate_synthetic(1000, 0.6, 3.0, seed=7)
    p, k = measure_rent_exponent(nl)
    assert 0.45 <= p <= 0.75
    assert k > 0


@pytest.mark.parametrize("kw", [dict(n_cells=1), dict(n_cells=10, rent_exponent=1.0),
                                dict(n_cells=10, avg_fanout=0.5)])
def test_synthetic_rejects(kw):
    with pytest.raises(ValueError):
        generate_synthetic(**kw)


def _one_net(points, tiers=None):
    ids = [f"c{i}" for i in range(len(points))]
    nl = Netlist(tuple(Cell(i, 1.0, 0.0) for i in ids), (Net("n", tuple(ids)),))
    tiers = tiers or [0] * len(points)
    pl = Placement({i: (x, y, t) for i, (x, y), t in zip(ids, points, tiers)}, (100, 100), max(tiers) + 1)
    return nl, pl


def test_hpwl_examples():
    assert hpwl(*_one_net([(0, 0), (3, 4)])) == 7
    assert hpwl(*_one_net([(5, 5), (5, 5)])) == 0
    assert hpwl(*_one_net([(0, 0), (2, 1), (1, 3)])) == 5


def test_hpwl_via_penalty():
    nl, pl = _one_net([(0, 0), (3, 4)], [0, 1])
    assert hpwl(nl, pl) == 7
    assert hpwl(nl, pl, via_penalty=2.5) == 9.5


def test_hpwl_unplaced():
    nl, _ = _one_net([(0, 0), (3, 4)])
    with pytest.raises(ValueError):
        hpwl(nl, Placement({"c0": (0, 0, 0)}, (10, 10)))


def test_path_length_examples(chain4, chain_placement):
    p = chain4.paths[0]
    assert path_length(p, chain4, chain_placement) == 11
    one = TimingPathSpec("q", ("a",), 1.0)
    assert path_length(one, chain4, chain_placement) == 0
    same = Placement({c: (2, 2, 0) for c in "abcd"}, (10, 10))
    assert path_length(p, chain4, same) == 0


def test_tier_crossings(chain4):
    pl = Placement({"a": (0, 0, 0), "b": (0, 0, 1), "c": (0, 0, 0), "d": (0, 0, 0)}, (1, 1), 2)
    assert tier_crossings(chain4.paths[0], pl) == 2


def test_placement_invariants():
    with pytest.raises(ValueError):
        Placement({"a": (11, 0, 0)}, (10, 10))
    with pytest.raises(ValueError):
        Placement({"a": (1, 0, 2)}, (10, 10), 2)
    with pytest.raises(ValueError):
        Placement({}, (0, 10))


def test_csr_consistent():
    nl = generate_synthetic(200, seed=3)
    net_ptr, net_pins, cell_ptr, cell_nets = nl.csr()
    assert net_ptr[-1] == sum(len(n.pins) for n in nl.nets) == cell_ptr[-1]
    for k in range(len(nl.nets)):
        for i in net_pins[net_ptr[k]:net_ptr[k + 1]]:
            assert k in cell_nets[cell_ptr[i]:cell_ptr[i + 1]]
    assert np.all(np.diff(net_ptr) >= 2)
