import numpy as np
import pytest

import oracles
from stack3d.netlist import Cell, Net, Netlist, generate_synthetic, parse_netlist
from stack3d.partition import (
    FMPartitioner, InfeasibleBalanceError, area_fractions, cut_size, fm_bipartition,
)


def to_netlist(cells, nets):
    return Netlist(tuple(Cell(c, a, 0.0) for c, a in cells),
                   tuple(Net(f"n{k}", pins) for k, pins in enumerate(nets)))


def test_chain_optimal(chain4):
    a = fm_bipartition(chain4)
    assert a.cut_nets == 1
    assert {a.tier_of["a"], a.tier_of["b"]} == {a.tier_of["a"]}
    assert a.balance == (0.5, 0.5)


def test_k4_optimal(k4):
    assert fm_bipartition(k4).cut_nets == 4


def test_random_small_vs_brute_force():
    rng = np.random.default_rng(2024)
    done = 0
    while done < 100:
        cells, nets = oracles.random_small_netlist(rng)
        opt = oracles.brute_force_cut(cells, nets, 0.05)
        if opt is None:
            continue
        got = fm_bipartition(to_netlist(cells, nets), 0.05, seed=done)
        fr = got.balance[0]
        assert 0.45 - 1e-12 <= fr <= 0.55 + 1e-12
        assert got.cut_nets == cut_size(to_netlist(cells, nets), got.tier_of)
        assert got.cut_nets >= opt
        assert got.cut_nets <= 1.5 * opt if opt else got.cut_nets == 0
        done += 1


def test_balance_and_improvement_on_synthetic():
    nl = generate_synthetic(500, seed=3)
    fm = FMPartitioner(balance_tol=0.05, random_state=3).fit(nl)
    fr = area_fractions(nl, fm.assignment_.tier_of, 2)
    assert abs(fr[0] - 0.5) <= 0.05 + 1e-12
    assert fm.cut_ < fm.initial_cut_
    for hist in fm.pass_cuts_:
        # each pass keeps the best prefix, so cuts never rise
        assert all(b <= a for a, b in zip(hist, hist[1:]))
        assert all(type(h) is int for h in hist)


def test_deterministic():
    nl = generate_synthetic(300, seed=5)
    a = fm_bipartition(nl, seed=9)
    b = fm_bipartition(nl, seed=9)
    assert a == b


def test_infeasible_balance():
    nl = parse_netlist("cell big 10 0\ncell a 1 0\ncell b 1 0\nnet n big a b")
    with pytest.raises(InfeasibleBalanceError):
        fm_bipartition(nl)


def test_fixed_cells_stay():
    text = ("cell io 1.0 0.0 fixed 0 0 1\ncell a 1 0\ncell b 1 0\ncell c 1 0\n"
            "net n1 io a\nnet n2 a b\nnet n3 b c\n")
    a = fm_bipartition(parse_netlist(text))
    assert a.tier_of["io"] == 1


def test_estimator_api(chain4):
    est = FMPartitioner(balance_tol=0.1, n_starts=2)
    assert est.get_params()["balance_tol"] == 0.1
    labels = est.fit_predict(chain4)
    assert labels.shape == (4,) and set(labels) == {0, 1}
    with pytest.raises(ValueError):
        FMPartitioner(balance_tol=0.7).fit(chain4)
    with pytest.raises(TypeError):
        FMPartitioner(random_state=None).fit(chain4)
