"""Numba kernel for slot-grid simulated annealing across tiers."""

import numpy as np
from numba import njit


@njit(cache=True)
def _net_cost(k, net_ptr, net_pins, x, y, tier, via_penalty):
    s, e = net_ptr[k], net_ptr[k + 1]
    if e - s < 2:
        return 0.0
    p = net_pins[s]
    x0 = x1 = x[p]
    y0 = y1 = y[p]
    t0 = t1 = tier[p]
    # min/max rather than branches: the pin scan is the hot loop
    for j in range(s + 1, e):
        p = net_pins[j]
        xp = x[p]
        yp = y[p]
        tp = tier[p]
        x0 = min(x0, xp)
        x1 = max(x1, xp)
        y0 = min(y0, yp)
        y1 = max(y1, yp)
        t0 = min(t0, tp)
        t1 = max(t1, tp)
    return (x1 - x0) + (y1 - y0) + via_penalty * (t1 - t0)


@njit(cache=True)
def all_net_costs(net_ptr, net_pins, x, y, tier, via_penalty):
    m = net_ptr.shape[0] - 1
    out = np.empty(m)
    for k in range(m):
        out[k] = _net_cost(k, net_ptr, net_pins, x, y, tier, via_penalty)
    return out


@njit(cache=True)
def _propose(movable, slot_of, n_cols, n_rows, n_tiers, window, cross_prob):
    c = movable[np.random.randint(0, movable.shape[0])]
    s = slot_of[c]
    per_tier = n_cols * n_rows
    t = s // per_tier
    r = (s % per_tier) // n_cols
    col = s % n_cols
    nt = t
    if n_tiers > 1 and np.random.random() < cross_prob:
        nt = np.random.randint(0, n_tiers - 1)
        if nt >= t:
            nt += 1
    nc = col + np.random.randint(-window, window + 1)
    nr = r + np.random.randint(-window, window + 1)
    nc = min(max(nc, 0), n_cols - 1)
    nr = min(max(nr, 0), n_rows - 1)
    return c, nt * per_tier + nr * n_cols + nc


@njit(cache=True)
def _try_move(c, target, slot_of, occ, slot_x, slot_y, per_tier, x, y, tier, area,
              tier_area, band_lo, band_hi, net_ptr, net_pins, cell_ptr, cell_nets,
              net_cost, stamp, stamp_id, touched, new_cost, via_penalty):
    """Apply the move tentatively. Returns (feasible, delta, d, n_touched)."""
    src = slot_of[c]
    d = occ[target]
    ts = src // per_tier
    tt = target // per_tier
    if ts != tt:
        da = area[c] - (area[d] if d >= 0 else 0.0)
        a_s = tier_area[ts] - da
        a_t = tier_area[tt] + da
        if a_s < band_lo or a_s > band_hi or a_t < band_lo or a_t > band_hi:
            return False, 0.0, d, 0
    # tentative apply
    x[c] = slot_x[target]
    y[c] = slot_y[target]
    tier[c] = tt
    if d >= 0:
        x[d] = slot_x[src]
        y[d] = slot_y[src]
        tier[d] = ts
    nt = 0
    for j in range(cell_ptr[c], cell_ptr[c + 1]):
        k = cell_nets[j]
        if stamp[k] != stamp_id:
            stamp[k] = stamp_id
            touched[nt] = k
            nt += 1
    if d >= 0:
        for j in range(cell_ptr[d], cell_ptr[d + 1]):
            k = cell_nets[j]
            if stamp[k] != stamp_id:
                stamp[k] = stamp_id
                touched[nt] = k
                nt += 1
    delta = 0.0
    for i in range(nt):
        k = touched[i]
        v = _net_cost(k, net_ptr, net_pins, x, y, tier, via_penalty)
        new_cost[i] = v
        delta += v - net_cost[k]
    return True, delta, d, nt


@njit(cache=True)
def _revert(c, d, src, slot_x, slot_y, per_tier, target, x, y, tier):
    x[c] = slot_x[src]
    y[c] = slot_y[src]
    tier[c] = src // per_tier
    if d >= 0:
        x[d] = slot_x[target]
        y[d] = slot_y[target]
        tier[d] = target // per_tier


@njit(cache=True)
def _commit(c, d, src, target, slot_of, occ, area, tier_area, per_tier, touched, nt,
            new_cost, net_cost):
    ts = src // per_tier
    tt = target // per_tier
    if ts != tt:
        da = area[c] - (area[d] if d >= 0 else 0.0)
        tier_area[ts] -= da
        tier_area[tt] += da
    occ[target] = c
    occ[src] = d
    slot_of[c] = target
    if d >= 0:
        slot_of[d] = src
    for i in range(nt):
        net_cost[touched[i]] = new_cost[i]


@njit(cache=True)
def anneal(seed, movable, slot_of, occ, slot_x, slot_y, n_cols, n_rows, n_tiers,
           x, y, tier, area, tier_area, band_lo, band_hi,
           net_ptr, net_pins, cell_ptr, cell_nets, via_penalty,
           t0, cooling, moves_per_temp, stop_accept, max_temps, cross_prob,
           record_moves, log_cap):
    """Anneal in place; the best state seen at a temperature boundary is restored.

    Returns ``(initial_cost, best_cost, temps, cur_trace, best_trace,
    log, n_log)``; the log holds accepted cross-tier moves as
    ``(cell, from_tier, to_tier, partner)``.
    """
    np.random.seed(seed)
    per_tier = n_cols * n_rows
    m = net_ptr.shape[0] - 1
    net_cost = all_net_costs(net_ptr, net_pins, x, y, tier, via_penalty)
    cost = net_cost.sum()
    initial = cost
    stamp = np.zeros(m, dtype=np.int64)
    max_deg = 0
    for i in range(cell_ptr.shape[0] - 1):
        deg = cell_ptr[i + 1] - cell_ptr[i]
        if deg > max_deg:
            max_deg = deg
    touched = np.empty(2 * max_deg + 1, dtype=np.int64)
    new_cost = np.empty(2 * max_deg + 1)
    stamp_id = 0

    cur_trace = np.empty(max_temps + 1)
    best_trace = np.empty(max_temps + 1)
    log = np.empty((log_cap if record_moves else 0, 4), dtype=np.int64)
    n_log = 0
    cur_trace[0] = cost
    best_trace[0] = cost
    if movable.shape[0] == 0 or m == 0 or per_tier * n_tiers <= 1:
        return initial, cost, 0, cur_trace[:1], best_trace[:1], log[:0], 0

    window = max(n_cols, n_rows)
    # initial temperature: ~80% acceptance of uphill moves
    if t0 <= 0.0:
        n_probe = min(2000, 20 * movable.shape[0])
        up_sum = 0.0
        up_n = 0
        for _ in range(n_probe):
            c, target = _propose(movable, slot_of, n_cols, n_rows, n_tiers, window, cross_prob)
            src = slot_of[c]
            if target == src:
                continue
            stamp_id += 1
            ok, delta, d, nt = _try_move(c, target, slot_of, occ, slot_x, slot_y, per_tier,
                                         x, y, tier, area, tier_area, band_lo, band_hi,
                                         net_ptr, net_pins, cell_ptr, cell_nets, net_cost,
                                         stamp, stamp_id, touched, new_cost, via_penalty)
            if not ok:
                continue
            _revert(c, d, src, slot_x, slot_y, per_tier, target, x, y, tier)
            if delta > 0:
                up_sum += delta
                up_n += 1
        if up_n == 0:
            return initial, cost, 0, cur_trace[:1], best_trace[:1], log[:0], 0
        t0 = -(up_sum / up_n) / np.log(0.8)

    best = cost
    best_x = x.copy()
    best_y = y.copy()
    best_tier = tier.copy()
    best_slot = slot_of.copy()
    best_area = tier_area.copy()
    temp = t0
    n_temps = 0
    for it in range(max_temps):
        accepted = 0
        for _ in range(moves_per_temp):
            c, target = _propose(movable, slot_of, n_cols, n_rows, n_tiers, window, cross_prob)
            src = slot_of[c]
            if target == src:
                continue
            stamp_id += 1
            ok, delta, d, nt = _try_move(c, target, slot_of, occ, slot_x, slot_y, per_tier,
                                         x, y, tier, area, tier_area, band_lo, band_hi,
                                         net_ptr, net_pins, cell_ptr, cell_nets, net_cost,
                                         stamp, stamp_id, touched, new_cost, via_penalty)
            if not ok:
                continue
            if delta <= 0.0 or np.random.random() < np.exp(-delta / temp):
                _commit(c, d, src, target, slot_of, occ, area, tier_area, per_tier,
                        touched, nt, new_cost, net_cost)
                cost += delta
                # zero-cost shuffles into empty slots do not count toward convergence
                if delta != 0.0:
                    accepted += 1
                if record_moves and src // per_tier != target // per_tier and n_log < log_cap:
                    log[n_log, 0] = c
                    log[n_log, 1] = src // per_tier
                    log[n_log, 2] = target // per_tier
                    log[n_log, 3] = d
                    n_log += 1
            else:
                _revert(c, d, src, slot_x, slot_y, per_tier, target, x, y, tier)
        cost = net_cost.sum()
        n_temps += 1
        if cost < best:
            best = cost
            best_x[:] = x
            best_y[:] = y
            best_tier[:] = tier
            best_slot[:] = slot_of
            best_area[:] = tier_area
        cur_trace[n_temps] = cost
        best_trace[n_temps] = best
        rate = accepted / moves_per_temp
        # range limiter keeps acceptance near 0.44
        window = int(window * (1.0 - 0.44 + rate))
        window = min(max(window, 1), max(n_cols, n_rows))
        temp *= cooling
        if rate < stop_accept:
            break

    x[:] = best_x
    y[:] = best_y
    tier[:] = best_tier
    slot_of[:] = best_slot
    tier_area[:] = best_area
    occ[:] = -1
    for c in range(slot_of.shape[0]):
        if slot_of[c] >= 0:
            occ[slot_of[c]] = c
    return initial, best, n_temps, cur_trace[:n_temps + 1], best_trace[:n_temps + 1], log[:n_log], n_log
