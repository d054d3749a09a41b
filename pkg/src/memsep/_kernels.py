"""Hot loops of the event-driven simulation, compiled with numba.

Events are consumed from pre-drawn arrays so that all randomness stays in the
counter-based numpy streams owned by the caller; the kernels are pure
sequential state updates.  Bond selection maps one 64-bit draw to an alias
table slot: the high bits pick the slot by a fixed-point multiply (exact to
one part in 2^64) and the low 32 bits form the acceptance fraction.
"""

import numpy as np
from numba import njit

_LOW32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)
_INV32 = 1.0 / 4294967296.0


@njit(inline="always")
def _slot_from_draw(r, n):
    # floor(r * n / 2^64) for n < 2^31, via 32-bit limbs
    hi = r >> _SH32
    lo = r & _LOW32
    return np.int64((hi * n + ((lo * n) >> _SH32)) >> _SH32)


@njit(cache=True, nogil=True)
def apply_events(eta, bond_a, bond_b, prob, alias, draws):
    """Apply a batch of exchange events to the occupation field in place."""
    n = np.uint64(prob.shape[0])
    for k in range(draws.shape[0]):
        r = draws[k]
        slot = _slot_from_draw(r, n)
        if np.float64(r & _LOW32) * _INV32 >= prob[slot]:
            slot = alias[slot]
        x = bond_a[slot]
        y = bond_b[slot]
        tmp = eta[x]
        eta[x] = eta[y]
        eta[y] = tmp


@njit(cache=True, nogil=True)
def apply_events_timed(eta, bond_a, bond_b, prob, alias, draws, times,
                       t_lo, t_hi, weights, integrals, bonds_out):
    """Time-resolved variant: also accumulates, for each weight row w_i,
    the integral of f_i(eta_s) = sum_x w_i[x] eta_s(x) over [t_lo, t_hi],
    and records the selected bond ids.

    ``weights`` has shape (n_obs, n_sites); ``integrals`` (n_obs,) is
    updated in place; ``bonds_out`` must have the same length as draws.
    """
    n = np.uint64(prob.shape[0])
    n_obs = weights.shape[0]
    f = np.zeros(n_obs)
    for i in range(n_obs):
        acc = 0.0
        for x in range(eta.shape[0]):
            if eta[x]:
                acc += weights[i, x]
        f[i] = acc
    t_prev = t_lo
    for k in range(draws.shape[0]):
        t = times[k]
        for i in range(n_obs):
            integrals[i] += f[i] * (t - t_prev)
        t_prev = t
        r = draws[k]
        slot = _slot_from_draw(r, n)
        if np.float64(r & _LOW32) * _INV32 >= prob[slot]:
            slot = alias[slot]
        bonds_out[k] = slot
        x = bond_a[slot]
        y = bond_b[slot]
        ex = eta[x]
        ey = eta[y]
        if ex != ey:
            diff = np.float64(ey) - np.float64(ex)
            for i in range(n_obs):
                f[i] += (weights[i, x] - weights[i, y]) * diff
            eta[x] = ey
            eta[y] = ex
    for i in range(n_obs):
        integrals[i] += f[i] * (t_hi - t_prev)


@njit(cache=True, nogil=True)
def replay_quadratic_variation(eta, bond_a, bond_b, bond_w, inc_ptr, inc_idx,
                               bonds, times, t_end):
    """Integral over [0, t_end] of g(eta_s) = sum_b w_b (eta(a_b)-eta(b_b))^2
    along a logged trajectory, updating g incrementally at each exchange."""
    g = 0.0
    for b in range(bond_a.shape[0]):
        if eta[bond_a[b]] != eta[bond_b[b]]:
            g += bond_w[b]
    total = 0.0
    t_prev = 0.0
    for k in range(bonds.shape[0]):
        t = times[k]
        total += g * (t - t_prev)
        t_prev = t
        b0 = bonds[k]
        x = bond_a[b0]
        y = bond_b[b0]
        ex = eta[x]
        ey = eta[y]
        if ex != ey:
            for p in range(inc_ptr[x], inc_ptr[x + 1]):
                c = inc_idx[p]
                if eta[bond_a[c]] != eta[bond_b[c]]:
                    g -= bond_w[c]
            for p in range(inc_ptr[y], inc_ptr[y + 1]):
                c = inc_idx[p]
                if eta[bond_a[c]] != eta[bond_b[c]]:
                    g -= bond_w[c]
            eta[x] = ey
            eta[y] = ex
            for p in range(inc_ptr[x], inc_ptr[x + 1]):
                c = inc_idx[p]
                if eta[bond_a[c]] != eta[bond_b[c]]:
                    g += bond_w[c]
            for p in range(inc_ptr[y], inc_ptr[y + 1]):
                c = inc_idx[p]
                if eta[bond_a[c]] != eta[bond_b[c]]:
                    g += bond_w[c]
    total += g * (t_end - t_prev)
    return total
