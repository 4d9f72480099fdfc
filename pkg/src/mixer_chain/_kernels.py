"""Compiled inner loops for the simulations.

Every kernel draws exactly one ``rng.random()`` per time step and maps it to a
generator index ``int(4 * u)`` in the order of :data:`algebra.GENERATORS`
(Move+1, Move-1, Swap+1, Swap-1).  The pure-Python reference in
:mod:`mixer_chain.chain` consumes the stream the same way, so both routes give
identical trajectories for a given ``np.random.Generator`` state.
"""

import numpy as np
from numba import njit

# checkpoint columns
C_T, C_S, C_X, C_COV, C_DLO, C_DHI, C_MIN, C_MAX = range(8)
N_COLS = 8


@njit(cache=True, nogil=True)
def _covering(s, perm, off, lo, hi):
    """Covering number of (s, perm) given supp(perm) lies in [lo, hi]."""
    a = lo
    while a <= hi and perm[a + off] == a:
        a += 1
    if a > hi:
        return 0
    b = hi
    while perm[b + off] == b:
        b -= 1
    if s < a:
        a = s
    if s > b:
        b = s
    left = s - a
    right = b - s
    return (b - a) + (left if left < right else right)


@njit(cache=True, nogil=True)
def run_mixer(rng, t_max, checkpoints, probes, visit_cap):
    """Simulate one mixer trajectory of ``t_max`` steps from the identity.

    ``checkpoints`` is sorted int64; ``probes`` are tile labels.  Returns
    ``(ckpt, visits, disp, visit_times, n_visits, perm)`` where ``ckpt`` has
    the ``C_*`` columns, ``visits[i, j]`` is V_t(probes[j]) and ``disp[i, j]``
    is sigma_t(z) - z at checkpoint ``i``; ``visit_times[j, :n_visits[j]]``
    are the visit times of tile ``probes[j]`` (truncated at ``visit_cap``);
    ``perm`` is the final permutation on sites ``-off .. off``.
    """
    off = t_max + 2
    size = 2 * off + 1
    perm = np.arange(-off, off + 1)
    inv = perm.copy()
    n_probe = probes.shape[0]
    probe_of = np.full(size, -1, np.int64)
    for j in range(n_probe):
        z = probes[j]
        if -off <= z <= off:
            probe_of[z + off] = j
    n_ck = checkpoints.shape[0]
    ckpt = np.zeros((n_ck, N_COLS), np.int64)
    visits = np.zeros((n_ck, n_probe), np.int64)
    disp = np.zeros((n_ck, n_probe), np.int64)
    visit_times = np.zeros((n_probe, visit_cap), np.int64)
    n_visits = np.zeros(n_probe, np.int64)
    v = np.zeros(n_probe, np.int64)

    s = 0
    x = 0
    m = 0
    mx = 0
    ci = 0
    t = 0
    while True:
        # visit bookkeeping for time t: tile sitting under the mixer
        j = probe_of[inv[s + off] + off]
        if j >= 0:
            v[j] += 1
            if n_visits[j] < visit_cap:
                visit_times[j, n_visits[j]] = t
                n_visits[j] += 1
        while ci < n_ck and checkpoints[ci] == t:
            cov = _covering(s, perm, off, m - 1, mx + 1)
            ckpt[ci, C_T] = t
            ckpt[ci, C_S] = s
            ckpt[ci, C_X] = x
            ckpt[ci, C_COV] = cov
            ckpt[ci, C_DLO] = (x + 1) // 2
            ckpt[ci, C_DHI] = 2 * cov + 5 * x
            ckpt[ci, C_MIN] = m
            ckpt[ci, C_MAX] = mx
            for jj in range(n_probe):
                visits[ci, jj] = v[jj]
                z = probes[jj]
                if -off <= z <= off:
                    disp[ci, jj] = perm[z + off] - z
            ci += 1
        if t == t_max:
            break
        r = int(rng.random() * 4.0)
        if r == 0:
            s += 1
            if s > mx:
                mx = s
        elif r == 1:
            s -= 1
            if s < m:
                m = s
        else:
            o = s + 1 if r == 2 else s - 1
            ta = inv[s + off]
            tb = inv[o + off]
            x -= abs(s - ta) + abs(o - tb)
            perm[ta + off] = o
            perm[tb + off] = s
            inv[o + off] = ta
            inv[s + off] = tb
            x += abs(o - ta) + abs(s - tb)
        t += 1
    return ckpt, visits, disp, visit_times, n_visits, perm


@njit(cache=True, nogil=True)
def first_return(rng, z, step_cap):
    """First time T >= 1 the mixer stands on tile ``z``; returns (T, sigma_T(z) - z).

    Only the mixer position and the location of tile ``z`` are tracked; that
    pair is itself a Markov chain.  Returns T = -1 when censored at ``step_cap``.
    """
    s = 0
    p = z
    for t in range(1, step_cap + 1):
        r = int(rng.random() * 4.0)
        if r == 0:
            s += 1
        elif r == 1:
            s -= 1
        else:
            o = s + 1 if r == 2 else s - 1
            if p == s:
                p = o
            elif p == o:
                p = s
        if s == p:
            return t, p - z
    return -1, p - z


@njit(cache=True, nogil=True)
def srw_local_times(rng, t_max, checkpoints, probes):
    """Simple random walk local times L_t(z) at each checkpoint (counting j = 0)."""
    n_ck = checkpoints.shape[0]
    n_probe = probes.shape[0]
    out = np.zeros((n_ck, n_probe), np.int64)
    counts = np.zeros(n_probe, np.int64)
    s = 0
    ci = 0
    t = 0
    while True:
        for j in range(n_probe):
            if probes[j] == s:
                counts[j] += 1
        while ci < n_ck and checkpoints[ci] == t:
            for j in range(n_probe):
                out[ci, j] = counts[j]
            ci += 1
        if t == t_max:
            break
        if rng.random() < 0.5:
            s += 1
        else:
            s -= 1
        t += 1
    return out
