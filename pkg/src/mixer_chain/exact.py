"""Exact visit-count tail laws by first-passage dynamic programming.

``V_t(z)`` counts visits of the relative walk ``M_t = S_t - sigma_t(z) + z``
to ``z``.  That walk is simple at ``z``, steps toward ``z`` with probability
1/2 when adjacent (1/4 stay, 1/4 away), and is lazy elsewhere.  Counts of
visits are renewal processes, so ``P[count >= k]`` is the probability that the
first passage plus ``k - 1`` i.i.d. excursions fit in the time horizon.
"""

from __future__ import annotations

import numpy as np


def _mixer_steps(y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(down, stay, up) probabilities of the relative walk at offset ``y`` from the tile."""
    down = np.full(y.shape, 0.25)
    stay = np.full(y.shape, 0.5)
    up = np.full(y.shape, 0.25)
    down[y == 0] = up[y == 0] = 0.5
    stay[y == 0] = 0.0
    down[y == 1], stay[y == 1], up[y == 1] = 0.5, 0.25, 0.25
    down[y == -1], stay[y == -1], up[y == -1] = 0.25, 0.25, 0.5
    return down, stay, up


def _srw_steps(y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    half = np.full(y.shape, 0.5)
    return half, np.zeros(y.shape), half


def first_passage(steps, start: int, horizon: int) -> np.ndarray:
    """``f[n] = P(first hit of 0 at time n)`` for a nearest-neighbour chain from ``start``."""
    f = np.zeros(horizon + 1)
    if start == 0:
        f[0] = 1.0
        return f
    r = horizon + abs(start) + 1
    y = np.arange(-r, r + 1)
    down, stay, up = steps(y)
    zero = r
    dist = np.zeros(y.shape)
    dist[start + r] = 1.0
    for n in range(1, horizon + 1):
        new = stay * dist
        new[:-1] += down[1:] * dist[1:]
        new[1:] += up[:-1] * dist[:-1]
        f[n] = new[zero]
        new[zero] = 0.0
        dist = new
    return f


def _renewal_tails(first: np.ndarray, excursion: np.ndarray, horizon: int, k_max: int) -> np.ndarray:
    n = 1
    while n < 2 * (horizon + 1):
        n *= 2
    exc_hat = np.fft.rfft(excursion[: horizon + 1], n)
    cur = first[: horizon + 1].copy()
    out = np.empty(k_max)
    for k in range(k_max):
        out[k] = cur.sum()
        cur = np.clip(np.fft.irfft(np.fft.rfft(cur, n) * exc_hat, n)[: horizon + 1], 0.0, None)
    return np.clip(out, 0.0, 1.0)


def mixer_visit_tails(z: int, t: int, k_max: int) -> np.ndarray:
    """``out[k-1] = P[V_t(z) >= k]`` for ``k = 1..k_max``."""
    first = first_passage(_mixer_steps, -z, t)
    back = first_passage(_mixer_steps, 1, t)
    excursion = np.concatenate(([0.0], back[:-1]))
    return _renewal_tails(first, excursion, t, k_max)


def srw_local_time_tails(x: int, n: int, k_max: int) -> np.ndarray:
    """``out[k-1] = P[L_n(x) >= k]`` for simple random walk from 0."""
    first = first_passage(_srw_steps, -x, n)
    back = first_passage(_srw_steps, 1, n)
    excursion = np.concatenate(([0.0], back[:-1]))
    return _renewal_tails(first, excursion, n, k_max)


def expected_sqrt(tails: np.ndarray) -> float:
    """``E[sqrt(N)]`` from ``P[N >= k]``, ``k = 1..``; exact when the tail list is complete."""
    k = np.arange(1, len(tails) + 1)
    return float(np.dot(np.sqrt(k) - np.sqrt(k - 1), tails))
