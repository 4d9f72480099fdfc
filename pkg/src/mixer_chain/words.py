"""Generator-word synthesis and distance bounds for Z x| Sigma.

Every word here is read left to right as right-multiplication onto a start
element, so ``evaluate_word(w, start)`` is ``start * w[0] * w[1] * ...``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import (
    Cycle,
    MixerElement,
    MixerGenerator,
    Move,
    SitePermutation,
    Swap,
    cycle_decomposition,
    displacement_sum,
)


def _sign(x: int) -> int:
    return 1 if x > 0 else -1


def is_generator_simple_path(steps: list[int]) -> bool:
    """True when no suffix ``steps[l:]`` sums to zero (the path never closes up)."""
    total = 0
    for u in reversed(steps):
        if u not in (1, -1):
            raise ValueError(f"{u} is not a generator of Z")
        total += u
        if total == 0:
            return False
    return True


def path_transposition_word(steps: list[int]) -> list[MixerGenerator]:
    """Word for ``(0, <0, sum(steps)>)`` built along a generator simple path.

    The word is ``prod_{j<k} Swap(u_j) Move(u_j)``, then ``Swap(u_k)``, then
    ``prod_{j<k} Swap(-u_{k-j}) Move(-u_{k-j})``, of length ``4k - 3``.
    """
    if not steps:
        raise ValueError("empty path")
    if not is_generator_simple_path(steps):
        raise ValueError(f"{steps} is not a generator simple path")
    word: list[MixerGenerator] = []
    for u in steps[:-1]:
        word += [Swap(u), Move(u)]
    word.append(Swap(steps[-1]))
    for u in reversed(steps[:-1]):
        word += [Swap(-u), Move(-u)]
    return word


def transposition_word(h: int) -> list[MixerGenerator]:
    """Word of length ``4|h| - 3`` taking ``(0, id)`` to ``(0, <0, h>)``."""
    if h == 0:
        raise ValueError("no transposition of a site with itself")
    return path_transposition_word([_sign(h)] * abs(h))


def moves(src: int, dst: int) -> list[MixerGenerator]:
    if dst == src:
        return []
    return [Move(_sign(dst - src))] * abs(dst - src)


def cycle_word(g_start: int, c: Cycle) -> list[MixerGenerator]:
    """Word taking ``(g_start, tau)`` to ``(g_start, c o tau)``.

    The cycle ``<g_1,...,g_n>`` (listed from ``g_1 = g_start``) is the product
    ``<g_1,g_2> o <g_2,g_3> o ... o <g_{n-1},g_n>``.  Each letter block
    left-composes its transposition, so they are applied last-to-first: walk to
    ``g_{n-1}``, swap it with ``g_n``, step down to ``g_{n-2}``, and so on.
    """
    if g_start not in c.orbit:
        raise ValueError(f"start site {g_start} is not in the orbit of {c}")
    orbit = c.rotated_to(g_start).orbit
    n = len(orbit)
    word = moves(orbit[0], orbit[n - 2])
    for j in range(n - 2, -1, -1):
        word += transposition_word(orbit[j + 1] - orbit[j])
        if j > 0:
            word += moves(orbit[j], orbit[j - 1])
    return word


def cycle_word_bound(c: Cycle) -> int:
    """``5 * sum_j d(g_j, c(g_j))``."""
    o = c.orbit
    return 5 * sum(abs(o[(j + 1) % len(o)] - o[j]) for j in range(len(o)))


def _span(g: int, sigma: SitePermutation) -> tuple[int, int]:
    supp = sigma.support
    return min(supp | {g}), max(supp | {g})


def covering_number(g: int, sigma: SitePermutation) -> int:
    """Length of the shortest nearest-neighbour path from ``g`` visiting ``supp(sigma)``."""
    if sigma.is_identity():
        return 0
    a, b = _span(g, sigma)
    return (b - a) + min(g - a, b - g)


def covering_path(g: int, sigma: SitePermutation) -> list[int]:
    """A shortest covering path; sweeps left first on ties."""
    if sigma.is_identity():
        return [g]
    a, b = _span(g, sigma)
    if g - a <= b - g:
        return list(range(g, a - 1, -1)) + list(range(a + 1, b + 1))
    return list(range(g, b + 1)) + list(range(b - 1, a - 1, -1))


def upper_bound_word(g: int, sigma: SitePermutation) -> list[MixerGenerator]:
    """Word taking ``(g, id)`` to ``(g, sigma)`` of length at most
    ``2 * covering_number(g, sigma) + 5 * displacement_sum(sigma)``.

    Walks the covering path; at each site still moved by an unfinished cycle
    it builds that whole cycle in place, then walks straight back to ``g``.
    """
    pending: dict[int, Cycle] = {}
    for c in cycle_decomposition(sigma):
        for x in c.orbit:
            pending[x] = c
    word: list[MixerGenerator] = []
    here = g
    for site in covering_path(g, sigma):
        if not pending:
            break
        word += moves(here, site)
        here = site
        c = pending.get(site)
        if c is not None:
            word += cycle_word(site, c)
            for x in c.orbit:
                del pending[x]
    word += moves(here, g)
    return word


def upper_bound(g: int, sigma: SitePermutation) -> int:
    return 2 * covering_number(g, sigma) + 5 * displacement_sum(sigma)


def lower_bound(sigma: SitePermutation) -> int:
    """``ceil(displacement_sum(sigma) / 2)``; bounds the distance to any ``(g', id)``."""
    return (displacement_sum(sigma) + 1) // 2


@dataclass(frozen=True)
class DistanceBounds:
    lower: int
    upper: int
    witness: tuple[MixerGenerator, ...]

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")


def distance_bounds(e: MixerElement) -> DistanceBounds:
    """Bounds on the distance from ``(e.position, id)`` to ``e``."""
    w = upper_bound_word(e.position, e.perm)
    return DistanceBounds(lower_bound(e.perm), upper_bound(e.position, e.perm), tuple(w))
