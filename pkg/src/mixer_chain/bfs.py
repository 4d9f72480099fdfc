"""Exact word-length distances by breadth-first search of the Cayley graph."""

from __future__ import annotations

import os

from .algebra import GENERATORS, MixerElement, apply_generator, canonical_key

SAFETY_RADIUS = 12
DEFAULT_NODE_BUDGET = 10**7
NODE_BUDGET_ENV = "MIXER_CHAIN_BFS_NODE_BUDGET"

BEYOND_CAP = None


class BFSResourceError(RuntimeError):
    """The search would exceed its state budget or the radius safety limit."""


def node_budget() -> int:
    raw = os.environ.get(NODE_BUDGET_ENV)
    if raw is None:
        return DEFAULT_NODE_BUDGET
    try:
        budget = int(raw)
    except ValueError:
        raise BFSResourceError(f"{NODE_BUDGET_ENV}={raw!r} is not an integer") from None
    if budget < 1:
        raise BFSResourceError(f"{NODE_BUDGET_ENV} must be positive")
    return budget


def _check_radius(radius: int, safety_radius: int) -> None:
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if radius > safety_radius:
        raise BFSResourceError(f"radius {radius} exceeds the safety limit {safety_radius}")


def _layers(radius: int, budget: int):
    """Yield ``(distance, {key: element})`` shells of the ball, innermost first."""
    e = MixerElement.identity()
    seen = {canonical_key(e)}
    frontier = {canonical_key(e): e}
    yield 0, frontier
    for d in range(1, radius + 1):
        nxt: dict[bytes, MixerElement] = {}
        for a in frontier.values():
            for u in GENERATORS:
                b = apply_generator(a, u)
                k = canonical_key(b)
                if k not in seen:
                    seen.add(k)
                    nxt[k] = b
                    if len(seen) > budget:
                        raise BFSResourceError(
                            f"ball of radius {d} holds more than {budget} states"
                        )
        if not nxt:
            return
        frontier = nxt
        yield d, frontier


def bfs_distance(
    target: MixerElement,
    radius_cap: int = SAFETY_RADIUS,
    *,
    safety_radius: int = SAFETY_RADIUS,
    budget: int | None = None,
) -> int | None:
    """Exact distance from the identity to ``target``, or ``None`` beyond ``radius_cap``."""
    _check_radius(radius_cap, safety_radius)
    key = canonical_key(target)
    for d, shell in _layers(radius_cap, node_budget() if budget is None else budget):
        if key in shell:
            return d
    return BEYOND_CAP


def bfs_ball(
    radius: int,
    *,
    safety_radius: int = SAFETY_RADIUS,
    budget: int | None = None,
) -> dict[bytes, int]:
    """Map every element within ``radius`` (by canonical key) to its exact distance."""
    _check_radius(radius, safety_radius)
    out: dict[bytes, int] = {}
    for d, shell in _layers(radius, node_budget() if budget is None else budget):
        for k in shell:
            out[k] = d
    return out


def bfs_ball_elements(
    radius: int,
    *,
    safety_radius: int = SAFETY_RADIUS,
    budget: int | None = None,
) -> list[tuple[MixerElement, int]]:
    """Like :func:`bfs_ball` but keeps the decoded elements, in BFS order."""
    _check_radius(radius, safety_radius)
    out = []
    for d, shell in _layers(radius, node_budget() if budget is None else budget):
        out.extend((e, d) for e in shell.values())
    return out
