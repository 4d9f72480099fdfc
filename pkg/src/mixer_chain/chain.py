"""The mixer chain on Z and its reference walks.

Randomness comes from :class:`numpy.random.Generator` (PCG64).  Trajectory
``i`` of an experiment seeded with ``seed`` uses
``default_rng(SeedSequence([seed, i]))``, so results never depend on how work
is split across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from .algebra import (
    GENERATORS,
    MixerElement,
    MixerGenerator,
    SitePermutation,
    apply_generator,
    invert_perm,
)

CHECKPOINT_COLUMNS = ("t", "S", "X", "cov", "d_lower", "d_upper", "m", "M")
DEFAULT_RETURN_CAP = 10**7


def trajectory_rng(seed: int, index: int = 0, stream: int = 0) -> np.random.Generator:
    """Independent stream for trajectory ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), stream, index]))


def draw_generator(rng: np.random.Generator) -> MixerGenerator:
    return GENERATORS[int(rng.random() * 4.0)]


# -- pure-Python reference chain -------------------------------------------


@dataclass(frozen=True)
class ChainState:
    """One state of the chain.  ``rng`` is shared by successive states."""

    time: int
    element: MixerElement
    inverse_perm: SitePermutation
    rng: np.random.Generator = field(repr=False, compare=False)

    @classmethod
    def start(cls, seed: int | np.random.Generator = 0) -> ChainState:
        rng = seed if isinstance(seed, np.random.Generator) else trajectory_rng(seed)
        e = MixerElement.identity()
        return cls(0, e, e.perm, rng)

    def tile_at(self, site: int) -> int:
        return self.inverse_perm(site)


def step_with(state: ChainState, u: MixerGenerator) -> ChainState:
    """Advance by a given generator (no randomness consumed)."""
    e = apply_generator(state.element, u)
    inv = state.inverse_perm
    if e.perm is not state.element.perm:
        # swap at (S, S+u): exchange the tiles sitting on those two sites
        s, o = e.position, e.position + u.direction
        m = inv.as_dict()
        ta, tb = m.get(s, s), m.get(o, o)
        for site, tile in ((s, tb), (o, ta)):
            if site == tile:
                m.pop(site, None)
            else:
                m[site] = tile
        inv = SitePermutation._trusted(m)
    return ChainState(state.time + 1, e, inv, state.rng)


def step(state: ChainState) -> ChainState:
    return step_with(state, draw_generator(state.rng))


def mirror(e: MixerElement) -> MixerElement:
    """``(S, sigma) -> (-S, sigma')`` with ``sigma'(z) = -sigma(-z)``."""
    return MixerElement(-e.position, SitePermutation._trusted({-x: -y for x, y in e.perm.items()}))


# -- compiled trajectories ---------------------------------------------------


@dataclass
class TrajectoryRecord:
    """Checkpointed observables of one mixer trajectory."""

    checkpoints: np.ndarray  # (n, 8), columns CHECKPOINT_COLUMNS
    probe_sites: tuple[int, ...]
    visit_counts: np.ndarray  # (n, n_probe): V_t(z)
    tile_displacement: np.ndarray  # (n, n_probe): sigma_t(z) - z
    return_times: dict[int, np.ndarray]
    return_times_truncated: dict[int, bool]
    seed: int
    index: int
    final_perm: SitePermutation | None = None

    def column(self, name: str) -> np.ndarray:
        return self.checkpoints[:, CHECKPOINT_COLUMNS.index(name)]

    def rows(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in r) for r in self.checkpoints]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrajectoryRecord):
            return NotImplemented
        return (
            self.probe_sites == other.probe_sites
            and np.array_equal(self.checkpoints, other.checkpoints)
            and np.array_equal(self.visit_counts, other.visit_counts)
            and np.array_equal(self.tile_displacement, other.tile_displacement)
            and self.return_times.keys() == other.return_times.keys()
            and all(np.array_equal(v, other.return_times[k]) for k, v in self.return_times.items())
            and self.final_perm == other.final_perm
        )


def _as_checkpoints(checkpoint_times: Iterable[int], t_max: int) -> np.ndarray:
    ck = np.unique(np.asarray(list(checkpoint_times), dtype=np.int64))
    if ck.size and (ck[0] < 0 or ck[-1] > t_max):
        raise ValueError(f"checkpoint times must lie in [0, {t_max}]")
    return ck


def run_trajectory(
    t_max: int,
    probe_sites: Iterable[int] = (),
    checkpoint_times: Iterable[int] | None = None,
    seed: int = 0,
    *,
    index: int = 0,
    visit_cap: int = 0,
    keep_perm: bool = False,
) -> TrajectoryRecord:
    """Run the chain for ``t_max`` steps, recording observables at checkpoints.

    ``checkpoint_times`` defaults to ``[t_max]``.  ``visit_cap`` bounds how many
    visit times per probe are kept (the counts themselves are exact).
    """
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    probes = tuple(dict.fromkeys(int(z) for z in probe_sites))
    ck = _as_checkpoints([t_max] if checkpoint_times is None else checkpoint_times, t_max)
    rng = trajectory_rng(seed, index)
    data, visits, disp, vt, nv, perm = K.run_mixer(
        rng, t_max, ck, np.asarray(probes, dtype=np.int64), visit_cap
    )
    returns = {z: vt[j, : nv[j]].copy() for j, z in enumerate(probes)} if visit_cap else {}
    truncated = {z: bool(visits[-1, j] > visit_cap) for j, z in enumerate(probes)} if visit_cap else {}
    final = None
    if keep_perm:
        off = t_max + 2
        moved = np.nonzero(perm != np.arange(-off, off + 1))[0]
        final = SitePermutation._trusted({int(i - off): int(perm[i]) for i in moved})
    return TrajectoryRecord(data, probes, visits, disp, returns, truncated, seed, index, final)


def reference_trajectory(
    t_max: int,
    probe_sites: Iterable[int] = (),
    checkpoint_times: Iterable[int] | None = None,
    seed: int = 0,
    *,
    index: int = 0,
) -> TrajectoryRecord:
    """Same contract as :func:`run_trajectory`, computed with the exact algebra.

    Slow; recomputes every checkpoint quantity from scratch.  Used as a test oracle.
    """
    from .words import covering_number, displacement_sum, lower_bound

    probes = tuple(dict.fromkeys(int(z) for z in probe_sites))
    ck = list(_as_checkpoints([t_max] if checkpoint_times is None else checkpoint_times, t_max))
    state = ChainState.start(trajectory_rng(seed, index))
    v = dict.fromkeys(probes, 0)
    times: dict[int, list[int]] = {z: [] for z in probes}
    rows, vis, disp = [], [], []
    m = mx = 0
    while True:
        t, e = state.time, state.element
        here = state.tile_at(e.position)
        if here in v:
            v[here] += 1
            times[here].append(t)
        while ck and ck[0] == t:
            ck.pop(0)
            x = displacement_sum(e.perm)
            cov = covering_number(e.position, e.perm)
            rows.append((t, e.position, x, cov, lower_bound(e.perm), 2 * cov + 5 * x, m, mx))
            vis.append([v[z] for z in probes])
            disp.append([e.perm(z) - z for z in probes])
        if t == t_max:
            break
        state = step(state)
        m, mx = min(m, state.element.position), max(mx, state.element.position)
    n = len(probes)
    return TrajectoryRecord(
        np.array(rows, dtype=np.int64).reshape(-1, 8),
        probes,
        np.array(vis, dtype=np.int64).reshape(-1, n),
        np.array(disp, dtype=np.int64).reshape(-1, n),
        {z: np.array(times[z], dtype=np.int64) for z in probes},
        {z: False for z in probes},
        seed,
        index,
        state.element.perm,
    )


# -- reference processes -----------------------------------------------------


def lazy_walk(t_max: int, seed: int = 0, *, index: int = 0) -> np.ndarray:
    """Lazy walk ``W_0..W_t_max``: steps +1, -1 w.p. 1/4 each, 0 w.p. 1/2."""
    u = trajectory_rng(seed, index, stream=1).random(t_max)
    inc = np.where(u < 0.25, 1, np.where(u < 0.5, -1, 0))
    return np.concatenate(([0], np.cumsum(inc))).astype(np.int64)


@dataclass
class SimpleWalkHistory:
    path: np.ndarray  # S'_0 .. S'_t
    probe_sites: tuple[int, ...]

    @property
    def t_max(self) -> int:
        return len(self.path) - 1

    def local_time(self, z: int, t: int | None = None) -> int:
        """``L_t(z)``, the number of ``0 <= j <= t`` with ``S'_j = z``."""
        t = self.t_max if t is None else t
        return int(np.count_nonzero(self.path[: t + 1] == z))

    def local_time_counters(self, t: int | None = None) -> dict[int, int]:
        return {z: self.local_time(z, t) for z in self.probe_sites}


def simple_walk_local_times(
    t_max: int, probe_sites: Iterable[int] = (), seed: int = 0, *, index: int = 0
) -> SimpleWalkHistory:
    u = trajectory_rng(seed, index, stream=2).random(t_max)
    inc = np.where(u < 0.5, 1, -1)
    path = np.concatenate(([0], np.cumsum(inc))).astype(np.int64)
    return SimpleWalkHistory(path, tuple(int(z) for z in probe_sites))


def simple_walk_local_time_table(
    t_max: int, probe_sites: Sequence[int], checkpoint_times: Sequence[int], seed: int, index: int
) -> np.ndarray:
    """Compiled local-time counters, shape ``(len(checkpoints), len(probes))``.

    Consumes the same stream as :func:`simple_walk_local_times`.
    """
    ck = _as_checkpoints(checkpoint_times, t_max)
    return K.srw_local_times(
        trajectory_rng(seed, index, stream=2), t_max, ck, np.asarray(probe_sites, dtype=np.int64)
    )


@dataclass
class ReturnSamples:
    z: int
    times: np.ndarray  # T_1(z); -1 where censored
    displacement: np.ndarray  # sigma_T(z) - z
    step_cap: int

    @property
    def censored(self) -> np.ndarray:
        return self.times < 0

    def pairs(self) -> list[tuple[int | None, int]]:
        return [(None if t < 0 else int(t), int(d)) for t, d in zip(self.times, self.displacement)]


def return_time_sample(z: int, seed: int, index: int, step_cap: int = DEFAULT_RETURN_CAP) -> tuple[int, int]:
    return K.first_return(trajectory_rng(seed, index, stream=3), z, step_cap)


def return_time_samples(
    z: int,
    n_samples: int,
    seed: int = 0,
    *,
    step_cap: int = DEFAULT_RETURN_CAP,
    start_index: int = 0,
) -> ReturnSamples:
    """First return of the mixer to tile ``z`` and the tile's displacement then."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    times = np.empty(n_samples, np.int64)
    disp = np.empty(n_samples, np.int64)
    for i in range(n_samples):
        times[i], disp[i] = return_time_sample(z, seed, start_index + i, step_cap)
    return ReturnSamples(z, times, disp, step_cap)


def inverse_consistent(state: ChainState) -> bool:
    return invert_perm(state.element.perm) == state.inverse_perm
