"""Finite-support permutations of Z and the semidirect product Z x| Sigma.

Composition convention, fixed for the whole package::

    compose(sigma, tau)(x) == sigma(tau(x))

A chain state ``(g, sigma)`` places the tile marked ``x`` on site ``sigma(x)``
and the mixer on site ``g``.  Multiplication is

    (g, sigma) * (h, tau) = (g + h, (g tau g^-1) o sigma)

where ``g tau g^-1`` is the translate ``x -> g + tau(x - g)``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping, Sequence

SITE_MIN = -(2**63)
SITE_MAX = 2**63 - 1

_PACK = struct.Struct(">q")


def check_site(x: int) -> int:
    """Return ``x`` unchanged, raising ``OverflowError`` outside int64 range."""
    if not SITE_MIN <= x <= SITE_MAX:
        raise OverflowError(f"site {x} outside the signed 64-bit range")
    return x


class SitePermutation:
    """A bijection of Z that moves finitely many sites.

    Only the moved sites are stored, so ``perm[x] == x`` for every ``x`` not in
    :attr:`support`.  Instances are immutable and hashable.
    """

    __slots__ = ("_map", "_hash")

    def __init__(self, mapping: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        m: dict[int, int] = {}
        for x, y in items:
            x, y = check_site(int(x)), check_site(int(y))
            if x in m:
                raise ValueError(f"site {x} mapped twice")
            if x != y:
                m[x] = y
        if set(m.values()) != m.keys():
            raise ValueError("mapping is not a bijection of its support")
        object.__setattr__(self, "_map", m)
        object.__setattr__(self, "_hash", None)

    @classmethod
    def _trusted(cls, m: dict[int, int]) -> SitePermutation:
        # caller guarantees bijectivity and minimal support
        obj = cls.__new__(cls)
        object.__setattr__(obj, "_map", m)
        object.__setattr__(obj, "_hash", None)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("SitePermutation is immutable")

    @classmethod
    def identity(cls) -> SitePermutation:
        return _IDENTITY

    @classmethod
    def transposition(cls, a: int, b: int) -> SitePermutation:
        if a == b:
            raise ValueError("a transposition needs two distinct sites")
        return cls._trusted({check_site(a): check_site(b), b: a})

    @classmethod
    def cycle(cls, *orbit: int) -> SitePermutation:
        """The cyclic permutation ``orbit[0] -> orbit[1] -> ... -> orbit[0]``."""
        return Cycle(tuple(orbit)).as_permutation()

    def __call__(self, x: int) -> int:
        return self._map.get(x, x)

    def __getitem__(self, x: int) -> int:
        return self._map.get(x, x)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self._map)

    def items(self) -> Iterator[tuple[int, int]]:
        """Moved ``(site, image)`` pairs sorted by site."""
        for x in sorted(self._map):
            yield x, self._map[x]

    def as_dict(self) -> dict[int, int]:
        return dict(self._map)

    def is_identity(self) -> bool:
        return not self._map

    def __len__(self) -> int:
        return len(self._map)

    def __bool__(self) -> bool:
        return bool(self._map)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SitePermutation):
            return NotImplemented
        return self._map == other._map

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash(frozenset(self._map.items()))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self) -> str:
        if not self._map:
            return "id"
        return "".join(repr(c) for c in cycle_decomposition(self))

    def __reduce__(self):
        return (SitePermutation, (tuple(self._map.items()),))


_IDENTITY = SitePermutation._trusted({})


@dataclass(frozen=True)
class Cycle:
    """Cyclic permutation ``<g_1, ..., g_n>`` sending ``g_j`` to ``g_{j+1}``."""

    orbit: tuple[int, ...]

    def __post_init__(self):
        if len(self.orbit) < 2:
            raise ValueError("a cycle needs at least two sites")
        if len(set(self.orbit)) != len(self.orbit):
            raise ValueError(f"repeated site in cycle {self.orbit}")

    def __len__(self) -> int:
        return len(self.orbit)

    def __call__(self, x: int) -> int:
        try:
            i = self.orbit.index(x)
        except ValueError:
            return x
        return self.orbit[(i + 1) % len(self.orbit)]

    def rotated_to(self, start: int) -> Cycle:
        """Same cycle, listed from ``start``."""
        i = self.orbit.index(start)
        return Cycle(self.orbit[i:] + self.orbit[:i])

    def as_permutation(self) -> SitePermutation:
        n = len(self.orbit)
        return SitePermutation(
            (self.orbit[j], self.orbit[(j + 1) % n]) for j in range(n)
        )

    def __repr__(self) -> str:
        return "<" + ",".join(map(str, self.orbit)) + ">"


def compose(sigma: SitePermutation, tau: SitePermutation) -> SitePermutation:
    """``sigma o tau``, i.e. apply ``tau`` first."""
    if not tau._map:
        return sigma
    if not sigma._map:
        return tau
    s, t = sigma._map, tau._map
    out: dict[int, int] = {}
    for x in t.keys() | s.keys():
        y = t.get(x, x)
        y = s.get(y, y)
        if y != x:
            out[x] = y
    return SitePermutation._trusted(out)


def invert_perm(sigma: SitePermutation) -> SitePermutation:
    return SitePermutation._trusted({y: x for x, y in sigma._map.items()})


def conjugate_by_translation(g: int, sigma: SitePermutation) -> SitePermutation:
    """The permutation ``x -> g + sigma(x - g)``."""
    if g == 0 or not sigma._map:
        return sigma
    return SitePermutation._trusted(
        {check_site(x + g): check_site(y + g) for x, y in sigma._map.items()}
    )


def displacement_sum(sigma: SitePermutation) -> int:
    """Total tile displacement ``sum |sigma(x) - x|``."""
    return sum(abs(y - x) for x, y in sigma._map.items())


def cycle_decomposition(sigma: SitePermutation) -> list[Cycle]:
    """Disjoint cycles of ``sigma``, each started at its smallest site.

    Cycles are listed in order of their smallest site.
    """
    m = sigma._map
    seen: set[int] = set()
    cycles = []
    for start in sorted(m):
        if start in seen:
            continue
        orbit = [start]
        seen.add(start)
        x = m[start]
        while x != start:
            orbit.append(x)
            seen.add(x)
            x = m[x]
        cycles.append(Cycle(tuple(orbit)))
    return cycles


def product_of_cycles(cycles: Iterable[Cycle]) -> SitePermutation:
    out = SitePermutation.identity()
    for c in cycles:
        out = compose(c.as_permutation(), out)
    return out


@dataclass(frozen=True)
class MixerElement:
    """Element ``(position, perm)`` of Z x| Sigma."""

    position: int = 0
    perm: SitePermutation = _IDENTITY

    def __post_init__(self):
        check_site(self.position)

    @classmethod
    def identity(cls) -> MixerElement:
        return cls(0, _IDENTITY)

    def __mul__(self, other: MixerElement) -> MixerElement:
        return mul(self, other)

    def __repr__(self) -> str:
        return f"({self.position}, {self.perm!r})"


class Kind(Enum):
    MOVE = "move"
    SWAP = "swap"


@dataclass(frozen=True)
class MixerGenerator:
    kind: Kind
    direction: int

    def __post_init__(self):
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")

    def embed(self) -> MixerElement:
        if self.kind is Kind.MOVE:
            return MixerElement(self.direction, _IDENTITY)
        return MixerElement(0, SitePermutation.transposition(0, self.direction))

    @property
    def inverse(self) -> MixerGenerator:
        if self.kind is Kind.MOVE:
            return MixerGenerator(Kind.MOVE, -self.direction)
        return self

    def __repr__(self) -> str:
        name = "Move" if self.kind is Kind.MOVE else "Swap"
        return f"{name}({self.direction:+d})"


MOVE_PLUS = MixerGenerator(Kind.MOVE, 1)
MOVE_MINUS = MixerGenerator(Kind.MOVE, -1)
SWAP_PLUS = MixerGenerator(Kind.SWAP, 1)
SWAP_MINUS = MixerGenerator(Kind.SWAP, -1)

#: Generator order shared with the simulation kernels: a uniform draw ``i`` in
#: ``0..3`` selects ``GENERATORS[i]``.
GENERATORS: tuple[MixerGenerator, ...] = (MOVE_PLUS, MOVE_MINUS, SWAP_PLUS, SWAP_MINUS)


def Move(direction: int) -> MixerGenerator:
    return MixerGenerator(Kind.MOVE, direction)


def Swap(direction: int) -> MixerGenerator:
    return MixerGenerator(Kind.SWAP, direction)


GeneratorWord = Sequence[MixerGenerator]


def mul(a: MixerElement, b: MixerElement) -> MixerElement:
    pos = check_site(a.position + b.position)
    return MixerElement(pos, compose(conjugate_by_translation(a.position, b.perm), a.perm))


def inverse(a: MixerElement) -> MixerElement:
    return MixerElement(
        check_site(-a.position), conjugate_by_translation(-a.position, invert_perm(a.perm))
    )


def apply_generator(a: MixerElement, u: MixerGenerator) -> MixerElement:
    """Right-multiply ``a`` by the generator ``u``."""
    s = a.position
    if u.kind is Kind.MOVE:
        return MixerElement(check_site(s + u.direction), a.perm)
    other = check_site(s + u.direction)
    m = a.perm._map
    # <s, other> o perm: only the tiles sitting on s and other move
    inv = {y: x for x, y in m.items()} if m else {}
    ta, tb = inv.get(s, s), inv.get(other, other)
    out = dict(m)
    for tile, dest in ((ta, other), (tb, s)):
        if tile == dest:
            out.pop(tile, None)
        else:
            out[tile] = dest
    return MixerElement(s, SitePermutation._trusted(out))


def evaluate_word(word: Iterable[MixerGenerator], start: MixerElement | None = None) -> MixerElement:
    """Right-multiply ``start`` (default identity) by each letter in turn.

    Same result as folding :func:`apply_generator`, without rebuilding the
    permutation after every letter.
    """
    e = MixerElement.identity() if start is None else start
    pos = e.position
    where = dict(e.perm._map)  # tile -> site
    tile = {y: x for x, y in where.items()}  # site -> tile
    for u in word:
        if u.kind is Kind.MOVE:
            pos += u.direction
            continue
        other = pos + u.direction
        ta, tb = tile.get(pos, pos), tile.get(other, other)
        where[ta], where[tb] = other, pos
        tile[other], tile[pos] = ta, tb
    check_site(pos)
    return MixerElement(pos, SitePermutation._trusted({x: y for x, y in where.items() if x != y}))


def canonical_key(a: MixerElement) -> bytes:
    """Injective byte encoding: position, support size, then sorted (site, image) pairs."""
    m = a.perm._map
    parts = [_PACK.pack(a.position), _PACK.pack(len(m))]
    for x in sorted(m):
        parts.append(_PACK.pack(x))
        parts.append(_PACK.pack(m[x]))
    return b"".join(parts)


def from_canonical_key(key: bytes) -> MixerElement:
    vals = [v for (v,) in _PACK.iter_unpack(key)]
    pos, n = vals[0], vals[1]
    pairs = vals[2:]
    if len(pairs) != 2 * n:
        raise ValueError("malformed canonical key")
    return MixerElement(pos, SitePermutation(zip(pairs[0::2], pairs[1::2])))
