import itertools
from collections import deque
from functools import reduce

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixer_chain.algebra import (
    GENERATORS,
    Cycle,
    MixerElement,
    Move,
    SitePermutation,
    Swap,
    canonical_key,
    compose,
    displacement_sum,
    evaluate_word,
    mul,
)
from mixer_chain.bfs import (
    NODE_BUDGET_ENV,
    BFSResourceError,
    bfs_ball,
    bfs_ball_elements,
    bfs_distance,
    node_budget,
)
from mixer_chain.words import (
    covering_number,
    covering_path,
    cycle_word,
    cycle_word_bound,
    distance_bounds,
    is_generator_simple_path,
    lower_bound,
    path_transposition_word,
    transposition_word,
    upper_bound,
    upper_bound_word,
)
from strategies import permutations

P = SitePermutation


def fold(word, start=None):
    """Oracle evaluation through the group law alone."""
    e = MixerElement.identity() if start is None else start
    return reduce(lambda a, u: mul(a, u.embed()), word, e)


def all_words(max_len):
    for n in range(max_len + 1):
        yield from itertools.product(GENERATORS, repeat=n)


class TestTranspositionWord:
    def test_h1(self):
        assert transposition_word(1) == [Swap(+1)]

    def test_h2(self):
        w = transposition_word(2)
        assert w == [Swap(+1), Move(+1), Swap(+1), Swap(-1), Move(-1)]
        assert fold(w) == MixerElement(0, P.transposition(0, 2))

    def test_hm2(self):
        assert fold(transposition_word(-2)) == MixerElement(0, P.transposition(0, -2))

    def test_hm3(self):
        w = transposition_word(-3)
        assert len(w) == 9
        assert fold(w) == MixerElement(0, P.transposition(0, -3))

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            transposition_word(0)

    @pytest.mark.parametrize("h", [h for h in range(-12, 13) if h])
    def test_length_and_value(self, h):
        w = transposition_word(h)
        assert len(w) == 4 * abs(h) - 3
        assert fold(w) == MixerElement(0, P.transposition(0, h))

    def test_every_simple_path(self):
        # including paths that backtrack, as long as no suffix closes up
        checked = 0
        for k in range(1, 9):
            for steps in itertools.product((1, -1), repeat=k):
                steps = list(steps)
                if not is_generator_simple_path(steps):
                    with pytest.raises(ValueError):
                        path_transposition_word(steps)
                    continue
                w = path_transposition_word(steps)
                assert len(w) == 4 * k - 3
                assert fold(w) == MixerElement(0, P.transposition(0, sum(steps)))
                checked += 1
        assert checked == 156

    def test_simple_path_predicate(self):
        assert is_generator_simple_path([-1, 1, 1])
        assert not is_generator_simple_path([1, 1, -1])
        assert not is_generator_simple_path([1, -1])
        assert not is_generator_simple_path([-1, 1, 1, -1])


class TestCycleWord:
    def test_three_cycle(self):
        c = Cycle((0, 2, 1))
        w = cycle_word(0, c)
        assert fold(w) == MixerElement(0, c.as_permutation())
        assert len(w) <= cycle_word_bound(c) == 20

    def test_transposition_cycle(self):
        w = cycle_word(0, Cycle((0, 1)))
        assert fold(w) == MixerElement(0, P.transposition(0, 1)) and len(w) <= 10

    def test_three_cycle_from_other_anchor(self):
        c = Cycle((0, 1, 2))
        w = cycle_word(2, c)
        assert fold(w, MixerElement(2)) == MixerElement(2, c.as_permutation())
        assert len(w) <= 20

    def test_start_outside_orbit(self):
        with pytest.raises(ValueError):
            cycle_word(5, Cycle((0, 1)))

    @settings(max_examples=200)
    @given(st.lists(st.integers(-15, 15), min_size=2, max_size=7, unique=True), st.data())
    def test_left_composes_from_any_orbit_site(self, orbit, data):
        c = Cycle(tuple(orbit))
        g = data.draw(st.sampled_from(orbit))
        tau = data.draw(permutations())
        w = cycle_word(g, c)
        assert fold(w, MixerElement(g, tau)) == MixerElement(g, compose(c.as_permutation(), tau))
        assert len(w) <= cycle_word_bound(c)


class TestCovering:
    @staticmethod
    def brute(g, sigma):
        # BFS on (position, sites still to visit)
        todo = frozenset(sigma.support)
        start = (g, todo - {g})
        seen = {start}
        queue = deque([(start, 0)])
        while queue:
            (x, rest), d = queue.popleft()
            if not rest:
                return d
            for y in (x - 1, x + 1):
                s = (y, rest - {y})
                if s not in seen:
                    seen.add(s)
                    queue.append((s, d + 1))
        raise AssertionError

    def test_examples(self):
        assert covering_number(0, P.identity()) == 0
        assert covering_number(0, P.transposition(0, 1)) == 1
        assert covering_number(0, P.transposition(0, 2)) == 2
        assert covering_number(0, P.transposition(-1, 3)) == 5
        assert covering_number(5, P.transposition(0, 1)) == 5

    def test_path_tie_breaks_left(self):
        assert covering_path(0, P.transposition(-1, 3)) == [0, -1, 0, 1, 2, 3]
        assert covering_path(1, P.transposition(0, 2)) == [1, 0, 1, 2]
        assert covering_path(0, P.identity()) == [0]
        assert covering_path(0, P.transposition(0, 2)) == [0, 1, 2]

    @settings(max_examples=200)
    @given(st.integers(-5, 5), permutations(-5, 5, 6))
    def test_against_search(self, g, sigma):
        cov = covering_number(g, sigma)
        assert cov == self.brute(g, sigma)
        path = covering_path(g, sigma)
        assert path[0] == g and len(path) == cov + 1
        assert all(abs(a - b) == 1 for a, b in zip(path, path[1:]))
        assert sigma.support <= set(path)


class TestUpperBound:
    def test_identity(self):
        assert upper_bound_word(0, P.identity()) == []

    def test_single_swap(self):
        w = upper_bound_word(0, P.transposition(0, 1))
        assert fold(w) == MixerElement(0, P.transposition(0, 1)) and len(w) <= 12

    def test_three_cycle_and_swap(self):
        sigma = compose(P({0: 2, 2: 1, 1: 0}), P.transposition(5, 6))
        w = upper_bound_word(0, sigma)
        assert fold(w) == MixerElement(0, sigma)
        assert len(w) <= 2 * covering_number(0, sigma) + 5 * displacement_sum(sigma)

    def test_example(self):
        sigma = compose(P.transposition(-1, 3), P.transposition(4, 6))
        w = upper_bound_word(0, sigma)
        assert fold(w) == MixerElement(0, sigma)
        assert len(w) <= upper_bound(0, sigma) == 2 * 8 + 5 * 12

    @settings(max_examples=300)
    @given(st.integers(-20, 20), permutations())
    def test_word_valid_and_within_bound(self, g, sigma):
        w = upper_bound_word(g, sigma)
        assert evaluate_word(w, MixerElement(g)) == MixerElement(g, sigma)
        assert len(w) <= 2 * covering_number(g, sigma) + 5 * displacement_sum(sigma)

    def test_distance_bounds(self):
        b = distance_bounds(MixerElement(0, P.transposition(0, 2)))
        assert b.lower == 2 and b.upper == 2 * 2 + 5 * 4
        assert fold(b.witness) == MixerElement(0, P.transposition(0, 2))


class TestLowerBound:
    def test_examples(self):
        assert lower_bound(P.identity()) == 0
        assert lower_bound(P.transposition(0, 1)) == 1
        assert lower_bound(P.transposition(0, 2)) == 2
        assert lower_bound(P.cycle(0, 2, 1)) == 2

    def test_each_letter_changes_displacement_by_at_most_two(self):
        for w in all_words(4):
            for u in GENERATORS:
                a = evaluate_word(w)
                b = mul(a, u.embed())
                assert abs(displacement_sum(b.perm) - displacement_sum(a.perm)) <= 2


class TestBFS:
    def test_distance_examples(self):
        assert bfs_distance(MixerElement()) == 0
        for u in GENERATORS:
            assert bfs_distance(u.embed()) == 1
        assert bfs_distance(MixerElement(0, P.transposition(0, 2))) == 5
        assert bfs_distance(MixerElement(0, P.transposition(0, 2)), radius_cap=4) is None

    def test_small_balls(self):
        assert bfs_ball(0) == {canonical_key(MixerElement()): 0}
        ball1 = bfs_ball(1)
        assert len(ball1) == 5 and sorted(ball1.values()) == [0, 1, 1, 1, 1]
        ball2 = bfs_ball_elements(2)
        assert len(ball2) == 15
        assert all(lower_bound(e.perm) <= d for e, d in ball2)

    def test_transposition_02_needs_five_letters(self):
        target = MixerElement(0, P.transposition(0, 2))
        assert not any(fold(w) == target for w in all_words(4))

    def test_ball_sizes_match_word_enumeration(self):
        best: dict[bytes, int] = {}
        for w in all_words(5):
            best.setdefault(canonical_key(fold(w)), len(w))
        assert bfs_ball(5) == best

    def test_ball_sizes(self):
        sizes = [0] * 8
        for d in bfs_ball(7).values():
            sizes[d] += 1
        assert sizes == [1, 4, 10, 23, 50, 106, 221, 450]
        assert list(itertools.accumulate(sizes)) == [1, 5, 15, 38, 88, 194, 415, 865]

    def test_radius_safety(self):
        with pytest.raises(BFSResourceError):
            bfs_ball(13)
        with pytest.raises(ValueError):
            bfs_ball(-1)

    def test_budget(self):
        with pytest.raises(BFSResourceError):
            bfs_ball(6, budget=100)

    def test_env_budget(self, monkeypatch):
        monkeypatch.setenv(NODE_BUDGET_ENV, "50")
        assert node_budget() == 50
        with pytest.raises(BFSResourceError):
            bfs_distance(MixerElement(0, P.transposition(0, 2)))
        monkeypatch.setenv(NODE_BUDGET_ENV, "lots")
        with pytest.raises(BFSResourceError):
            node_budget()
