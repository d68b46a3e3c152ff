"""Crossing intervals, word encoding, refinement, and realization."""

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from carpetloop import (
    CyclicWord,
    DefiningSequence,
    PolyLoop,
    RefinementViolation,
    TraceWord,
    Unroutable,
    central_ring,
    corridors,
    crossing_intervals,
    crossing_relation,
    encode_word,
    realize_word,
    refinement_map,
    trace_trivial,
    validate_loop,
)

from conftest import closed_walk_word, out_and_back_word, realized_loop, word_from_letters

HSETTINGS = dict(derandomize=True, deadline=None, max_examples=60)


class TestCrossingRelation:
    def test_full_carpet_is_free(self, fc1, fc2):
        assert crossing_relation(fc1, 1) == frozenset()
        assert crossing_relation(fc2, 2) == frozenset()

    def test_unpunctured_square_commutes(self):
        seq = DefiningSequence.explicit(1, [])
        rel = crossing_relation(seq, 1)
        assert len(rel) == 1
        (pair,) = rel
        a, b = sorted(pair)
        assert {a[0], b[0]} == {"H", "V"}

    def test_pairs_are_cross_orientation(self):
        seq = DefiningSequence.explicit(2, [(1, 1, 1)])
        for pair in crossing_relation(seq, 2):
            o = {ident[0] for ident in pair}
            assert o == {"H", "V"}


class TestCrossingIntervals:
    def test_central_ring_level1(self, fc1):
        ring = central_ring(fc1)
        hs, vs = crossing_intervals(ring, fc1, 1)
        assert len(hs) == 2 and len(vs) == 2
        assert all(iv.full for iv in hs + vs)
        assert {iv.sign for iv in hs} == {1, -1}

    def test_wrap_interval_end_past_one(self, fc1):
        # rotate the ring so a crossing straddles the parameter origin
        ring = central_ring(fc1)
        vs = list(ring.vertices)
        shifted = PolyLoop(tuple(vs[2:] + vs[:2]))
        hs, _ = crossing_intervals(shifted, fc1, 1)
        wraps = [iv for iv in hs if iv.end > 1]
        for iv in wraps:
            assert 0 <= iv.start < 1
            assert iv.contains_param(F(0))

    def test_partial_crossing_not_full(self, fc1):
        # dip into the strip from below and come back out
        loop = PolyLoop(
            (
                (F(1, 5), F(1, 5)),
                (F(1, 4), F(2, 5)),  # inside the strip, left corridor
                (F(3, 10), F(1, 5)),
            )
        )
        hs, vs = crossing_intervals(loop, fc1, 1)
        assert vs == ()
        assert [iv.full for iv in hs] == [False]


class TestEncode:
    def test_central_ring_frozen(self, fc1):
        w = encode_word(central_ring(fc1), fc1, 1)
        assert w.text == "V:1:1:0/1+ H:1:1:2/3+ V:1:1:2/3- H:1:1:0/1-"
        assert w.commutes == frozenset()

    def test_central_ring_level2_frozen(self, fc2):
        w = encode_word(central_ring(fc2), fc2, 2)
        assert w.text == (
            "V:2:2:2/9+ V:2:3:2/9+ H:2:2:2/3+ H:2:3:2/3+ "
            "V:2:3:2/3- V:2:2:2/3- H:2:3:2/9- H:2:2:2/9-"
        )

    def test_reversed_ring_is_inverse(self, fc1):
        w = encode_word(central_ring(fc1), fc1, 1)
        r = encode_word(central_ring(fc1).reversed_loop(), fc1, 1)
        fw = [(l.generator, l.sign) for l in w.letters]
        bw = [(l.generator, -l.sign) for l in reversed(r.letters)]
        # same cyclic sequence
        n = len(fw)
        assert any(bw[k:] + bw[:k] == fw for k in range(n))

    def test_tie_break_changes_order_not_verdict(self, fc2):
        rng = random.Random(7)
        checked = 0
        while checked < 8:
            word = closed_walk_word(fc2, 2, rng)
            loop = realized_loop(fc2, word)
            if loop is None:
                continue
            h = encode_word(loop, fc2, 2, tie_break="h_first")
            v = encode_word(loop, fc2, 2, tie_break="v_first")
            assert sorted(l.text for l in h.letters) == sorted(
                l.text for l in v.letters
            )
            assert trace_trivial(TraceWord.from_cyclic(h)) == trace_trivial(
                TraceWord.from_cyclic(v)
            )
            checked += 1

    def test_empty_word_away_from_strips(self, fc1):
        tri = PolyLoop(((F(1, 10), F(1, 10)), (F(1, 5), F(1, 10)), (F(1, 10), F(1, 5))))
        w = encode_word(tri, fc1, 1)
        assert len(w) == 0


class TestRefinement:
    def test_central_ring_refinement(self, fc2):
        ring = central_ring(fc2)
        corr = refinement_map(ring, fc2, 1)
        assert corr.coarse_word.text == encode_word(ring, fc2, 1).text
        assert corr.fine_word.text == encode_word(ring, fc2, 2).text
        assert len(corr.ends) == len(corr.coarse_word)
        for j, (first, last) in enumerate(corr.ends):
            cl = corr.coarse_word.letters[j]
            fl_first = corr.fine_word.letters[first]
            fl_last = corr.fine_word.letters[last]
            assert fl_first.sign == cl.sign
            assert fl_last.sign == cl.sign
            assert fl_first.interval.start == cl.interval.start
            # entry substratum: lower for positive, upper for negative
            expect_first = 3 * cl.corridor.stratum - (1 if cl.sign > 0 else 0)
            expect_last = 3 * cl.corridor.stratum - (0 if cl.sign > 0 else 1)
            assert fl_first.corridor.stratum == expect_first
            assert fl_last.corridor.stratum == expect_last

    def test_roles_partition(self, fc3):
        rng = random.Random(21)
        done = 0
        while done < 6:
            word = closed_walk_word(fc3, 2, rng)
            loop = realized_loop(fc3, word)
            if loop is None:
                continue
            corr = refinement_map(loop, fc3, 2)
            firsts = {f for f, _ in corr.ends}
            lasts = {l for _, l in corr.ends}
            assert len(firsts) == len(corr.ends)
            assert len(lasts) == len(corr.ends)
            for j, (f, l) in enumerate(corr.ends):
                assert corr.role_of_fine(f) == (j, "first")
                assert corr.role_of_fine(l) == (j, "last")
            free = corr.free_fine_letters()
            assert set(free).isdisjoint(firsts | lasts)
            assert len(free) + len(firsts) + len(lasts) == len(corr.fine_word)
            done += 1

    def test_refinement_needs_consecutive_levels(self, fc3):
        ring = central_ring(fc3)
        corr = refinement_map(ring, fc3, 1)
        assert corr.fine_word.level == 2


class TestRealize:
    def test_out_and_back_routes(self, fc3):
        rng = random.Random(3)
        for _ in range(10):
            word = out_and_back_word(fc3, 2, rng)
            loop = realize_word(word, fc3)
            assert validate_loop(loop, fc3, 3).ok

    def test_round_trip_cyclic_equal(self, fc3):
        rng = random.Random(5)
        done = 0
        while done < 15:
            word = closed_walk_word(fc3, 2, rng)
            loop = realized_loop(fc3, word)
            if loop is None:
                continue
            again = encode_word(loop, fc3, 2)
            assert again.cyclically_equal(word), (word.text, again.text)
            done += 1

    def test_empty_word_triangle(self, fc3):
        w = word_from_letters(fc3, 1, [])
        loop = realize_word(w, fc3)
        assert len(loop) == 3
        assert validate_loop(loop, fc3, 3).ok
        assert len(encode_word(loop, fc3, 1)) == 0

    def test_empty_word_triangle_odd_cell(self, fc3):
        w = word_from_letters(fc3, 1, [])
        loop = realize_word(w, fc3, basepoint_cell=(1, 0))
        assert validate_loop(loop, fc3, 3).ok

    def test_empty_word_removed_basepoint(self, fc3):
        w = word_from_letters(fc3, 1, [])
        with pytest.raises(Unroutable):
            realize_word(w, fc3, basepoint_cell=(1, 1))

    def test_single_letter_unroutable(self, fc2):
        c = [c for c in corridors(fc2, 1) if c.orientation == "H"][0]
        w = word_from_letters(fc2, 1, [(c, 1)])
        with pytest.raises(Unroutable):
            realize_word(w, fc2)

    def test_cross_pair_unroutable(self, fc2):
        h = [c for c in corridors(fc2, 1) if c.orientation == "H"][0]
        v = [c for c in corridors(fc2, 1) if c.orientation == "V"][0]
        w = word_from_letters(fc2, 1, [(h, 1), (v, 1)])
        with pytest.raises(Unroutable):
            realize_word(w, fc2)

    def test_mismatched_strata_unroutable(self, fc3):
        hs = [c for c in corridors(fc3, 2) if c.orientation == "H"]
        a = [c for c in hs if c.stratum == 1][0]
        b = [c for c in hs if c.stratum == 4][0]
        w = word_from_letters(fc3, 2, [(a, 1), (b, -1)])
        with pytest.raises(Unroutable):
            realize_word(w, fc3)

    @given(st.integers(0, 3), st.integers(0, 3))
    @settings(**HSETTINGS)
    def test_realized_vertices_off_grid_lines(self, sa, sb):
        seq = DefiningSequence.full_carpet(3)
        rng = random.Random(1000 + 7 * sa + sb)
        word = out_and_back_word(seq, 2, rng)
        loop = realize_word(word, seq)
        rep = validate_loop(loop, seq, 3)
        assert rep.ok, rep.first
