"""Tests for transition structures, words, periodic enumeration and gluing."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.dynamics.sft import (
    BiSequence,
    PeriodicCertificate,
    Tail,
    TransitionStructure,
    admissible,
    admissible_words,
    canonical_rotation,
    d_beta,
    glue_orbits,
    mixing_constant,
    necklace_count,
    orbit_count,
    periodic_words,
    primitive_root,
    random_primitive,
    refine_blocks,
    shortest_connection,
    word_frequencies,
)
from src.errors import BudgetExceeded, InputError, NotPrimitive, WindowTooShort


# ---------------------------------------------------------------------------
# Transition structure
# ---------------------------------------------------------------------------

class TestTransitionStructure:

    def test_rejects_non_square(self):
        with pytest.raises(InputError):
            TransitionStructure([[1, 1]])

    def test_rejects_non_binary(self):
        with pytest.raises(InputError):
            TransitionStructure([[1, 2], [1, 1]])

    def test_rejects_dead_symbol(self):
        with pytest.raises(InputError):
            TransitionStructure([[1, 0], [0, 0]])

    def test_matrix_is_read_only(self, golden):
        with pytest.raises(ValueError):
            golden.R[0, 0] = False

    def test_from_rows_matches_matrix(self, golden):
        assert TransitionStructure.from_rows(["11", "10"]) == golden
        assert golden.rows() == ["11", "10"]

    def test_successors(self, golden):
        assert golden.successors(0) == [0, 1]
        assert golden.successors(1) == [0]

    def test_equal_structures_hash_alike(self):
        assert hash(TransitionStructure.full_shift(3)) == hash(TransitionStructure.full_shift(3))


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------

class TestWords:

    def test_admissible_linear_and_cyclic(self, golden):
        assert admissible(golden, (0, 1, 0))
        assert not admissible(golden, (0, 1, 1))
        assert admissible(golden, (0, 1))
        assert not admissible(golden, (1, 0, 1), cyclic=True)

    def test_empty_word_is_input_error(self, golden):
        with pytest.raises(InputError):
            admissible(golden, ())

    def test_symbol_out_of_range(self, golden):
        with pytest.raises(InputError):
            admissible(golden, (0, 2))

    def test_admissible_words_are_lexicographic(self, golden):
        assert admissible_words(golden, 2) == [(0, 0), (0, 1), (1, 0)]

    def test_rotation_and_root(self):
        assert canonical_rotation((1, 0, 1)) == (0, 1, 1)
        assert primitive_root((0, 1, 0, 1)) == (0, 1)
        assert primitive_root((0, 1, 1)) == (0, 1, 1)

    def test_word_frequencies(self):
        freq = word_frequencies((0, 1, 1), 1)
        assert freq == {(0,): Fraction(1, 3), (1,): Fraction(2, 3)}
        assert word_frequencies((0, 1, 1), 2, cyclic=False) == {(0, 1): Fraction(1, 2), (1, 1): Fraction(1, 2)}


class TestPeriodicCertificate:

    def test_of_canonicalizes(self):
        assert PeriodicCertificate.of((1, 0, 1, 0)).word == (0, 1)

    def test_rejects_proper_power(self):
        with pytest.raises(InputError):
            PeriodicCertificate((0, 1, 0, 1))

    def test_cylinder_frequencies_cover_depths(self):
        cert = PeriodicCertificate((0, 1))
        freq = cert.cylinder_frequencies
        assert freq[(0,)] == Fraction(1, 2)
        assert freq[(1, 0)] == Fraction(1, 2)

    def test_to_dict(self):
        assert PeriodicCertificate((0, 0, 1)).to_dict() == {"word": [0, 0, 1], "period": 3}


# ---------------------------------------------------------------------------
# Two-sided sequences and the base metric
# ---------------------------------------------------------------------------

class TestBiSequence:

    def test_window_outside_core_without_tail(self):
        x = BiSequence(core=(0, 1), lo=0)
        assert x.window(0, 1) == (0, 1)
        with pytest.raises(WindowTooShort):
            x[2]
        with pytest.raises(WindowTooShort):
            x[-1]

    def test_shift_moves_coordinates(self):
        x = BiSequence(core=(0, 1, 1), lo=0, left=Tail((0,)), right=Tail((0,)))
        y = x.shift(1)
        assert (y[-1], y[0], y[1], y[2]) == (0, 1, 1, 0)

    def test_periodic_reads_cycle(self):
        x = BiSequence.periodic((0, 1))
        assert x.window(-2, 3) == (0, 1, 0, 1, 0, 1)
        assert x.shift(1)[0] == 1

    def test_d_beta(self):
        x = BiSequence.periodic((0,))
        y = BiSequence(core=(1,), lo=3, left=Tail((0,)), right=Tail((0,)))
        assert d_beta(x, x, 0.5) == 0.0
        assert d_beta(x, y, 0.5) == 0.5 ** 3
        assert d_beta(x, BiSequence.periodic((1,)), 0.5) == 1.0


# ---------------------------------------------------------------------------
# Mixing constant and orbit counts
# ---------------------------------------------------------------------------

class TestMixing:

    def test_full_shift_mixes_at_once(self):
        assert mixing_constant(TransitionStructure.full_shift(3)) == 1

    def test_golden_mean(self, golden):
        assert mixing_constant(golden) == 2

    def test_periodic_structure_is_not_primitive(self):
        flip = TransitionStructure([[0, 1], [1, 0]])
        assert flip.is_irreducible
        assert not flip.is_primitive
        with pytest.raises(NotPrimitive):
            mixing_constant(flip)

    def test_orbit_counts_are_lucas_numbers(self, golden):
        assert [orbit_count(golden, p) for p in range(1, 6)] == [1, 3, 4, 7, 11]


# ---------------------------------------------------------------------------
# Periodic enumeration
# ---------------------------------------------------------------------------

class TestPeriodicWords:

    def test_full_two_shift(self, full2):
        words = [c.word for c in periodic_words(full2, 4)]
        assert words == [(0,), (0, 0, 0, 1), (0, 0, 1), (0, 0, 1, 1), (0, 1), (0, 1, 1), (0, 1, 1, 1), (1,)]

    def test_golden_mean(self, golden):
        words = [c.word for c in periodic_words(golden, 4)]
        assert words == [(0,), (0, 0, 0, 1), (0, 0, 1), (0, 1)]

    def test_budget(self, full2):
        with pytest.raises(BudgetExceeded):
            periodic_words(full2, 10, budget=5)

    def test_p_max_must_be_positive(self, full2):
        with pytest.raises(InputError):
            periodic_words(full2, 0)

    @given(n=st.integers(1, 3), p=st.integers(1, 6))
    @settings(max_examples=30, deadline=None)
    def test_full_shift_matches_necklace_count(self, n, p):
        certs = periodic_words(TransitionStructure.full_shift(n), p)
        assert sum(1 for c in certs if c.period == p) == necklace_count(n, p)

    @given(seed=st.integers(0, 10_000), n=st.integers(2, 4))
    @settings(max_examples=30, deadline=None)
    def test_counts_match_trace(self, seed, n):
        """Points of period p are the sum of d * (orbits of least period d) over d | p."""
        ts = random_primitive(np.random.default_rng(seed), n)
        p_max = 6
        certs = periodic_words(ts, p_max)
        for p in range(1, p_max + 1):
            points = sum(c.period for c in certs if p % c.period == 0)
            assert points == orbit_count(ts, p)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=20, deadline=None)
    def test_certificates_are_canonical_and_admissible(self, seed):
        ts = random_primitive(np.random.default_rng(seed), 3)
        for c in periodic_words(ts, 5):
            assert c.word == canonical_rotation(c.word)
            assert admissible(ts, c.word, cyclic=True)


# ---------------------------------------------------------------------------
# Block presentation
# ---------------------------------------------------------------------------

class TestRefineBlocks:

    def test_golden_two_blocks(self, golden):
        bts, coding = refine_blocks(golden, 2)
        assert coding.words == ((0, 0), (0, 1), (1, 0))
        assert bts.n == 3
        assert coding.encode_cycle((0, 1)) == (1, 2)
        assert coding.decode_cycle((1, 2)) == (0, 1)

    def test_block_orbits_correspond(self, golden):
        bts, _ = refine_blocks(golden, 3)
        for p in range(1, 7):
            assert orbit_count(bts, p) == orbit_count(golden, p)

    def test_rejects_zero_length(self, golden):
        with pytest.raises(InputError):
            refine_blocks(golden, 0)


# ---------------------------------------------------------------------------
# Gluing
# ---------------------------------------------------------------------------

class TestGluing:

    def test_shortest_connection(self, golden):
        assert shortest_connection(golden, 0, 1) == ()
        assert shortest_connection(golden, 1, 1) == (0,)

    def test_glue_two_ones(self, golden):
        glued = glue_orbits(golden, [(1,), (1,)])
        assert glued.word == (1, 0, 1, 0)
        assert glued.gaps == ((0,), (0,))
        assert glued.positions == (0, 2)
        assert glued.certificate.word == (0, 1)
        assert glued.total_gap == 2

    def test_rejects_inadmissible_segment(self, golden):
        with pytest.raises(InputError):
            glue_orbits(golden, [(1, 1)])

    def test_needs_segments(self, golden):
        with pytest.raises(InputError):
            glue_orbits(golden, [])

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_gaps_and_frequencies(self, seed):
        rng = np.random.default_rng(seed)
        ts = random_primitive(rng, int(rng.integers(2, 5)))
        segments = []
        for _ in range(int(rng.integers(1, 5))):
            w = [int(rng.integers(ts.n))]
            for _ in range(int(rng.integers(0, 6))):
                succ = ts.successors(w[-1])
                w.append(succ[int(rng.integers(len(succ)))])
            segments.append(w)

        glued = glue_orbits(ts, segments)
        assert admissible(ts, glued.word, cyclic=True)
        assert all(len(g) <= mixing_constant(ts) for g in glued.gaps)
        for pos, seg in zip(glued.positions, segments):
            assert glued.word[pos:pos + len(seg)] == tuple(seg)

        joined = [a for s in segments for a in s]
        assert glued.frequency_bound(1) == Fraction(glued.total_gap, glued.period)
        for depth in (1, 2, 3):
            seg_freq = word_frequencies(joined, depth, cyclic=False)
            orbit_freq = glued.frequencies(depth)
            bound = glued.frequency_bound(depth)
            for k in set(seg_freq) | set(orbit_freq):
                assert abs(orbit_freq.get(k, 0) - seg_freq.get(k, 0)) <= bound

    def test_frequency_bound_counts_boundaries(self, golden):
        glued = glue_orbits(golden, [(0, 0, 0), (0, 1, 0)])
        # segments meet directly: no gaps, two boundaries
        assert glued.total_gap == 0
        assert glued.frequency_bound(2) == Fraction(2, 5)
        with pytest.raises(InputError):
            glued.frequency_bound(0)
