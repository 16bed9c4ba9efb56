from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperwalk.core import (HyperState, SamplePath, TransitionCounts, all_states, bits_to_index, index_to_bits,
                            kappa_range, popcounts, transition_counts, validate_params)
from hyperwalk.exceptions import LengthMismatch, ParamDegenerate, ParamDomain


class TestParams:
    def test_alpha_and_psi(self):
        p = validate_params(0.7, 0.6, 4)
        assert p.alpha == 0.6
        assert p.psi == pytest.approx(0.3 / 0.4)
        q = validate_params(0.6, 0.7, 4)
        assert q.psi == pytest.approx(0.6 / 0.7)

    def test_sum_below_one_is_rejected_with_relabel_hint(self):
        with pytest.raises(ParamDomain, match="relabel"):
            validate_params(0.3, 0.4, 4)

    @pytest.mark.parametrize("phi,gamma", [(1.2, 0.5), (-0.1, 0.9)])
    def test_not_a_probability(self, phi, gamma):
        with pytest.raises(ParamDomain):
            validate_params(phi, gamma, 3)

    def test_degenerate_points(self):
        with pytest.raises(ParamDegenerate):
            validate_params(1, 1, 3)
        with pytest.raises((ParamDegenerate, ParamDomain)):
            validate_params(1, 0, 3)

    def test_bad_n(self):
        with pytest.raises(ParamDomain):
            validate_params(0.7, 0.6, 0)

    def test_fractions_stay_exact(self):
        p = validate_params(Fraction(7, 10), Fraction(3, 5), 3)
        assert p.exact and p.alpha == Fraction(3, 5)
        assert not validate_params(0.7, 0.6, 3).exact

    def test_swapped(self):
        p = validate_params(0.7, 0.6, 5).swapped()
        assert (p.phi, p.gamma, p.n) == (0.6, 0.7, 5)

    def test_kappa_range(self):
        lo, hi = kappa_range(0.7, 0.6)
        assert lo == -1.0 and hi == pytest.approx(1.5)


class TestStates:
    def test_string_round_trip(self):
        s = HyperState.from_string("0110")
        assert str(s) == "0110" and s.hamming == 2 and s.n == 4

    def test_index_convention_coordinate_one_is_most_significant(self):
        assert HyperState.from_string("100").index == 4
        assert np.array_equal(index_to_bits(1, 3), [0, 0, 1])

    @given(st.integers(1, 12).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2**n - 1))))
    def test_index_bits_inverse(self, case):
        n, i = case
        assert bits_to_index(index_to_bits(i, n)) == i
        assert HyperState.from_index(i, n).index == i

    def test_all_states_and_popcounts(self):
        s = all_states(3)
        assert s.shape == (8, 3)
        assert np.array_equal(popcounts(3), s.sum(1))

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            HyperState([0, 2])
        with pytest.raises(ValueError):
            HyperState.from_string("01x")

    def test_hamming_and_inner(self):
        x, y = HyperState.from_string("1100"), HyperState.from_string("1010")
        assert x.inner(y) == 1


class TestCounts:
    def test_hand_count(self):
        c = transition_counts(HyperState.from_string("1100"), HyperState.from_string("1010"))
        assert c.as_tuple() == (1, 1, 1, 1)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            transition_counts(HyperState.from_string("11"), HyperState.from_string("101"))

    @given(st.integers(1, 40).flatmap(lambda n: st.tuples(st.lists(st.integers(0, 1), min_size=n, max_size=n),
                                                          st.lists(st.integers(0, 1), min_size=n, max_size=n))))
    def test_counts_match_norms(self, pair):
        x, y = HyperState(pair[0]), HyperState(pair[1])
        c = transition_counts(x, y)
        assert c.n == x.n
        assert c.n01 + c.n11 == y.hamming and c.n10 + c.n11 == x.hamming
        assert c == TransitionCounts.from_norms(x.n, x.hamming, y.hamming, x.inner(y))


class TestSamplePath:
    def test_from_states(self):
        path = SamplePath.from_states(["0101", "1111", "0000"])
        assert path.steps == 2 and path.n == 4
        assert list(path.hamming) == [2, 4, 0]
        assert str(path[1]) == "1111"

    def test_ragged(self):
        with pytest.raises(LengthMismatch):
            SamplePath.from_states([[0, 1], [0, 1, 1]])

    def test_immutable(self):
        path = SamplePath.from_states(["01"])
        with pytest.raises(ValueError):
            path.states[0, 0] = 1
