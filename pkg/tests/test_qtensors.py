from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial

import numpy as np
import pytest

from helpers import sample_unit_simplex
from ftbp.qtensors import MAX_ORDER, QOrderError, compute_q_tensors, q_entry


def factorial_entry(indices):
    """Independent recomputation of the closed form."""
    counts = [0] * 6
    for i in indices:
        counts[i] += 1
    m1, m2, m3, m4, m5, m6 = counts
    left = Fraction(
        factorial(m1) * factorial(m2) * factorial(m3), factorial(m1 + m2 + m3 + 3)
    )
    right = Fraction(
        factorial(m4) * factorial(m5) * factorial(m6), factorial(m4 + m5 + m6 + 3)
    )
    return left * right


class TestExactValues:
    def test_rank0_is_one_thirty_sixth(self, q5):
        assert q5.entry() == Fraction(1, 36)

    def test_documented_low_rank_values(self, q5):
        assert q5.entry(0) == Fraction(1, 144)
        assert q5.entry(3) == Fraction(1, 144)
        assert q5.entry(0, 0) == Fraction(1, 360)
        assert q5.entry(0, 1) == Fraction(1, 720)
        assert q5.entry(0, 3) == Fraction(1, 576)

    def test_all_entries_match_closed_form_through_rank5(self, q5):
        for rank in range(6):
            for idx in combinations_with_replacement(range(6), rank):
                assert q5.entry(*idx) == factorial_entry(idx), idx

    def test_entry_is_permutation_invariant(self):
        assert q_entry((0, 3, 1, 1)) == q_entry((1, 1, 0, 3)) == q_entry((3, 1, 0, 1))

    def test_dense_matches_exact(self, q5):
        rank3 = q5.dense[3]
        assert rank3[1, 4, 2] == float(q5.entry(1, 2, 4))
        assert rank3.shape == (6, 6, 6)
        # full symmetry of the dense storage
        assert np.array_equal(rank3, rank3.transpose(2, 0, 1))

    def test_moment_monotonicity(self, q5):
        """Appending any index can only shrink an entry (monomials <= 1)."""
        for rank in range(1, 6):
            for idx in combinations_with_replacement(range(6), rank):
                parent = q5.entry(*idx[:-1])
                assert 0 < q5.entry(*idx) <= parent

    def test_order_cap(self):
        with pytest.raises(QOrderError):
            compute_q_tensors(MAX_ORDER + 1)
        with pytest.raises(QOrderError):
            compute_q_tensors(-1)


class TestMonteCarlo:
    def test_rank_le3_within_three_sigma(self, q5):
        """Entries are moments of monomials over two independent unit
        simplices (each of volume 1/6)."""
        rng = np.random.default_rng(2024)
        n = 200_000
        sa = sample_unit_simplex(rng, n)
        sb = sample_unit_simplex(rng, n)
        sigma6 = np.hstack([sa, sb])
        for rank in range(4):
            for idx in combinations_with_replacement(range(6), rank):
                mono = np.ones(n)
                for i in idx:
                    mono = mono * sigma6[:, i]
                est = mono.mean() / 36.0
                sem = mono.std(ddof=1) / np.sqrt(n) / 36.0
                exact = float(q_entry(idx))
                assert abs(est - exact) <= max(3.0 * sem, 1e-12), idx
