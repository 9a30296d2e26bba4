import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hurwitzcf import (
    DomainError,
    ExactComplexRational,
    GaussianInt,
    count_in_square,
    enumerate_by_norm,
    nearest_round,
    parse_exact_complex,
)
from hurwitzcf.gaussian import lattice_norm_sq_array, norm_sq_shells, shell_members


def ecr(re, im) -> ExactComplexRational:
    return ExactComplexRational(Fraction(re), Fraction(im))


class TestGaussianInt:
    def test_ring_ops(self):
        a = GaussianInt(2, 3)
        b = GaussianInt(-1, 4)
        assert a + b == GaussianInt(1, 7)
        assert a - b == GaussianInt(3, -1)
        assert a * b == GaussianInt(-14, 5)  # (2+3i)(-1+4i) = -2+8i-3i-12
        assert -a == GaussianInt(-2, -3)
        assert a.conj() == GaussianInt(2, -3)
        assert a.norm_sq() == 13

    def test_str(self):
        assert str(GaussianInt(3, 0)) == "3"
        assert str(GaussianInt(-2, 0)) == "-2"
        assert str(GaussianInt(0, 1)) == "i"
        assert str(GaussianInt(0, -1)) == "-i"
        assert str(GaussianInt(2, 2)) == "2+2i"
        assert str(GaussianInt(-1, -2)) == "-1-2i"

    def test_pair_roundtrip(self):
        g = GaussianInt(-7, 11)
        assert GaussianInt.from_pair(g.to_pair()) == g


class TestExactComplexRational:
    def test_field_ops(self):
        z = ecr(Fraction(1, 3), Fraction(-1, 2))
        w = z.reciprocal()
        assert (z * w) == ecr(1, 0)
        assert z / z == ecr(1, 0)

    def test_reciprocal_zero(self):
        with pytest.raises(ZeroDivisionError):
            ecr(0, 0).reciprocal()

    def test_unit_box_half_open(self):
        assert ecr(Fraction(-1, 2), Fraction(-1, 2)).in_unit_box()
        assert not ecr(Fraction(1, 2), 0).in_unit_box()
        assert not ecr(0, Fraction(1, 2)).in_unit_box()
        assert ecr(Fraction(499, 1000), Fraction(-1, 2)).in_unit_box()


class TestNearestRound:
    def test_fixed_points(self):
        assert nearest_round(ecr(0, 0)) == GaussianInt(0, 0)

    def test_half_integer_ties_round_up(self):
        assert nearest_round(ecr(Fraction(1, 2), Fraction(1, 2))) == GaussianInt(1, 1)
        assert nearest_round(ecr(Fraction(-1, 2), Fraction(-1, 2))) == GaussianInt(0, 0)

    def test_example_value(self):
        # floor(-3/10 + 1/2) = 0, floor(17/10 + 1/2) = 2
        assert nearest_round(ecr(Fraction(-3, 10), Fraction(17, 10))) == GaussianInt(0, 2)

    @given(
        st.fractions(min_value=-50, max_value=50, max_denominator=997),
        st.fractions(min_value=-50, max_value=50, max_denominator=997),
    )
    @settings(max_examples=300, deadline=None)
    def test_residual_in_box(self, re, im):
        z = ExactComplexRational(re, im)
        assert z.sub_gaussian(nearest_round(z)).in_unit_box()


class TestCountInSquare:
    def test_small_values(self):
        assert count_in_square(0) == 1
        assert count_in_square(3) == 49

    def test_closed_form_up_to_50(self):
        for n in range(51):
            assert count_in_square(n) == (2 * n + 1) ** 2

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            count_in_square(-1)


class TestEnumerateByNorm:
    def test_zero_first(self):
        assert enumerate_by_norm(include_zero=True, limit=1) == [GaussianInt(0, 0)]

    def test_norm_le_2_count(self):
        pts = enumerate_by_norm(include_zero=True, limit=20)
        assert sum(1 for p in pts if p.norm_sq() <= 2) == 9

    def test_units_lex_order(self):
        assert enumerate_by_norm(include_zero=False, limit=4) == [
            GaussianInt(-1, 0),
            GaussianInt(0, -1),
            GaussianInt(0, 1),
            GaussianInt(1, 0),
        ]

    def test_monotone_and_distinct(self):
        pts = enumerate_by_norm(include_zero=True, limit=5000)
        norms = [p.norm_sq() for p in pts]
        assert norms == sorted(norms)
        assert len({(p.re, p.im) for p in pts}) == len(pts)

    def test_index_norm_sandwich(self):
        # for n in ((2N+1)^2, (2N+2)^2]: the n-th point has N < |z_n| <= sqrt2 (N+1)
        pts = enumerate_by_norm(include_zero=True, limit=10_000)
        checked = 0
        for bign in range(1, 48):
            lo = (2 * bign + 1) ** 2
            hi = (2 * bign + 2) ** 2
            for n in range(lo + 1, min(hi, len(pts)) + 1):
                if n < 10:
                    continue
                mod = abs(pts[n - 1])
                assert bign < mod <= math.sqrt(2) * (bign + 1) + 1e-12
                checked += 1
        assert checked > 1000

    def test_agrees_with_array_fast_path(self):
        pts = enumerate_by_norm(include_zero=True, limit=2000)
        arr = lattice_norm_sq_array(2000, include_zero=True)
        assert np.array_equal(arr, np.array([p.norm_sq() for p in pts], dtype=float))


class TestShells:
    def test_counts_match_enumeration(self):
        values, counts = norm_sq_shells(100)
        # sum of shell counts equals lattice points with 0 < norm_sq <= 100
        total = sum(
            1
            for a in range(-10, 11)
            for b in range(-10, 11)
            if 0 < a * a + b * b <= 100
        )
        assert int(counts.sum()) == total
        for ns, cnt in zip(values.tolist(), counts.tolist()):
            members = shell_members(int(ns))
            assert len(members) == cnt
            assert all(m.norm_sq() == ns for m in members)


class TestParse:
    def test_rational_pairs(self):
        assert parse_exact_complex("2/5+0/1 i") == ecr(Fraction(2, 5), 0)
        assert parse_exact_complex("-3/10+17/10i") == ecr(Fraction(-3, 10), Fraction(17, 10))
        assert parse_exact_complex("1/2-1/3 i") == ecr(Fraction(1, 2), Fraction(-1, 3))

    def test_plain_forms(self):
        assert parse_exact_complex("0") == ecr(0, 0)
        assert parse_exact_complex("-2") == ecr(-2, 0)
        assert parse_exact_complex("3i") == ecr(0, 3)

    def test_garbage_rejected(self):
        for bad in ("", "i+i+i", "1/0+0i", "x+yi"):
            with pytest.raises(DomainError):
                parse_exact_complex(bad)
