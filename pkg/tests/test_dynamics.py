"""Skew-product orbits, the stable direction and exponent recovery."""

import math

import numpy as np
import pytest

from weierbaker import (
    BitSequence,
    DomainError,
    ExtendedPoint,
    PhasePoint,
    Roughness,
    baker,
    eval_S,
    eval_W,
    holder_estimate,
    jacobian_F,
    stable_X,
    step_F,
    step_Gamma,
)


def zero_point(depth=80, x=0.0, y=0.0):
    return ExtendedPoint(BitSequence((0,) * depth), x, y)


class TestCurveSystem:
    def test_fixed_fibre_is_curve_maximum(self, r055):
        """At the base fixed point the fibre converges to W(0) at rate gamma."""
        p = zero_point(depth=200)
        target = 1.0 / (1.0 - r055.gamma)
        gaps = []
        for _ in range(150):
            gaps.append(abs(p.y - target))
            p = step_F(p, r055)
        assert abs(p.y - target) < 1e-4
        assert eval_W(0.0, r055).contains(target)
        # one-step ratio is exactly gamma at the fixed base point
        assert gaps[10] / gaps[9] == pytest.approx(r055.gamma, rel=1e-12)

    def test_fibre_contraction_rate(self, r055):
        a = zero_point(y=2.0)
        b = zero_point(y=-1.0)
        gap0 = a.y - b.y
        for k in range(1, 40):
            a, b = step_F(a, r055), step_F(b, r055)
            assert abs((a.y - b.y) - r055.gamma**k * gap0) < 1e-12

    def test_base_moves_with_baker(self, r055):
        p = ExtendedPoint(BitSequence((1, 0, 1)), 0.25, 0.0)
        q = step_F(p, r055)
        assert q.base == baker(p.base, 1)


class TestSlopeSystem:
    def test_fibre_expansion_rate(self, r055):
        a = zero_point(y=1.0)
        b = zero_point(y=0.5)
        gap0 = a.y - b.y
        for k in range(1, 30):
            a, b = step_Gamma(a, r055), step_Gamma(b, r055)
            assert (a.y - b.y) == pytest.approx((2.0 * r055.gamma) ** k * gap0, rel=1e-12)

    def test_graph_of_s_is_invariant(self, r055, rng):
        for _ in range(25):
            bits = BitSequence(tuple(int(b) for b in rng.integers(0, 2, 64)))
            x = float(rng.random())
            p = PhasePoint(bits, x)
            start = ExtendedPoint(bits, x, eval_S(p, r055).mid)
            moved = step_Gamma(start, r055)
            assert abs(moved.y - eval_S(moved.base, r055).mid) < 1e-9


class TestStableDirection:
    def test_jacobian_structure(self, r055):
        p = PhasePoint(BitSequence((1, 0, 1, 1)), 0.3)
        J = jacobian_F(p, r055)
        x_next = baker(p, 1).x
        assert J[0, 0] == 2.0 and J[1, 1] == 0.5 and J[2, 2] == r055.gamma
        assert J[2, 1] == -math.pi * math.sin(2.0 * math.pi * x_next)
        assert J[0, 1] == J[0, 2] == J[1, 0] == J[1, 2] == J[2, 0] == 0.0

    def test_df_halves_the_section(self, r055, rng):
        """DF . (0, 1, S) = (1/2) (0, 1, S o B): enclosures must overlap."""
        for _ in range(25):
            bits = BitSequence(tuple(int(b) for b in rng.integers(0, 2, 64)))
            p = PhasePoint(bits, float(rng.random()))
            _, _, s_here = stable_X(p, r055)
            x_next = baker(p, 1).x
            pushed = s_here.scale(r055.gamma) + (
                -math.pi * math.sin(2.0 * math.pi * x_next)
            )
            _, _, s_next = stable_X(baker(p, 1), r055)
            assert pushed.overlaps(s_next.scale(0.5))

    def test_terms_cap(self, r055):
        p = PhasePoint(BitSequence((1, 0)), 0.5)
        with pytest.raises(Exception):
            stable_X(p, r055, terms=5)


class TestHolderEstimate:
    @pytest.mark.parametrize("exponent", [0.3, 0.5])
    def test_recovers_exponent(self, exponent):
        r = Roughness.from_gamma(2.0**-exponent)
        assert abs(holder_estimate(r, 4, 20) - exponent) < 0.05

    def test_insensitive_to_oracle_length(self, r_root2):
        a = holder_estimate(r_root2, 4, 20, terms=150)
        b = holder_estimate(r_root2, 4, 20, terms=300)
        assert abs(a - b) < 1e-6

    def test_range_validation(self, r_root2):
        with pytest.raises(DomainError):
            holder_estimate(r_root2, 10, 10)
        with pytest.raises(DomainError):
            holder_estimate(r_root2, 2, 50)
