"""Envelopes, root brackets, sign surveys and the ten-case table."""

import itertools
import math

import numpy as np
import pytest

from weierbaker import (
    BoundedValue,
    BracketError,
    CaseConstraintError,
    DomainError,
    IndeterminateSignError,
    OutOfValidityError,
    Roughness,
    TABLE_CASES,
    bits_from_jumps,
    bracket_root,
    case_by_id,
    case_pair,
    certify_case,
    certify_g_roots,
    certify_k_signs,
    certify_kappa,
    certify_l_signs,
    decode,
    envelope,
    estimate_kappa0,
    eval_g,
    eval_k,
    eval_k_grid,
    eval_l_grid,
    s_batch,
    value_at_test_point,
)
from weierbaker.certify import _ge_slots

KAPPA_TRIPLE = (0.50, 0.55, 0.56)


def admissible_tails(c, rng, count, span=6):
    """Rejection-sample jump assignments for a row's free slots."""
    free = _ge_slots(c)
    out = []
    while len(out) < count:
        choice = tuple(int(s.value + rng.integers(0, span)) for s in free)
        try:
            out.append(case_pair(c, choice))
        except CaseConstraintError:
            continue
    return out


def pair_curve(xi, eta, xs, r, order):
    xb = np.asarray(bits_from_jumps(xi, xi.depth).bits, dtype=np.uint8)
    eb = np.asarray(bits_from_jumps(eta, eta.depth).bits, dtype=np.uint8)
    tiles = len(np.atleast_1d(xs))
    xm = np.repeat(xb[None, :], tiles, axis=0)
    em = np.repeat(eb[None, :], tiles, axis=0)
    return s_batch(xm, xs, r, order=order) - s_batch(em, xs, r, order=order)


class TestEnvelopes:
    @pytest.mark.parametrize("kappa", [0.50, 0.55, 0.60])
    @pytest.mark.parametrize("target", ["g", "g'", "g''"])
    def test_sandwich_on_dense_grid(self, kappa, target):
        r = Roughness.from_kappa(kappa)
        env = envelope(target, r)
        xs = np.linspace(0.0, 1.0, 2001)
        lo, hi = env.normalized_target_bounds(xs, terms=120)
        assert np.all(env.lower(xs) <= lo + 1e-12)
        assert np.all(hi <= env.upper(xs) + 1e-12)
        assert np.all(env.upper(xs) > env.lower(xs))

    def test_target_aliases(self, r055):
        assert envelope("g1", r055).target == "g'"
        assert envelope(1, r055).target == "g'"
        assert envelope("g2", r055).target == "g''"
        assert envelope(0, r055).target == "g"

    def test_unknown_target(self, r055):
        with pytest.raises(DomainError):
            envelope("h", r055)

    def test_validity_cap(self):
        with pytest.raises(OutOfValidityError):
            envelope("g", Roughness.from_kappa(0.65))

    @pytest.mark.parametrize("kappa", [0.55, 0.60])
    def test_doubled_remainder_constant_is_unsound(self, kappa):
        """Halving the denominators pushes the lower line above the target."""
        r = Roughness.from_kappa(kappa)
        env = envelope("g", r)
        xs = np.linspace(0.0, 1.0, 2001)
        k = r.kappa
        c_lo = k * k * (4.0 - math.pi + k * (math.pi - 2.0)) / (4.0 * (2.0 - k))
        base = env.lower(xs) - c_lo
        _, hi = env.normalized_target_bounds(xs, terms=120)
        assert np.any(base + 2.0 * c_lo > hi)


class TestBracketRoot:
    def test_brackets_kernel_root(self, r055):
        f = lambda x: eval_g(x, 0, r055, 80)
        root = bracket_root(f, 0.05, 0.15, 1e-3)
        assert root.width <= 1e-3
        assert 0.05 <= root.lo and root.hi <= 0.15
        assert f(root.lo).lo > 0.0 and f(root.hi).hi < 0.0

    def test_same_sign_endpoints(self, r055):
        with pytest.raises(BracketError):
            bracket_root(lambda x: eval_g(x, 0, r055), 0.2, 0.4, 1e-3)

    def test_straddling_enclosure(self):
        with pytest.raises(IndeterminateSignError):
            bracket_root(lambda x: BoundedValue(-1.0, 1.0), 0.0, 1.0, 1e-3)

    def test_argument_validation(self, r055):
        f = lambda x: eval_g(x, 0, r055)
        with pytest.raises(DomainError):
            bracket_root(f, 0.3, 0.1, 1e-3)
        with pytest.raises(DomainError):
            bracket_root(f, 0.05, 0.15, 0.0)


class TestFamilies:
    def test_scalar_agrees_with_grid(self, r055):
        for i in (1, 2, 3, 4):
            v = eval_k(i, 0.37, r055)
            lo, hi = eval_k_grid(i, np.asarray([0.37]), r055)
            assert (v.lo, v.hi) == (float(lo[0]), float(hi[0]))

    @pytest.mark.parametrize("i,factor", [(1, 0.5), (2, 0.25), (3, 0.25), (4, 0.5)])
    def test_slope_family_differentiates_to_curvature_family(self, r055, i, factor):
        """Central differences of l_i recover factor * k_i."""
        xs = np.linspace(0.1, 0.9, 17)
        h = 1e-4
        lo_p, hi_p = eval_l_grid(i, xs + h, r055, 90)
        lo_m, hi_m = eval_l_grid(i, xs - h, r055, 90)
        deriv = ((lo_p + hi_p) - (lo_m + hi_m)) / (4.0 * h)
        klo, khi = eval_k_grid(i, xs, r055, 90)
        assert np.allclose(deriv, factor * 0.5 * (klo + khi), rtol=1e-3, atol=1e-3)

    @pytest.mark.parametrize("kappa", KAPPA_TRIPLE)
    def test_k2_is_strictly_negative(self, kappa):
        r = Roughness.from_kappa(kappa)
        lo, hi = eval_k_grid(2, np.linspace(0.0, 1.0, 401), r, 80)
        assert np.all(hi < 0.0)
        assert np.min(lo) > -85.0 and np.max(hi) < -31.0

    def test_k1_changes_sign(self, r055):
        assert eval_k(1, 0.0, r055).lo > 0.0
        assert eval_k(1, 1.0, r055).hi < 0.0

    def test_index_validation(self, r055):
        with pytest.raises(DomainError):
            eval_k_grid(5, np.asarray([0.5]), r055)
        with pytest.raises(DomainError):
            eval_l_grid(0, np.asarray([0.5]), r055)


class TestSignSuites:
    def test_kernel_root_brackets(self, r055):
        rep = certify_g_roots(r055)
        assert rep.lemma_id == "kernel_root_brackets"
        assert rep.verdict == "pass"
        assert len(rep.checks) == 3
        assert set(rep.config) == {"terms", "grid", "prefix_depth"}

    def test_root_brackets_validity_cap(self):
        with pytest.raises(OutOfValidityError):
            certify_g_roots(Roughness.from_kappa(0.65))

    def test_curvature_signs(self, r055):
        rep = certify_k_signs(r055)
        assert rep.lemma_id == "curvature_sign_checks"
        assert rep.verdict == "pass"
        assert all(c.margin > 0.0 for c in rep.checks)

    def test_slope_signs(self, r055):
        rep = certify_l_signs(r055)
        assert rep.lemma_id == "slope_sign_checks"
        assert rep.verdict == "pass"
        assert len(rep.checks) == 4


class TestCasePairs:
    @pytest.mark.parametrize("c", TABLE_CASES, ids=lambda c: f"case{c.id}")
    def test_pair_realizes_row_digits(self, c):
        free = _ge_slots(c)
        xi = eta = None
        for choice in itertools.product(*[range(s.value, s.value + 5) for s in free]):
            try:
                xi, eta = case_pair(c, choice)
                break
            except CaseConstraintError:
                continue
        xb = bits_from_jumps(xi, xi.depth)
        eb = bits_from_jumps(eta, eta.depth)
        assert xb.bits[0] == 1 and eb.bits[0] == 0
        assert (xb.bits[1], xb.bits[2]) == (c.digits[0], c.digits[2])
        assert (eb.bits[1], eb.bits[2]) == (c.digits[1], c.digits[3])
        assert decode(xb) - decode(eb) > 0.5

    def test_wrong_choice_count(self):
        with pytest.raises(CaseConstraintError):
            case_pair(case_by_id(1), (3, 4, 3))

    def test_choice_below_bound(self):
        with pytest.raises(CaseConstraintError):
            case_pair(case_by_id(1), (2, 4, 3, 4))

    def test_jump_times_must_increase(self):
        with pytest.raises(CaseConstraintError):
            case_pair(case_by_id(1), (3, 3, 3, 4))

    def test_first_divergence_must_sit_on_xi(self):
        with pytest.raises(CaseConstraintError):
            case_pair(case_by_id(1), (4, 5, 3, 4))

    def test_case_lookup(self):
        assert case_by_id(3).id == 3
        for bad in (0, 11):
            with pytest.raises(DomainError):
                case_by_id(bad)


class TestCaseCertificates:
    def test_case3_shape_certificate(self, r055):
        rep = certify_case(case_by_id(3), r055)
        assert rep.lemma_id == "case_3_shape"
        assert rep.verdict == "pass"
        assert len(rep.checks) == 3
        assert all(c.verdict == "pass" and c.margin > 0.0 for c in rep.checks)
        assert rep.config == {"terms": 60, "grid": 1000, "prefix_depth": 2}

    def test_case8_reports_both_point_readings(self, r055):
        rep = certify_case(case_by_id(8), r055)
        assert len(rep.checks) == 5
        points = rep.checks[3:]
        assert all(c.domain == (0.9, 0.9) for c in points)
        assert all(c.verdict == "pass" for c in points)
        assert points[0].margin > points[1].margin > 0.0

    def test_parameter_validation(self, r055):
        with pytest.raises(OutOfValidityError):
            certify_case(case_by_id(1), Roughness.from_kappa(0.6))
        with pytest.raises(DomainError):
            certify_case(case_by_id(1), r055, prefix_depth=0)

    @pytest.mark.parametrize("case_id", [1, 5, 9])
    def test_shape_holds_on_sampled_tails(self, r055, rng, case_id):
        """Concrete admissible pairs obey the certified convexity pattern."""
        c = case_by_id(case_id)
        inner = np.linspace(0.1, 0.9, 81)
        for xi, eta in admissible_tails(c, rng, 5):
            assert np.min(pair_curve(xi, eta, inner, r055, order=2)) > 0.0
            assert pair_curve(xi, eta, np.asarray([0.05]), r055, order=1)[0] < 0.0
            assert pair_curve(xi, eta, np.asarray([0.95]), r055, order=1)[0] > 0.0


class TestValueAtTestPoint:
    def test_every_row_is_negative(self, r055):
        for c in TABLE_CASES:
            assert value_at_test_point(c, r055).hi < 0.0

    def test_hull_contains_sampled_pairs(self, r055, rng):
        for case_id in (1, 4, 8):
            c = case_by_id(case_id)
            hull = value_at_test_point(c, r055)
            for xi, eta in admissible_tails(c, rng, 4):
                v = pair_curve(xi, eta, np.asarray([0.55]), r055, order=0)[0]
                assert hull.lo - 1e-9 <= v <= hull.hi + 1e-9

    def test_more_explicit_times_nest_and_tighten(self, r055):
        c = case_by_id(1)
        v2 = value_at_test_point(c, r055, explicit_times=2)
        v3 = value_at_test_point(c, r055, explicit_times=3)
        assert v2.lo <= v3.lo and v3.hi <= v2.hi
        assert v3.width < v2.width
        assert v3.hi < 0.0

    def test_parameter_validation(self, r055):
        with pytest.raises(OutOfValidityError):
            value_at_test_point(case_by_id(1), Roughness.from_kappa(0.58))
        with pytest.raises(DomainError):
            value_at_test_point(case_by_id(1), r055, explicit_times=1)


class TestKappaCertificate:
    def test_no_attempt_above_validity(self):
        rep = certify_kappa(Roughness.from_kappa(0.6))
        assert rep.lemma_id == "kappa_certificate"
        assert rep.verdict == "inconclusive"
        assert len(rep.checks) == 1
        assert rep.checks[0].domain == (0.5, 0.56)

    def test_threshold_tolerance_floor(self):
        with pytest.raises(DomainError):
            estimate_kappa0(5e-5)
