"""Pushforward measures, their densities and integrability diagnostics."""

import numpy as np
import pytest

from weierbaker import (
    CertificateUnavailableError,
    DomainError,
    Roughness,
    case_by_id,
    case_pair,
    bits_from_jumps,
    char_fn_l2_diag,
    density_rho,
    density_rho_hat,
    encode,
    marginal_l2_refinement,
    roots_of_f,
    s_batch,
    sample_rho,
    sbr_marginal,
    sup_bounds,
    support_halfwidth,
    telescoping_check,
)
from weierbaker.measures import DEFAULT_BINS


@pytest.fixture(scope="module")
def wide_pair():
    """A fixed macroscopic pair from the first table row."""
    xi, eta = case_pair(case_by_id(1), (3, 4, 3, 4))
    xb = bits_from_jumps(xi, xi.depth)
    eb = bits_from_jumps(eta, eta.depth)
    return xb, eb


def brute_force_roots(xb, eb, y, r, n=40001):
    xs = np.linspace(0.0, 1.0, n)
    xm = np.repeat(np.asarray(xb.bits, dtype=np.uint8)[None, :], n, axis=0)
    em = np.repeat(np.asarray(eb.bits, dtype=np.uint8)[None, :], n, axis=0)
    f = s_batch(xm, xs, r) - s_batch(em, xs, r) - y
    flips = np.nonzero(np.diff(np.sign(f)))[0]
    return [float(xs[i]) for i in flips]


class TestSampleRho:
    def test_unrestricted_mass_is_exactly_one(self, r055):
        m = sample_rho(r055, 2000, restricted=False, seed=5)
        assert m.total_mass == 1.0
        assert np.sum(m.mass) == pytest.approx(1.0)

    def test_restricted_mass_estimates_the_carrier(self, r055):
        n = 4000
        m = sample_rho(r055, n, restricted=True, seed=5)
        sd = 0.25 * np.sqrt(0.75 / n)
        assert abs(m.total_mass - 0.25) < 4.0 * sd

    def test_deterministic_in_seed(self, r055):
        a = sample_rho(r055, 500, restricted=True, seed=9)
        b = sample_rho(r055, 500, restricted=True, seed=9)
        assert np.array_equal(a.mass, b.mass)
        assert a.total_mass == b.total_mass

    def test_sample_count_validation(self, r055):
        with pytest.raises(DomainError):
            sample_rho(r055, 0, restricted=False, seed=1)

    def test_csv_rows(self, r055):
        m = sample_rho(r055, 100, restricted=False, seed=1, bins=32)
        rows = list(m.csv_rows())
        assert rows[0] == ("bin_lo", "bin_hi", "mass", "stderr")
        assert len(rows) == 33


@pytest.fixture(scope="module")
def measures(r055):
    rho = sample_rho(r055, 20000, restricted=False, seed=21)
    rho_hat = sample_rho(r055, 20000, restricted=True, seed=22)
    return rho, rho_hat


@pytest.fixture(scope="module")
def phi_hat(r055):
    return density_rho_hat(r055, n_pairs=3000, seed=7)


class TestTelescoping:
    def test_zero_term_copies_the_restricted_histogram(self, r055, measures):
        rho, rho_hat = measures
        rep = telescoping_check(rho, rho_hat, r055, n_max=0)
        assert np.array_equal(rep.rhs, rho_hat.mass)
        assert np.array_equal(rep.defect, rho.mass - rho_hat.mass)
        assert rep.tail_bound == rho_hat.total_mass

    def test_total_defect_sits_near_half(self, r055, measures):
        rho, rho_hat = measures
        rep = telescoping_check(rho, rho_hat, r055, n_max=12)
        assert abs(rep.total_defect - 0.5) < 0.03
        assert rep.total_lhs == pytest.approx(1.0)
        assert rep.tail_bound == pytest.approx(2.0**-12 * rho_hat.total_mass)

    def test_to_dict_flags_the_identity_level_defect(self, r055, measures):
        rho, rho_hat = measures
        d = telescoping_check(rho, rho_hat, r055, n_max=8).to_dict()
        assert d["n_max"] == 8
        assert "identity" in d["note"]

    def test_binning_must_match(self, r055):
        rho = sample_rho(r055, 200, restricted=False, seed=1, bins=40)
        rho_hat = sample_rho(r055, 200, restricted=True, seed=2, bins=50)
        with pytest.raises(DomainError):
            telescoping_check(rho, rho_hat, r055, n_max=1)

    def test_truncation_validation(self, r055, measures):
        rho, rho_hat = measures
        with pytest.raises(DomainError):
            telescoping_check(rho, rho_hat, r055, n_max=-1)


class TestRootsOfF:
    def test_matches_brute_force_scan(self, r055, wide_pair):
        xb, eb = wide_pair
        xs = np.linspace(0.0, 1.0, 2001)
        curve = (
            s_batch(np.repeat(np.asarray(xb.bits, dtype=np.uint8)[None, :], 2001, 0), xs, r055)
            - s_batch(np.repeat(np.asarray(eb.bits, dtype=np.uint8)[None, :], 2001, 0), xs, r055)
        )
        f_min = float(np.min(curve))
        for y in (f_min + 1.0, f_min + 4.0, 0.0):
            got = roots_of_f(xb, eb, y, r055)
            expected = brute_force_roots(xb, eb, y, r055)
            assert len(got) == len(expected)
            for a, b in zip(got, expected):
                assert abs(a - b) < 1e-4

    def test_level_below_minimum_has_no_roots(self, r055, wide_pair):
        xb, eb = wide_pair
        assert roots_of_f(xb, eb, -1e6, r055) == []

    def test_tangency_reports_one_root(self, r055, wide_pair):
        xb, eb = wide_pair
        n = 40001
        xs = np.linspace(0.0, 1.0, n)
        xm = np.repeat(np.asarray(xb.bits, dtype=np.uint8)[None, :], n, axis=0)
        em = np.repeat(np.asarray(eb.bits, dtype=np.uint8)[None, :], n, axis=0)
        curve = s_batch(xm, xs, r055) - s_batch(em, xs, r055)
        i = int(np.argmin(curve))
        got = roots_of_f(xb, eb, float(curve[i]), r055, tol=1e-6)
        assert len(got) == 1
        assert abs(got[0] - xs[i]) < 1e-3

    def test_swapped_pair_mirrors_the_level(self, r055, wide_pair):
        xb, eb = wide_pair
        direct = roots_of_f(xb, eb, 1.0, r055)
        flipped = roots_of_f(eb, xb, -1.0, r055)
        assert len(direct) == len(flipped)
        for a, b in zip(direct, flipped):
            assert abs(a - b) < 1e-6

    def test_rejects_non_macroscopic_pair(self, r055):
        with pytest.raises(DomainError):
            roots_of_f(encode(0.6, 64), encode(0.3, 64), 0.0, r055)

    def test_refuses_uncertified_parameter(self, wide_pair):
        xb, eb = wide_pair
        with pytest.raises(CertificateUnavailableError):
            roots_of_f(xb, eb, 0.0, Roughness.from_kappa(0.6))

    def test_tolerance_validation(self, r055, wide_pair):
        xb, eb = wide_pair
        with pytest.raises(DomainError):
            roots_of_f(xb, eb, 0.0, r055, tol=0.0)


class TestDensity:
    def test_estimate_is_mirror_symmetric(self, phi_hat):
        assert np.allclose(phi_hat.phi, phi_hat.phi[::-1], rtol=0.0, atol=1e-12)

    def test_integral_recovers_carrier_mass(self, phi_hat):
        assert abs(phi_hat.integral() - 0.25) < 0.02

    def test_default_grid_spans_the_support(self, r055, phi_hat):
        half = support_halfwidth(r055)
        assert phi_hat.y_grid[0] == -half and phi_hat.y_grid[-1] == half
        assert len(phi_hat.y_grid) == DEFAULT_BINS + 1
        assert np.all((phi_hat.cap_rate >= 0.0) & (phi_hat.cap_rate <= 1.0))

    def test_full_density_at_zero_truncation_is_the_restricted_one(self, r055):
        base = density_rho_hat(r055, n_pairs=600, seed=3)
        full = density_rho(r055, n_pairs=600, n_max=0, seed=3)
        assert np.array_equal(full.phi, base.phi)
        assert np.array_equal(full.y_grid, base.y_grid)

    def test_argument_validation(self, r055):
        with pytest.raises(DomainError):
            density_rho_hat(r055, n_pairs=0, seed=1)
        with pytest.raises(DomainError):
            density_rho_hat(r055, n_pairs=10, seed=1, cap_tol=0.0)
        with pytest.raises(DomainError):
            density_rho_hat(r055, y_grid=np.array([1.0, 0.0]), n_pairs=10, seed=1)
        with pytest.raises(DomainError):
            density_rho(r055, n_pairs=10, n_max=-1, seed=1)

    def test_csv_rows_header(self, phi_hat):
        rows = list(phi_hat.csv_rows())
        assert rows[0] == ("y", "phi", "stderr", "cap_rate")
        assert len(rows) == len(phi_hat.y_grid) + 1


class TestMarginal:
    def test_mass_and_support(self, r055):
        m = sbr_marginal(0.55, r055, 4000, seed=2)
        assert m.total_mass == 1.0
        assert np.sum(m.mass) == pytest.approx(1.0)
        half = sup_bounds(r055).sup_S
        assert m.bin_edges[0] == -half and m.bin_edges[-1] == half

    def test_argument_validation(self, r055):
        with pytest.raises(DomainError):
            sbr_marginal(1.5, r055, 100, seed=1)
        with pytest.raises(DomainError):
            sbr_marginal(0.5, r055, 0, seed=1)


class TestSquareIntegrability:
    def test_saturation_diagnostic_is_deterministic(self, r055):
        a = char_fn_l2_diag(r055, 100.0, 64, seed=11)
        b = char_fn_l2_diag(r055, 100.0, 64, seed=11)
        assert np.array_equal(a.l2_partial, b.l2_partial)
        assert a.k_grid[0] == 0.0 and a.l2_partial[0] == 0.0
        assert a.k_grid[-1] == 100.0
        assert a.threshold == 0.05

    def test_saturation_validation(self, r055):
        with pytest.raises(DomainError):
            char_fn_l2_diag(r055, 0.0, 64, seed=1)
        with pytest.raises(DomainError):
            char_fn_l2_diag(r055, 10.0, 1, seed=1)

    def test_refinement_report(self, r055):
        ref = marginal_l2_refinement(r055, 0.55, 20000, seed=4)
        again = marginal_l2_refinement(r055, 0.55, 20000, seed=4)
        assert np.array_equal(ref.estimates, again.estimates)
        d = ref.to_dict()
        assert set(d) == {"bins", "estimates", "conv_at_zero", "stable"}
        assert d["bins"] == [64, 128, 256, 512]
        assert all(v > 0.0 for v in d["estimates"])
        assert d["conv_at_zero"] > 0.0
        assert isinstance(ref.stable, bool)

    def test_refinement_validation(self, r055):
        with pytest.raises(DomainError):
            marginal_l2_refinement(r055, 2.0, 100, seed=1)
        with pytest.raises(DomainError):
            marginal_l2_refinement(r055, 0.5, 3, seed=1)
        with pytest.raises(DomainError):
            marginal_l2_refinement(r055, 0.5, 100, seed=1, bins=(64,))
