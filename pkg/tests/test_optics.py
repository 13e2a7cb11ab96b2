import math

import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from cointoss import (
    ExperimentParams,
    alice_cheat_bound,
    bob_cheat_bound,
    click_probability,
    db_to_linear,
    derive_intensities,
    fixed_state_cheat_success,
    helstrom_success,
    homodyne_success,
    linear_to_db,
    overlap_sq,
)

from conftest import IDEAL_ALPHA_SQ


class TestDbConversion:
    def test_lossless_identity(self):
        assert db_to_linear(0.0) == 1.0

    def test_six_db(self):
        assert db_to_linear(6.0) == pytest.approx(10.0 ** -0.6, abs=1e-15)

    def test_one_decade(self):
        assert db_to_linear(10.0) == pytest.approx(0.1, abs=1e-15)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            db_to_linear(-1.0)

    @given(st.floats(min_value=1e-9, max_value=1.0))
    def test_round_trip(self, x):
        assert db_to_linear(linear_to_db(x)) == pytest.approx(x, abs=1e-12)


class TestOverlap:
    def test_identical_states(self):
        assert overlap_sq(0.0) == 1.0

    def test_operating_point(self):
        assert overlap_sq(0.27) == pytest.approx(math.exp(-1.08), abs=1e-15)

    def test_half_by_construction(self):
        assert overlap_sq(math.log(2.0) / 4.0) == pytest.approx(0.5, abs=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            overlap_sq(-0.1)

    @given(
        st.floats(min_value=0.0, max_value=10.0),
        st.floats(min_value=1e-6, max_value=1.0),
    )
    def test_strictly_decreasing(self, x, dx):
        assert overlap_sq(x + dx) < overlap_sq(x)


class TestHelstrom:
    def test_paper_value(self):
        # published receiver-cheat bound at alpha_sq = 0.27
        assert helstrom_success(overlap_sq(0.27)) == pytest.approx(0.906, abs=1e-3)

    def test_indistinguishable(self):
        assert helstrom_success(1.0) == 0.5

    def test_half_overlap(self):
        assert helstrom_success(0.5) == pytest.approx(
            0.5 + 0.5 * math.sqrt(0.5), abs=1e-12
        )

    def test_range_validation(self):
        with pytest.raises(ValueError):
            helstrom_success(1.5)
        with pytest.raises(ValueError):
            helstrom_success(-0.1)

    @given(
        st.floats(min_value=0.0, max_value=1.0),
        st.floats(min_value=1e-6, max_value=1.0),
    )
    def test_decreasing_in_overlap(self, o, do):
        if o + do <= 1.0:
            assert helstrom_success(o + do) <= helstrom_success(o)


class TestFixedStateCheat:
    def test_identical_states_win(self):
        assert fixed_state_cheat_success(1.0) == 1.0

    def test_lossless_operating_point(self):
        assert fixed_state_cheat_success(math.exp(-2 * 0.27)) == pytest.approx(
            0.5 + 0.5 * math.exp(-0.54), abs=1e-15
        )

    def test_ideal_optimum(self):
        # cos(theta) = sin(theta) = 1/sqrt(2)
        assert fixed_state_cheat_success(1 / math.sqrt(2)) == pytest.approx(
            0.5 + 0.5 / math.sqrt(2), abs=1e-12
        )


class TestAliceCheatBound:
    def test_paper_value(self, paper_params):
        assert alice_cheat_bound(paper_params) == pytest.approx(0.9971, abs=1e-4)

    def test_conservative_closed_form(self, paper_params):
        nu = (
            10.0 ** -0.6
            * 0.1
            * (1.0 - 2.0 * math.sqrt(0.005))
            * 0.27
        )
        assert alice_cheat_bound(paper_params) == pytest.approx(
            0.5 + 0.5 * math.exp(-nu), abs=1e-15
        )
        assert alice_cheat_bound(paper_params, tight=True) == pytest.approx(
            0.5 + 0.5 * math.exp(-2 * nu), abs=1e-15
        )

    def test_tight_reduces_to_fixed_state_cheat_at_ideal(self, ideal_params):
        # under no imperfections the tight bound is exactly the optimal
        # fixed-state cheat against the honest state pair
        expected = fixed_state_cheat_success(math.exp(-2 * IDEAL_ALPHA_SQ))
        assert alice_cheat_bound(ideal_params, tight=True) == pytest.approx(
            expected, abs=1e-15
        )
        assert alice_cheat_bound(ideal_params, tight=True) == pytest.approx(
            0.5 + 0.5 / math.sqrt(2), abs=1e-12
        )

    def test_conservative_at_ideal(self, ideal_params):
        assert alice_cheat_bound(ideal_params) == pytest.approx(
            0.5 + 0.5 * math.exp(-IDEAL_ALPHA_SQ), abs=1e-15
        )

    def test_vacuum_states(self):
        params = ExperimentParams(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
        assert alice_cheat_bound(params) == 1.0
        assert alice_cheat_bound(params, tight=True) == 1.0

    def test_tight_never_exceeds_conservative(self, paper_params):
        assert alice_cheat_bound(paper_params, tight=True) <= alice_cheat_bound(
            paper_params
        )

    @given(st.floats(min_value=0.01, max_value=4.9))
    def test_strictly_decreasing_in_effective_intensity(self, alpha_sq):
        lo = ExperimentParams(alpha_sq, 0.0, 0.0, 1.0, 0.0, 0.0)
        hi = ExperimentParams(alpha_sq + 0.05, 0.0, 0.0, 1.0, 0.0, 0.0)
        assert (
            derive_intensities(hi).effective_intensity
            > derive_intensities(lo).effective_intensity
        )
        assert alice_cheat_bound(hi) < alice_cheat_bound(lo)

    def test_limit_large_intensity(self):
        params = ExperimentParams(2000.0, 0.0, 0.0, 1.0, 0.0, 0.0)
        assert alice_cheat_bound(params) == pytest.approx(0.5, abs=1e-9)


class TestBobCheatBound:
    def test_paper_value(self):
        assert bob_cheat_bound(0.27) == pytest.approx(0.906, abs=1e-3)

    def test_vacuum(self):
        assert bob_cheat_bound(0.0) == 0.5

    def test_ideal_optimum(self):
        assert bob_cheat_bound(math.log(2.0) / 4.0) == pytest.approx(
            0.5 + 0.5 / math.sqrt(2), abs=1e-12
        )

    def test_limit_bright_states(self):
        assert bob_cheat_bound(50.0) == pytest.approx(1.0, abs=1e-9)


class TestClickProbability:
    def test_vacuum_no_dark(self):
        assert click_probability(0.0, 0.0) == 0.0

    def test_dark_counts_only(self):
        assert click_probability(0.0, 4.7e-5) == 4.7e-5

    def test_honest_leak_at_paper_params(self, paper_params):
        leak = derive_intensities(paper_params).mu_leak
        expected = 1.0 - (1.0 - 4.7e-5) * math.exp(-leak)
        assert click_probability(leak, 4.7e-5) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(8.09e-5, abs=1e-7)

    def test_validation(self):
        with pytest.raises(ValueError):
            click_probability(-1.0, 0.0)
        with pytest.raises(ValueError):
            click_probability(0.0, 1.0)

    @given(
        st.floats(min_value=0.0, max_value=20.0),
        st.floats(min_value=0.0, max_value=0.99),
    )
    def test_bounds_and_monotonicity(self, mu, pd):
        p = click_probability(mu, pd)
        assert pd <= p < 1.0
        assert click_probability(mu + 0.1, pd) > p or pd > 1 - 1e-12
        if pd + 0.005 < 1.0:
            assert click_probability(mu, pd + 0.005) > p


class TestDeriveIntensities:
    def test_paper_params(self, paper_params):
        derived = derive_intensities(paper_params)
        mu_b = 0.27 * 10.0 ** -0.6 * 0.1
        assert derived.mu_at_detector == pytest.approx(mu_b, abs=1e-15)
        assert derived.mu_at_detector == pytest.approx(6.782e-3, abs=1e-6)
        assert derived.mu_leak == pytest.approx(0.005 * mu_b, abs=1e-15)
        assert derived.mu_leak == pytest.approx(3.391e-5, abs=1e-8)
        assert derived.effective_intensity == pytest.approx(
            mu_b * (1 - 2 * math.sqrt(0.005)), abs=1e-15
        )
        assert derived.effective_intensity == pytest.approx(5.823e-3, abs=1e-6)

    def test_zero_loss_no_error(self):
        derived = derive_intensities(ExperimentParams(0.3, 0.0, 0.0, 1.0, 0.0, 0.0))
        assert derived.mu_at_detector == 0.3
        assert derived.effective_intensity == 0.3
        # with q = 0 there is no residual after a perfect displacement
        assert derived.mu_leak == 0.0

    def test_blind_detector(self):
        derived = derive_intensities(ExperimentParams(0.3, 3.0, 6.0, 0.0, 0.1, 0.0))
        assert derived.mu_at_detector == 0.0
        assert derived.mu_leak == 0.0
        assert derived.effective_intensity == 0.0

    @given(
        st.floats(min_value=0.0, max_value=5.0),
        st.floats(min_value=0.0, max_value=20.0),
        st.floats(min_value=0.0, max_value=20.0),
        st.floats(min_value=0.0, max_value=1.0),
        st.floats(min_value=0.0, max_value=1.0),
    )
    def test_ordering_invariants(self, alpha_sq, at, ab, eta, q):
        derived = derive_intensities(ExperimentParams(alpha_sq, at, ab, eta, q, 0.0))
        assert 0.0 <= derived.mu_leak <= derived.mu_at_detector <= alpha_sq + 1e-15
        assert derived.effective_intensity <= derived.mu_at_detector + 1e-15


class TestHomodyne:
    def test_vacuum(self):
        assert homodyne_success(0.0) == 0.5

    def test_operating_point_against_quadrature_integral(self):
        # independent oracle: integrate the two unit-variance Gaussians at
        # mean +/- 2a and compute the sign-discrimination success directly
        a = math.sqrt(0.27)
        correct, _ = integrate.quad(
            lambda x: math.exp(-((x - 2 * a) ** 2) / 2) / math.sqrt(2 * math.pi),
            0.0,
            30.0,
        )
        assert homodyne_success(0.27) == pytest.approx(correct, abs=1e-9)
        assert homodyne_success(0.27) == pytest.approx(0.8506, abs=1e-4)

    @given(st.floats(min_value=1e-4, max_value=8.0))
    def test_bound_ordering(self, alpha_sq):
        h = homodyne_success(alpha_sq)
        best = helstrom_success(overlap_sq(alpha_sq))
        assert 0.5 < h < best < 1.0


class TestExperimentParamsValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"alpha_sq": -0.1},
            {"att_transmission_db": -1.0},
            {"att_bob_db": -0.5},
            {"detector_efficiency": 1.5},
            {"detector_efficiency": -0.1},
            {"qber_per_photon": 1.2},
            {"dark_count_prob": 1.0},
            {"dark_count_prob": -1e-9},
        ],
    )
    def test_rejects_out_of_range(self, kwargs):
        base = dict(
            alpha_sq=0.27,
            att_transmission_db=0.0,
            att_bob_db=6.0,
            detector_efficiency=0.1,
            qber_per_photon=0.005,
            dark_count_prob=4.7e-5,
        )
        base.update(kwargs)
        with pytest.raises(ValueError):
            ExperimentParams(**base)

    def test_visibility(self, paper_params):
        assert paper_params.visibility == pytest.approx(0.99, abs=1e-12)
