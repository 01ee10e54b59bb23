"""Checks for the lacunary divergence pair.

Default parameters give indices 16^k with decay weight exactly 2^-k, so
most quantities have closed forms good to machine precision; a non-default
exponent pair exercises the index search away from exact powers.
"""

import math

import numpy as np
import pytest

from focklab.counterexample import (
    CounterexampleParams,
    build_indices,
    coeffs,
    divergence_sum,
    full_report,
    growth_criterion_check,
    log_f_coeffs,
    log_f_coeffs_dual,
    membership_sums,
    pairing_term_identity,
)


DEFAULTS = CounterexampleParams()
OFFGRID = CounterexampleParams(p=1.5, q=2.5, terms=5)


class TestParams:

    def test_defaults(self):
        assert DEFAULTS.p == pytest.approx(4.0 / 3.0)
        assert DEFAULTS.q == 4.0
        assert DEFAULTS.exponent_gap == -0.5
        assert DEFAULTS.p_conjugate == pytest.approx(4.0)
        assert DEFAULTS.q_conjugate == pytest.approx(4.0 / 3.0)

    def test_exponent_order_enforced(self):
        with pytest.raises(ValueError):
            CounterexampleParams(p=4.0, q=4.0 / 3.0)
        with pytest.raises(ValueError):
            CounterexampleParams(p=1.0, q=4.0)

    def test_growth_base_gate(self):
        # bases at or below sqrt(3) would kill the divergence lower bound
        with pytest.raises(ValueError):
            CounterexampleParams(b=math.sqrt(3.0))
        with pytest.raises(ValueError):
            CounterexampleParams(b=2.0)

    def test_negative_term_count_rejected(self):
        with pytest.raises(ValueError):
            CounterexampleParams(terms=-1)


class TestIndices:

    def test_default_indices_are_powers_of_sixteen(self):
        assert build_indices(DEFAULTS) == [16 ** k for k in range(1, 9)]

    def test_zero_terms(self):
        assert build_indices(CounterexampleParams(terms=0)) == []

    def test_minimality_off_grid(self):
        # each index is the least n with n^(gap/2) <= 2^-k, and the decay
        # weight stays above the 3^-k floor
        gap = OFFGRID.exponent_gap
        idx = build_indices(OFFGRID)
        assert all(b > a for a, b in zip(idx, idx[1:]))
        for k, n in enumerate(idx, 1):
            assert n ** (gap / 2) <= 2.0 ** (-k) * (1 + 1e-12)
            assert (n - 1) ** (gap / 2) > 2.0 ** (-k) * (1 - 1e-12)
            assert n ** (gap / 2) >= 3.0 ** (-k) * (1 - 1e-12)


class TestCoefficients:

    def test_first_coefficient_log_closed_form(self):
        # log a_16 = ln b + (0 - ln 16!)/2 + (1/4 - 1/8) ln 16 - (1/4) ln 16
        expected = (math.log(1.9) - 0.5 * math.lgamma(17.0)
                    + (0.25 - 0.125) * math.log(16.0) - 0.25 * math.log(16.0))
        assert log_f_coeffs(DEFAULTS)[0] == pytest.approx(expected, rel=1e-14)

    def test_dual_form_identity(self):
        # the decay-weight and conjugate-exponent forms are the same numbers
        lf = log_f_coeffs(DEFAULTS)
        lfd = log_f_coeffs_dual(DEFAULTS)
        assert np.max(np.abs(lf - lfd) / np.abs(lf)) < 1e-12
        lo = log_f_coeffs(OFFGRID)
        lod = log_f_coeffs_dual(OFFGRID)
        assert np.max(np.abs(lo - lod) / np.abs(lo)) < 1e-12

    def test_series_structure(self):
        f, g = coeffs(DEFAULTS)
        assert f.indices == g.indices == tuple(16 ** k for k in range(1, 9))
        assert all(math.isfinite(v) for v in f.log_coeffs + g.log_coeffs)

    def test_zero_off_lacunary_set(self):
        f, _ = coeffs(DEFAULTS)
        assert f.coefficient_log(17) == -math.inf
        assert f.coefficient_log(16) == f.log_coeffs[0]

    def test_coefficient_product_nonnegative(self):
        # both sequences are positive reals, so a_n * conj(b_n) >= 0
        f, g = coeffs(DEFAULTS)
        products = [math.exp(a + b) for a, b in zip(f.log_coeffs, g.log_coeffs)
                    if a + b < 700.0]
        assert all(v >= 0.0 for v in products)


class TestMembership:

    def test_default_terms_close_geometric_form(self):
        ms = membership_sums(DEFAULTS)
        for k, (tf, tg) in enumerate(zip(ms.f_terms, ms.g_terms), 1):
            assert tf == pytest.approx((1.9 / 2.0) ** (4 * k), rel=1e-12)
            assert tg == pytest.approx((1.9 / 2.0) ** (4 * k), rel=1e-12)

    def test_default_ratios(self):
        ms = membership_sums(DEFAULTS)
        cap = (1.9 / 2.0) ** 4
        assert cap == pytest.approx(0.81450625, rel=1e-12)
        for r in ms.f_ratios + ms.g_ratios:
            assert r == pytest.approx(cap, rel=1e-12)

    def test_ratio_caps(self):
        ms = membership_sums(DEFAULTS)
        assert all(r <= (1.9 / 2.0) ** ms.f_exponent + 1e-9
                   for r in ms.f_ratios)
        assert all(r <= (1.9 / 2.0) ** ms.g_exponent + 1e-9
                   for r in ms.g_ratios)

    def test_terms_below_geometric_envelope_off_grid(self):
        # off exact powers the k-th decay weight is <= 2^-k, so each term
        # sits below the geometric envelope even though single ratios may
        # poke above it by an O(1/n_k) factor
        ms = membership_sums(OFFGRID)
        for k, (tf, tg) in enumerate(zip(ms.f_terms, ms.g_terms), 1):
            assert tf <= ((OFFGRID.b / 2.0) ** ms.f_exponent) ** k * (1 + 1e-9)
            assert tg <= ((OFFGRID.b / 2.0) ** ms.g_exponent) ** k * (1 + 1e-9)
        assert all(r < 1.0 for r in ms.f_ratios + ms.g_ratios)

    def test_partial_sums_cauchy(self):
        ms = membership_sums(DEFAULTS)
        limit_f = ms.f_terms[0] / (1.0 - (1.9 / 2.0) ** 4)
        assert all(s < limit_f for s in ms.f_partial_sums)
        increments = np.diff(ms.f_partial_sums)
        assert np.all(increments[1:] < increments[:-1])

    def test_printed_variant_recorded(self):
        ms = membership_sums(DEFAULTS)
        for k, t in enumerate(ms.printed_f_terms, 1):
            assert t == pytest.approx((1.9 / 2.0) ** (DEFAULTS.p * k),
                                      rel=1e-12)
        for g, tf, tp in zip(ms.printed_gap, ms.f_terms, ms.printed_f_terms):
            assert g == pytest.approx(abs(tf - tp), abs=1e-15)

    def test_single_term(self):
        ms = membership_sums(CounterexampleParams(terms=1))
        assert len(ms.f_terms) == 1
        assert ms.f_partial_sums == (ms.f_terms[0],)
        assert ms.f_ratios == ()


class TestDivergence:

    def test_default_term_ratio(self):
        dv = divergence_sum(DEFAULTS)
        for r in dv.ratios:
            assert abs(r - 1.805) < 1e-12

    def test_partial_sums_strictly_increase(self):
        for params in (DEFAULTS, OFFGRID):
            partials = divergence_sum(params).partial_sums
            assert all(b > a for a, b in zip(partials, partials[1:]))

    def test_lower_bound_ratio(self):
        for params in (DEFAULTS, OFFGRID):
            dv = divergence_sum(params)
            floor = params.b ** 2 / 3.0
            assert floor > 1.0
            assert all(r >= floor for r in dv.ratios)

    def test_single_term_scaled_alpha(self):
        dv = divergence_sum(CounterexampleParams(terms=1, alpha=math.pi))
        assert dv.partial_sums[0] == pytest.approx(1.805, rel=1e-12)

    def test_first_term_closed_form(self):
        dv = divergence_sum(DEFAULTS)
        assert dv.terms[0] == pytest.approx(math.pi * 1.9 ** 2 / 2.0,
                                            rel=1e-14)


class TestPairingIdentity:

    @pytest.mark.parametrize("k", [1, 2, 3, 5, 8])
    def test_agreement_defaults(self, k):
        lhs, rhs = pairing_term_identity(DEFAULTS, k)
        assert abs(lhs - rhs) / rhs < 1e-10

    def test_agreement_off_grid(self):
        for k in range(1, OFFGRID.terms + 1):
            lhs, rhs = pairing_term_identity(OFFGRID, k)
            assert abs(lhs - rhs) / rhs < 1e-10

    def test_alpha_rescaling(self):
        # both sides carry the same explicit pi/alpha factor
        base = pairing_term_identity(DEFAULTS, 4)
        scaled = pairing_term_identity(CounterexampleParams(alpha=3.0), 4)
        assert scaled[0] == pytest.approx(base[0] / 3.0, rel=1e-10)
        assert scaled[1] == pytest.approx(base[1] / 3.0, rel=1e-12)

    def test_rhs_closed_form(self):
        lhs, rhs = pairing_term_identity(DEFAULTS, 2)
        assert rhs == pytest.approx(math.pi * 1.9 ** 4 / 4.0, rel=1e-13)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            pairing_term_identity(DEFAULTS, 9)
        with pytest.raises(ValueError):
            pairing_term_identity(DEFAULTS, 0)


class TestGrowthCriterion:

    def test_ratios_are_powers_of_b(self):
        gr = growth_criterion_check(DEFAULTS)
        for k, (r, lr) in enumerate(zip(gr.ratios, gr.log_ratios), 1):
            assert lr == pytest.approx(k * math.log(1.9), abs=1e-12)
            assert r == pytest.approx(1.9 ** k, rel=1e-12)
        assert gr.ratios[4] == pytest.approx(24.76099, rel=1e-5)

    def test_diverges_flag(self):
        assert growth_criterion_check(DEFAULTS).diverges
        assert growth_criterion_check(OFFGRID).diverges

    def test_off_grid_log_ratios(self):
        gr = growth_criterion_check(OFFGRID)
        for k, lr in enumerate(gr.log_ratios, 1):
            assert lr == pytest.approx(k * math.log(OFFGRID.b), abs=1e-12)


class TestCoexistence:

    @pytest.mark.parametrize("params", [
        DEFAULTS,
        OFFGRID,
        CounterexampleParams(p=1.2, q=6.0, b=1.75, terms=4),
    ])
    def test_membership_converges_while_pairing_diverges(self, params):
        ms = membership_sums(params)
        dv = divergence_sum(params)
        assert all(r < 1.0 for r in ms.f_ratios + ms.g_ratios)
        assert all(r > 1.0 for r in dv.ratios)


class TestReport:

    def test_report_contents(self):
        rep = full_report(DEFAULTS)
        assert rep["indices"] == [16 ** k for k in range(1, 9)]
        assert len(rep["membership_f_terms"]) == 8
        assert len(rep["divergence_partial_sums"]) == 8
        assert max(rep["pairing_identity_residuals"]) < 1e-10
        assert rep["growth_diverges"] is True
        assert rep["divergence_ratios"][0] == pytest.approx(1.805, abs=1e-12)

    def test_report_is_json_ready(self):
        import json
        json.dumps(full_report(DEFAULTS))

    def test_empty_report(self):
        rep = full_report(CounterexampleParams(terms=0))
        assert rep["indices"] == []
        assert rep["pairing_identity_residuals"] == []


class TestDecayWindow:

    def test_default_weights_sit_on_the_upper_edge(self):
        gap = DEFAULTS.exponent_gap
        for k, n in enumerate(build_indices(DEFAULTS), 1):
            log_weight = 0.5 * gap * math.log(n)
            assert log_weight == pytest.approx(-k * math.log(2.0), abs=1e-12)

    def test_large_term_count_stays_in_window(self):
        # indices grow to 2^48 at 12 terms; the search must neither miss the
        # 2^-k target nor fall through the 3^-k floor on the way up
        params = CounterexampleParams(terms=12)
        idx = build_indices(params)
        assert idx[-1] == 16 ** 12
        assert len(idx) == 12
