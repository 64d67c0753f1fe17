import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from covartail import copulas as cp
from covartail import tailmodels as tm
from covartail.errors import OutOfRangeError, WrongRegimeError
from covartail.numerics import student_t_cdf

GUMBEL2 = tm.TailModel("attraction", "reflected_gumbel_tdf", (2.0,))
CLAYTON1 = tm.TailModel("attraction", "clayton_tdf", (1.0,))
T_MODEL = tm.TailModel("mixed", "student_t_tdf", (0.5, 4.0))
FRANK1 = tm.TailModel("balance", "frank_boundary", (1.0,))
IPS1 = tm.TailModel("balance", "reflected_ips_boundary", (1.0,))


class TestTailModelValidation:
    def test_regime_family_compatibility(self):
        with pytest.raises(ValueError):
            tm.TailModel("balance", "clayton_tdf", (1.0,))
        with pytest.raises(ValueError):
            tm.TailModel("mixed", "reflected_gumbel_tdf", (2.0,))
        with pytest.raises(ValueError):
            tm.TailModel("attraction", "frank_boundary", (1.0,))

    def test_param_domains(self):
        with pytest.raises(ValueError):
            tm.TailModel("attraction", "reflected_gumbel_tdf", (0.5,))
        with pytest.raises(ValueError):
            tm.TailModel("attraction", "clayton_tdf", (-1.0,))
        with pytest.raises(ValueError):
            tm.TailModel("mixed", "student_t_tdf", (1.5, 4.0))


class TestTdf:
    def test_student_t_rho_zero(self):
        # b(1,1) = 2 T_{nu+1}(-sqrt(nu+1)) when rho = 0
        for nu in (2.0, 4.0, 9.0):
            m = tm.TailModel("mixed", "student_t_tdf", (0.0, nu))
            want = 2.0 * student_t_cdf(-math.sqrt(nu + 1.0), nu + 1.0)
            assert_allclose(tm.tdf_eval(m, 1.0, 1.0), want, atol=1e-12)

    def test_reflected_gumbel_diagonal(self):
        assert_allclose(tm.tdf_eval(GUMBEL2, 1.0, 1.0), 2.0 - math.sqrt(2.0), atol=1e-14)

    def test_clayton_diagonal(self):
        assert_allclose(tm.tdf_eval(CLAYTON1, 1.0, 1.0), 0.5, atol=1e-15)

    @pytest.mark.parametrize("m", [GUMBEL2, CLAYTON1, T_MODEL,
                                   tm.TailModel("repulsion", "clayton_tdf", (2.0,))])
    def test_homogeneity(self, m):
        w1 = np.array([0.2, 1.0, 1.5])
        w2 = np.array([1.3, 0.4, 0.8])
        base = tm.tdf_eval(m, w1, w2)
        for t in (0.5, 2.0, 10.0):
            assert_allclose(tm.tdf_eval(m, t * w1, t * w2), t * base, atol=1e-10)

    @pytest.mark.parametrize("m", [GUMBEL2, CLAYTON1, T_MODEL])
    def test_comonotone_bound(self, m):
        w1 = np.linspace(0.05, 1.95, 25)
        w2 = 2.0 - w1
        assert np.all(tm.tdf_eval(m, w1, w2) <= np.minimum(w1, w2) + 1e-12)

    def test_student_t_symmetric(self):
        vals1 = tm.tdf_eval(T_MODEL, 0.3, 1.4)
        vals2 = tm.tdf_eval(T_MODEL, 1.4, 0.3)
        assert_allclose(vals1, vals2, atol=1e-14)

    def test_balance_model_rejected(self):
        with pytest.raises(WrongRegimeError):
            tm.tdf_eval(FRANK1, 1.0, 1.0)


class TestHFunction:
    def test_clayton_closed_form(self):
        # H(r) = r / (1 + r) at theta = 1
        for r in (0.25, 1.0, 4.0):
            assert_allclose(tm.H_eval(CLAYTON1, r), r / (1.0 + r), atol=1e-14)
        assert_allclose(tm.H_inverse(CLAYTON1, 0.5), 1.0, rtol=1e-10)

    def test_b_inf_values(self):
        assert tm.b_inf(GUMBEL2) == 1.0
        assert tm.b_inf(CLAYTON1) == 1.0
        rho, nu = T_MODEL.params
        k = math.sqrt((nu + 1.0) / (1.0 - rho * rho))
        assert_allclose(tm.b_inf(T_MODEL), student_t_cdf(rho * k, nu + 1.0), atol=1e-14)

    def test_b_inf_matches_large_r_limit(self):
        # far-tail evaluation approaches the closed-form supremum
        for m in (tm.TailModel("attraction", "clayton_tdf", (2.0,)),
                  tm.TailModel("attraction", "reflected_gumbel_tdf", (3.0,))):
            h8 = tm.H_eval(m, 1e8)
            h9 = tm.H_eval(m, 1e9)
            assert abs(h9 - tm.b_inf(m)) <= abs(h8 - tm.b_inf(m)) + 1e-15
            assert abs(h9 - tm.b_inf(m)) < 1e-5

    def test_gumbel_inverse_diverges_near_one(self):
        assert tm.H_inverse(GUMBEL2, 0.999) > tm.H_inverse(GUMBEL2, 0.9) > 1.0

    @pytest.mark.parametrize("m", [GUMBEL2, CLAYTON1, T_MODEL])
    def test_round_trip(self, m):
        sup = tm.b_inf(m)
        for q in (0.05, 0.3, 0.6):
            if q >= sup:
                continue
            r = tm.H_inverse(m, q)
            assert abs(tm.H_eval(m, r) - q) < 1e-10

    def test_out_of_range_reports_b_inf(self):
        with pytest.raises(OutOfRangeError) as err:
            tm.H_inverse(T_MODEL, 0.95)
        assert err.value.b_inf == pytest.approx(tm.b_inf(T_MODEL))


class TestBoundaryCdf:
    def test_frank_value(self):
        want = (1.0 - math.exp(-0.5)) / (1.0 - math.exp(-1.0))
        assert_allclose(tm.boundary_cdf_eval(FRANK1, 0.5), want, atol=1e-14)

    def test_frank_upper_endpoint(self):
        for theta in (-4.0, 0.5, 6.0):
            m = tm.TailModel("balance", "frank_boundary", (theta,))
            assert_allclose(tm.boundary_cdf_eval(m, 1.0 - 1e-12), 1.0, atol=1e-9)

    def test_ips_theta_one_is_identity(self):
        for v in (0.1, 0.5, 0.9):
            assert_allclose(tm.boundary_cdf_eval(IPS1, v), v, atol=1e-12)

    @pytest.mark.parametrize("m", [FRANK1, IPS1,
                                   tm.TailModel("balance", "reflected_ips_boundary", (2.3,)),
                                   tm.TailModel("balance", "frank_boundary", (-3.0,))])
    def test_round_trip_and_monotone(self, m):
        grid = np.linspace(0.02, 0.98, 25)
        vals = [tm.boundary_cdf_eval(m, v) for v in grid]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        for q in (0.1, 0.5, 0.9):
            v = tm.boundary_cdf_inverse(m, q)
            assert abs(tm.boundary_cdf_eval(m, v) - q) < 1e-10

    def test_two_reflection_identity(self):
        # A of the 2-reflected model satisfies A2*(v) = 1 - A(1 - v)
        m_pos = tm.TailModel("balance", "frank_boundary", (2.0,))
        m_neg = tm.TailModel("balance", "frank_boundary", (-2.0,))
        for v in np.linspace(0.05, 0.95, 19):
            lhs = tm.boundary_cdf_eval(m_neg, v)
            rhs = 1.0 - tm.boundary_cdf_eval(m_pos, 1.0 - v)
            assert abs(lhs - rhs) < 1e-12

    def test_wrong_regime(self):
        with pytest.raises(WrongRegimeError):
            tm.boundary_cdf_eval(GUMBEL2, 0.5)
        with pytest.raises(WrongRegimeError):
            tm.boundary_cdf_inverse(GUMBEL2, 0.5)


class TestCatalogForms:
    def test_v_qp_examples(self):
        assert_allclose(tm.catalog_v_qp("clayton", (1.0,), 0.5, 0.1), 0.1, atol=1e-14)
        want_frank = -math.log(1.0 - 0.5 * (1.0 - math.exp(-1.0)))
        for p in (0.03, 0.4):
            assert_allclose(tm.catalog_v_qp("frank", (1.0,), 0.5, p), want_frank,
                            atol=1e-14)
        assert_allclose(tm.catalog_v_qp("clayton_2star", (1.0,), 0.5, 0.1), 0.9,
                        atol=1e-14)

    def test_gumbel_star_uses_h_inverse(self):
        m = tm.TailModel("attraction", "reflected_gumbel_tdf", (2.0,))
        got = tm.catalog_v_qp("gumbel_star", (2.0,), 0.5, 0.01)
        assert_allclose(got, tm.H_inverse(m, 0.5) * 0.01, rtol=1e-10)
        # H(r) = 0.5 at r = 0.75 for delta = 2
        assert_allclose(tm.H_inverse(m, 0.5), 0.75, rtol=1e-10)

    def test_vp_examples(self):
        assert tm.catalog_vp("clayton", (1.0,), 1e-3) == 1e-6
        assert tm.catalog_vp("gumbel_star", (2.0,), 1e-3) == 1e-6
        assert_allclose(tm.catalog_vp("frank", (1.0,), 1e-3),
                        (1.0 - math.exp(-1.0)) * 1e-3, atol=1e-18)
        assert_allclose(tm.catalog_vp("clayton_2star", (0.5,), 1e-4), 1e-2, atol=1e-15)
        # ips branches
        got = tm.catalog_vp("ips_star", (2.0,), 1e-2)
        assert_allclose(got, math.gamma(3.0) ** -0.5 * (1e-2) ** 1.5, rtol=1e-12)
        got = tm.catalog_vp("ips_star", (0.5,), 1e-2)
        assert_allclose(got, (1e-2) ** 0.5 / math.gamma(1.5), rtol=1e-12)

    @pytest.mark.parametrize("family", ["ips_star", "clayton_2star"])
    def test_branch_boundary_rejected(self, family):
        with pytest.raises(ValueError, match="branch"):
            tm.catalog_vp(family, (1.0,), 1e-3)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            tm.catalog_v_qp("galambos", (1.0,), 0.5, 0.1)

    # Final-p tolerance is measured from the families' own convergence
    # rates: the ips_star correction decays like sqrt(p) and gumbel_2star
    # carries log-p factors, so both sit just above 2% at p = 1e-4.
    @pytest.mark.parametrize("family,params,spec,tol4", [
        ("clayton", (1.0,), cp.clayton(1.0), 0.02),
        ("gumbel_star", (2.0,), cp.gumbel(2.0, "survival"), 0.02),
        ("ips_star", (2.0,), cp.ips(2.0, "survival"), 0.025),
        ("ips_star", (0.5,), cp.ips(0.5, "survival"), 0.02),
        ("frank", (1.0,), cp.frank(1.0), 0.02),
        ("gumbel_2star", (2.0,), cp.gumbel(2.0, "reflect2"), 0.025),
        ("clayton_2star", (0.5,), cp.clayton(0.5, "reflect2"), 0.02),
    ])
    def test_v_qp_matches_exact_inversion_asymptotically(self, family, params, spec, tol4):
        q = 0.5
        ratios = [cp.v_exact(spec, q, p) / tm.catalog_v_qp(family, params, q, p)
                  for p in (1e-2, 1e-3, 1e-4, 1e-5)]
        drifts = [abs(r - 1.0) for r in ratios]
        assert drifts[0] >= drifts[1] >= drifts[2] >= drifts[3] - 1e-9
        assert drifts[2] < tol4
        assert drifts[3] < 0.017


class TestLimits:
    def test_vp_rate_branches(self):
        assert tm.vp_rate(tm.LimitInputs(1.0, 1.0)).exponent == 2.0
        assert tm.vp_rate(tm.LimitInputs(2.0, 1.0)).exponent == 1.0
        assert tm.vp_rate(tm.LimitInputs(2.5, 1.0)).exponent == 0.5
        res = tm.vp_rate(tm.LimitInputs(3.5, 1.0))
        assert res.to_one and res.exponent is None

    def test_delta_covar_light_tail(self):
        assert tm.delta_covar_limit(tm.LimitInputs(2.0, 1.0, xi=0.0)).value == 0.0
        got = tm.delta_covar_limit(tm.LimitInputs(1.0, 1.0, xi=0.0, gamma=1.0))
        assert got.value == -1.0
        got = tm.delta_covar_limit(tm.LimitInputs(2.5, 1.0, xi=0.0, gamma=2.0))
        assert_allclose(got.value, 1.0 - 0.25, atol=1e-15)
        assert got.label == "attenuation"

    def test_delta_covar_heavy_tail(self):
        got = tm.delta_covar_limit(tm.LimitInputs(1.5, 1.0, xi=0.4))
        assert got.value == -math.inf and got.rate_exponent == -(0.5 * 0.4)
        got = tm.delta_covar_limit(tm.LimitInputs(2.0, 1.0, xi=0.3, a0=1.0))
        assert got.value == 0.0
        got = tm.delta_covar_limit(tm.LimitInputs(2.0, 1.0, xi=0.3, a0=2.0))
        assert_allclose(got.value, 1.0 - 2.0 ** -0.3, atol=1e-15)
        got = tm.delta_covar_limit(tm.LimitInputs(2.5, 1.0, xi=0.3))
        assert got.value == 1.0 and got.rate_exponent == pytest.approx(0.15)

    def test_continuity_at_kappa_two(self):
        eps = 1e-9
        below = tm.delta_covar_limit(tm.LimitInputs(2.0 - eps, 1.0, xi=0.0, gamma=1.5))
        above = tm.delta_covar_limit(tm.LimitInputs(2.0 + eps, 1.0, xi=0.0, gamma=1.5))
        assert abs(below.value) < 1e-8 and abs(above.value) < 1e-8

    def test_missing_a0_raises(self):
        with pytest.raises(ValueError, match="a0"):
            tm.delta_covar_limit(tm.LimitInputs(2.0, 1.0, xi=0.3))

    def test_missing_gamma_raises(self):
        with pytest.raises(ValueError, match="gamma"):
            tm.delta_covar_limit(tm.LimitInputs(1.5, 1.0, xi=0.0))

    def test_gamma_infinity_flagged(self):
        got = tm.delta_covar_limit(tm.LimitInputs(1.5, 1.0, xi=0.0, gamma=math.inf))
        assert got.gamma_infinite and got.value == -math.inf
        got = tm.delta_covar_limit(tm.LimitInputs(2.5, 1.0, xi=0.0, gamma=math.inf))
        assert got.gamma_infinite and got.value == 1.0

    def test_kappa_beyond_range_rejected(self):
        with pytest.raises(ValueError):
            tm.delta_covar_limit(tm.LimitInputs(3.5, 1.0, xi=0.0, gamma=1.0))

    def test_input_validation(self):
        with pytest.raises(ValueError):
            tm.LimitInputs(0.5, 1.0)
        with pytest.raises(ValueError):
            tm.LimitInputs(1.5, -1.0)


class TestRegimes:
    def test_catalogued_rows(self):
        info = tm.theoretical_regime(cp.clayton(1.0))
        assert (info.regime, info.kappa, info.kappa_2star) == ("attraction", 1.0, 3.0)
        info = tm.theoretical_regime(cp.student_t(0.5, 4.0))
        assert info.regime == "mixed" and info.kappa == info.kappa_2star == 1.0
        info = tm.theoretical_regime(cp.frank(1.0))
        assert (info.regime, info.kappa) == ("balance", 2.0)
        info = tm.theoretical_regime(cp.ips(2.0, "survival"))
        assert (info.regime, info.kappa) == ("balance", 1.5)
        info = tm.theoretical_regime(cp.gumbel(2.0, "survival"))
        assert (info.regime, info.kappa, info.kappa_2star) == ("attraction", 1.0, 3.0)
        info = tm.theoretical_regime(cp.gumbel(2.0, "reflect2"))
        assert info.regime == "repulsion" and info.kappa == 3.0
        info = tm.theoretical_regime(cp.clayton(2.0, "reflect2"))
        assert (info.regime, info.kappa_2star) == ("repulsion", 1.0)

    def test_nonuniform_caveats(self):
        assert tm.theoretical_regime(cp.gumbel(2.0)).caveat
        assert tm.theoretical_regime(cp.gaussian(0.5)).caveat
        assert not tm.theoretical_regime(cp.gumbel(2.0, "survival")).caveat
        g = tm.theoretical_regime(cp.gaussian(-0.5))
        assert g.regime == "repulsion" and g.caveat

    def test_base_ips_not_catalogued(self):
        with pytest.raises(ValueError, match="not catalogued"):
            tm.theoretical_regime(cp.ips(2.0))

    def test_bounds(self):
        assert tm.theoretical_regime(cp.comonotone()).regime == "attraction"
        assert tm.theoretical_regime(cp.countermonotone()).regime == "repulsion"
        assert tm.theoretical_regime(cp.independence()).regime == "balance"


class TestBoundaryAtoms:
    def test_examples(self):
        assert tm.boundary_atoms(GUMBEL2) == (1.0, 0.0)
        assert tm.boundary_atoms(FRANK1) == (0.0, 0.0)
        m = tm.TailModel("mixed", "student_t_tdf", (0.0, 4.0))
        assert_allclose(tm.boundary_atoms(m), (0.5, 0.5), atol=1e-14)

    def test_repulsion(self):
        m = tm.TailModel("repulsion", "clayton_tdf", (1.0,))
        assert tm.boundary_atoms(m) == (0.0, 1.0)


class TestTrueTailModel:
    def test_catalog(self):
        m = tm.true_tail_model(cp.clayton(2.0))
        assert (m.regime, m.family) == ("attraction", "clayton_tdf")
        m = tm.true_tail_model(cp.gumbel(2.0, "survival"))
        assert (m.regime, m.family) == ("attraction", "reflected_gumbel_tdf")
        m = tm.true_tail_model(cp.clayton(1.0, "reflect2"))
        assert (m.regime, m.family) == ("repulsion", "clayton_tdf")
        m = tm.true_tail_model(cp.frank(5.0))
        assert (m.regime, m.family) == ("balance", "frank_boundary")
        m = tm.true_tail_model(cp.student_t(0.5, 4.0, "reflect2"))
        assert m.params == (-0.5, 4.0)

    def test_uncatalogued(self):
        with pytest.raises(ValueError):
            tm.true_tail_model(cp.gaussian(0.5))
