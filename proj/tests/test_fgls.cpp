#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mvgls/errors.hpp"
#include "mvgls/fgls.hpp"
#include "mvgls/linalg.hpp"
#include "mvgls/model.hpp"
#include "mvgls/rng.hpp"
#include "mvgls/simulate.hpp"
#include "mvgls/var_errors.hpp"

using namespace mvgls;

namespace {

struct ScalarData {
    Vector y, x;
};

ScalarData scalar_ar1_data(int T, double phi, std::uint64_t seed) {
    RngStream rng(seed);
    ScalarData d;
    d.y.resize(T);
    d.x.resize(T);
    double e = 0.0, xv = 0.0;
    for (int t = 0; t < T; ++t) {
        xv = 0.5 * xv + rng.next_gaussian();
        e = phi * e + rng.next_gaussian();
        d.x[t] = xv;
        d.y[t] = 0.2 + 1.5 * xv + e;
    }
    return d;
}

PanelData to_panel(const ScalarData& d) {
    int T = int(d.y.size());
    Matrix y(T, 1), x(T, 1);
    for (int t = 0; t < T; ++t) {
        y(t, 0) = d.y[t];
        x(t, 0) = d.x[t];
    }
    return PanelData::from_common_factors(y, x);
}

// Textbook scalar transform-then-OLS oracle. keep_first switches between the
// variance-rescaled first row (Prais-Winsten) and dropping it (Cochrane-Orcutt).
std::pair<double, double> scalar_gls_oracle(const ScalarData& d, double phi, bool keep_first) {
    int T = int(d.y.size());
    std::vector<double> ys, cs, xs;
    if (keep_first) {
        double w = std::sqrt(1.0 - phi * phi);
        ys.push_back(w * d.y[0]);
        cs.push_back(w);
        xs.push_back(w * d.x[0]);
    }
    for (int t = 1; t < T; ++t) {
        ys.push_back(d.y[t] - phi * d.y[t - 1]);
        cs.push_back(1.0 - phi);
        xs.push_back(d.x[t] - phi * d.x[t - 1]);
    }
    double scc = 0, scx = 0, sxx = 0, scy = 0, sxy = 0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        scc += cs[i] * cs[i];
        scx += cs[i] * xs[i];
        sxx += xs[i] * xs[i];
        scy += cs[i] * ys[i];
        sxy += xs[i] * ys[i];
    }
    double det = scc * sxx - scx * scx;
    double alpha = (sxx * scy - scx * sxy) / det;
    double beta = (scc * sxy - scx * scy) / det;
    return {alpha, beta};
}

VarFit scalar_var_fit(double phi, double omega) {
    VarFit fit;
    fit.p = 1;
    fit.phi = {Matrix::from_rows({{phi}})};
    fit.omega = Matrix::from_rows({{omega}});
    fit.sample_used = 0;
    return fit;
}

PanelData dgp_panel(int N, int k, int T, double phi_diag, std::uint64_t seed) {
    SimConfig cfg;
    cfg.N = N;
    cfg.k = k;
    cfg.T = T;
    cfg.phi_diag = phi_diag;
    cfg.seed = seed;
    RngStream sigma_rng = RngStream::derive(seed, 0, 0);
    Matrix omega = gen_omega(N, cfg.rho, sigma_rng);
    RngStream panel_rng = RngStream::derive(seed, 0, 1);
    return gen_panel(cfg, omega, panel_rng);
}

Matrix random_spd(int n, RngStream& rng) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.next_gaussian();
    Matrix a = g.transpose() * g;
    for (int i = 0; i < n; ++i) a(i, i) += 0.3;
    a.symmetrize();
    return a;
}

}  // namespace

TEST_CASE("quasi-differencing with p = 0 is the identity") {
    PanelData p = dgp_panel(2, 2, 60, 0.0, 1);
    StackedModel model(p);
    VarFit fit = fit_var(ols_fit(model).residuals, 0);
    QdModel qd = quasi_difference(model, fit);
    CHECK(qd.split() == 0);
    CHECK(qd.yqd() == p.y_matrix());
    CHECK(qd.zqd_block(5) == model.z_block(5));
}

TEST_CASE("quasi-differencing matches the scalar transform") {
    ScalarData d = scalar_ar1_data(30, 0.5, 3);
    PanelData p = to_panel(d);
    StackedModel model(p);
    for (double omega : {1.0, 2.0}) {
        QdModel qd = quasi_difference(model, scalar_var_fit(0.5, omega));
        double w = std::sqrt(0.75);
        // first row rescaled; the rescale does not depend on omega
        CHECK(qd.c_qd1()(0, 0) == doctest::Approx(w).epsilon(1e-12));
        CHECK(qd.yqd()(0, 0) == doctest::Approx(w * d.y[0]).epsilon(1e-12));
        Matrix z0 = qd.zqd_block(0);
        CHECK(z0(0, 0) == doctest::Approx(w).epsilon(1e-12));
        CHECK(z0(0, 1) == doctest::Approx(w * d.x[0]).epsilon(1e-12));
        // later rows lag-differenced
        for (int t : {1, 7, 29}) {
            CHECK(qd.yqd()(t, 0) == doctest::Approx(d.y[t] - 0.5 * d.y[t - 1]).epsilon(1e-12));
            Matrix zt = qd.zqd_block(t);
            CHECK(zt(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
            CHECK(zt(0, 1) == doctest::Approx(d.x[t] - 0.5 * d.x[t - 1]).epsilon(1e-12));
        }
    }
}

TEST_CASE("zero coefficient VAR(1) leaves rows unchanged") {
    PanelData p = dgp_panel(3, 1, 50, 0.0, 5);
    StackedModel model(p);
    RngStream rng(9);
    VarFit fit;
    fit.p = 1;
    fit.phi = {Matrix(3, 3)};
    fit.omega = random_spd(3, rng);
    QdModel qd = quasi_difference(model, fit);
    // QD2 rows identical to the raw rows
    for (int t = 1; t < 50; ++t)
        for (int i = 0; i < 3; ++i)
            CHECK(qd.yqd()(t, i) == doctest::Approx(p.y(t, i)).epsilon(1e-14));
    // first row scaled by Omega^{1/2} Omega^{-1/2} = I
    for (int i = 0; i < 3; ++i)
        CHECK(qd.yqd()(0, i) == doctest::Approx(p.y(0, i)).epsilon(1e-10));
    CHECK((qd.c_qd1() - Matrix::identity(3)).max_abs() < 1e-10);
}

TEST_CASE("p = 0 weights cancel against ols") {
    PanelData p = dgp_panel(3, 2, 80, 0.0, 11);
    StackedModel model(p);
    OlsFit ols = ols_fit(model);

    VarFit iso;
    iso.p = 0;
    iso.omega = Matrix::identity(3);
    GlsFit pw = pw_fgls(model, iso);
    for (std::size_t i = 0; i < pw.kappa_hat.size(); ++i)
        CHECK(pw.kappa_hat[i] == doctest::Approx(ols.kappa_hat[i]).epsilon(1e-12));

    iso.omega = Matrix::identity(3) * 2.5;
    GlsFit pw2 = pw_fgls(model, iso);
    for (std::size_t i = 0; i < pw2.kappa_hat.size(); ++i)
        CHECK(pw2.kappa_hat[i] == doctest::Approx(ols.kappa_hat[i]).epsilon(1e-10));
}

TEST_CASE("common regressors collapse gls to ols for any weight") {
    PanelData p = dgp_panel(4, 2, 100, 0.0, 13);  // common factors by construction
    StackedModel model(p);
    OlsFit ols = ols_fit(model);
    RngStream rng(15);
    for (int rep = 0; rep < 5; ++rep) {
        VarFit w;
        w.p = 0;
        w.omega = random_spd(4, rng);
        GlsFit pw = pw_fgls(model, w);
        double scale = 0.0, err = 0.0;
        for (std::size_t i = 0; i < pw.kappa_hat.size(); ++i) {
            scale = std::max(scale, std::fabs(ols.kappa_hat[i]));
            err = std::max(err, std::fabs(pw.kappa_hat[i] - ols.kappa_hat[i]));
        }
        CHECK(err / std::max(scale, 1.0) < 1e-8);
    }
}

TEST_CASE("scalar estimators match the textbook oracle") {
    for (std::uint64_t seed : {21ull, 22ull, 23ull, 24ull, 25ull}) {
        ScalarData d = scalar_ar1_data(120, 0.5, seed);
        PanelData p = to_panel(d);
        StackedModel model(p);
        // use the fitted AR coefficient so oracle and estimator share phi
        OlsFit ols = ols_fit(model);
        VarFit var = fit_var(ols.residuals, 1);
        double phi = var.phi[0](0, 0);

        GlsFit pw = pw_fgls(model, var);
        auto [a_pw, b_pw] = scalar_gls_oracle(d, phi, true);
        CHECK(pw.kappa_hat[0] == doctest::Approx(a_pw).epsilon(1e-10));
        CHECK(pw.kappa_hat[1] == doctest::Approx(b_pw).epsilon(1e-10));

        GlsFit co = co_fgls(model, var);
        auto [a_co, b_co] = scalar_gls_oracle(d, phi, false);
        CHECK(co.kappa_hat[0] == doctest::Approx(a_co).epsilon(1e-10));
        CHECK(co.kappa_hat[1] == doctest::Approx(b_co).epsilon(1e-10));
        CHECK(co.effective_T == 119);
        CHECK(pw.effective_T == 120);
    }
}

TEST_CASE("p = 0 gives bitwise-equal estimators") {
    PanelData p = dgp_panel(3, 2, 90, 0.0, 31);
    StackedModel model(p);
    VarFit var = fit_var(ols_fit(model).residuals, 0);
    GlsFit pw = pw_fgls(model, var);
    GlsFit co = co_fgls(model, var);
    CHECK(pw.kappa_hat == co.kappa_hat);  // exact element equality
    CHECK(pw.m_hat == co.m_hat);
    CHECK(pw.effective_T == co.effective_T);
    CHECK(pw.kind == GlsKind::PraisWinsten);
    CHECK(co.kind == GlsKind::CochraneOrcutt);
}

TEST_CASE("estimators shift by exactly delta when y shifts by Z delta") {
    PanelData p = dgp_panel(3, 1, 70, 0.3, 41);
    StackedModel model(p);
    VarFit var = fit_var(ols_fit(model).residuals, 1);

    Vector delta(model.dim());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = 0.05 * double(i + 1);

    PanelData shifted = p;
    for (int t = 0; t < p.T(); ++t) {
        Vector zd = model.z_block(t) * delta;
        for (int i = 0; i < p.N(); ++i) shifted.y(t, i) += zd[i];
    }
    StackedModel shifted_model(shifted);

    GlsFit pw0 = pw_fgls(model, var), pw1 = pw_fgls(shifted_model, var);
    GlsFit co0 = co_fgls(model, var), co1 = co_fgls(shifted_model, var);
    for (std::size_t i = 0; i < delta.size(); ++i) {
        CHECK(pw1.kappa_hat[i] - pw0.kappa_hat[i] == doctest::Approx(delta[i]).epsilon(1e-9));
        CHECK(co1.kappa_hat[i] - co0.kappa_hat[i] == doctest::Approx(delta[i]).epsilon(1e-9));
    }
}

TEST_CASE("m_hat is SPD and scales inversely with omega") {
    PanelData p = dgp_panel(3, 1, 80, 0.3, 51);
    StackedModel model(p);
    VarFit var = fit_var(ols_fit(model).residuals, 1);
    GlsFit base = pw_fgls(model, var);
    CHECK_NOTHROW(cholesky(base.m_hat));

    VarFit scaled = var;
    scaled.omega *= 4.0;
    GlsFit out = pw_fgls(model, scaled);
    CHECK((out.m_hat * 4.0 - base.m_hat).max_abs() / base.m_hat.max_abs() < 1e-10);
    // the estimate itself is unchanged by the weight scale
    for (std::size_t i = 0; i < base.kappa_hat.size(); ++i)
        CHECK(out.kappa_hat[i] == doctest::Approx(base.kappa_hat[i]).epsilon(1e-10));
}

TEST_CASE("gls residuals on the differenced rows are white") {
    std::vector<double> norms;
    for (int s = 0; s < 9; ++s) {
        int T = 2000;
        PanelData p = dgp_panel(3, 2, T, 0.3, 600 + s);
        StackedModel model(p);
        VarFit var = fit_var(ols_fit(model).residuals, 1);
        GlsFit pw = pw_fgls(model, var);
        QdModel qd = quasi_difference(model, var);
        Matrix eps(T - 1, 3);
        for (int t = 1; t < T; ++t) {
            Vector fitv = qd.zqd_block(t) * pw.kappa_hat;
            for (int i = 0; i < 3; ++i) eps(t - 1, i) = qd.yqd()(t, i) - fitv[i];
        }
        VarFit refit = fit_var(eps, 1);
        norms.push_back(refit.phi[0].max_abs());
    }
    std::sort(norms.begin(), norms.end());
    CHECK(norms[norms.size() / 2] < 5.0 / std::sqrt(2000.0));
}

TEST_CASE("pw and co agree at large T under the autocorrelated design") {
    std::vector<double> gaps;
    for (int s = 0; s < 50; ++s) {
        PanelData p = dgp_panel(6, 3, 3200, 0.3, 900 + s);
        StackedModel model(p);
        OlsFit ols = ols_fit(model);
        int lag = select_lag_bic(ols.residuals, 5);
        VarFit var = fit_var(ols.residuals, lag);
        FglsPair pair = fgls_both(model, var);
        REQUIRE(pair.pw.has_value());
        REQUIRE(pair.co.has_value());
        double gap = 0.0;
        for (std::size_t i = 0; i < pair.pw->kappa_hat.size(); ++i)
            gap = std::max(gap, std::fabs(pair.pw->kappa_hat[i] - pair.co->kappa_hat[i]));
        gaps.push_back(gap);
    }
    std::sort(gaps.begin(), gaps.end());
    CHECK(gaps[gaps.size() / 2] < 0.01);
}

TEST_CASE("nonstationary fit blocks pw but not co") {
    PanelData p = dgp_panel(2, 1, 60, 0.0, 71);
    StackedModel model(p);
    VarFit unit;
    unit.p = 1;
    unit.phi = {Matrix::identity(2) * 1.05};  // explosive but with a usable design
    unit.omega = Matrix::identity(2);
    CHECK_THROWS_AS(quasi_difference(model, unit), NonStationaryVar);
    CHECK_THROWS_AS(pw_fgls(model, unit), NonStationaryVar);
    CHECK_NOTHROW(co_fgls(model, unit));
    FglsPair pair = fgls_both(model, unit);
    CHECK(pair.nonstationary);
    CHECK_FALSE(pair.pw.has_value());
    CHECK(pair.co.has_value());
}
