#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mvgls/errors.hpp"
#include "mvgls/linalg.hpp"
#include "mvgls/rng.hpp"
#include "mvgls/var_errors.hpp"

using namespace mvgls;

namespace {

// e_t = phi e_{t-1} + u_t with u ~ N(0, omega), e_0 = 0
Matrix simulate_var1(const Matrix& phi, const Matrix& omega, int T, std::uint64_t seed) {
    int n = omega.rows();
    SpdFactor chol = cholesky(omega);
    RngStream rng(seed);
    Matrix e(T, n);
    Vector prev(n, 0.0), z(n), u(n);
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < n; ++i) z[i] = rng.next_gaussian();
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j <= i; ++j) s += chol.lower()(i, j) * z[j];
            u[i] = s;
        }
        for (int i = 0; i < n; ++i) {
            double v = u[i];
            for (int j = 0; j < n; ++j) v += phi(i, j) * prev[j];
            e(t, i) = v;
        }
        for (int i = 0; i < n; ++i) prev[i] = e(t, i);
    }
    return e;
}

Matrix white_noise(int T, int n, std::uint64_t seed) {
    return simulate_var1(Matrix(n, n), Matrix::identity(n), T, seed);
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("fit_var scalar series by hand") {
    // series (1, 2, 1): U = (2, 1), V = (1, 2), phi = 4/5, omega = 1.8/2
    Matrix e(3, 1);
    e(0, 0) = 1.0;
    e(1, 0) = 2.0;
    e(2, 0) = 1.0;
    VarFit fit = fit_var(e, 1);
    CHECK(fit.phi[0](0, 0) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(fit.omega(0, 0) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(fit.sample_used == 2);
}

TEST_CASE("fit_var with p = 0 returns the sample second moment") {
    Matrix e = white_noise(60, 3, 7);
    VarFit fit = fit_var(e, 0);
    CHECK(fit.p == 0);
    CHECK(fit.phi.empty());
    CHECK(fit.sample_used == 60);
    Matrix direct(3, 3);
    for (int t = 0; t < 60; ++t)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) direct(i, j) += e(t, i) * e(t, j) / 60.0;
    CHECK(max_abs_diff(fit.omega, direct) < 1e-12);
}

TEST_CASE("fit_var is consistent for a VAR(1)") {
    Matrix phi = Matrix::identity(2) * 0.3;
    int pass = 0;
    const int seeds = 25;
    for (int s = 0; s < seeds; ++s) {
        Matrix e = simulate_var1(phi, Matrix::identity(2), 3200, 100 + s);
        VarFit fit = fit_var(e, 1);
        if (max_abs_diff(fit.phi[0], phi) < 0.05) ++pass;
    }
    CHECK(pass >= seeds - 1);
}

TEST_CASE("fit_var whitens its own innovations") {
    Matrix phi = Matrix::identity(2) * 0.4;
    std::vector<double> norms;
    for (int s = 0; s < 11; ++s) {
        int T = 2000;
        Matrix e = simulate_var1(phi, Matrix::identity(2), T, 300 + s);
        VarFit fit = fit_var(e, 1);
        // innovations h_t = e_t - phi e_{t-1}, then refit
        Matrix h(T - 1, 2);
        for (int t = 1; t < T; ++t)
            for (int i = 0; i < 2; ++i) {
                double v = e(t, i);
                for (int j = 0; j < 2; ++j) v -= fit.phi[0](i, j) * e(t - 1, j);
                h(t - 1, i) = v;
            }
        VarFit refit = fit_var(h, 1);
        norms.push_back(refit.phi[0].max_abs());
    }
    std::sort(norms.begin(), norms.end());
    CHECK(norms[norms.size() / 2] < 5.0 / std::sqrt(2000.0));
}

TEST_CASE("omega is symmetric positive semidefinite") {
    Matrix e = simulate_var1(Matrix::identity(3) * 0.3, Matrix::identity(3), 500, 17);
    VarFit fit = fit_var(e, 2);
    CHECK(max_abs_diff(fit.omega, fit.omega.transpose()) == 0.0);
    SymEigen eig = sym_eigen(fit.omega);
    CHECK(eig.values.back() >= -1e-10 * fit.omega.trace());
}

TEST_CASE("fit_var guards its sample requirements") {
    Matrix e = white_noise(9, 2, 3);
    CHECK_THROWS_AS(fit_var(e, 4), InsufficientSample);  // 5 rows left, 8 regressors
    // constant series make the lag Gram singular
    Matrix c(40, 2, 1.0);
    CHECK_THROWS_AS(fit_var(c, 2), SingularGram);
}

TEST_CASE("bic picks 0 for white noise and 1 for a VAR(1)") {
    int zero_hits = 0, one_hits = 0;
    const int seeds = 40;
    for (int s = 0; s < seeds; ++s) {
        Matrix wn = white_noise(3200, 6, 500 + s);
        if (select_lag_bic(wn, 5) == 0) ++zero_hits;
        Matrix ar = simulate_var1(Matrix::identity(6) * 0.3, Matrix::identity(6), 3200, 700 + s);
        if (select_lag_bic(ar, 5) == 1) ++one_hits;
    }
    CHECK(zero_hits >= int(0.95 * seeds));
    CHECK(one_hits >= int(0.95 * seeds));
}

TEST_CASE("bic with cap 0 returns 0 and is scale invariant") {
    Matrix e = white_noise(400, 3, 9);
    CHECK(select_lag_bic(e, 0) == 0);

    Matrix ar = simulate_var1(Matrix::identity(3) * 0.5, Matrix::identity(3), 400, 10);
    int p1 = select_lag_bic(ar, 4);
    Matrix scaled = ar * 3.0;
    CHECK(select_lag_bic(scaled, 4) == p1);
}

TEST_CASE("stationarity check") {
    VarFit stable;
    stable.p = 1;
    stable.phi = {Matrix::identity(4) * 0.3};
    stable.omega = Matrix::identity(4);
    CHECK(check_stationarity(stable));

    VarFit unit;
    unit.p = 1;
    unit.phi = {Matrix::identity(4)};
    unit.omega = Matrix::identity(4);
    CHECK_FALSE(check_stationarity(unit));

    VarFit none;
    none.p = 0;
    none.omega = Matrix::identity(4);
    CHECK(check_stationarity(none));
}

TEST_CASE("companion matrix layout") {
    VarFit fit;
    fit.p = 2;
    fit.phi = {Matrix::from_rows({{0.5, 0.1}, {0.0, 0.2}}),
               Matrix::from_rows({{0.1, 0.0}, {0.0, 0.1}})};
    fit.omega = Matrix::identity(2);
    Matrix c = companion_matrix(fit);
    CHECK(c.rows() == 4);
    CHECK(c(0, 0) == 0.5);
    CHECK(c(0, 2) == 0.1);
    CHECK(c(2, 0) == 1.0);
    CHECK(c(3, 1) == 1.0);
    CHECK(c(2, 2) == 0.0);
}

TEST_CASE("stationary error variance: known cases") {
    VarFit zero;
    zero.p = 1;
    zero.phi = {Matrix(3, 3)};
    zero.omega = Matrix::from_rows({{2, 0.5, 0}, {0.5, 1, 0.2}, {0, 0.2, 1.5}});
    CHECK(max_abs_diff(gamma_e_infinity(zero), zero.omega) < 1e-14);

    VarFit scalar;
    scalar.p = 1;
    scalar.phi = {Matrix::from_rows({{0.5}})};
    scalar.omega = Matrix::from_rows({{1.0}});
    CHECK(gamma_e_infinity(scalar)(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

    VarFit diag;
    diag.p = 1;
    diag.phi = {Matrix::identity(4) * 0.3};
    diag.omega = Matrix::identity(4);
    Matrix g = gamma_e_infinity(diag);
    CHECK(max_abs_diff(g, Matrix::identity(4) * (1.0 / 0.91)) < 1e-10);
}

TEST_CASE("stationary error variance satisfies the lag-one fixed point") {
    RngStream rng(77);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix raw(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) raw(i, j) = rng.next_gaussian();
        double r = spectral_radius(raw);
        Matrix phi = raw * (0.7 / std::max(r, 1e-6));
        Matrix g0(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) g0(i, j) = rng.next_gaussian();
        Matrix omega = g0.transpose() * g0;
        for (int i = 0; i < 3; ++i) omega(i, i) += 0.2;
        omega.symmetrize();

        VarFit fit;
        fit.p = 1;
        fit.phi = {phi};
        fit.omega = omega;
        Matrix gamma = gamma_e_infinity(fit);
        Matrix rhs = phi * gamma * phi.transpose() + omega;
        double scale = std::max(gamma.max_abs(), 1.0);
        CHECK(max_abs_diff(gamma, rhs) / scale < 1e-8);
    }
}

TEST_CASE("gamma requires stationarity") {
    VarFit unit;
    unit.p = 1;
    unit.phi = {Matrix::identity(2)};
    unit.omega = Matrix::identity(2);
    CHECK_THROWS_AS(gamma_e_infinity(unit), NonStationaryVar);
}
