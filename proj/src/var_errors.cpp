#include "mvgls/var_errors.hpp"

#include <cmath>
#include <limits>

#include "mvgls/errors.hpp"
#include "mvgls/linalg.hpp"

namespace mvgls {

namespace {

// Second-moment matrix sum_{t in [t0, T)} e_t e_t' / count.
Matrix second_moment(const Matrix& e, int t0) {
    const int T = e.rows(), n = e.cols();
    Matrix s(n, n);
    for (int t = t0; t < T; ++t) {
        const double* r = e.row(t).data();
        for (int i = 0; i < n; ++i) {
            double ri = r[i];
            for (int j = i; j < n; ++j) s(i, j) += ri * r[j];
        }
    }
    double inv = 1.0 / double(T - t0);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            s(i, j) *= inv;
            s(j, i) = s(i, j);
        }
    return s;
}

}  // namespace

VarFit fit_var_window(const Matrix& e, int p, int t_start) {
    const int T = e.rows(), n = e.cols();
    if (p < 0) throw DomainError("fit_var: negative lag order");
    if (t_start < p) throw DomainError("fit_var: window starts before lag depth");
    const int m = T - t_start;  // regression sample size
    if (m <= n * p || m < 1) throw InsufficientSample("fit_var: sample too short for requested lag");

    VarFit fit;
    fit.p = p;
    fit.sample_used = m;
    if (p == 0) {
        fit.omega = second_moment(e, t_start);
        return fit;
    }

    const int np = n * p;
    // G = V V', C = U V' with V_t stacking e_{t-1}..e_{t-p}
    Matrix gram(np, np);
    Matrix cross(n, np);
    Vector v(np);
    for (int t = t_start; t < T; ++t) {
        for (int j = 0; j < p; ++j) {
            const double* lag = e.row(t - 1 - j).data();
            for (int a = 0; a < n; ++a) v[j * n + a] = lag[a];
        }
        for (int i = 0; i < np; ++i) {
            double vi = v[i];
            double* gi = gram.row(i).data();
            for (int j = i; j < np; ++j) gi[j] += vi * v[j];
        }
        const double* cur = e.row(t).data();
        for (int i = 0; i < n; ++i) {
            double ci = cur[i];
            double* cri = cross.row(i).data();
            for (int j = 0; j < np; ++j) cri[j] += ci * v[j];
        }
    }
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j) gram(j, i) = gram(i, j);

    Matrix phi_all(n, np);  // [Phi_1 .. Phi_p], solved row by row
    try {
        SpdFactor f = cholesky(gram);
        Vector row(np);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < np; ++j) row[j] = cross(i, j);
            Vector sol = f.solve(row);
            for (int j = 0; j < np; ++j) phi_all(i, j) = sol[j];
        }
    } catch (const NotPositiveDefinite&) {
        throw SingularGram("fit_var: lag Gram matrix not positive definite");
    }

    fit.phi.reserve(p);
    for (int j = 0; j < p; ++j) {
        Matrix pj(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) pj(a, b) = phi_all(a, j * n + b);
        fit.phi.push_back(std::move(pj));
    }

    // Omega = H H' / m with H the regression innovations
    Matrix omega(n, n);
    Vector h(n);
    for (int t = t_start; t < T; ++t) {
        for (int i = 0; i < n; ++i) h[i] = e(t, i);
        for (int j = 0; j < p; ++j) {
            const Matrix& pj = fit.phi[j];
            const double* lag = e.row(t - 1 - j).data();
            for (int i = 0; i < n; ++i) h[i] -= dot(pj.row(i), {lag, std::size_t(n)});
        }
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) omega(i, j) += h[i] * h[j];
    }
    double inv = 1.0 / double(m);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            omega(i, j) *= inv;
            omega(j, i) = omega(i, j);
        }
    fit.omega = std::move(omega);
    return fit;
}

VarFit fit_var(const Matrix& e, int p) { return fit_var_window(e, p, p); }

int select_lag_bic(const Matrix& e, int p_max, int p_min) {
    const int T = e.rows(), n = e.cols();
    if (p_max < 0) throw DomainError("select_lag_bic: negative lag cap");
    if (p_min < 0 || p_min > p_max) throw DomainError("select_lag_bic: need 0 <= p_min <= p_max");
    if (T - p_max <= n * p_max + 5)
        throw InsufficientSample("select_lag_bic: sample too short for lag cap");
    if (p_max == p_min) return p_min;

    const double t_star = double(T - p_max);
    const double log_t = std::log(t_star);
    int best_p = p_min;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int p = p_min; p <= p_max; ++p) {
        VarFit fit = fit_var_window(e, p, p_max);
        double log_det;
        try {
            log_det = cholesky(fit.omega).log_det();
        } catch (const NotPositiveDefinite&) {
            throw SingularGram("select_lag_bic: candidate innovation covariance is singular");
        }
        double bic = log_det + log_t * double(p) * double(n) * double(n) / t_star;
        if (bic < best_bic) {
            best_bic = bic;
            best_p = p;
        }
    }
    return best_p;
}

Matrix companion_matrix(const VarFit& fit) {
    const int n = fit.N(), p = fit.p;
    Matrix c(n * p, n * p);
    for (int j = 0; j < p; ++j)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) c(a, j * n + b) = fit.phi[j](a, b);
    for (int j = 1; j < p; ++j)
        for (int a = 0; a < n; ++a) c(j * n + a, (j - 1) * n + a) = 1.0;
    return c;
}

bool check_stationarity(const VarFit& fit) {
    if (fit.p == 0) return true;
    double radius;
    try {
        radius = spectral_radius(companion_matrix(fit));
    } catch (const NoConvergence&) {
        return false;  // treat as non-stationary, the conservative call
    }
    return radius < 1.0 - 1e-8;
}

Matrix gamma_e_infinity(const VarFit& fit) {
    if (!check_stationarity(fit)) throw NonStationaryVar("gamma_e_infinity: fitted VAR is not stationary");
    const int n = fit.N();
    if (fit.p == 0) return fit.omega;

    const int n2 = n * n;
    Matrix a = Matrix::identity(n2);
    for (const Matrix& phi : fit.phi) a -= kron(phi, phi);
    Vector g;
    try {
        g = lu_solve(std::move(a), vec(fit.omega));
    } catch (const SingularMatrix&) {
        throw SingularMatrix("gamma_e_infinity: I - sum Phi (x) Phi is singular");
    }
    Matrix gamma(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) gamma(i, j) = g[std::size_t(j) * n + i];
    gamma.symmetrize();
    return gamma;
}

}  // namespace mvgls
