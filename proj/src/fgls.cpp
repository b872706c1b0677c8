#include "mvgls/fgls.hpp"

#include <cmath>

#include "mvgls/errors.hpp"
#include "mvgls/linalg.hpp"

namespace mvgls {

namespace {

// Forward-substitute L w = row for every column of the row-major block W.
void forward_solve_rows(const Matrix& l, Matrix& w) {
    const int n = l.rows(), m = w.cols();
    for (int r = 0; r < n; ++r) {
        double* wr = w.row(r).data();
        const double* lr = l.row(r).data();
        for (int q = 0; q < r; ++q) {
            double c = lr[q];
            if (c == 0.0) continue;
            const double* wq = w.row(q).data();
            for (int j = 0; j < m; ++j) wr[j] -= c * wq[j];
        }
        double inv = 1.0 / lr[r];
        for (int j = 0; j < m; ++j) wr[j] *= inv;
    }
}

void forward_solve_vec(const Matrix& l, Vector& y) {
    const int n = l.rows();
    for (int r = 0; r < n; ++r) {
        double s = y[r];
        const double* lr = l.row(r).data();
        for (int q = 0; q < r; ++q) s -= lr[q] * y[q];
        y[r] = s / lr[r];
    }
}

// G += W'W (upper triangle), b += W'y.
void accumulate(const Matrix& w, const Vector& y, Matrix& g, Vector& b) {
    const int n = w.rows(), m = w.cols();
    for (int r = 0; r < n; ++r) {
        const double* wr = w.row(r).data();
        double yr = y[r];
        for (int i = 0; i < m; ++i) {
            double wi = wr[i];
            if (wi == 0.0) continue;
            double* gi = g.row(i).data();
            for (int j = i; j < m; ++j) gi[j] += wi * wr[j];
            b[i] += wi * yr;
        }
    }
}

void mirror_upper(Matrix& g) {
    for (int i = 0; i < g.rows(); ++i)
        for (int j = i + 1; j < g.cols(); ++j) g(j, i) = g(i, j);
}

GlsFit solve_gls(GlsKind kind, Matrix gram, const Vector& rhs, int effective_T,
                 const VarFit& fit, int n, int k) {
    mirror_upper(gram);
    Vector kappa;
    try {
        kappa = cholesky(gram).solve(rhs);
    } catch (const NotPositiveDefinite&) {
        throw SingularDesign("fgls: weighted Gram matrix not positive definite");
    }
    GlsFit out;
    out.kind = kind;
    out.alpha_hat.assign(kappa.begin(), kappa.begin() + n);
    out.kappa_hat = std::move(kappa);
    out.m_hat = gram * (1.0 / double(effective_T));
    out.effective_T = effective_T;
    out.var_fit = fit;
    out.N = n;
    out.k = k;
    return out;
}

}  // namespace

QdModel::QdModel(const StackedModel& model, const VarFit& fit, bool need_qd1)
    : model_(model), fit_(fit), p_(fit.p) {
    const PanelData& panel = model_.panel();
    const int T = panel.T(), n = panel.N();
    if (fit_.N() != n) throw DimensionMismatch("quasi_difference: fit and panel dimension differ");
    if (p_ >= T) throw InsufficientSample("quasi_difference: lag order exceeds sample");

    c_qd2_ = Matrix::identity(n);
    for (const Matrix& phi : fit_.phi) c_qd2_ -= phi;

    yqd_ = panel.y_matrix();
    // lag-differenced rows; lags always read from the untransformed panel
    for (int t = T - 1; t >= p_; --t) {
        double* yr = yqd_.row(t).data();
        for (int j = 0; j < p_; ++j) {
            const Matrix& phi = fit_.phi[j];
            const double* lag = panel.y_matrix().row(t - 1 - j).data();
            for (int i = 0; i < n; ++i) yr[i] -= dot(phi.row(i), {lag, std::size_t(n)});
        }
    }

    if (p_ >= 1 && need_qd1) {
        if (!check_stationarity(fit_))
            throw NonStationaryVar("quasi_difference: fitted VAR is not stationary");
        gamma_ = gamma_e_infinity(fit_);
        Matrix omega_half = psd_sqrt(fit_.omega, false);
        Matrix gamma_inv_half;
        try {
            gamma_inv_half = psd_sqrt(gamma_, true);
        } catch (const SingularMatrix&) {
            throw NonStationaryVar("quasi_difference: stationary error variance is singular");
        }
        c_qd1_ = omega_half * gamma_inv_half;
        Vector tmp(n);
        for (int t = 0; t < p_; ++t) {
            const double* src = panel.y_matrix().row(t).data();
            for (int i = 0; i < n; ++i) tmp[i] = dot(c_qd1_.row(i), {src, std::size_t(n)});
            double* dst = yqd_.row(t).data();
            for (int i = 0; i < n; ++i) dst[i] = tmp[i];
        }
        has_qd1_ = true;
    } else {
        has_qd1_ = (p_ == 0);
    }
}

QdModel quasi_difference(const StackedModel& model, const VarFit& fit) {
    return QdModel(model, fit, true);
}

Matrix QdModel::zqd_block(int t) const {
    Matrix z(model_.panel().N(), model_.dim());
    zqd_block_into(t, z);
    return z;
}

void QdModel::zqd_block_into(int t, Matrix& out) const {
    const PanelData& panel = model_.panel();
    const int n = panel.N(), k = panel.k(), m = model_.dim();
    if (out.rows() != n || out.cols() != m) out = Matrix(n, m);

    if (t < p_) {
        if (!has_qd1_) throw Error("QdModel: first-p-rows transform unavailable");
        // [C1, C1 X_t]
        for (int i = 0; i < n; ++i) {
            double* zi = out.row(i).data();
            for (int c = 0; c < n; ++c) zi[c] = c_qd1_(i, c);
            for (int c = n; c < m; ++c) zi[c] = 0.0;
            for (int mm = 0; mm < n; ++mm) {
                double coef = c_qd1_(i, mm);
                if (coef == 0.0) continue;
                auto x = panel.x(t, mm);
                for (int a = 0; a < k; ++a) zi[n + mm * k + a] += coef * x[a];
            }
        }
        return;
    }

    // [C2, X_t - sum Phi_j X_{t-j}]
    for (int i = 0; i < n; ++i) {
        double* zi = out.row(i).data();
        for (int c = 0; c < n; ++c) zi[c] = c_qd2_(i, c);
        for (int c = n; c < m; ++c) zi[c] = 0.0;
        auto xi = panel.x(t, i);
        for (int a = 0; a < k; ++a) zi[n + i * k + a] = xi[a];
    }
    for (int j = 0; j < p_; ++j) {
        const Matrix& phi = fit_.phi[j];
        for (int i = 0; i < n; ++i) {
            double* zi = out.row(i).data();
            for (int mm = 0; mm < n; ++mm) {
                double coef = phi(i, mm);
                if (coef == 0.0) continue;
                auto x = panel.x(t - 1 - j, mm);
                for (int a = 0; a < k; ++a) zi[n + mm * k + a] -= coef * x[a];
            }
        }
    }
}

FglsPair fgls_both(const StackedModel& model, const VarFit& fit) {
    const PanelData& panel = model.panel();
    const int T = panel.T(), n = panel.N(), k = panel.k(), m = model.dim();
    const int p = fit.p;
    if (T - p <= 0) throw InsufficientSample("fgls: lag order exhausts the sample");

    FglsPair pair;
    std::optional<QdModel> qd;
    try {
        qd.emplace(QdModel(model, fit, true));
    } catch (const NonStationaryVar& e) {
        pair.nonstationary = true;
        pair.pw_error = e.what();
        qd.emplace(QdModel(model, fit, false));
    }

    SpdFactor omega_chol = [&] {
        try {
            return cholesky(fit.omega);
        } catch (const NotPositiveDefinite&) {
            throw SingularDesign("fgls: innovation covariance not positive definite");
        }
    }();
    const Matrix& l = omega_chol.lower();

    Matrix g2(m, m);
    Vector b2(m, 0.0);
    Matrix w(n, m);
    Vector yw(n);
    for (int t = p; t < T; ++t) {
        qd->zqd_block_into(t, w);
        auto yr = qd->yqd().row(t);
        yw.assign(yr.begin(), yr.end());
        forward_solve_rows(l, w);
        forward_solve_vec(l, yw);
        accumulate(w, yw, g2, b2);
    }

    try {
        pair.co = solve_gls(GlsKind::CochraneOrcutt, g2, b2, T - p, fit, n, k);
    } catch (const SingularDesign& e) {
        pair.co_error = e.what();
    }

    if (p == 0) {
        // same accumulator, same solve: bitwise-identical estimates
        if (pair.co) {
            pair.pw = pair.co;
            pair.pw->kind = GlsKind::PraisWinsten;
        } else {
            pair.pw_error = pair.co_error;
        }
        return pair;
    }
    if (pair.nonstationary) return pair;

    for (int t = 0; t < p; ++t) {
        qd->zqd_block_into(t, w);
        auto yr = qd->yqd().row(t);
        yw.assign(yr.begin(), yr.end());
        forward_solve_rows(l, w);
        forward_solve_vec(l, yw);
        accumulate(w, yw, g2, b2);  // g2 now holds the full-sample sums
    }
    try {
        pair.pw = solve_gls(GlsKind::PraisWinsten, g2, b2, T, fit, n, k);
    } catch (const SingularDesign& e) {
        pair.pw_error = e.what();
    }
    return pair;
}

GlsFit pw_fgls(const StackedModel& model, const VarFit& fit) {
    FglsPair pair = fgls_both(model, fit);
    if (pair.pw) return std::move(*pair.pw);
    if (pair.nonstationary) throw NonStationaryVar(pair.pw_error);
    throw SingularDesign(pair.pw_error);
}

GlsFit co_fgls(const StackedModel& model, const VarFit& fit) {
    FglsPair pair = fgls_both(model, fit);
    if (pair.co) return std::move(*pair.co);
    throw SingularDesign(pair.co_error);
}

}  // namespace mvgls
