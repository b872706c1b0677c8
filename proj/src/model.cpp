#include "mvgls/model.hpp"

#include <cmath>

#include "mvgls/errors.hpp"
#include "mvgls/linalg.hpp"

namespace mvgls {

PanelData::PanelData(int T, int N, int k)
    : T_(T), N_(N), k_(k), y_(T, N), x_(std::size_t(T) * N * k, 0.0) {
    if (T < 1 || N < 1 || k < 1) throw DimensionMismatch("PanelData: dimensions must be positive");
}

PanelData PanelData::from_common_factors(const Matrix& y, const Matrix& factors) {
    if (y.rows() != factors.rows()) throw DimensionMismatch("PanelData: y and factor row counts differ");
    PanelData p(y.rows(), y.cols(), factors.cols());
    p.y_ = y;
    for (int t = 0; t < p.T_; ++t)
        for (int i = 0; i < p.N_; ++i)
            for (int a = 0; a < p.k_; ++a) p.x(t, i)[a] = factors(t, a);
    p.common_factors_ = true;
    return p;
}

PanelData PanelData::from_blocks(const Matrix& y, const std::vector<Matrix>& x_blocks) {
    if (int(x_blocks.size()) != y.cols()) throw DimensionMismatch("PanelData: one regressor block per equation");
    if (x_blocks.empty()) throw DimensionMismatch("PanelData: no equations");
    int k = x_blocks[0].cols();
    for (const Matrix& b : x_blocks)
        if (b.rows() != y.rows() || b.cols() != k) throw DimensionMismatch("PanelData: ragged regressor blocks");
    PanelData p(y.rows(), y.cols(), k);
    p.y_ = y;
    for (int t = 0; t < p.T_; ++t)
        for (int i = 0; i < p.N_; ++i)
            for (int a = 0; a < k; ++a) p.x(t, i)[a] = x_blocks[i](t, a);
    return p;
}

void PanelData::validate() const {
    if (T_ <= N_ * k_ + N_ + 5) throw InsufficientSample("PanelData: T must exceed N*k + N + 5");
    if (!y_.all_finite()) throw DomainError("PanelData: non-finite observation");
    for (double v : x_)
        if (!std::isfinite(v)) throw DomainError("PanelData: non-finite regressor");
    if (common_factors_) {
        for (int t = 0; t < T_; ++t) {
            auto x0 = x(t, 0);
            for (int i = 1; i < N_; ++i) {
                auto xi = x(t, i);
                for (int a = 0; a < k_; ++a)
                    if (xi[a] != x0[a]) throw DomainError("PanelData: common_factors set but regressors differ across equations");
            }
        }
    }
}

StackedModel::StackedModel(PanelData panel) : panel_(std::move(panel)) { panel_.validate(); }

Matrix StackedModel::z_block(int t) const {
    Matrix z(panel_.N(), dim());
    z_block_into(t, z);
    return z;
}

void StackedModel::z_block_into(int t, Matrix& out) const {
    const int n = panel_.N(), k = panel_.k();
    if (out.rows() != n || out.cols() != dim()) out = Matrix(n, dim());
    for (double& v : out.row(0)) v = 0.0;
    for (int i = 1; i < n; ++i)
        for (double& v : out.row(i)) v = 0.0;
    for (int i = 0; i < n; ++i) {
        out(i, i) = 1.0;
        auto xi = panel_.x(t, i);
        for (int a = 0; a < k; ++a) out(i, n + i * k + a) = xi[a];
    }
}

StackedModel build_stacked(PanelData panel) { return StackedModel(std::move(panel)); }

OlsFit ols_fit(const StackedModel& model) {
    const PanelData& p = model.panel();
    const int T = p.T(), N = p.N(), k = p.k();
    const int K = N * k, M = N + K;

    OlsFit fit;
    fit.T = T;
    fit.N = N;
    fit.k = k;
    fit.kappa_hat.assign(M, 0.0);
    fit.residuals = Matrix(T, N);
    fit.m_hat = Matrix(M, M);
    fit.w_hats = Matrix(T, M);

    Matrix gram(k + 1, k + 1);
    Vector rhs(k + 1), coef;
    for (int i = 0; i < N; ++i) {
        for (int a = 0; a <= k; ++a) {
            rhs[a] = 0.0;
            for (int c = 0; c <= k; ++c) gram(a, c) = 0.0;
        }
        for (int t = 0; t < T; ++t) {
            auto x = p.x(t, i);
            double y = p.y(t, i);
            gram(0, 0) += 1.0;
            rhs[0] += y;
            for (int a = 0; a < k; ++a) {
                gram(0, a + 1) += x[a];
                rhs[a + 1] += x[a] * y;
                for (int c = a; c < k; ++c) gram(a + 1, c + 1) += x[a] * x[c];
            }
        }
        for (int a = 0; a <= k; ++a)
            for (int c = a + 1; c <= k; ++c) gram(c, a) = gram(a, c);

        try {
            coef = cholesky(gram).solve(rhs);
        } catch (const NotPositiveDefinite&) {
            throw SingularDesign("ols_fit: singular design in equation " + std::to_string(i));
        }
        fit.kappa_hat[i] = coef[0];
        for (int a = 0; a < k; ++a) fit.kappa_hat[N + i * k + a] = coef[a + 1];

        for (int t = 0; t < T; ++t) {
            auto x = p.x(t, i);
            double yhat = coef[0];
            for (int a = 0; a < k; ++a) yhat += coef[a + 1] * x[a];
            fit.residuals(t, i) = p.y(t, i) - yhat;
        }

        // blocks of Z'Z/T for this equation
        fit.m_hat(i, i) = gram(0, 0) / T;
        for (int a = 0; a < k; ++a) {
            double v = gram(0, a + 1) / T;
            fit.m_hat(i, N + i * k + a) = v;
            fit.m_hat(N + i * k + a, i) = v;
            for (int c = 0; c < k; ++c)
                fit.m_hat(N + i * k + a, N + i * k + c) = gram(a + 1, c + 1) / T;
        }
    }

    for (int t = 0; t < T; ++t) {
        double* w = fit.w_hats.row(t).data();
        for (int i = 0; i < N; ++i) {
            double e = fit.residuals(t, i);
            w[i] = e;
            auto x = p.x(t, i);
            for (int a = 0; a < k; ++a) w[N + i * k + a] = x[a] * e;
        }
    }
    return fit;
}

}  // namespace mvgls
