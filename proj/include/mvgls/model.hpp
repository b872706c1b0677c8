#pragma once

#include <span>
#include <vector>

#include "mvgls/matrix.hpp"

namespace mvgls {

/// Raw observations: N equations over T periods, each with k regressors.
/// Regressors are stored as a dense T x N x k tensor; common_factors flags
/// panels whose regressor vector is identical across equations at every t.
class PanelData {
public:
    PanelData(int T, int N, int k);

    /// Common-factor panel: y is T x N, factors is T x k, every equation sees
    /// the same factor row.
    static PanelData from_common_factors(const Matrix& y, const Matrix& factors);

    /// General panel from per-equation regressor blocks. x_blocks[i] is T x k
    /// for equation i. Throws DimensionMismatch on ragged input.
    static PanelData from_blocks(const Matrix& y, const std::vector<Matrix>& x_blocks);

    int T() const { return T_; }
    int N() const { return N_; }
    int k() const { return k_; }
    bool common_factors() const { return common_factors_; }
    void set_common_factors(bool v) { common_factors_ = v; }

    double y(int t, int i) const { return y_(t, i); }
    double& y(int t, int i) { return y_(t, i); }
    const Matrix& y_matrix() const { return y_; }

    std::span<const double> x(int t, int i) const {
        return {x_.data() + (std::size_t(t) * N_ + i) * k_, std::size_t(k_)};
    }
    std::span<double> x(int t, int i) {
        return {x_.data() + (std::size_t(t) * N_ + i) * k_, std::size_t(k_)};
    }

    /// Checks the estimability margin T > N*k + N + 5, finiteness, and
    /// factor consistency when common_factors is set.
    void validate() const;

private:
    int T_, N_, k_;
    Matrix y_;               // T x N
    std::vector<double> x_;  // T * N * k
    bool common_factors_ = false;
};

/// Stacked multivariate regression. Each period contributes the N x (N+K)
/// block Z_t = [I_N, X_t] with X_t block-diagonal in the per-equation
/// regressors; kappa is laid out [alpha_1..alpha_N, beta_1'..beta_N']'.
/// Blocks are built on demand; the full TN x (N+K) design is never formed.
class StackedModel {
public:
    explicit StackedModel(PanelData panel);

    const PanelData& panel() const { return panel_; }
    int K() const { return panel_.N() * panel_.k(); }
    int dim() const { return panel_.N() + K(); }

    Matrix z_block(int t) const;
    void z_block_into(int t, Matrix& out) const;

private:
    PanelData panel_;
};

StackedModel build_stacked(PanelData panel);

struct OlsFit {
    Vector kappa_hat;  // N + K
    Matrix residuals;  // T x N
    Matrix m_hat;      // Z'Z / T
    Matrix w_hats;     // T x (N+K), row t = Z_t' e_t
    int T = 0, N = 0, k = 0;

    Vector alpha_hat() const { return Vector(kappa_hat.begin(), kappa_hat.begin() + N); }
};

/// Stacked OLS. The block-diagonal design makes this per-equation OLS with an
/// intercept; the Gram accumulation runs sequentially over t (fixed order, so
/// results are reproducible bit for bit).
OlsFit ols_fit(const StackedModel& model);

}  // namespace mvgls
