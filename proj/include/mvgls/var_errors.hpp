#pragma once

#include <vector>

#include "mvgls/matrix.hpp"

namespace mvgls {

/// Fitted VAR(p) error model: e_t = Phi_1 e_{t-1} + ... + Phi_p e_{t-p} + u_t.
struct VarFit {
    int p = 0;
    std::vector<Matrix> phi;  // p coefficient matrices, each N x N
    Matrix omega;             // innovation covariance, N x N
    int sample_used = 0;      // T - p

    int N() const { return omega.rows(); }
};

/// OLS fit of a VAR(p) to a T x N residual matrix (no intercept). p = 0 yields
/// no coefficients and the full-sample second-moment matrix as omega.
VarFit fit_var(const Matrix& residuals, int p);

/// Internal sample-window variant: regression runs on t = t_start+1..T
/// (0-based rows t_start..T-1), so candidate lags can share a common sample.
VarFit fit_var_window(const Matrix& residuals, int p, int t_start);

/// BIC lag selection over p in {p_min..p_max}. All candidates are fit on the
/// common sample t = p_max+1..T; ties break toward the smaller lag. The
/// caller refits the winner on its own maximal sample.
int select_lag_bic(const Matrix& residuals, int p_max, int p_min = 0);

/// Np x Np companion matrix [Phi_1..Phi_p; I; 0].
Matrix companion_matrix(const VarFit& fit);

/// True when the companion spectral radius is below 1 - 1e-8. An eigenvalue
/// iteration that fails to settle counts as non-stationary.
bool check_stationarity(const VarFit& fit);

/// Stationary error variance from vec(Gamma) = (I - sum Phi_j (x) Phi_j)^{-1} vec(Omega),
/// solved as an N^2 x N^2 linear system and symmetrized.
Matrix gamma_e_infinity(const VarFit& fit);

}  // namespace mvgls
