#pragma once

#include <optional>
#include <string>

#include "mvgls/model.hpp"
#include "mvgls/var_errors.hpp"

namespace mvgls {

class QdModel;
struct FglsPair;
QdModel quasi_difference(const StackedModel& model, const VarFit& fit);
FglsPair fgls_both(const StackedModel& model, const VarFit& fit);

/// Quasi-differenced system. Rows t = 1..p carry the variance-matching
/// rescale C1 = Omega^{1/2} Gamma_e^{-1/2}; rows t > p are lag-differenced
/// with intercept block C2 = I - sum Phi_j. p = 0 leaves the model untouched.
/// Z blocks are built on demand, mirroring StackedModel.
class QdModel {
public:
    int split() const { return p_; }
    bool has_qd1() const { return has_qd1_; }
    const Matrix& yqd() const { return yqd_; }
    const Matrix& c_qd1() const { return c_qd1_; }
    const Matrix& c_qd2() const { return c_qd2_; }
    const Matrix& gamma_e_inf() const { return gamma_; }
    const StackedModel& model() const { return model_; }
    const VarFit& var_fit() const { return fit_; }

    Matrix zqd_block(int t) const;
    void zqd_block_into(int t, Matrix& out) const;

private:
    friend QdModel quasi_difference(const StackedModel& model, const VarFit& fit);
    friend FglsPair fgls_both(const StackedModel& model, const VarFit& fit);
    QdModel(const StackedModel& model, const VarFit& fit, bool need_qd1);

    StackedModel model_;
    VarFit fit_;
    int p_ = 0;
    bool has_qd1_ = false;
    Matrix yqd_;    // T x N
    Matrix c_qd1_;  // N x N, only when has_qd1
    Matrix c_qd2_;  // N x N
    Matrix gamma_;  // N x N, only when has_qd1 and p >= 1
};

/// Full quasi-differencing. Requires a stationary fit when p >= 1; throws
/// NonStationaryVar otherwise because the first-p-rows transform needs the
/// stationary error variance.
QdModel quasi_difference(const StackedModel& model, const VarFit& fit);

enum class GlsKind { PraisWinsten, CochraneOrcutt };

struct GlsFit {
    GlsKind kind = GlsKind::PraisWinsten;
    Vector kappa_hat;    // N + K
    Vector alpha_hat;    // first N entries of kappa_hat
    Matrix m_hat;        // sum Z'^{QD} Omega^{-1} Z^{QD} / effective_T
    int effective_T = 0; // T for PW, T - p for CO
    VarFit var_fit;
    int N = 0, k = 0;
};

/// Both estimators from one pass over the quasi-differenced sample. The
/// lag-differenced rows t > p are accumulated once and shared; Prais-Winsten
/// adds the rescaled first p rows. With p = 0 the two results come from the
/// same accumulator and solve, so they match bit for bit.
struct FglsPair {
    std::optional<GlsFit> pw;
    std::optional<GlsFit> co;
    bool nonstationary = false;  // set when the first-p-rows transform was unavailable
    std::string pw_error;
    std::string co_error;
};

FglsPair fgls_both(const StackedModel& model, const VarFit& fit);

GlsFit pw_fgls(const StackedModel& model, const VarFit& fit);
GlsFit co_fgls(const StackedModel& model, const VarFit& fit);

}  // namespace mvgls
