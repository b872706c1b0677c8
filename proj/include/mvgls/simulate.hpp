#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvgls/hypothesis_tests.hpp"
#include "mvgls/model.hpp"
#include "mvgls/rng.hpp"

namespace mvgls {

enum class AlphaMode { Null, Alternative };

struct SimConfig {
    int N = 6;
    int k = 3;
    int T = 200;
    int reps = 1000;
    double rho = 0.3;       // cross-sectional error correlation
    double phi_diag = 0.0;  // error AR coefficient (0 or 0.3)
    double x_ar = 0.5;      // factor AR coefficient
    AlphaMode alpha_mode = AlphaMode::Null;
    double sigma2_lo = 0.5, sigma2_hi = 1.0;  // per-equation variance law
    std::uint64_t seed = 0;
    int p_max = 5;
    int min_p = 1;               // smallest lag the selection grid considers
    std::optional<int> force_p;  // bypass lag selection when set
    bool redraw_omega = true;    // fresh sigma_i^2 each replication
    std::vector<double> levels = {0.10, 0.05, 0.01};
    int workers = 0;  // 0 = hardware concurrency

    void validate() const;
};

inline constexpr int kNumTests = 5;
enum TestIndex { kWaldPW = 0, kWaldCO = 1, kWaldHAR = 2, kGRS = 3, kGRS_KS = 4 };
extern const std::array<const char*, kNumTests> kTestNames;

struct BatteryOutcome {
    std::array<std::optional<TestResult>, kNumTests> results;
    int selected_lag = 0;
    bool nonstationary_var = false;
    bool singular = false;
    std::string note;  // first failure message, when any
};

/// The full test pipeline on one panel: OLS, lag selection on the OLS
/// residuals, VAR refit, both FGLS intercept Wald tests, the robust Wald, and
/// both GRS variants (the latter only on common-factor panels). Estimator
/// failures are recorded per test, not thrown.
BatteryOutcome run_battery(const PanelData& panel, std::optional<int> force_p, int p_max,
                           int min_p = 0);

struct ReplicationResult {
    std::array<double, kNumTests> statistic{};
    std::array<double, kNumTests> p_value{};
    std::array<bool, kNumTests> ok{};
    int selected_lag = 0;
    bool nonstationary_var = false;
    bool singular = false;
};

struct RejectionTable {
    std::vector<double> levels;
    std::array<std::vector<double>, kNumTests> rates;  // per level; rejections / successes
    std::array<int, kNumTests> successes{};
    int reps = 0;
    int nonstationary_failures = 0;
    int singular_failures = 0;
    std::vector<int> lag_histogram;  // index p -> count of replications selecting p
};

/// Error covariance with variances drawn uniformly from [sigma2_lo, sigma2_hi]
/// and constant correlation rho.
Matrix gen_omega(int N, double rho, RngStream& rng, double sigma2_lo = 0.5,
                 double sigma2_hi = 1.0);

/// One panel draw: AR(1) common factors, VAR(1)-style errors with innovation
/// covariance omega, unit slopes, zero (or one-tenth first) intercepts, and
/// x_0 = e_0 = 0 with no burn-in. Per period the factor innovations are drawn
/// before the error innovations from the single stream.
PanelData gen_panel(const SimConfig& cfg, const Matrix& omega, RngStream& rng);

/// One replication: streams derived from (seed, rep_id), fresh omega unless a
/// fixed one is supplied, then the full test battery.
ReplicationResult run_replication(const SimConfig& cfg, int rep_id,
                                  const Matrix* fixed_omega = nullptr);

/// Runs cfg.reps replications (parallel over a worker pool) and aggregates
/// rejection rates. Per-replication streams plus ordered aggregation make the
/// output identical for any worker count.
RejectionTable run_experiment(const SimConfig& cfg);

}  // namespace mvgls
