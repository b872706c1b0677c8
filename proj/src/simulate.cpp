#include "mvgls/simulate.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "mvgls/errors.hpp"
#include "mvgls/fgls.hpp"
#include "mvgls/linalg.hpp"
#include "mvgls/var_errors.hpp"

namespace mvgls {

const std::array<const char*, kNumTests> kTestNames = {"WaldPW", "WaldCO", "WaldHAR", "GRS",
                                                       "GRS_KS"};

namespace {

// stream purposes per replication
constexpr std::uint64_t kPurposeSigma = 0;
constexpr std::uint64_t kPurposePanel = 1;
constexpr std::uint64_t kFixedOmegaRep = 0xffffffffffffffffULL;

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

}  // namespace

void SimConfig::validate() const {
    if (N < 1 || k < 1 || T < 1) throw DomainError("SimConfig: dimensions must be positive");
    if (reps < 1) throw DomainError("SimConfig: reps must be >= 1");
    if (!(phi_diag >= 0.0 && phi_diag < 1.0)) throw DomainError("SimConfig: phi_diag must be in [0, 1)");
    if (!(std::fabs(x_ar) < 1.0)) throw DomainError("SimConfig: |x_ar| must be < 1");
    if (!(std::fabs(rho) < 1.0)) throw DomainError("SimConfig: |rho| must be < 1");
    if (!(sigma2_lo > 0.0 && sigma2_hi >= sigma2_lo)) throw DomainError("SimConfig: bad variance bounds");
    if (T <= N * k + N + 5) throw DomainError("SimConfig: T must exceed N*k + N + 5");
    if (p_max < 0) throw DomainError("SimConfig: p_max must be >= 0");
    if (min_p < 0 || min_p > p_max) throw DomainError("SimConfig: need 0 <= min_p <= p_max");
    if (force_p && (*force_p < 0 || *force_p > p_max)) throw DomainError("SimConfig: force_p out of range");
    if (levels.empty()) throw DomainError("SimConfig: no significance levels");
    for (double l : levels)
        if (!(l > 0.0 && l < 1.0)) throw DomainError("SimConfig: levels must be in (0, 1)");
}

Matrix gen_omega(int N, double rho, RngStream& rng, double sigma2_lo, double sigma2_hi) {
    if (!(std::fabs(rho) < 1.0)) throw DomainError("gen_omega: |rho| must be < 1");
    Vector sigma(N);
    for (int i = 0; i < N; ++i) sigma[i] = std::sqrt(rng.next_uniform(sigma2_lo, sigma2_hi));
    Matrix omega(N, N);
    for (int i = 0; i < N; ++i) {
        omega(i, i) = sigma[i] * sigma[i];
        for (int j = i + 1; j < N; ++j) {
            omega(i, j) = rho * sigma[i] * sigma[j];
            omega(j, i) = omega(i, j);
        }
    }
    return omega;
}

PanelData gen_panel(const SimConfig& cfg, const Matrix& omega, RngStream& rng) {
    const int T = cfg.T, N = cfg.N, k = cfg.k;
    if (omega.rows() != N || omega.cols() != N) throw DimensionMismatch("gen_panel: omega size");
    SpdFactor chol_omega = cholesky(omega);
    const Matrix& l = chol_omega.lower();

    Vector alpha(N, 0.0);
    if (cfg.alpha_mode == AlphaMode::Alternative) alpha[0] = 0.1;

    PanelData panel(T, N, k);
    panel.set_common_factors(true);
    Vector x(k, 0.0), e(N, 0.0), z(N), u(N);
    for (int t = 0; t < T; ++t) {
        for (int a = 0; a < k; ++a) x[a] = cfg.x_ar * x[a] + rng.next_gaussian();
        for (int i = 0; i < N; ++i) z[i] = rng.next_gaussian();
        for (int i = 0; i < N; ++i) {
            double s = 0.0;
            const double* li = l.row(i).data();
            for (int j = 0; j <= i; ++j) s += li[j] * z[j];
            u[i] = s;
        }
        double xsum = 0.0;
        for (int a = 0; a < k; ++a) xsum += x[a];
        for (int i = 0; i < N; ++i) {
            e[i] = cfg.phi_diag * e[i] + u[i];
            panel.y(t, i) = alpha[i] + xsum + e[i];  // unit slopes
            auto xi = panel.x(t, i);
            for (int a = 0; a < k; ++a) xi[a] = x[a];
        }
    }
    return panel;
}

BatteryOutcome run_battery(const PanelData& panel, std::optional<int> force_p, int p_max,
                           int min_p) {
    BatteryOutcome out;
    StackedModel model = build_stacked(panel);

    OlsFit ols;
    try {
        ols = ols_fit(model);
    } catch (const Error& e) {
        out.singular = true;
        out.note = e.what();
        return out;
    }

    bool var_ok = true;
    VarFit var;
    try {
        out.selected_lag = force_p ? *force_p : select_lag_bic(ols.residuals, p_max, min_p);
        var = fit_var(ols.residuals, out.selected_lag);
    } catch (const Error& e) {
        var_ok = false;
        out.singular = true;
        if (out.note.empty()) out.note = e.what();
    }

    if (var_ok) {
        FglsPair pair;
        bool pair_ok = true;
        try {
            pair = fgls_both(model, var);
        } catch (const Error& e) {
            pair_ok = false;
            out.singular = true;
            if (out.note.empty()) out.note = e.what();
        }
        if (pair_ok) {
            if (pair.nonstationary) out.nonstationary_var = true;
            if (!pair.pw && !pair.nonstationary) out.singular = true;
            if (!pair.co) out.singular = true;
            if (pair.pw) {
                try {
                    out.results[kWaldPW] = wald_alpha(*pair.pw);
                } catch (const Error& e) {
                    out.singular = true;
                    if (out.note.empty()) out.note = e.what();
                }
            } else if (out.note.empty()) {
                out.note = pair.pw_error;
            }
            if (pair.co) {
                try {
                    out.results[kWaldCO] = wald_alpha(*pair.co);
                } catch (const Error& e) {
                    out.singular = true;
                    if (out.note.empty()) out.note = e.what();
                }
            } else if (out.note.empty()) {
                out.note = pair.co_error;
            }
        }
    }

    try {
        out.results[kWaldHAR] = har_wald(ols, panel.T());
    } catch (const Error& e) {
        out.singular = true;
        if (out.note.empty()) out.note = e.what();
    }

    if (panel.common_factors() && panel.T() > panel.N() + panel.k() + 1) {
        try {
            out.results[kGRS] = grs(panel, false);
            out.results[kGRS_KS] = grs(panel, true);
        } catch (const Error& e) {
            out.singular = true;
            if (out.note.empty()) out.note = e.what();
        }
    }
    return out;
}

ReplicationResult run_replication(const SimConfig& cfg, int rep_id, const Matrix* fixed_omega) {
    RngStream sigma_rng = RngStream::derive(cfg.seed, std::uint64_t(rep_id), kPurposeSigma);
    Matrix omega = fixed_omega
                       ? *fixed_omega
                       : gen_omega(cfg.N, cfg.rho, sigma_rng, cfg.sigma2_lo, cfg.sigma2_hi);
    RngStream panel_rng = RngStream::derive(cfg.seed, std::uint64_t(rep_id), kPurposePanel);
    PanelData panel = gen_panel(cfg, omega, panel_rng);

    BatteryOutcome battery = run_battery(panel, cfg.force_p, cfg.p_max, cfg.min_p);
    ReplicationResult out;
    out.selected_lag = battery.selected_lag;
    out.nonstationary_var = battery.nonstationary_var;
    out.singular = battery.singular;
    for (int i = 0; i < kNumTests; ++i) {
        if (battery.results[i]) {
            out.statistic[i] = battery.results[i]->statistic;
            out.p_value[i] = battery.results[i]->p_value;
            out.ok[i] = true;
        }
    }
    return out;
}

RejectionTable run_experiment(const SimConfig& cfg) {
    cfg.validate();

    std::optional<Matrix> fixed_omega;
    if (!cfg.redraw_omega) {
        RngStream rng = RngStream::derive(cfg.seed, kFixedOmegaRep, kPurposeSigma);
        fixed_omega = gen_omega(cfg.N, cfg.rho, rng, cfg.sigma2_lo, cfg.sigma2_hi);
    }

    std::vector<ReplicationResult> results(cfg.reps);
    const int workers = std::min(resolve_workers(cfg.workers), cfg.reps);
    std::atomic<int> next{0};
    auto work = [&] {
        const Matrix* omega = fixed_omega ? &*fixed_omega : nullptr;
        for (;;) {
            int i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= cfg.reps) return;
            results[i] = run_replication(cfg, i, omega);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    RejectionTable table;
    table.levels = cfg.levels;
    table.reps = cfg.reps;
    table.lag_histogram.assign(std::size_t(cfg.p_max) + 1, 0);
    const int n_levels = int(cfg.levels.size());
    std::array<std::vector<int>, kNumTests> rejections;
    for (auto& r : rejections) r.assign(n_levels, 0);

    for (const ReplicationResult& r : results) {  // fixed order: rep 0, 1, ...
        if (r.nonstationary_var) ++table.nonstationary_failures;
        if (r.singular) ++table.singular_failures;
        if (r.selected_lag >= 0 && r.selected_lag < int(table.lag_histogram.size()))
            ++table.lag_histogram[r.selected_lag];
        for (int i = 0; i < kNumTests; ++i) {
            if (!r.ok[i]) continue;
            ++table.successes[i];
            for (int l = 0; l < n_levels; ++l)
                if (r.p_value[i] < cfg.levels[l]) ++rejections[i][l];
        }
    }

    bool any_success = false;
    for (int i = 0; i < kNumTests; ++i) any_success = any_success || table.successes[i] > 0;
    if (!any_success) throw AllReplicationsFailed("run_experiment: every replication failed");

    for (int i = 0; i < kNumTests; ++i) {
        table.rates[i].assign(n_levels, 0.0);
        if (table.successes[i] == 0) continue;
        for (int l = 0; l < n_levels; ++l)
            table.rates[i][l] = double(rejections[i][l]) / double(table.successes[i]);
    }
    return table;
}

}  // namespace mvgls
