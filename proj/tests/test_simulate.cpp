#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mvgls/errors.hpp"
#include "mvgls/linalg.hpp"
#include "mvgls/simulate.hpp"

using namespace mvgls;

TEST_CASE("gen_omega structure") {
    RngStream rng(1);
    Matrix d = gen_omega(4, 0.0, rng);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) CHECK(d(i, j) == 0.0);

    // degenerate variance law pins sigma at one, exposing the correlation
    RngStream rng2(2);
    Matrix o = gen_omega(2, 0.3, rng2, 1.0, 1.0);
    CHECK(o(0, 0) == doctest::Approx(1.0));
    CHECK(o(1, 1) == doctest::Approx(1.0));
    CHECK(o(0, 1) == doctest::Approx(0.3));
    CHECK(o(1, 0) == doctest::Approx(0.3));

    RngStream rng3(3);
    for (int rep = 0; rep < 20; ++rep) {
        Matrix big = gen_omega(25, 0.3, rng3);
        SymEigen e = sym_eigen(big);
        CHECK(e.values.back() > 0.0);
    }
}

TEST_CASE("gen_panel determinism and shape") {
    SimConfig cfg;
    cfg.N = 4;
    cfg.k = 2;
    cfg.T = 80;
    cfg.phi_diag = 0.3;
    cfg.seed = 5;

    RngStream s1 = RngStream::derive(5, 0, 0);
    Matrix omega = gen_omega(cfg.N, cfg.rho, s1);
    RngStream r1 = RngStream::derive(5, 0, 1);
    PanelData a = gen_panel(cfg, omega, r1);
    RngStream r2 = RngStream::derive(5, 0, 1);
    PanelData b = gen_panel(cfg, omega, r2);
    CHECK(a.y_matrix() == b.y_matrix());
    CHECK(a.common_factors());
    for (int t = 0; t < 80; ++t)
        for (int i = 1; i < 4; ++i)
            for (int aidx = 0; aidx < 2; ++aidx) CHECK(a.x(t, i)[aidx] == a.x(t, 0)[aidx]);
}

TEST_CASE("alternative mode moves only the first intercept") {
    SimConfig null_cfg;
    null_cfg.N = 3;
    null_cfg.k = 1;
    null_cfg.T = 40;
    null_cfg.seed = 7;
    SimConfig alt_cfg = null_cfg;
    alt_cfg.alpha_mode = AlphaMode::Alternative;

    RngStream s(11);
    Matrix omega = gen_omega(3, 0.3, s);
    RngStream r1 = RngStream::derive(7, 0, 1), r2 = RngStream::derive(7, 0, 1);
    PanelData pn = gen_panel(null_cfg, omega, r1);
    PanelData pa = gen_panel(alt_cfg, omega, r2);
    for (int t = 0; t < 40; ++t) {
        CHECK(pa.y(t, 0) - pn.y(t, 0) == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(pa.y(t, 1) == pn.y(t, 1));
        CHECK(pa.y(t, 2) == pn.y(t, 2));
    }
}

TEST_CASE("error autocovariance matches the AR(1) moment") {
    SimConfig cfg;
    cfg.N = 4;
    cfg.k = 3;
    cfg.T = 3200;
    cfg.phi_diag = 0.3;
    std::vector<double> errs;
    for (int s = 0; s < 9; ++s) {
        cfg.seed = 100 + s;
        RngStream sig = RngStream::derive(cfg.seed, 0, 0);
        Matrix omega = gen_omega(cfg.N, cfg.rho, sig);
        RngStream rp = RngStream::derive(cfg.seed, 0, 1);
        PanelData p = gen_panel(cfg, omega, rp);
        // recover errors: e = y - sum of factors (alpha = 0, unit slopes)
        Matrix e(cfg.T, cfg.N);
        for (int t = 0; t < cfg.T; ++t) {
            double xsum = 0.0;
            for (int a = 0; a < cfg.k; ++a) xsum += p.x(t, 0)[a];
            for (int i = 0; i < cfg.N; ++i) e(t, i) = p.y(t, i) - xsum;
        }
        Matrix c1(cfg.N, cfg.N);
        for (int t = 1; t < cfg.T; ++t)
            for (int i = 0; i < cfg.N; ++i)
                for (int j = 0; j < cfg.N; ++j) c1(i, j) += e(t, i) * e(t - 1, j) / (cfg.T - 1);
        Matrix gamma0 = omega * (1.0 / (1.0 - 0.3 * 0.3));
        Matrix expected = gamma0 * 0.3;
        // the lag-one factor shows up in the trace ratio; entrywise noise at
        // this T is of the same order as the off-diagonal entries themselves
        errs.push_back(std::fabs(c1.trace() / gamma0.trace() - 0.3) / 0.3);
        CHECK((c1 - expected).frobenius_norm() / expected.frobenius_norm() < 0.35);
    }
    std::sort(errs.begin(), errs.end());
    CHECK(errs[errs.size() / 2] < 0.1);
}

TEST_CASE("replications are reproducible") {
    SimConfig cfg;
    cfg.N = 3;
    cfg.k = 2;
    cfg.T = 120;
    cfg.phi_diag = 0.3;
    cfg.seed = 99;
    ReplicationResult a = run_replication(cfg, 17);
    ReplicationResult b = run_replication(cfg, 17);
    CHECK(a.statistic == b.statistic);
    CHECK(a.p_value == b.p_value);
    CHECK(a.ok == b.ok);
    CHECK(a.selected_lag == b.selected_lag);

    ReplicationResult c = run_replication(cfg, 18);
    CHECK(a.statistic != c.statistic);
}

TEST_CASE("iid errors mostly select lag zero and then pw equals co") {
    SimConfig cfg;
    cfg.N = 3;
    cfg.k = 2;
    cfg.T = 800;
    cfg.phi_diag = 0.0;
    cfg.min_p = 0;  // admit the no-dynamics model
    cfg.seed = 1234;
    int zero = 0, equal = 0, total = 30;
    for (int r = 0; r < total; ++r) {
        ReplicationResult res = run_replication(cfg, r);
        if (res.selected_lag == 0) {
            ++zero;
            if (res.ok[kWaldPW] && res.ok[kWaldCO] &&
                res.statistic[kWaldPW] == res.statistic[kWaldCO])
                ++equal;
        }
    }
    CHECK(zero >= int(0.8 * total));
    CHECK(equal == zero);
}

TEST_CASE("alternative hypothesis rejects in the majority of replications") {
    SimConfig cfg;
    cfg.N = 6;
    cfg.k = 3;
    cfg.T = 3200;
    cfg.phi_diag = 0.3;
    cfg.alpha_mode = AlphaMode::Alternative;
    cfg.seed = 777;
    int total = 11;
    std::array<int, kNumTests> rejections{};
    for (int r = 0; r < total; ++r) {
        ReplicationResult res = run_replication(cfg, r);
        for (int i = 0; i < kNumTests; ++i)
            if (res.ok[i] && res.p_value[i] < 0.05) ++rejections[i];
    }
    for (int i = 0; i < kNumTests; ++i) CHECK(rejections[i] > total / 2);
}

TEST_CASE("experiment output does not depend on the worker count") {
    SimConfig cfg;
    cfg.N = 3;
    cfg.k = 2;
    cfg.T = 150;
    cfg.phi_diag = 0.3;
    cfg.reps = 24;
    cfg.seed = 4242;

    cfg.workers = 1;
    RejectionTable t1 = run_experiment(cfg);
    cfg.workers = 2;
    RejectionTable t2 = run_experiment(cfg);
    cfg.workers = 5;
    RejectionTable t3 = run_experiment(cfg);
    for (int i = 0; i < kNumTests; ++i) {
        CHECK(t1.rates[i] == t2.rates[i]);
        CHECK(t1.rates[i] == t3.rates[i]);
        CHECK(t1.successes[i] == t2.successes[i]);
    }
    CHECK(t1.lag_histogram == t2.lag_histogram);
    CHECK(t1.nonstationary_failures == t2.nonstationary_failures);
}

TEST_CASE("grs rejection stays in the binomial band under iid errors") {
    SimConfig cfg;
    cfg.N = 6;
    cfg.k = 3;
    cfg.T = 800;
    cfg.phi_diag = 0.0;
    cfg.reps = 400;
    cfg.seed = 31337;
    cfg.workers = 2;
    RejectionTable table = run_experiment(cfg);
    double rate = table.rates[kGRS][1];  // 5% level
    double band = 3.0 * std::sqrt(0.05 * 0.95 / cfg.reps);
    CHECK(rate > 0.05 - band);
    CHECK(rate < 0.05 + band);
    CHECK(table.successes[kGRS] == cfg.reps);
}

TEST_CASE("wald pw size decreases with T at N = 25") {
    SimConfig cfg;
    cfg.N = 25;
    cfg.k = 3;
    cfg.phi_diag = 0.0;
    cfg.reps = 150;
    cfg.seed = 555;
    cfg.workers = 2;
    std::vector<double> rates;
    for (int T : {200, 400, 800, 1600, 3200}) {
        cfg.T = T;
        RejectionTable table = run_experiment(cfg);
        rates.push_back(table.rates[kWaldPW][1]);
    }
    int inversions = 0;
    for (std::size_t i = 1; i < rates.size(); ++i)
        if (rates[i] > rates[i - 1]) ++inversions;
    CHECK(inversions <= 1);
    CHECK(rates.front() > rates.back());
}

TEST_CASE("config validation") {
    SimConfig cfg;
    cfg.reps = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg.reps = 10;
    cfg.phi_diag = 1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg.phi_diag = 0.3;
    cfg.T = 10;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}
