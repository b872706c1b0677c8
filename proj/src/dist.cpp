#include "mvgls/dist.hpp"

#include <cmath>

#include "mvgls/errors.hpp"

namespace mvgls {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxTerms = 1000;

// Regularized lower incomplete gamma P(a, x), series expansion (for x < a + 1).
double gamma_p_series(double a, double x) {
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 1; n < kMaxTerms; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(a * std::log(x) - x - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x), Lentz continued fraction
// (for x >= a + 1).
double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxTerms; ++i) {
        double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h * std::exp(a * std::log(x) - x - std::lgamma(a));
}

// Continued fraction for the regularized incomplete beta function.
double betacf(double a, double b, double x) {
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxTerms; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double reg_inc_beta(double x, double a, double b) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

RefDist RefDist::chi2(int df) {
    if (df < 1) throw DomainError("chi2: df must be >= 1");
    return RefDist{Kind::Chi2, df, 0};
}

RefDist RefDist::f(int d1, int d2) {
    if (d1 < 1 || d2 < 1) throw DomainError("F: degrees of freedom must be >= 1");
    return RefDist{Kind::F, d1, d2};
}

double RefDist::sf(double x) const {
    return kind == Kind::Chi2 ? chi2_sf(x, df1) : f_sf(x, df1, df2);
}

double chi2_sf(double x, int df) {
    if (df < 1) throw DomainError("chi2_sf: df must be >= 1");
    if (x < 0.0) throw DomainError("chi2_sf: x must be >= 0");
    if (x == 0.0) return 1.0;
    double a = 0.5 * df, xx = 0.5 * x;
    if (xx < a + 1.0) return 1.0 - gamma_p_series(a, xx);
    return gamma_q_cf(a, xx);
}

double f_sf(double x, int d1, int d2) {
    if (d1 < 1 || d2 < 1) throw DomainError("f_sf: degrees of freedom must be >= 1");
    if (x < 0.0) throw DomainError("f_sf: x must be >= 0");
    if (x == 0.0) return 1.0;
    double u = double(d2) / (double(d2) + double(d1) * x);
    return reg_inc_beta(u, 0.5 * d2, 0.5 * d1);
}

double quantile(const RefDist& dist, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must be in (0, 1)");
    double target = 1.0 - p;  // sf at the quantile
    double lo = 0.0;
    double hi = 1.0;
    int expand = 0;
    while (dist.sf(hi) > target) {
        hi *= 2.0;
        if (++expand > 400) throw NoConvergence("quantile: bracket expansion failed");
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (dist.sf(mid) > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace mvgls
