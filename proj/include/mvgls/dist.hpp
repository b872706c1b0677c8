#pragma once

namespace mvgls {

/// Reference distribution for a test statistic.
struct RefDist {
    enum class Kind { Chi2, F };
    Kind kind = Kind::Chi2;
    int df1 = 1;
    int df2 = 0;  // unused for chi-squared

    static RefDist chi2(int df);
    static RefDist f(int d1, int d2);

    double sf(double x) const;
    bool operator==(const RefDist&) const = default;
};

/// Upper tail P(X > x) for chi-squared with df degrees of freedom.
double chi2_sf(double x, int df);

/// Upper tail P(X > x) for F(d1, d2).
double f_sf(double x, int d1, int d2);

/// x such that sf(x) = 1 - p, by bracketing bisection.
double quantile(const RefDist& dist, double p);

}  // namespace mvgls
