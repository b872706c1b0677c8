#include "mvgls/linalg.hpp"

#include <algorithm>
#include <complex>
#include <vector>
#include <cmath>
#include <cstdint>

#include "mvgls/errors.hpp"

namespace mvgls {

namespace {

void require_square(const Matrix& a, const char* what) {
    if (a.rows() != a.cols()) throw DimensionMismatch(what);
}

void require_symmetric(const Matrix& a, const char* what) {
    require_square(a, what);
    double tol = 1e-10 * std::max(a.max_abs(), 1e-300);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = i + 1; j < a.cols(); ++j)
            if (std::fabs(a(i, j) - a(j, i)) > tol) throw DomainError(what);
}

}  // namespace

SpdFactor::SpdFactor(Matrix lower) : L_(std::move(lower)) {
    require_square(L_, "SpdFactor: factor must be square");
}

Vector SpdFactor::solve(const Vector& b) const {
    int n = dim();
    if (int(b.size()) != n) throw DimensionMismatch("SpdFactor::solve size");
    Vector y(b);
    for (int i = 0; i < n; ++i) {
        double s = y[i];
        const double* li = L_.row(i).data();
        for (int j = 0; j < i; ++j) s -= li[j] * y[j];
        y[i] = s / li[i];
    }
    // back substitution with L'
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int j = i + 1; j < n; ++j) s -= L_(j, i) * y[j];
        y[i] = s / L_(i, i);
    }
    return y;
}

Matrix SpdFactor::solve(const Matrix& b) const {
    int n = dim();
    if (b.rows() != n) throw DimensionMismatch("SpdFactor::solve rows");
    Matrix out(n, b.cols());
    Vector col(n);
    for (int c = 0; c < b.cols(); ++c) {
        for (int i = 0; i < n; ++i) col[i] = b(i, c);
        Vector x = solve(col);
        for (int i = 0; i < n; ++i) out(i, c) = x[i];
    }
    return out;
}

Matrix SpdFactor::forward_solve(const Matrix& b) const {
    int n = dim();
    if (b.rows() != n) throw DimensionMismatch("SpdFactor::forward_solve rows");
    Matrix w = b;
    int m = w.cols();
    for (int r = 0; r < n; ++r) {
        double* wr = w.row(r).data();
        const double* lr = L_.row(r).data();
        for (int q = 0; q < r; ++q) {
            double c = lr[q];
            if (c == 0.0) continue;
            const double* wq = w.row(q).data();
            for (int j = 0; j < m; ++j) wr[j] -= c * wq[j];
        }
        double inv = 1.0 / lr[r];
        for (int j = 0; j < m; ++j) wr[j] *= inv;
    }
    return w;
}

Matrix SpdFactor::inverse() const { return solve(Matrix::identity(dim())); }

double SpdFactor::log_det() const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += std::log(L_(i, i));
    return 2.0 * s;
}

SpdFactor cholesky(const Matrix& a) {
    require_symmetric(a, "cholesky: matrix must be square and symmetric");
    int n = a.rows();
    double scale = std::max(a.max_abs(), 1e-300);
    double tol = 1e-12 * scale;
    Matrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double d = a(j, j) - dot(l.row(j).subspan(0, j), l.row(j).subspan(0, j));
        if (!(d > tol)) throw NotPositiveDefinite("cholesky: pivot at or below tolerance");
        double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = a(i, j) - dot(l.row(i).subspan(0, j), l.row(j).subspan(0, j));
            l(i, j) = s / ljj;
        }
    }
    return SpdFactor(std::move(l));
}

SymEigen sym_eigen(const Matrix& a) {
    require_symmetric(a, "sym_eigen: matrix must be square and symmetric");
    int n = a.rows();
    Matrix m = a;
    m.symmetrize();
    Matrix v = Matrix::identity(n);
    double tol = 1e-12 * std::max(m.frobenius_norm(), 1e-300);

    constexpr int kMaxSweeps = 100;
    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
        off = std::sqrt(2.0 * off);
        if (off <= tol) {
            converged = true;
            break;
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = m(p, q);
                if (std::fabs(apq) <= tol / (2.0 * n)) continue;
                double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                double app = m(p, p), aqq = m(q, q);
                m(p, p) = app - t * apq;
                m(q, q) = aqq + t * apq;
                m(p, q) = 0.0;
                m(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        double arp = m(r, p), arq = m(r, q);
                        m(r, p) = c * arp - s * arq;
                        m(p, r) = m(r, p);
                        m(r, q) = s * arp + c * arq;
                        m(q, r) = m(r, q);
                    }
                    double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }
    if (!converged) {
        // final check after the last sweep
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
        if (std::sqrt(2.0 * off) > tol) throw NoConvergence("sym_eigen: Jacobi sweep cap reached");
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) { return m(x, x) > m(y, y); });

    SymEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (int c = 0; c < n; ++c) {
        out.values[c] = m(order[c], order[c]);
        for (int r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
    }
    return out;
}

Matrix psd_sqrt(const Matrix& a, bool inverse) {
    SymEigen e = sym_eigen(a);
    int n = a.rows();
    double scale = 0.0;
    for (double ev : e.values) scale = std::max(scale, std::fabs(ev));
    double min_ev = n > 0 ? e.values.back() : 0.0;
    if (min_ev < -1e-10 * std::max(scale, 1e-300))
        throw NotPositiveDefinite("psd_sqrt: matrix has a significantly negative eigenvalue");
    if (inverse && min_ev <= 1e-12 * scale)
        throw SingularMatrix("psd_sqrt: inverse root of a singular matrix");

    Vector d(n);
    for (int i = 0; i < n; ++i) {
        double ev = std::max(e.values[i], 0.0);
        d[i] = inverse ? 1.0 / std::sqrt(ev) : std::sqrt(ev);
    }
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int l = 0; l < n; ++l) s += e.vectors(i, l) * d[l] * e.vectors(j, l);
            out(i, j) = s;
            out(j, i) = s;
        }
    return out;
}

namespace {

// Reduction to upper Hessenberg form by stabilized elementary similarity
// transformations.
void to_hessenberg(Matrix& a) {
    const int n = a.rows();
    for (int m = 1; m < n - 1; ++m) {
        double x = 0.0;
        int piv = m;
        for (int j = m; j < n; ++j) {
            if (std::fabs(a(j, m - 1)) > std::fabs(x)) {
                x = a(j, m - 1);
                piv = j;
            }
        }
        if (piv != m) {
            for (int j = m - 1; j < n; ++j) std::swap(a(piv, j), a(m, j));
            for (int j = 0; j < n; ++j) std::swap(a(j, piv), a(j, m));
        }
        if (x != 0.0) {
            for (int i = m + 1; i < n; ++i) {
                double y = a(i, m - 1);
                if (y == 0.0) continue;
                y /= x;
                a(i, m - 1) = y;
                for (int j = m; j < n; ++j) a(i, j) -= y * a(m, j);
                for (int j = 0; j < n; ++j) a(j, m) += y * a(j, i);
            }
        }
    }
    for (int i = 2; i < n; ++i)
        for (int j = 0; j <= i - 2; ++j) a(i, j) = 0.0;
}

inline double sign_of(double a, double b) { return b >= 0.0 ? std::fabs(a) : -std::fabs(a); }

// Francis double-shift QR on an upper Hessenberg matrix; returns the largest
// eigenvalue modulus. Classic hqr, eigenvalues only.
double hqr_max_modulus(Matrix& m) {
    const int n = m.rows();
    auto a = [&](int i, int j) -> double& { return m(i - 1, j - 1); };

    double anorm = 0.0;
    for (int i = 1; i <= n; ++i)
        for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::fabs(a(i, j));
    if (anorm == 0.0) return 0.0;

    double best = 0.0;
    int nn = n;
    double t = 0.0;
    while (nn >= 1) {
        int its = 0;
        int l;
        do {
            for (l = nn; l >= 2; --l) {
                double s = std::fabs(a(l - 1, l - 1)) + std::fabs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::fabs(a(l, l - 1)) + s == s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            double x = a(nn, nn);
            if (l == nn) {
                best = std::max(best, std::fabs(x + t));
                --nn;
            } else {
                double y = a(nn - 1, nn - 1);
                double w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    double p = 0.5 * (y - x);
                    double q = p * p + w;
                    double z = std::sqrt(std::fabs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_of(z, p);
                        double r1 = x + z;
                        double r2 = (z != 0.0) ? x - w / z : r1;
                        best = std::max({best, std::fabs(r1), std::fabs(r2)});
                    } else {
                        best = std::max(best, std::hypot(x + p, z));
                    }
                    nn -= 2;
                } else {
                    if (its == 30)
                        throw NoConvergence("spectral_radius: QR iteration limit reached");
                    double p = 0.0, q = 0.0, r = 0.0;
                    if (its == 10 || its == 20) {
                        t += x;
                        for (int i = 1; i <= nn; ++i) a(i, i) -= x;
                        double s = std::fabs(a(nn, nn - 1)) + std::fabs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int mdx;
                    for (mdx = nn - 2; mdx >= l; --mdx) {
                        double z = a(mdx, mdx);
                        double rr = x - z;
                        double ss = y - z;
                        p = (rr * ss - w) / a(mdx + 1, mdx) + a(mdx, mdx + 1);
                        q = a(mdx + 1, mdx + 1) - z - rr - ss;
                        r = a(mdx + 2, mdx + 1);
                        double scale = std::fabs(p) + std::fabs(q) + std::fabs(r);
                        p /= scale;
                        q /= scale;
                        r /= scale;
                        if (mdx == l) break;
                        double u = std::fabs(a(mdx, mdx - 1)) * (std::fabs(q) + std::fabs(r));
                        double v = std::fabs(p) * (std::fabs(a(mdx - 1, mdx - 1)) + std::fabs(z) +
                                                   std::fabs(a(mdx + 1, mdx + 1)));
                        if (u + v == v) break;
                    }
                    for (int i = mdx + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i != mdx + 2) a(i, i - 3) = 0.0;
                    }
                    for (int k = mdx; k <= nn - 1; ++k) {
                        if (k != mdx) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
                            x = std::fabs(p) + std::fabs(q) + std::fabs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
                        if (s == 0.0) continue;
                        if (k == mdx) {
                            if (l != mdx) a(k, k - 1) = -a(k, k - 1);
                        } else {
                            a(k, k - 1) = -s * x;
                        }
                        p += s;
                        x = p / s;
                        double yy = q / s;
                        double zz = r / s;
                        q /= p;
                        r /= p;
                        for (int j = k; j <= nn; ++j) {
                            p = a(k, j) + q * a(k + 1, j);
                            if (k != nn - 1) {
                                p += r * a(k + 2, j);
                                a(k + 2, j) -= p * zz;
                            }
                            a(k + 1, j) -= p * yy;
                            a(k, j) -= p * x;
                        }
                        int mmin = nn < k + 3 ? nn : k + 3;
                        for (int i = l; i <= mmin; ++i) {
                            p = x * a(i, k) + yy * a(i, k + 1);
                            if (k != nn - 1) {
                                p += zz * a(i, k + 2);
                                a(i, k + 2) -= p * r;
                            }
                            a(i, k + 1) -= p * q;
                            a(i, k) -= p;
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
    return best;
}

}  // namespace

double spectral_radius(const Matrix& a) {
    require_square(a, "spectral_radius: matrix must be square");
    if (!a.all_finite()) throw DomainError("spectral_radius: non-finite entries");
    const int n = a.rows();
    if (n == 0) return 0.0;
    const double scale = a.max_abs();
    if (scale == 0.0) return 0.0;
    if (n == 1) return std::fabs(a(0, 0));

    Matrix h = a * (1.0 / scale);
    to_hessenberg(h);
    return scale * hqr_max_modulus(h);
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            double aij = a(i, j);
            if (aij == 0.0) continue;
            for (int p = 0; p < b.rows(); ++p)
                for (int q = 0; q < b.cols(); ++q)
                    out(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return out;
}

Vector vec(const Matrix& a) {
    Vector out(std::size_t(a.rows()) * a.cols());
    for (int j = 0; j < a.cols(); ++j)
        for (int i = 0; i < a.rows(); ++i) out[std::size_t(j) * a.rows() + i] = a(i, j);
    return out;
}

Vector lu_solve(Matrix a, Vector b) {
    require_square(a, "lu_solve: matrix must be square");
    int n = a.rows();
    if (int(b.size()) != n) throw DimensionMismatch("lu_solve: rhs size");
    double tol = 1e-12 * std::max(a.max_abs(), 1e-300);

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;

    for (int c = 0; c < n; ++c) {
        int piv = c;
        double pmax = std::fabs(a(c, c));
        for (int r = c + 1; r < n; ++r) {
            double v = std::fabs(a(r, c));
            if (v > pmax) {
                pmax = v;
                piv = r;
            }
        }
        if (pmax <= tol) throw SingularMatrix("lu_solve: pivot at or below tolerance");
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
            std::swap(b[c], b[piv]);
        }
        double inv = 1.0 / a(c, c);
        for (int r = c + 1; r < n; ++r) {
            double f = a(r, c) * inv;
            if (f == 0.0) continue;
            a(r, c) = 0.0;
            double* ar = a.row(r).data();
            const double* ac = a.row(c).data();
            for (int j = c + 1; j < n; ++j) ar[j] -= f * ac[j];
            b[r] -= f * b[c];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        const double* ar = a.row(r).data();
        for (int j = r + 1; j < n; ++j) s -= ar[j] * b[j];
        b[r] = s / ar[r];
    }
    return b;
}

}  // namespace mvgls
