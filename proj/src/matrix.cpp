#include "mvgls/matrix.hpp"

#include <cmath>

#include "mvgls/errors.hpp"

namespace mvgls {

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(std::size_t(rows) * std::size_t(cols), fill) {
    if (rows < 0 || cols < 0) throw DimensionMismatch("negative matrix dimension");
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    int r = int(rows.size());
    int c = r > 0 ? int(rows.begin()->size()) : 0;
    Matrix m(r, c);
    int i = 0;
    for (const auto& row : rows) {
        if (int(row.size()) != c) throw DimensionMismatch("ragged initializer");
        int j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DimensionMismatch("matrix add");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DimensionMismatch("matrix subtract");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double c) {
    for (double& v : data_) v *= c;
    return *this;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
    Matrix out = *this;
    out += rhs;
    return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
    Matrix out = *this;
    out -= rhs;
    return out;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) throw DimensionMismatch("matrix multiply");
    Matrix out(rows_, rhs.cols_);
    for (int i = 0; i < rows_; ++i) {
        double* oi = out.row(i).data();
        const double* ai = row(i).data();
        for (int l = 0; l < cols_; ++l) {
            double a = ai[l];
            if (a == 0.0) continue;
            const double* bl = rhs.row(l).data();
            for (int j = 0; j < rhs.cols_; ++j) oi[j] += a * bl[j];
        }
    }
    return out;
}

Matrix Matrix::operator*(double c) const {
    Matrix out = *this;
    out *= c;
    return out;
}

Vector Matrix::operator*(const Vector& v) const {
    if (int(v.size()) != cols_) throw DimensionMismatch("matrix-vector multiply");
    Vector out(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) out[i] = dot(row(i), v);
    return out;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Matrix::trace() const {
    double s = 0.0;
    int n = std::min(rows_, cols_);
    for (int i = 0; i < n; ++i) s += (*this)(i, i);
    return s;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Matrix::symmetrize() {
    if (rows_ != cols_) throw DimensionMismatch("symmetrize requires a square matrix");
    for (int i = 0; i < rows_; ++i)
        for (int j = i + 1; j < cols_; ++j) {
            double m = 0.5 * ((*this)(i, j) + (*this)(j, i));
            (*this)(i, j) = m;
            (*this)(j, i) = m;
        }
}

Matrix operator*(double c, const Matrix& a) { return a * c; }

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace mvgls
